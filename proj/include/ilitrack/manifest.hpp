#pragma once

// Run manifest: what ran, over which inputs (by content hash), with
// which counts. Every CLI run writes exactly one. All fields except
// wall-clock timings are deterministic for a fixed input and seed, so
// two runs can be compared by stripping "timings_ms".

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

inline std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash missing file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a64_hex(buf.str());
}

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::vector<std::string> input_paths;
  std::map<std::string, std::string> file_hashes;
  std::uint64_t input_records = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t survivors = 0;
  std::vector<std::pair<std::string, std::uint64_t>> stage_drops;  // pipeline order
  std::uint64_t out_of_season = 0;
  std::map<std::string, double> timings_ms;  // informational only
  std::vector<std::string> output_paths;

  // Every input record must be accounted for exactly once.
  bool conserves() const {
    std::uint64_t dropped = 0;
    for (const auto& [stage, count] : stage_drops) dropped += count;
    return input_records == survivors + dropped + parse_errors + out_of_season;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    if (!config_path.empty()) {
      j["config_path"] = config_path;
      j["config_hash"] = config_hash;
    }
    j["input_paths"] = input_paths;
    j["file_hashes"] = file_hashes;
    j["input_records"] = input_records;
    j["parse_errors"] = parse_errors;
    j["survivors"] = survivors;
    nlohmann::json drops = nlohmann::json::array();
    for (const auto& [stage, count] : stage_drops)
      drops.push_back({{"stage", stage}, {"dropped", count}});
    j["stage_drops"] = drops;
    j["out_of_season"] = out_of_season;
    j["timings_ms"] = timings_ms;
    j["output_paths"] = output_paths;
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + path);
    out << to_json().dump(2) << '\n';
  }
};

}  // namespace ilitrack
