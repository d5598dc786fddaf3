#pragma once

#include <stdexcept>
#include <string>

namespace ilitrack {

// Error taxonomy mirrors the CLI exit codes: config/usage problems,
// I/O failures, and statistical degeneracy. Everything recoverable
// (per-line corpus damage, unresolvable locations) is reported as a
// value, not an exception.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

class StatsError : public std::runtime_error {
 public:
  StatsError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace ilitrack
