#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <zlib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilitrack/corpus.hpp"
#include "ilitrack/stats.hpp"

using namespace ilitrack;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ILITRACK_CLI_PATH;
const std::string kData = ILITRACK_DATA_DIR;

struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = "'" + kCli + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  int status = pclose(pipe);
  CmdResult r;
  r.out = std::move(out);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

const fs::path kDir = "/tmp/ilitrack_cli_fixtures";

struct DirGuard {
  DirGuard() {
    fs::remove_all(kDir);
    fs::create_directories(kDir);
  }
  ~DirGuard() { fs::remove_all(kDir); }
};

std::int64_t at_day(const char* date, int hour) {
  return std::chrono::duration_cast<std::chrono::seconds>(
             parse_date(date)->time_since_epoch())
             .count() +
         hour * 3600;
}

std::string tweet_line(const std::string& id, std::int64_t when, const std::string& text,
                       const std::string& location) {
  Tweet t;
  t.id = id;
  t.created_at = when;
  t.text = text;
  t.user_id = "u" + id;
  t.user_location = location;
  return write_record(t);
}

// Twelve records: six distinct outcomes, one malformed line, one
// record before the season opens.
std::string fixture_body() {
  std::string s;
  s += tweet_line("1", at_day("2009-08-30", 10),
                  "Down with a flu. Sore throat, cough and temperature.", "NY, USA") + "\n";
  s += tweet_line("2", at_day("2009-08-31", 11), "don't have a cough or flu", "NY, USA") + "\n";
  s += tweet_line("3", at_day("2009-09-01", 12), "got flu and cough http://t.co/x", "NY, USA") + "\n";
  s += tweet_line("4", at_day("2009-09-02", 13), "hahaha flu cough so funny", "NY, USA") + "\n";
  s += tweet_line("5", at_day("2009-09-03", 14), "got flu and cough", "the moon") + "\n";
  s += tweet_line("6", at_day("2009-09-04", 15), "lovely weather today #sunshine", "NY, USA") + "\n";
  s += "{this is not json\n";
  s += tweet_line("7", at_day("2009-08-29", 9), "flu and cough before the season", "NY, USA") + "\n";
  s += tweet_line("8", at_day("2009-09-06", 10), "caught the flu, cough all night", "Boston, MA") + "\n";
  s += tweet_line("9", at_day("2009-09-07", 11), "sore throat and flu again", "NYC") + "\n";
  s += tweet_line("10", at_day("2009-09-08", 12), "got flu and cough, feeling better ;)", "NY, USA") + "\n";
  s += tweet_line("11", at_day("2009-09-09", 13), "nothing medical here", "NY, USA") + "\n";
  return s;
}

std::string write_fixture(const std::string& name, const std::string& body) {
  fs::path p = kDir / name;
  std::ofstream out(p, std::ios::binary);
  out << body;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("usage errors and help use the documented exit codes") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("frobnicate").code == 1);
  CHECK(run_cli("stats").code == 1);  // missing required --corpus
  CHECK(run_cli("stats --corpus x --no-such-flag").code == 1);
  auto help = run_cli("--help");
  for (const char* sub : {"stats", "filter", "correlate", "simulate", "report"})
    CHECK(help.out.find(sub) != std::string::npos);
}

TEST_CASE("missing input files exit with the io code") {
  DirGuard guard;
  CHECK(run_cli("stats --corpus /nonexistent/corpus.jsonl").code == 2);
  auto cfg = kData + "/configs/best_combination.json";
  CHECK(run_cli("filter --corpus /nonexistent/c.jsonl --config " + cfg + " --output " +
                (kDir / "out.jsonl").string())
            .code == 2);
  auto corpus = write_fixture("tiny.jsonl", fixture_body());
  CHECK(run_cli("filter --corpus " + corpus + " --config /nonexistent/cfg.json --output " +
                (kDir / "out.jsonl").string())
            .code == 2);
}

TEST_CASE("config errors exit with the config code") {
  DirGuard guard;
  auto corpus = write_fixture("tiny.jsonl", fixture_body());
  auto bad = write_fixture("bad.json", "{\"keyword_method\": \"tfidf\"}");
  CHECK(run_cli("filter --corpus " + corpus + " --config " + bad + " --output " +
                (kDir / "out.jsonl").string())
            .code == 1);
  // bad season start is config-shaped, not io-shaped
  auto good_cfg = kData + "/configs/best_combination.json";
  CHECK(run_cli("filter --corpus " + corpus + " --config " + good_cfg + " --output " +
                (kDir / "out.jsonl").string() + " --season-start 2009-08-31")
            .code == 1);
}

TEST_CASE("stats reports the fixture in both formats") {
  DirGuard guard;
  auto corpus = write_fixture("tiny.jsonl", fixture_body());
  auto kv = run_cli("stats --corpus " + corpus);
  REQUIRE(kv.code == 0);
  CHECK(kv.out.find("total_tweets=11\n") != std::string::npos);
  CHECK(kv.out.find("parse_errors=1\n") != std::string::npos);
  CHECK(kv.out.find("url_tweets=1\n") != std::string::npos);
  CHECK(kv.out.find("hashtag_tokens_total=1\n") != std::string::npos);
  CHECK(kv.out.find("hashtag_tokens_unique=1\n") != std::string::npos);
  CHECK(kv.out.find("unique_users=11\n") != std::string::npos);

  auto csv = run_cli("stats --corpus " + corpus + " --csv");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.find("metric,value\n") == 0);
  CHECK(csv.out.find("total_tweets,11\n") != std::string::npos);
}

TEST_CASE("gzip input produces identical stats") {
  DirGuard guard;
  auto body = fixture_body();
  auto plain = write_fixture("plain.jsonl", body);
  fs::path gzpath = kDir / "packed.jsonl.gz";
  gzFile gz = gzopen(gzpath.c_str(), "wb");
  REQUIRE(gz != nullptr);
  REQUIRE(gzwrite(gz, body.data(), static_cast<unsigned>(body.size())) ==
          static_cast<int>(body.size()));
  gzclose(gz);

  auto a = run_cli("stats --corpus " + plain);
  auto b = run_cli("stats --corpus " + gzpath.string() + " --gz");
  auto c = run_cli("stats --corpus " + gzpath.string());  // flag is optional
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(b.out == c.out);
}

TEST_CASE("filter writes survivors verbatim with a conserving manifest") {
  DirGuard guard;
  auto corpus = write_fixture("tiny.jsonl", fixture_body());
  auto out = (kDir / "kept.jsonl").string();
  auto cfg = kData + "/configs/best_combination.json";
  auto r = run_cli("filter --corpus " + corpus + " --config " + cfg + " --output " + out +
                   " --series-out " + (kDir / "series.csv").string());
  REQUIRE(r.code == 0);

  // survivors are the original input lines, in input order
  std::ifstream kept(out);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(kept, line)) {
    auto j = nlohmann::json::parse(line);
    ids.push_back(j["id"].get<std::string>());
  }
  CHECK(ids == std::vector<std::string>{"1", "8", "9"});

  // 12 input lines: 11 records plus one unparseable
  auto manifest = nlohmann::json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["command"] == "filter");
  CHECK(manifest["input_records"] == 12);
  CHECK(manifest["parse_errors"] == 1);
  CHECK(manifest["survivors"] == 3);
  CHECK(manifest["out_of_season"] == 1);
  std::uint64_t dropped = 0;
  std::map<std::string, std::uint64_t> by_stage;
  for (const auto& d : manifest["stage_drops"]) {
    dropped += d["dropped"].get<std::uint64_t>();
    by_stage[d["stage"].get<std::string>()] = d["dropped"].get<std::uint64_t>();
  }
  CHECK(manifest["input_records"].get<std::uint64_t>() ==
        manifest["survivors"].get<std::uint64_t>() + dropped +
            manifest["parse_errors"].get<std::uint64_t>() +
            manifest["out_of_season"].get<std::uint64_t>());
  CHECK(by_stage["keyword_syndrome_flu"] == 2);
  CHECK(by_stage["url"] == 1);
  CHECK(by_stage["negation"] == 1);
  CHECK(by_stage["humor"] == 1);
  CHECK(by_stage["geo"] == 1);
  CHECK(by_stage["emoticon"] == 1);
  CHECK(by_stage["hashtags"] == 0);
  // the lexicon inputs are hashed into the manifest
  CHECK(manifest["file_hashes"].size() >= 8);

  // weekly series: week 1 has survivor 1 of 6 in-season; week 2 has 2 of 4
  auto series = slurp((kDir / "series.csv").string());
  CHECK(series.find("week,filtered,total,normalized\n") == 0);
  CHECK(series.find("1,1,6,") != std::string::npos);
  CHECK(series.find("2,2,4,") != std::string::npos);
}

TEST_CASE("filter runs are deterministic modulo timings") {
  DirGuard guard;
  auto corpus = write_fixture("tiny.jsonl", fixture_body());
  auto cfg = kData + "/configs/best_combination.json";
  auto out1 = (kDir / "a.jsonl").string();
  auto out2 = (kDir / "b.jsonl").string();
  REQUIRE(run_cli("filter --corpus " + corpus + " --config " + cfg + " --output " + out1).code == 0);
  REQUIRE(run_cli("filter --corpus " + corpus + " --config " + cfg + " --output " + out2 +
                  " --workers 4")
              .code == 0);
  CHECK(slurp(out1) == slurp(out2));
  auto m1 = nlohmann::json::parse(slurp(out1 + ".manifest.json"));
  auto m2 = nlohmann::json::parse(slurp(out2 + ".manifest.json"));
  m1.erase("timings_ms");
  m2.erase("timings_ms");
  m1.erase("output_paths");
  m2.erase("output_paths");
  CHECK(m1 == m2);
}

TEST_CASE("correlate in series mode reproduces known coefficients") {
  DirGuard guard;
  // hand-built series against a 4-week gold curve; both are slightly
  // imperfect so the pairwise comparison has defined Fisher variance
  std::string gold_csv = "week,value\n1,1.0\n2,2.0\n3,3.0\n4,4.0\n";
  auto gold = write_fixture("gold.csv", gold_csv);
  std::string s1 = "week,filtered,total,normalized\n1,1,10,100\n2,2,10,230\n3,3,10,280\n4,4,10,410\n";
  std::string s2 = "week,filtered,total,normalized\n1,4,10,400\n2,3,10,290\n3,2,10,230\n4,1,10,90\n";
  auto p1 = write_fixture("up.csv", s1);
  auto p2 = write_fixture("down.csv", s2);
  auto out = (kDir / "report.csv").string();
  auto r = run_cli("correlate --series up=" + p1 + " --series down=" + p2 + " --gold " + gold +
                   " --weeks 4 --output " + out + " --compare-out " +
                   (kDir / "compare.csv").string());
  REQUIRE(r.code == 0);
  auto report = slurp(out);
  REQUIRE(report.find("method,tweets,weeks,r,r_percent,p\n") == 0);
  std::map<std::string, double> r_of;
  std::istringstream rows(report.substr(report.find('\n') + 1));
  std::string row;
  while (std::getline(rows, row)) {
    std::stringstream ss(row);
    std::string method, tweets, weeks, rval;
    std::getline(ss, method, ',');
    std::getline(ss, tweets, ',');
    std::getline(ss, weeks, ',');
    std::getline(ss, rval, ',');
    CHECK(tweets == "10");
    CHECK(weeks == "4");
    r_of[method] = std::stod(rval);
  }
  REQUIRE(r_of.size() == 2);
  CHECK(r_of.at("up") > 0.98);
  CHECK(r_of.at("down") < -0.98);
  // an independent check of the winner's exact value
  std::vector<double> gx = {1, 2, 3, 4}, up = {100, 230, 280, 410};
  CHECK(r_of.at("up") == Catch::Approx(pearson(up, gx)).margin(5e-5));

  auto compare = slurp((kDir / "compare.csv").string());
  CHECK(compare.find("up") != std::string::npos);
  CHECK(compare.find("down") != std::string::npos);
}

TEST_CASE("correlate flags degenerate series with the stats code") {
  DirGuard guard;
  std::string gold_csv = "week,value\n1,1.0\n2,2.0\n3,3.0\n4,4.0\n";
  auto gold = write_fixture("gold.csv", gold_csv);
  std::string flat = "week,filtered,total,normalized\n1,2,10,200\n2,2,10,200\n3,2,10,200\n4,2,10,200\n";
  auto p = write_fixture("flat.csv", flat);
  auto r = run_cli("correlate --series flat=" + p + " --gold " + gold + " --weeks 4 --output " +
                   (kDir / "r.csv").string());
  CHECK(r.code == 3);
  // the failure names its statistical cause
  CHECK(r.out.find("zero_variance") != std::string::npos);
  CHECK(r.out.find("constant series") != std::string::npos);
}

TEST_CASE("correlate rejects mixing series and config modes") {
  DirGuard guard;
  std::string gold_csv = "week,value\n1,1.0\n2,2.0\n";
  auto gold = write_fixture("gold.csv", gold_csv);
  auto series = write_fixture("s.csv", "week,filtered,total,normalized\n1,1,2,5000\n2,2,2,10000\n");
  auto cfg = kData + "/configs/best_combination.json";
  auto both = run_cli("correlate --series a=" + series + " --config " + cfg + " --gold " + gold +
                      " --weeks 2 --output " + (kDir / "r.csv").string());
  CHECK(both.code == 1);
  auto neither =
      run_cli("correlate --gold " + gold + " --weeks 2 --output " + (kDir / "r.csv").string());
  CHECK(neither.code == 1);
}

TEST_CASE("simulate filter correlate compose end to end") {
  DirGuard guard;
  // small but non-trivial: 6 weeks, 400 tweets per week
  std::string spec_json = R"({
    "weeks": 6,
    "gold": [1.0, 2.0, 0.5, 3.0, 1.5, 2.5],
    "tweets_per_week": 400,
    "signal_fraction_scale": 0.05,
    "noise": {"joke": 0.05, "negated": 0.05, "url_news": 0.05,
              "foreign_geo": 0.05, "irrelevant": 0.05},
    "seed": 11
  })";
  auto spec = write_fixture("spec.json", spec_json);
  auto corpus = (kDir / "sim.jsonl").string();
  auto labels = (kDir / "sim.labels.csv").string();
  auto sim = run_cli("simulate --spec " + spec + " --output " + corpus + " --labels " + labels);
  REQUIRE(sim.code == 0);
  CHECK(sim.out.find("positive") != std::string::npos);
  CHECK(sim.out.find("2400") != std::string::npos);

  // the gold the corpus was planted from
  std::string gold_csv = "week,value\n";
  const double gold_vals[] = {1.0, 2.0, 0.5, 3.0, 1.5, 2.5};
  for (int w = 1; w <= 6; ++w)
    gold_csv += std::to_string(w) + "," + std::to_string(gold_vals[w - 1]) + "\n";
  auto gold = write_fixture("sim_gold.csv", gold_csv);

  auto cfg = kData + "/configs/best_combination.json";
  auto out = (kDir / "sim_report.csv").string();
  auto corr = run_cli("correlate --corpus " + corpus + " --config " + cfg + " --gold " + gold +
                      " --weeks 6 --output " + out + " --workers 2");
  REQUIRE(corr.code == 0);

  // planted positives exactly track gold, so r is essentially 1
  std::ifstream report(out);
  std::string line;
  std::getline(report, line);  // header
  REQUIRE(std::getline(report, line));
  std::stringstream ss(line);
  std::string method, tweets, weeks, rval;
  std::getline(ss, method, ',');
  std::getline(ss, tweets, ',');
  std::getline(ss, weeks, ',');
  std::getline(ss, rval, ',');
  CHECK(method == "best_combination");
  CHECK(weeks == "6");
  CHECK(std::stod(rval) > 0.999);
  // survivors counted in the report equal the planted positives: 210
  CHECK(tweets == "210");
}

TEST_CASE("simulate honors the seed override") {
  DirGuard guard;
  std::string spec_json = R"({
    "weeks": 2, "gold": [1.0, 2.0], "tweets_per_week": 50,
    "signal_fraction_scale": 0.1, "seed": 5
  })";
  auto spec = write_fixture("spec.json", spec_json);
  auto c1 = (kDir / "c1.jsonl").string();
  auto c2 = (kDir / "c2.jsonl").string();
  auto c3 = (kDir / "c3.jsonl").string();
  REQUIRE(run_cli("simulate --spec " + spec + " --output " + c1 + " --labels " +
                  (kDir / "l1.csv").string())
              .code == 0);
  REQUIRE(run_cli("simulate --spec " + spec + " --output " + c2 + " --labels " +
                  (kDir / "l2.csv").string() + " --seed 5")
              .code == 0);
  REQUIRE(run_cli("simulate --spec " + spec + " --output " + c3 + " --labels " +
                  (kDir / "l3.csv").string() + " --seed 6")
              .code == 0);
  CHECK(slurp(c1) == slurp(c2));
  CHECK(slurp(c1) != slurp(c3));
}

TEST_CASE("report renders an svg chart next to the csv") {
  DirGuard guard;
  std::string gold_csv = "week,value\n1,1.0\n2,2.0\n3,3.0\n4,2.5\n";
  auto gold = write_fixture("gold.csv", gold_csv);
  std::string s1 = "week,filtered,total,normalized\n1,1,10,100\n2,2,10,210\n3,3,10,290\n4,2,10,260\n";
  auto p1 = write_fixture("curve.csv", s1);
  auto out = (kDir / "chart_report.csv").string();
  auto r = run_cli("report --series curve=" + p1 + " --gold " + gold + " --weeks 4 --output " + out);
  REQUIRE(r.code == 0);
  auto svg = slurp(out + ".svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("curve") != std::string::npos);
  CHECK(svg.find("gold") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
