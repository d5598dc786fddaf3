// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Each criterion is self-contained and prints PASS or FAIL with a
// short name; tolerances are pinned as constants right here.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilitrack/filters.hpp"
#include "ilitrack/simulate.hpp"
#include "ilitrack/stats.hpp"
#include "support/naive_match.hpp"
#include "support/quadrature.hpp"

using namespace ilitrack;
namespace fs = std::filesystem;

namespace {

constexpr double kExactTol = 1e-12;   // "exact" floating-point identities
constexpr double kPvalueTol = 1e-6;   // agreement with the quadrature oracle
constexpr double kHeadlineP = 2.2e-16;  // machine-reporting floor for p
constexpr double kMinRecoveredR = 0.95;  // planted-signal recovery bar

const std::string kData = ILITRACK_DATA_DIR;
const std::string kCli = ILITRACK_CLI_PATH;

int g_failures = 0;

void criterion(int n, const char* name, bool ok, const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", n, name,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++g_failures;
}

// ---------------------------------------------------------------- 1
void check_epi_week_calendar() {
  bool ok = true;
  try {
    Season s = Season::from_strings("2009-08-30", 36);
    auto day = [](const char* d) {
      return std::chrono::duration_cast<std::chrono::seconds>(
                 parse_date(d)->time_since_epoch())
                 .count() +
             12 * 3600;
    };
    ok &= s.assign(day("2009-08-30")).value_or(0) == 1;
    ok &= s.assign(day("2009-09-05")).value_or(0) == 1;
    ok &= s.assign(day("2010-05-08")).value_or(0) == 36;
    ok &= !s.assign(day("2009-08-29")).has_value();
    ok &= !s.assign(day("2010-05-09")).has_value();
  } catch (...) {
    ok = false;
  }
  criterion(1, "epi-week calendar endpoints", ok);
}

// ---------------------------------------------------------------- 2
void check_pearson_suite() {
  bool ok = true;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> pos(0.1, 10.0);
  try {
    for (int iter = 0; iter < 1000 && ok; ++iter) {
      std::size_t n = 3 + rng() % 40;
      std::vector<double> x(n), y(n), nx(n), ax(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = val(rng);
        y[i] = val(rng);
      }
      x[1] = x[0] + 1.0;  // keep both series non-constant
      y[1] = y[0] + 1.0;
      for (std::size_t i = 0; i < n; ++i) nx[i] = -x[i];
      double a = pos(rng), b = val(rng);
      for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + b;
      ok &= std::fabs(pearson(x, x) - 1.0) <= kExactTol;
      ok &= std::fabs(pearson(x, nx) + 1.0) <= kExactTol;
      ok &= std::fabs(pearson(ax, y) - pearson(x, y)) <= kExactTol;
      ok &= pearson(x, y) == pearson(y, x);  // symmetry, bit-exact
    }
  } catch (...) {
    ok = false;
  }
  criterion(2, "pearson identities and scale invariance", ok);
}

// ---------------------------------------------------------------- 3
void check_significance() {
  bool ok = true;
  std::string detail;
  try {
    double headline = pearson_pvalue(0.9485, 36);
    ok &= headline < kHeadlineP;
    char buf[64];
    std::snprintf(buf, sizeof buf, "p(0.9485, 36) = %.3e", headline);
    detail = buf;
    double worst = 0.0;
    for (int ri = 1; ri <= 9 && ok; ++ri) {
      for (std::size_t n = 5; n <= 50; n += 5) {
        double r = ri / 10.0;
        double diff = std::fabs(pearson_pvalue(r, n) - oracle::pearson_pvalue(r, n));
        worst = std::max(worst, diff);
        if (diff > kPvalueTol) {
          ok = false;
          break;
        }
      }
    }
  } catch (...) {
    ok = false;
  }
  criterion(3, "two-sided p-value vs quadrature oracle", ok, detail);
}

// ---------------------------------------------------------------- 4
std::vector<std::string> phrase_vocabulary(const std::vector<Lexicon>& lexicons) {
  std::vector<std::string> words;
  for (const auto& lex : lexicons)
    for (const auto& p : lex.phrases) {
      std::istringstream ss(p);
      std::string w;
      while (ss >> w) words.push_back(w);
    }
  for (const char* w : {"the", "a", "got", "bad", "again", "influenza_like", "fluzone"})
    words.push_back(w);
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

std::vector<std::string> keyed(const std::vector<PhraseMatch>& ms) {
  std::vector<std::string> keys;
  for (const auto& m : ms)
    keys.push_back(std::string(m.lexicon) + "|" + std::string(m.phrase) + "|" +
                   std::to_string(m.token_begin) + "|" + std::to_string(m.token_end));
  std::sort(keys.begin(), keys.end());
  return keys;
}

void check_matcher_oracle() {
  bool ok = true;
  try {
    std::vector<Lexicon> lexicons;
    lexicons.push_back(load_lexicon(kData + "/lexicons/culotta4.txt", "culotta4"));
    lexicons.push_back(load_lexicon(kData + "/lexicons/signorini4.txt", "signorini4"));
    lexicons.push_back(load_lexicon(kData + "/lexicons/chew3.txt", "chew3"));
    lexicons.push_back(load_lexicon(kData + "/lexicons/bco_respiratory.txt", "syndrome"));
    lexicons.push_back(load_lexicon(kData + "/lexicons/bco_extra.txt", "extra"));
    PhraseMatcher matcher(lexicons);
    auto vocab = phrase_vocabulary(lexicons);

    std::mt19937_64 rng(4);
    for (int iter = 0; iter < 10000 && ok; ++iter) {
      std::size_t len = rng() % 18;
      std::vector<Token> tokens;
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < len; ++i) {
        Token t;
        std::uint64_t kind = rng() % 8;
        if (kind == 0) {
          t.kind = TokenKind::punct;
          t.surface = ",";
        } else if (kind == 1) {
          t.kind = TokenKind::hashtag;
          t.surface = "#" + vocab[rng() % vocab.size()];
          t.norm = t.surface.substr(1);
        } else if (kind == 2) {
          t.kind = TokenKind::number;
          t.surface = "12";
          t.norm = "12";
        } else if (kind == 3) {
          t.kind = TokenKind::url;
          t.surface = "http://x.co/a";
        } else {
          t.kind = TokenKind::word;
          t.surface = vocab[rng() % vocab.size()];
          t.norm = t.surface;
        }
        t.span = {cursor, cursor + t.surface.size()};
        cursor = t.span.end + 1;
        tokens.push_back(std::move(t));
      }
      if (keyed(matcher.match(tokens)) != keyed(oracle::naive_match(lexicons, tokens))) ok = false;
    }
  } catch (...) {
    ok = false;
  }
  criterion(4, "phrase matcher equals naive oracle on 10000 sequences", ok);
}

// ---------------------------------------------------------------- 5
void check_classification_goldens() {
  bool ok = true;
  try {
    PipelineConfig cfg = load_pipeline_config(kData + "/configs/best_combination.json");
    FilterResources res = FilterResources::load(cfg);
    auto analysis = [&](const std::string& text) {
      Tweet t;
      t.id = "g";
      t.created_at = 1251936000;
      t.text = text;
      t.user_location = "NY, USA";
      return TweetAnalysis::run(t, res);
    };
    NegationConfig ncfg;

    ok &= !negation_stage(analysis("it's not swine flu"), ncfg).kept;
    ok &= negation_stage(analysis("not feeling well, got flu and cough"), ncfg).kept;
    ok &= hashtag_stage(analysis("Still coughing smh #swineflu #h1n1"), res).kept;
    ok &= !emoticon_stage(
               analysis("Glad to hear that you're beating the flu. :-) Get better soon!"))
               .kept;
    {
      Tweet t;
      t.id = "g";
      t.created_at = 1251936000;
      t.text = "Hm Im kinda wanting to go to NYC really soon ***cough ... cough*** @Ctmomofsix =)";
      ok &= !humor_stage(t, res).kept;
    }
    ok &= keyword_stage(analysis("Down with a flu. Sore throat, cough and temperature."),
                        KeywordMethod::syndrome_flu)
              .kept;
    auto headache = analysis("Has a wicked headache, as well as a new bill to pay");
    ok &= keyword_stage(headache, KeywordMethod::culotta4).kept;
    ok &= !keyword_stage(headache, KeywordMethod::syndrome_flu).kept;
  } catch (...) {
    ok = false;
  }
  criterion(5, "classification goldens across all five semantic stages", ok);
}

// ---------------------------------------------------------------- 6
struct DropLedger {
  std::uint64_t input = 0, survivors = 0;
  std::map<std::string, std::uint64_t> drops;
  bool conserves() const {
    std::uint64_t d = 0;
    for (const auto& [k, v] : drops) d += v;
    return input == survivors + d;
  }
};

DropLedger run_over(const std::vector<Tweet>& corpus, const PipelineConfig& cfg,
                    const FilterResources& res) {
  DropLedger ledger;
  for (const auto& t : corpus) {
    ++ledger.input;
    auto r = run_pipeline(t, cfg, res);
    if (r.kept)
      ++ledger.survivors;
    else
      ++ledger.drops[r.trace.back().stage];
  }
  return ledger;
}

void check_pipeline_invariants() {
  bool ok = true;
  try {
    PipelineConfig base = load_pipeline_config(kData + "/configs/best_combination.json");
    FilterResources res = FilterResources::load(base);
    const std::vector<std::string> fragments = {
        "got flu",  "sore throat", "cough",       "not",          "never",     "#party",
        "#swineflu", ":-(",        ";)",          "http://x.co/a", "hahaha",   "***cough",
        "feeling fine", "swine flu", "so",        ",",            ".",         "runny nose",
        "@friend",  "fever",       "headache"};
    const std::vector<std::optional<std::string>> locations = {
        "NY, USA", std::nullopt, "\xC3\x9CT: 40.7,-74.0", "the moon", "Boston, MA", ""};
    const std::vector<KeywordMethod> methods = {
        KeywordMethod::culotta4, KeywordMethod::signorini4, KeywordMethod::chew3,
        KeywordMethod::syndrome, KeywordMethod::syndrome_flu, KeywordMethod::syndrome_extra};
    std::vector<std::string> all_stages = {"negation", "emoticon", "hashtags", "humor", "geo"};

    std::mt19937_64 rng(6);
    for (int iter = 0; iter < 1000 && ok; ++iter) {
      // a fresh small corpus per iteration
      std::vector<Tweet> corpus;
      std::size_t n_tweets = 20 + rng() % 30;
      for (std::size_t i = 0; i < n_tweets; ++i) {
        Tweet t;
        t.id = std::to_string(i);
        t.created_at = 1251936000;
        std::size_t len = 2 + rng() % 8;
        for (std::size_t j = 0; j < len; ++j) {
          if (j) t.text += ' ';
          t.text += fragments[rng() % fragments.size()];
        }
        t.user_location = locations[rng() % locations.size()];
        corpus.push_back(std::move(t));
      }
      // a random config: method, url coin, stage subset in random order
      PipelineConfig cfg = base;
      cfg.keyword_method = methods[rng() % methods.size()];
      cfg.remove_url = rng() % 2 == 0;
      std::vector<std::string> stages = all_stages;
      std::shuffle(stages.begin(), stages.end(), rng);
      stages.resize(rng() % (all_stages.size() + 1));
      cfg.semantic_stages = stages;

      DropLedger before = run_over(corpus, cfg, res);
      if (!before.conserves()) ok = false;

      // appending one more stage must not grow the survivor set
      if (stages.size() < all_stages.size()) {
        std::vector<std::string> unused;
        for (const auto& s : all_stages)
          if (std::find(stages.begin(), stages.end(), s) == stages.end()) unused.push_back(s);
        cfg.semantic_stages.push_back(unused[rng() % unused.size()]);
        DropLedger after = run_over(corpus, cfg, res);
        if (!after.conserves()) ok = false;
        if (after.survivors > before.survivors) ok = false;
      }
    }
  } catch (...) {
    ok = false;
  }
  criterion(6, "conservation and monotonicity over 1000 random configs", ok);
}

// ---------------------------------------------------------------- 7
struct CmdResult {
  int code = -1;
  std::string out;
};

CmdResult run_cli(const std::string& args) {
  std::string cmd = "'" + kCli + "' " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  CmdResult r;
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
  int status = pclose(pipe);
  if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_planted_signal_recovery() {
  bool ok = true;
  std::string detail;
  fs::path dir = "/tmp/ilitrack_acceptance";
  try {
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string corpus = (dir / "sim.jsonl").string();
    std::string labels = (dir / "sim.labels.csv").string();
    std::string report = (dir / "report.csv").string();
    std::string survivors = (dir / "kept.jsonl").string();

    auto sim = run_cli("simulate --spec " + kData + "/configs/simulate_default.json --output " +
                       corpus + " --labels " + labels);
    if (sim.code != 0) throw std::runtime_error("simulate failed: " + sim.out);

    // a real filter run whose manifest must conserve every record
    auto filt = run_cli("filter --corpus " + corpus + " --config " + kData +
                        "/configs/best_combination.json --output " + survivors + " --workers 4");
    if (filt.code != 0) throw std::runtime_error("filter failed: " + filt.out);
    auto manifest = nlohmann::json::parse(slurp(survivors + ".manifest.json"));
    std::uint64_t dropped = 0;
    for (const auto& d : manifest["stage_drops"]) dropped += d["dropped"].get<std::uint64_t>();
    bool conserves = manifest["input_records"].get<std::uint64_t>() ==
                     manifest["survivors"].get<std::uint64_t>() + dropped +
                         manifest["parse_errors"].get<std::uint64_t>() +
                         manifest["out_of_season"].get<std::uint64_t>();
    ok &= conserves;

    // full combination vs keyword-only on the same corpus
    auto corr = run_cli("correlate --corpus " + corpus + " --config " + kData +
                        "/configs/best_combination.json --config " + kData +
                        "/configs/syndrome_flu.json --gold " + kData +
                        "/gold/sample_gold_36w.csv --output " + report + " --workers 4");
    if (corr.code != 0) throw std::runtime_error("correlate failed: " + corr.out);

    std::map<std::string, double> r_of;
    std::istringstream rows(slurp(report));
    std::string row;
    std::getline(rows, row);  // header
    while (std::getline(rows, row)) {
      std::stringstream ss(row);
      std::string method, tweets, weeks, rval;
      std::getline(ss, method, ',');
      std::getline(ss, tweets, ',');
      std::getline(ss, weeks, ',');
      std::getline(ss, rval, ',');
      r_of[method] = std::stod(rval);
    }
    double r_full = r_of.at("best_combination");
    double r_keyword = r_of.at("syndrome_flu");
    ok &= r_full >= kMinRecoveredR;
    ok &= r_full >= r_keyword;
    char buf[96];
    std::snprintf(buf, sizeof buf, "r_full=%.4f, r_keyword=%.4f", r_full, r_keyword);
    detail = buf;
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  fs::remove_all(dir);
  criterion(7, "planted signal recovered end to end (r >= 0.95, full >= keyword)", ok, detail);
}

// ---------------------------------------------------------------- 8
void check_lexicon_integrity() {
  bool ok = true;
  std::string detail;
  try {
    auto count = [&](const char* file, const char* name) {
      return load_lexicon(kData + "/lexicons/" + file, name).phrases.size();
    };
    std::size_t syndrome = count("bco_respiratory.txt", "syndrome");
    std::size_t c4 = count("culotta4.txt", "culotta4");
    std::size_t s4 = count("signorini4.txt", "signorini4");
    std::size_t c3 = count("chew3.txt", "chew3");
    ok = syndrome == 37 && c4 == 4 && s4 == 4 && c3 == 3;
    char buf[96];
    std::snprintf(buf, sizeof buf, "syndrome=%zu, culotta4=%zu, signorini4=%zu, chew3=%zu",
                  syndrome, c4, s4, c3);
    detail = buf;
  } catch (...) {
    ok = false;
  }
  criterion(8, "shipped lexicon sizes (37/4/4/3)", ok, detail);
}

}  // namespace

int main() {
  check_epi_week_calendar();
  check_pearson_suite();
  check_significance();
  check_matcher_oracle();
  check_classification_goldens();
  check_pipeline_invariants();
  check_planted_signal_recovery();
  check_lexicon_integrity();
  if (g_failures) {
    std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("ACCEPTANCE: all 8 criteria passed\n");
  return 0;
}
