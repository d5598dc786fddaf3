#pragma once

// Deterministic synthetic corpora with a planted weekly signal.
// Positives per week are proportional to the gold curve; distractor
// classes are crafted so each passes the keyword stage (except plain
// chatter) and is removed by exactly one semantic or URL stage. Their
// weekly counts are jittered so a keyword-only count series correlates
// visibly worse with the gold curve than the fully filtered one.
//
// Generation uses a local splitmix64 stream, not std::mt19937 plus
// std distributions, because the output must be byte-identical across
// platforms and standard-library versions.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/stats.hpp"
#include "ilitrack/tweet.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

struct NoiseMix {
  double joke = 0.0;
  double negated = 0.0;
  double url_news = 0.0;
  double foreign_geo = 0.0;
  double irrelevant = 0.0;

  double sum() const { return joke + negated + url_news + foreign_geo + irrelevant; }
};

struct SyntheticSpec {
  int weeks = 36;
  GoldSeries gold;
  std::uint64_t tweets_per_week = 5000;
  double signal_fraction_scale = 0.065;
  NoiseMix noise;
  std::uint64_t seed = 1;
  std::string season_start = "2009-08-30";
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.weeks < 1) throw ConfigError("simulation needs at least one week");
  if (static_cast<int>(spec.gold.values.size()) != spec.weeks)
    throw ConfigError("gold series length does not match weeks");
  if (spec.tweets_per_week < 1) throw ConfigError("tweets_per_week must be positive");
  if (!(spec.signal_fraction_scale > 0.0))
    throw ConfigError("signal_fraction_scale must be positive");
  const double fs[] = {spec.noise.joke, spec.noise.negated, spec.noise.url_news,
                       spec.noise.foreign_geo, spec.noise.irrelevant};
  double sum = 0.0;
  for (double f : fs) {
    if (f < 0.0) throw ConfigError("noise fractions must be >= 0");
    sum += f;
  }
  if (sum > 1.0) throw ConfigError("noise fractions sum above 1");
  Season::from_strings(spec.season_start, spec.weeks);  // validates Sunday
}

inline SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open simulation spec: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ConfigError("simulation spec is not a JSON object: " + path);
  SyntheticSpec spec;
  spec.weeks = j.value("weeks", 36);
  if (j.contains("gold")) {
    for (const auto& v : j["gold"]) spec.gold.values.push_back(v.get<double>());
  } else if (j.contains("gold_csv")) {
    std::filesystem::path base =
        std::filesystem::absolute(std::filesystem::path(path)).parent_path();
    std::filesystem::path gp(j["gold_csv"].get<std::string>());
    spec.gold = load_gold((gp.is_absolute() ? gp : base / gp).string(), spec.weeks);
  } else {
    throw ConfigError("simulation spec needs gold or gold_csv");
  }
  spec.tweets_per_week = j.value("tweets_per_week", std::uint64_t{5000});
  spec.signal_fraction_scale = j.value("signal_fraction_scale", 0.065);
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    spec.noise.joke = n.value("joke", 0.0);
    spec.noise.negated = n.value("negated", 0.0);
    spec.noise.url_news = n.value("url_news", 0.0);
    spec.noise.foreign_geo = n.value("foreign_geo", 0.0);
    spec.noise.irrelevant = n.value("irrelevant", 0.0);
  }
  spec.seed = j.value("seed", std::uint64_t{1});
  spec.season_start = j.value("season_start", std::string("2009-08-30"));
  validate(spec);
  return spec;
}

namespace detail {

// splitmix64: tiny, seedable, stable across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Modulo draw; the bias is irrelevant here, determinism is not.
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

struct Draft {
  std::string text;
  std::string location;
  std::string cls;
};

// Template pools. Positive and foreign texts must pass the
// syndrome+"flu" keyword test and survive negation, humor, emoticon,
// hashtag, and URL checks; each noise class then violates exactly its
// designated stage.
inline const std::vector<std::string>& positive_texts() {
  static const std::vector<std::string> kPool = {
      "day 3 of flu, this cough is wearing me out",
      "home sick with flu and a nasty sore throat",
      "flu hit me hard, fever and cough all night",
      "this flu gave me a runny nose and a cough",
      "in bed with flu, sore throat on fire",
      "flu again, coughing and a blocked nose #swineflu",
      "caught the flu, chest ache every time i cough",
      "flu plus a stuffy nose, staying home today #flu",
      "the flu knocked me flat, bad cough and chills",
      "my whole house has flu and sore throat now",
  };
  return kPool;
}

inline const std::vector<std::string>& us_locations() {
  static const std::vector<std::string> kPool = {
      "New York, NY", "Boston, MA", "Chicago, IL", "Seattle, WA",
      "Austin, TX",   "Denver, CO", "Portland, OR", "Atlanta, GA",
      "USA",          "United States", "NYC",       "40.7128,-74.0060",
  };
  return kPool;
}

inline const std::vector<std::string>& joke_texts() {
  static const std::vector<std::string> kPool = {
      "haha down with cough and flu again, classic me",
      "my flu voice plus this cough, hahaha send help",
      "lol this flu got me, cough medicine everywhere",
      "sore throat and flu haha guess who sounds like a frog",
  };
  return kPool;
}

inline const std::vector<std::string>& negated_texts() {
  static const std::vector<std::string> kPool = {
      "bad cough this week but it's not flu",
      "sore throat going around, it's not flu they said",
      "had a cough and a fever, doctor says it's not flu",
      "my cough sounds rough but it is not flu",
  };
  return kPool;
}

inline const std::vector<std::string>& url_news_texts() {
  static const std::vector<std::string> kPool = {
      "flu and pneumonia cases rising across the state http://news.example/",
      "health dept warns of flu season, cough clinics open http://health.example/",
      "new flu strain causes severe sore throat, report says http://wire.example/",
  };
  return kPool;
}

inline const std::vector<std::string>& foreign_locations() {
  static const std::vector<std::string> kPool = {
      "Jakarta, Indonesia", "London, UK", "Toronto, Canada", "Sydney, Australia",
      "-7.272681,112.755908",
  };
  return kPool;
}

inline const std::vector<std::string>& irrelevant_texts() {
  static const std::vector<std::string> kPool = {
      "traffic on the bridge again this morning",
      "new album drops friday and i am ready",
      "coffee first, everything else later",
      "game went to overtime, what a finish",
      "planting tomatoes this weekend finally",
  };
  return kPool;
}

inline std::string pick(Rng& rng, const std::vector<std::string>& pool) {
  return pool[static_cast<std::size_t>(rng.below(pool.size()))];
}

}  // namespace detail

struct GenerationSummary {
  std::vector<std::uint64_t> positives_per_week;  // index 0 = week 1
  std::map<std::string, std::uint64_t> class_totals;
  std::uint64_t total_tweets = 0;
};

// Writes the corpus as JSONL and the ground-truth labels as CSV
// `id,class,week`. Fixed seed means byte-identical outputs.
inline GenerationSummary generate_corpus(const SyntheticSpec& spec,
                                         const std::string& corpus_path,
                                         const std::string& labels_path) {
  validate(spec);
  Season season = Season::from_strings(spec.season_start, spec.weeks);
  std::ofstream corpus(corpus_path, std::ios::binary);
  if (!corpus) throw IoError("cannot write corpus: " + corpus_path);
  std::ofstream labels(labels_path, std::ios::binary);
  if (!labels) throw IoError("cannot write labels: " + labels_path);
  labels << "id,class,week\n";

  detail::Rng rng(spec.seed);
  GenerationSummary summary;
  summary.positives_per_week.assign(static_cast<std::size_t>(spec.weeks), 0);
  std::uint64_t serial = 0;

  for (int w = 1; w <= spec.weeks; ++w) {
    double gold = spec.gold.values[static_cast<std::size_t>(w - 1)];
    auto n_pos = static_cast<std::uint64_t>(std::llround(
        spec.signal_fraction_scale * gold * static_cast<double>(spec.tweets_per_week)));
    if (n_pos > spec.tweets_per_week)
      throw ConfigError("infeasible: week " + std::to_string(w) + " needs " +
                        std::to_string(n_pos) + " positives of " +
                        std::to_string(spec.tweets_per_week) + " tweets");

    std::vector<detail::Draft> drafts;
    drafts.reserve(spec.tweets_per_week);
    for (std::uint64_t i = 0; i < n_pos; ++i)
      drafts.push_back({detail::pick(rng, detail::positive_texts()),
                        detail::pick(rng, detail::us_locations()), "positive"});
    summary.positives_per_week[static_cast<std::size_t>(w - 1)] = n_pos;

    // Noise counts jitter between 50% and 150% of the nominal
    // fraction, independently per class and week, so keyword-only
    // weekly counts decorrelate from the planted curve.
    std::uint64_t budget = spec.tweets_per_week - n_pos;
    auto draw_count = [&](double fraction) {
      auto want = static_cast<std::uint64_t>(
          std::floor(fraction * static_cast<double>(spec.tweets_per_week) *
                     (0.5 + rng.uniform01())));
      std::uint64_t n = std::min(budget, want);
      budget -= n;
      return n;
    };
    std::uint64_t n_joke = draw_count(spec.noise.joke);
    std::uint64_t n_neg = draw_count(spec.noise.negated);
    std::uint64_t n_url = draw_count(spec.noise.url_news);
    std::uint64_t n_foreign = draw_count(spec.noise.foreign_geo);
    std::uint64_t n_irr = draw_count(spec.noise.irrelevant);

    for (std::uint64_t i = 0; i < n_joke; ++i)
      drafts.push_back({detail::pick(rng, detail::joke_texts()),
                        detail::pick(rng, detail::us_locations()), "joke"});
    for (std::uint64_t i = 0; i < n_neg; ++i)
      drafts.push_back({detail::pick(rng, detail::negated_texts()),
                        detail::pick(rng, detail::us_locations()), "negated"});
    for (std::uint64_t i = 0; i < n_url; ++i)
      drafts.push_back({detail::pick(rng, detail::url_news_texts()) + std::to_string(rng.below(100000)),
                        detail::pick(rng, detail::us_locations()), "url_news"});
    for (std::uint64_t i = 0; i < n_foreign; ++i)
      drafts.push_back({detail::pick(rng, detail::positive_texts()),
                        detail::pick(rng, detail::foreign_locations()), "foreign_geo"});
    for (std::uint64_t i = 0; i < n_irr; ++i)
      drafts.push_back({detail::pick(rng, detail::irrelevant_texts()),
                        detail::pick(rng, detail::us_locations()), "irrelevant"});
    while (drafts.size() < spec.tweets_per_week)
      drafts.push_back({detail::pick(rng, detail::irrelevant_texts()) + " again",
                        detail::pick(rng, detail::us_locations()), "background"});

    rng.shuffle(drafts);

    Days week_start = season.week(w).start;
    for (const auto& draft : drafts) {
      Tweet t;
      char id[32];
      std::snprintf(id, sizeof id, "t%08llu", static_cast<unsigned long long>(serial++));
      t.id = id;
      char user[32];
      std::snprintf(user, sizeof user, "u%05llu", static_cast<unsigned long long>(rng.below(4000)));
      t.user_id = user;
      std::int64_t day = static_cast<std::int64_t>(rng.below(7));
      std::int64_t secs = static_cast<std::int64_t>(rng.below(86400));
      t.created_at =
          std::chrono::duration_cast<std::chrono::seconds>(week_start.time_since_epoch())
              .count() +
          day * 86400 + secs;
      t.text = draft.text;
      t.user_location = draft.location;
      corpus << write_record(t) << '\n';
      labels << csv_quote(t.id) << ',' << csv_quote(draft.cls) << ',' << w << '\n';
      ++summary.class_totals[draft.cls];
      ++summary.total_tweets;
    }
  }
  return summary;
}

}  // namespace ilitrack
