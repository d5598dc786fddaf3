#pragma once

// The filtering pipeline: one keyword stage, an optional URL stage,
// then semantic stages in configured order. Every stage is a total,
// independent predicate over the tweet, so the survivor set does not
// depend on stage order; order only decides which stage gets credit
// for a drop. Execution short-circuits at the first drop and the trace
// records each executed stage with evidence spans.

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/geo.hpp"
#include "ilitrack/lexicon.hpp"
#include "ilitrack/negation.hpp"
#include "ilitrack/textproc.hpp"
#include "ilitrack/tweet.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

struct Evidence {
  std::string reason;
  std::optional<Span> span;
  std::string detail;
};

struct StageDecision {
  std::string stage;
  bool kept = true;
  std::vector<Evidence> evidence;  // non-empty whenever kept is false
};

enum class KeywordMethod { culotta4, signorini4, chew3, syndrome, syndrome_flu, syndrome_extra };

inline const char* to_string(KeywordMethod m) {
  switch (m) {
    case KeywordMethod::culotta4: return "culotta4";
    case KeywordMethod::signorini4: return "signorini4";
    case KeywordMethod::chew3: return "chew3";
    case KeywordMethod::syndrome: return "syndrome";
    case KeywordMethod::syndrome_flu: return "syndrome_flu";
    default: return "syndrome_extra";
  }
}

inline KeywordMethod parse_keyword_method(std::string_view name) {
  if (name == "culotta4") return KeywordMethod::culotta4;
  if (name == "signorini4") return KeywordMethod::signorini4;
  if (name == "chew3") return KeywordMethod::chew3;
  if (name == "syndrome") return KeywordMethod::syndrome;
  if (name == "syndrome_flu") return KeywordMethod::syndrome_flu;
  if (name == "syndrome_extra") return KeywordMethod::syndrome_extra;
  throw ConfigError("unknown keyword_method: " + std::string(name));
}

inline const std::vector<std::string>& all_semantic_stages() {
  static const std::vector<std::string> kStages = {"negation", "hashtags", "emoticon", "humor",
                                                   "geo"};
  return kStages;
}

struct PipelineConfig {
  KeywordMethod keyword_method = KeywordMethod::syndrome_flu;
  bool remove_url = false;
  std::vector<std::string> semantic_stages;
  std::string geo_target;

  // data file paths, absolute after load
  std::string lex_culotta4;
  std::string lex_signorini4;
  std::string lex_chew3;
  std::string lex_syndrome;
  std::string lex_extra;
  std::string emoticons;
  std::string humor_patterns;
  std::string gazetteer;
  std::string geocoder_cache;  // optional; enables the external client hook

  NegationConfig negation;
  double k = 1e4;  // normalization constant for weekly rates

  bool has_stage(std::string_view name) const {
    return std::find(semantic_stages.begin(), semantic_stages.end(), name) !=
           semantic_stages.end();
  }
};

inline void validate(const PipelineConfig& cfg) {
  std::set<std::string> seen;
  for (const auto& s : cfg.semantic_stages) {
    const auto& known = all_semantic_stages();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw ConfigError("unknown semantic stage: " + s);
    if (!seen.insert(s).second) throw ConfigError("semantic stage repeated: " + s);
  }
  if (cfg.has_stage("geo") && cfg.geo_target.empty())
    throw ConfigError("geo stage requires geo_target");
  if (!(cfg.k > 0.0)) throw ConfigError("k must be positive");
}

// JSON config file; relative paths resolve against the config's own
// directory so configs travel with their data.
inline PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError("config is not a JSON object: " + path);

  auto base = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    return (fp.is_absolute() ? fp : base / fp).lexically_normal().string();
  };
  auto need_path = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string())
      throw ConfigError(std::string("config missing path: ") + key);
    return resolve(j[key].get<std::string>());
  };

  PipelineConfig cfg;
  if (!j.contains("keyword_method") || !j["keyword_method"].is_string())
    throw ConfigError("config missing keyword_method");
  cfg.keyword_method = parse_keyword_method(j["keyword_method"].get<std::string>());
  cfg.remove_url = j.value("remove_url", false);
  if (j.contains("semantic_stages")) {
    if (!j["semantic_stages"].is_array()) throw ConfigError("semantic_stages must be an array");
    for (const auto& s : j["semantic_stages"]) {
      if (!s.is_string()) throw ConfigError("semantic_stages entries must be strings");
      cfg.semantic_stages.push_back(s.get<std::string>());
    }
  }
  cfg.geo_target = j.value("geo_target", std::string());
  cfg.lex_culotta4 = need_path("culotta4");
  cfg.lex_signorini4 = need_path("signorini4");
  cfg.lex_chew3 = need_path("chew3");
  cfg.lex_syndrome = need_path("syndrome");
  cfg.lex_extra = need_path("extra");
  cfg.emoticons = need_path("emoticons");
  cfg.humor_patterns = need_path("humor_patterns");
  cfg.gazetteer = need_path("gazetteer");
  if (j.contains("geocoder_cache"))
    cfg.geocoder_cache = resolve(j["geocoder_cache"].get<std::string>());
  if (j.contains("negation")) {
    const auto& n = j["negation"];
    if (!n.is_object()) throw ConfigError("negation block must be an object");
    if (n.contains("terms")) {
      cfg.negation.terms.clear();
      for (const auto& t : n["terms"]) cfg.negation.terms.insert(t.get<std::string>());
    }
    if (n.contains("targets")) {
      cfg.negation.targets.clear();
      for (const auto& t : n["targets"]) cfg.negation.targets.insert(t.get<std::string>());
    }
    if (n.contains("window")) {
      if (!n["window"].is_number_unsigned()) throw ConfigError("negation window must be >= 0");
      cfg.negation.window = n["window"].get<std::size_t>();
    }
    if (n.contains("clause_breakers")) {
      cfg.negation.punct_breakers.clear();
      cfg.negation.word_breakers.clear();
      for (const auto& b : n["clause_breakers"]) {
        std::string s = b.get<std::string>();
        if (s.size() == 1 && !detail::is_alpha(static_cast<unsigned char>(s[0])))
          cfg.negation.punct_breakers.insert(s);
        else
          cfg.negation.word_breakers.insert(to_lower(s));
      }
    }
  }
  if (j.contains("k")) cfg.k = j["k"].get<double>();
  validate(cfg);
  return cfg;
}

struct HumorPattern {
  std::string source;
  std::regex regex;
};

// One ECMAScript regex per line, '#' comments; applied to the
// lowercased text, so patterns can assume lowercase letters.
inline std::vector<HumorPattern> load_humor_patterns(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open humor patterns: " + path);
  std::vector<HumorPattern> out;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    try {
      out.push_back({std::string(v), std::regex(std::string(v), std::regex::ECMAScript)});
    } catch (const std::regex_error& e) {
      throw ConfigError("humor pattern line " + std::to_string(line_no) + " invalid: " +
                        e.what());
    }
  }
  if (out.empty()) throw ConfigError("no humor patterns in " + path);
  return out;
}

// Everything a pipeline run needs, loaded once and shared read-only
// across worker threads.
struct FilterResources {
  std::vector<Lexicon> lexicons;  // culotta4, signorini4, chew3, syndrome, extra, flu
  std::unique_ptr<PhraseMatcher> matcher;
  std::set<std::string> ili_prefix_words;  // syndrome single words + "flu"
  std::set<std::string> syndrome_single_words;
  EmoticonLexicon emoticons;
  std::vector<HumorPattern> humor;
  Gazetteer gazetteer;
  CountryBoxes bboxes;
  std::shared_ptr<ExternalGeocoder> external;  // optional

  static FilterResources load(const PipelineConfig& cfg,
                              std::shared_ptr<ExternalGeocoder> external_client = nullptr) {
    FilterResources r;
    r.lexicons.push_back(load_lexicon(cfg.lex_culotta4, "culotta4"));
    r.lexicons.push_back(load_lexicon(cfg.lex_signorini4, "signorini4"));
    r.lexicons.push_back(load_lexicon(cfg.lex_chew3, "chew3"));
    r.lexicons.push_back(load_lexicon(cfg.lex_syndrome, "syndrome"));
    r.lexicons.push_back(load_lexicon(cfg.lex_extra, "extra"));
    Lexicon flu;
    flu.name = "flu";
    flu.phrases.insert("flu");
    r.lexicons.push_back(std::move(flu));
    r.matcher = std::make_unique<PhraseMatcher>(r.lexicons);

    const auto& syndrome = r.lexicons[3];
    for (const auto& p : syndrome.phrases)
      if (p.find(' ') == std::string::npos) r.syndrome_single_words.insert(p);
    r.ili_prefix_words = r.syndrome_single_words;
    r.ili_prefix_words.insert("flu");

    r.emoticons = load_emoticon_lexicon(cfg.emoticons);
    r.humor = load_humor_patterns(cfg.humor_patterns);
    r.gazetteer = load_gazetteer(cfg.gazetteer);
    r.bboxes = us_bounding_boxes();
    if (cfg.geo_target != "US" && !cfg.geo_target.empty())
      r.bboxes = CountryBoxes{cfg.geo_target, {}};  // boxes shipped for US only
    if (external_client && !cfg.geocoder_cache.empty())
      r.external = std::make_shared<CachedGeocoder>(external_client, cfg.geocoder_cache);
    else
      r.external = std::move(external_client);
    return r;
  }
};

// Token context computed once per tweet and consumed by every stage.
struct TweetAnalysis {
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;
  std::vector<PhraseMatch> matches;

  static TweetAnalysis run(const Tweet& tweet, const FilterResources& res) {
    TweetAnalysis a;
    a.tokens = tokenize(tweet.text, &res.emoticons);
    a.sentences = split_sentences(tweet.text, a.tokens);
    a.matches = res.matcher->match(a.tokens);
    return a;
  }

  std::vector<const PhraseMatch*> matches_of(std::string_view lexicon) const {
    std::vector<const PhraseMatch*> out;
    for (const auto& m : matches)
      if (m.lexicon == lexicon) out.push_back(&m);
    return out;
  }
};

inline Span token_range_span(const std::vector<Token>& tokens, std::size_t begin,
                             std::size_t end) {
  return {tokens[begin].span.start, tokens[end - 1].span.end};
}

inline void add_match_evidence(StageDecision& d, const TweetAnalysis& a,
                               const std::vector<const PhraseMatch*>& ms, const char* reason) {
  std::set<std::string_view> seen;
  for (const auto* m : ms) {
    if (!seen.insert(m->phrase).second) continue;
    d.evidence.push_back({reason, token_range_span(a.tokens, m->token_begin, m->token_end),
                          std::string(m->phrase)});
  }
}

inline StageDecision keyword_stage(const TweetAnalysis& a, KeywordMethod method) {
  StageDecision d;
  d.stage = std::string("keyword_") + to_string(method);
  switch (method) {
    case KeywordMethod::culotta4:
    case KeywordMethod::signorini4:
    case KeywordMethod::chew3:
    case KeywordMethod::syndrome: {
      auto ms = a.matches_of(to_string(method));
      d.kept = !ms.empty();
      add_match_evidence(d, a, ms, "keyword_match");
      break;
    }
    case KeywordMethod::syndrome_flu: {
      auto syn = a.matches_of("syndrome");
      auto flu = a.matches_of("flu");
      d.kept = !syn.empty() && !flu.empty();
      add_match_evidence(d, a, syn, "keyword_match");
      add_match_evidence(d, a, flu, "keyword_match");
      break;
    }
    case KeywordMethod::syndrome_extra: {
      auto syn = a.matches_of("syndrome");
      auto ext = a.matches_of("extra");
      d.kept = !syn.empty() || !ext.empty();
      add_match_evidence(d, a, syn, "keyword_match");
      add_match_evidence(d, a, ext, "keyword_match");
      break;
    }
  }
  if (!d.kept) {
    d.evidence.clear();
    d.evidence.push_back({"no_keyword_match", std::nullopt, to_string(method)});
  }
  return d;
}

inline StageDecision url_stage(const TweetAnalysis& a) {
  StageDecision d;
  d.stage = "url";
  for (const auto& t : a.tokens) {
    if (t.kind == TokenKind::url) {
      d.kept = false;
      d.evidence.push_back({"url_present", t.span, t.surface});
    }
  }
  return d;
}

namespace detail {

// A sentence qualifies as ILI context when it holds a syndrome phrase
// match, or any word/hashtag whose norm starts with a syndrome single
// word or "flu". The prefix step covers everyday inflections such as
// "coughing" that the strict phrase matcher deliberately skips.
inline bool sentence_has_ili_context(const TweetAnalysis& a, const Sentence& sent,
                                     const FilterResources& res) {
  for (const auto& m : a.matches) {
    if (m.lexicon != "syndrome" && m.lexicon != "flu") continue;
    if (m.token_begin >= sent.token_begin && m.token_end <= sent.token_end) return true;
  }
  for (std::size_t i = sent.token_begin; i < sent.token_end; ++i) {
    const Token& t = a.tokens[i];
    if (t.kind != TokenKind::word && t.kind != TokenKind::hashtag) continue;
    for (const auto& w : res.ili_prefix_words)
      if (t.norm.size() >= w.size() && t.norm.compare(0, w.size(), w) == 0) return true;
  }
  return false;
}

inline bool hashtag_is_ili_related(const TweetAnalysis& a, std::size_t token_index,
                                   const Sentence& sent, const FilterResources& res) {
  const Token& tag = a.tokens[token_index];
  if (tag.norm.find("flu") != std::string::npos) return true;
  if (res.syndrome_single_words.count(tag.norm)) return true;
  return sentence_has_ili_context(a, sent, res);
}

}  // namespace detail

// Drops a tweet carrying any hashtag that is not ILI-related; tweets
// without hashtags pass through.
inline StageDecision hashtag_stage(const TweetAnalysis& a, const FilterResources& res) {
  StageDecision d;
  d.stage = "hashtags";
  for (const auto& sent : a.sentences) {
    for (std::size_t i = sent.token_begin; i < sent.token_end; ++i) {
      if (a.tokens[i].kind != TokenKind::hashtag) continue;
      if (!detail::hashtag_is_ili_related(a, i, sent, res)) {
        d.kept = false;
        d.evidence.push_back({"unrelated_hashtag", a.tokens[i].span, a.tokens[i].surface});
      }
    }
  }
  return d;
}

inline StageDecision emoticon_stage(const TweetAnalysis& a) {
  StageDecision d;
  d.stage = "emoticon";
  for (const auto& t : a.tokens) {
    if (t.kind == TokenKind::emoticon) {
      d.kept = false;
      d.evidence.push_back({"emoticon_present", t.span, t.surface});
    }
  }
  return d;
}

inline StageDecision humor_stage(const Tweet& tweet, const FilterResources& res) {
  StageDecision d;
  d.stage = "humor";
  std::string lowered = to_lower(tweet.text);
  for (const auto& pat : res.humor) {
    std::smatch m;
    if (std::regex_search(lowered, m, pat.regex)) {
      d.kept = false;
      Span span{static_cast<std::size_t>(m.position(0)),
                static_cast<std::size_t>(m.position(0)) + static_cast<std::size_t>(m.length(0))};
      d.evidence.push_back({"humor_pattern", span, pat.source});
    }
  }
  return d;
}

inline StageDecision negation_stage(const TweetAnalysis& a, const NegationConfig& cfg) {
  StageDecision d;
  d.stage = "negation";
  if (auto verdict = first_governed(a.tokens, a.sentences, cfg)) {
    d.kept = false;
    d.evidence.push_back({"negated_target", verdict->target_span, verdict->rule_fired});
    d.evidence.push_back({"negation_cue", verdict->negation_span, ""});
  }
  return d;
}

inline StageDecision geo_stage(const Tweet& tweet, const PipelineConfig& cfg,
                               const FilterResources& res) {
  StageDecision d;
  d.stage = "geo";
  std::string location = tweet.user_location.value_or("");
  GeoResolution geo = resolve_country(location, res.gazetteer, res.bboxes, res.external.get());
  if (!geo.country) {
    d.kept = false;
    d.evidence.push_back({"unresolved_location", std::nullopt, location});
  } else if (*geo.country != cfg.geo_target) {
    d.kept = false;
    d.evidence.push_back({"foreign_location", std::nullopt,
                          *geo.country + " via " + to_string(geo.method)});
  }
  return d;
}

struct PipelineResult {
  bool kept = true;
  std::vector<StageDecision> trace;
};

inline PipelineResult run_pipeline(const Tweet& tweet, const PipelineConfig& cfg,
                                   const FilterResources& res) {
  PipelineResult result;
  TweetAnalysis a = TweetAnalysis::run(tweet, res);

  auto apply = [&](StageDecision d) {
    result.trace.push_back(std::move(d));
    if (!result.trace.back().kept) result.kept = false;
    return result.kept;
  };

  if (!apply(keyword_stage(a, cfg.keyword_method))) return result;
  if (cfg.remove_url && !apply(url_stage(a))) return result;
  for (const auto& stage : cfg.semantic_stages) {
    StageDecision d;
    if (stage == "negation")
      d = negation_stage(a, cfg.negation);
    else if (stage == "hashtags")
      d = hashtag_stage(a, res);
    else if (stage == "emoticon")
      d = emoticon_stage(a);
    else if (stage == "humor")
      d = humor_stage(tweet, res);
    else
      d = geo_stage(tweet, cfg, res);
    if (!apply(std::move(d))) return result;
  }
  return result;
}

}  // namespace ilitrack
