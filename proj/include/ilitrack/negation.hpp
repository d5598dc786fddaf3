#pragma once

// Rule-based negation scope. A negation cue governs the target word
// only when the nearest following occurrence of the target sits in the
// same clause and within a bounded token distance. Clauses split at
// comma/semicolon/colon and before the coordinating words "but", "so",
// "because", which keeps "not feeling well, got flu" from reading as a
// negated flu mention while "it's not swine flu" still is one.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ilitrack/textproc.hpp"

namespace ilitrack {

struct NegationConfig {
  std::set<std::string> terms = {"not", "n't", "never"};  // "no" is opt-in, too idiomatic
  std::set<std::string> targets = {"flu"};
  std::size_t window = 6;  // max index distance cue -> target
  std::set<std::string> punct_breakers = {",", ";", ":"};
  std::set<std::string> word_breakers = {"but", "so", "because"};
};

struct Clause {
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // exclusive
};

// Partitions [token_begin, token_end) of one sentence into clauses.
// Every token lands in exactly one clause: a punctuation breaker closes
// the clause it ends, a word breaker heads the clause it starts.
inline std::vector<Clause> split_clauses(const std::vector<Token>& tokens,
                                         std::size_t token_begin, std::size_t token_end,
                                         const NegationConfig& cfg) {
  std::vector<Clause> out;
  std::size_t begin = token_begin;
  for (std::size_t i = token_begin; i < token_end; ++i) {
    const Token& t = tokens[i];
    if (t.kind == TokenKind::punct && cfg.punct_breakers.count(t.norm)) {
      out.push_back({begin, i + 1});
      begin = i + 1;
    } else if (t.kind == TokenKind::word && cfg.word_breakers.count(t.norm) && i > begin) {
      out.push_back({begin, i});
      begin = i;
    }
  }
  if (begin < token_end) out.push_back({begin, token_end});
  return out;
}

struct NegationVerdict {
  bool governed = false;
  std::optional<Span> negation_span;
  std::optional<Span> target_span;  // governed implies both spans set
  std::string rule_fired;
};

inline bool is_negation_term(const Token& t, const NegationConfig& cfg) {
  return t.kind == TokenKind::word && cfg.terms.count(t.norm) > 0;
}

inline bool is_negation_target(const Token& t, const NegationConfig& cfg) {
  return t.kind == TokenKind::word && cfg.targets.count(t.norm) > 0;
}

// Indices of negation cues. The tokenizer has already split "don't"
// into "do" + "n't", so cues are plain word tokens.
inline std::vector<std::size_t> find_negations(const std::vector<Token>& tokens,
                                               const NegationConfig& cfg = {}) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (is_negation_term(tokens[i], cfg)) out.push_back(i);
  return out;
}

// Does the cue at `neg_index` govern the target? True iff the nearest
// following target occurrence in the sentence shares the cue's clause
// and lies within `window` positions. rule_fired records the deciding
// condition, pass or fail.
inline NegationVerdict governs(const std::vector<Token>& tokens,
                               const std::vector<Clause>& clauses, std::size_t neg_index,
                               std::size_t sent_token_end, const NegationConfig& cfg) {
  NegationVerdict v;
  std::optional<std::size_t> target;
  for (std::size_t j = neg_index + 1; j < sent_token_end; ++j) {
    if (is_negation_target(tokens[j], cfg)) {
      target = j;
      break;
    }
  }
  if (!target) {
    v.rule_fired = "no_following_target";
    return v;
  }
  auto clause_of = [&](std::size_t idx) -> std::size_t {
    for (std::size_t c = 0; c < clauses.size(); ++c)
      if (idx >= clauses[c].token_begin && idx < clauses[c].token_end) return c;
    return clauses.size();
  };
  if (clause_of(neg_index) != clause_of(*target)) {
    v.rule_fired = "clause_boundary";
    return v;
  }
  if (*target - neg_index > cfg.window) {
    v.rule_fired = "window_exceeded";
    return v;
  }
  v.governed = true;
  v.rule_fired = "clause_window";
  v.negation_span = tokens[neg_index].span;
  v.target_span = tokens[*target].span;
  return v;
}

// True when some sentence holds a governed target mention. Tweets
// whose text never mentions a target are never negation-dropped.
inline std::optional<NegationVerdict> first_governed(const std::vector<Token>& tokens,
                                                     const std::vector<Sentence>& sentences,
                                                     const NegationConfig& cfg = {}) {
  for (const auto& sent : sentences) {
    bool has_target = false;
    for (std::size_t i = sent.token_begin; i < sent.token_end; ++i)
      if (is_negation_target(tokens[i], cfg)) has_target = true;
    if (!has_target) continue;
    auto clauses = split_clauses(tokens, sent.token_begin, sent.token_end, cfg);
    for (std::size_t i = sent.token_begin; i < sent.token_end; ++i) {
      if (!is_negation_term(tokens[i], cfg)) continue;
      auto verdict = governs(tokens, clauses, i, sent.token_end, cfg);
      if (verdict.governed) return verdict;
    }
  }
  return std::nullopt;
}

}  // namespace ilitrack
