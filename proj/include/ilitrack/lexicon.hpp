#pragma once

// Named keyword lexicons and a compiled multi-pattern phrase matcher.
//
// Matching is word-boundary token matching, never substring: a phrase
// matches iff its word sequence equals a contiguous run of token norms
// of kind word/number ("flu" never fires inside "fluent" or
// "influenza"). Hashtag tokens match single-word phrases against their
// norm without '#'. The matcher is an Aho-Corasick automaton over
// interned word ids, so compilation stays linear in total phrase
// length and a scan is linear in the token count regardless of how
// many phrases are loaded.

#include <cstddef>
#include <fstream>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/textproc.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

inline constexpr std::size_t kMaxPhraseWords = 6;

struct Lexicon {
  std::string name;
  std::set<std::string> phrases;  // token-normalized: lowercase, single spaces
};

// File format: one phrase per line, UTF-8, '#' comment lines and blank
// lines ignored. Duplicate lines collapse; a phrase longer than six
// words is a config error naming the offending line.
inline Lexicon load_lexicon(const std::string& path, std::string name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open lexicon: " + path);
  Lexicon lex;
  lex.name = std::move(name);
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    std::string phrase = normalize_phrase(v);
    if (phrase.empty()) continue;
    std::size_t words = split_ws(phrase).size();
    if (words > kMaxPhraseWords)
      throw ConfigError("phrase_too_long: " + path + " line " + std::to_string(line_no) +
                        " has " + std::to_string(words) + " words");
    lex.phrases.insert(std::move(phrase));
  }
  if (lex.phrases.empty()) throw ConfigError("empty_lexicon: " + path);
  return lex;
}

struct PhraseMatch {
  std::string_view lexicon;   // owning lexicon name
  std::string_view phrase;    // normalized phrase text
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // exclusive token index
};

class PhraseMatcher {
 public:
  explicit PhraseMatcher(const std::vector<Lexicon>& lexicons) {
    if (lexicons.empty()) throw ConfigError("no_lexicons: compile_matcher needs at least one");
    // Dedupe phrase text across lexicons; a shared phrase reports every owner.
    std::unordered_map<std::string, std::size_t> phrase_index;
    for (const auto& lex : lexicons) {
      for (const auto& p : lex.phrases) {
        auto [it, fresh] = phrase_index.emplace(p, phrases_.size());
        if (fresh) phrases_.push_back({p, {}, split_ws(p).size()});
        phrases_[it->second].owners.push_back(lex.name);
      }
    }

    nodes_.emplace_back();  // root
    for (std::size_t pid = 0; pid < phrases_.size(); ++pid) {
      int state = 0;
      for (const auto& word : split_ws(phrases_[pid].text)) {
        int sym = intern(word);
        auto& edges = nodes_[static_cast<std::size_t>(state)].edges;
        auto it = edges.find(sym);
        if (it == edges.end()) {
          int next = static_cast<int>(nodes_.size());
          edges.emplace(sym, next);
          nodes_.emplace_back();
          state = next;
        } else {
          state = it->second;
        }
      }
      nodes_[static_cast<std::size_t>(state)].outputs.push_back(pid);
      if (phrases_[pid].word_count == 1) {
        auto word = split_ws(phrases_[pid].text).front();
        single_word_[word].push_back(pid);
      }
    }
    build_failure_links();
  }

  // All phrase occurrences over the token list; overlapping matches of
  // different phrases are all reported.
  std::vector<PhraseMatch> match(const std::vector<Token>& tokens) const {
    std::vector<PhraseMatch> out;
    int state = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const Token& t = tokens[i];
      if (t.kind == TokenKind::word || t.kind == TokenKind::number) {
        state = step(state, lookup(t.norm));
        for (std::size_t pid : nodes_[static_cast<std::size_t>(state)].outputs)
          emit(out, pid, i + 1 - phrases_[pid].word_count, i + 1);
      } else {
        // any other token breaks phrase contiguity
        state = 0;
        if (t.kind == TokenKind::hashtag) {
          auto it = single_word_.find(t.norm);
          if (it != single_word_.end())
            for (std::size_t pid : it->second) emit(out, pid, i, i + 1);
        }
      }
    }
    return out;
  }

  std::size_t phrase_count() const { return phrases_.size(); }

 private:
  struct PhraseEntry {
    std::string text;
    std::vector<std::string> owners;
    std::size_t word_count = 0;
  };
  struct Node {
    std::unordered_map<int, int> edges;
    int fail = 0;
    std::vector<std::size_t> outputs;  // phrase ids, fail-closure merged
  };

  int intern(const std::string& word) {
    auto [it, fresh] = vocab_.emplace(word, static_cast<int>(vocab_.size()));
    (void)fresh;
    return it->second;
  }

  int lookup(const std::string& word) const {
    auto it = vocab_.find(word);
    return it == vocab_.end() ? -1 : it->second;
  }

  int step(int state, int sym) const {
    if (sym < 0) return 0;  // out-of-vocabulary word resets to root
    while (true) {
      const auto& edges = nodes_[static_cast<std::size_t>(state)].edges;
      auto it = edges.find(sym);
      if (it != edges.end()) return it->second;
      if (state == 0) return 0;
      state = nodes_[static_cast<std::size_t>(state)].fail;
    }
  }

  void build_failure_links() {
    std::queue<int> bfs;
    for (auto& [sym, child] : nodes_[0].edges) {
      nodes_[static_cast<std::size_t>(child)].fail = 0;
      bfs.push(child);
    }
    while (!bfs.empty()) {
      int cur = bfs.front();
      bfs.pop();
      for (auto& [sym, child] : nodes_[static_cast<std::size_t>(cur)].edges) {
        int f = step(nodes_[static_cast<std::size_t>(cur)].fail, sym);
        if (f == child) f = 0;  // root self-transition guard
        nodes_[static_cast<std::size_t>(child)].fail = f;
        auto& co = nodes_[static_cast<std::size_t>(child)].outputs;
        const auto& fo = nodes_[static_cast<std::size_t>(f)].outputs;
        co.insert(co.end(), fo.begin(), fo.end());
        bfs.push(child);
      }
    }
  }

  void emit(std::vector<PhraseMatch>& out, std::size_t pid, std::size_t begin,
            std::size_t end) const {
    for (const auto& owner : phrases_[pid].owners)
      out.push_back({owner, phrases_[pid].text, begin, end});
  }

  std::unordered_map<std::string, int> vocab_;
  std::vector<PhraseEntry> phrases_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::vector<std::size_t>> single_word_;
};

inline PhraseMatcher compile_matcher(const std::vector<Lexicon>& lexicons) {
  return PhraseMatcher(lexicons);
}

inline std::vector<PhraseMatch> match_phrases(const PhraseMatcher& matcher,
                                              const std::vector<Token>& tokens) {
  return matcher.match(tokens);
}

}  // namespace ilitrack
