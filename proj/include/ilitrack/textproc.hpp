#pragma once

// Deterministic surface processing shared by every filter stage:
// tokenization, sentence splitting, URL detection and emoticon
// spotting. Spans are byte offsets into the original UTF-8 text;
// non-ASCII bytes are treated as word characters and survive
// untouched (case normalization is ASCII lowercasing only).
//
// Tokenization rules:
//   - '#' + alphanumeric run     -> one hashtag token, norm without '#'
//   - '@' + alphanumeric run     -> one mention token
//   - token starting "http"      -> one url token covering the whole
//     non-space run, minus trailing sentence punctuation
//   - letters (with internal apostrophes) -> word; a trailing "n't"
//     splits into its own word token ("don't" -> "do" + "n't")
//   - digit runs                 -> number
//   - anything else              -> one punct token per byte
// With an emoticon lexicon supplied, literal emoticon matches
// (longest-first, left-to-right, non-overlapping) become emoticon
// tokens before any other rule applies.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

enum class TokenKind { word, hashtag, mention, url, emoticon, number, punct };

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;  // exclusive
};

struct Token {
  std::string surface;
  Span span;
  TokenKind kind = TokenKind::word;
  std::string norm;  // lowercased surface; hashtags without the leading '#'
};

struct Sentence {
  Span span;               // from first to last token of the sentence
  std::size_t token_begin = 0;
  std::size_t token_end = 0;  // exclusive index into the token list
};

// Set of literal emoticon strings, e.g. ":-)", "<3".
struct EmoticonLexicon {
  std::vector<std::string> literals;  // sorted by descending length
};

inline EmoticonLexicon make_emoticon_lexicon(std::vector<std::string> literals) {
  EmoticonLexicon lex;
  for (auto& l : literals)
    if (!l.empty()) lex.literals.push_back(std::move(l));
  std::sort(lex.literals.begin(), lex.literals.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  lex.literals.erase(std::unique(lex.literals.begin(), lex.literals.end()),
                     lex.literals.end());
  return lex;
}

// File format: one literal per line, UTF-8, '#'-prefixed comment lines
// and blank lines ignored.
inline EmoticonLexicon load_emoticon_lexicon(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open emoticon lexicon: " + path);
  std::vector<std::string> lits;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    lits.emplace_back(v);
  }
  return make_emoticon_lexicon(std::move(lits));
}

struct EmoticonMatch {
  std::string emoticon;
  Span span;
};

// Longest-match-first, left-to-right, non-overlapping literal scan.
inline std::vector<EmoticonMatch> detect_emoticons(std::string_view text,
                                                   const EmoticonLexicon& lex) {
  std::vector<EmoticonMatch> out;
  if (lex.literals.empty()) return out;
  std::size_t i = 0;
  while (i < text.size()) {
    bool matched = false;
    for (const auto& lit : lex.literals) {  // descending length
      if (lit.size() <= text.size() - i && text.compare(i, lit.size(), lit) == 0) {
        out.push_back({lit, {i, i + lit.size()}});
        i += lit.size();
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

namespace detail {

inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
// Non-ASCII bytes count as letters so UTF-8 sequences stay inside words.
inline bool is_word_char(unsigned char c) {
  return is_alpha(c) || is_digit(c) || c == '_' || c >= 0x80;
}
inline bool is_tag_char(unsigned char c) { return is_word_char(c); }

inline bool is_terminal_punct(char c) { return c == '.' || c == '!' || c == '?'; }

// Punctuation a tokenizer should not leave glued to the end of a URL.
inline bool is_url_trail_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' ||
         c == ')' || c == ']' || c == '}' || c == '\'' || c == '"';
}

}  // namespace detail

inline std::vector<Token> tokenize(std::string_view text,
                                   const EmoticonLexicon* emoticons = nullptr) {
  std::vector<Token> tokens;
  std::vector<EmoticonMatch> emo;
  std::size_t emo_next = 0;
  if (emoticons) emo = detect_emoticons(text, *emoticons);

  auto push = [&](std::size_t start, std::size_t end, TokenKind kind) {
    Token t;
    t.surface = std::string(text.substr(start, end - start));
    t.span = {start, end};
    t.kind = kind;
    if (kind == TokenKind::hashtag)
      t.norm = to_lower(std::string_view(t.surface).substr(1));
    else
      t.norm = to_lower(t.surface);
    tokens.push_back(std::move(t));
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_ascii_space(static_cast<char>(c))) {
      ++i;
      continue;
    }

    // Emoticon matches take priority over every other rule.
    while (emo_next < emo.size() && emo[emo_next].span.start < i) ++emo_next;
    if (emo_next < emo.size() && emo[emo_next].span.start == i) {
      push(i, emo[emo_next].span.end, TokenKind::emoticon);
      i = emo[emo_next].span.end;
      ++emo_next;
      continue;
    }
    auto emo_barrier = [&]() {
      return emo_next < emo.size() ? emo[emo_next].span.start : n;
    };

    if ((c == '#' || c == '@') && i + 1 < n &&
        detail::is_tag_char(static_cast<unsigned char>(text[i + 1]))) {
      std::size_t j = i + 1;
      std::size_t stop = std::min(n, emo_barrier());
      while (j < stop && detail::is_tag_char(static_cast<unsigned char>(text[j]))) ++j;
      push(i, j, c == '#' ? TokenKind::hashtag : TokenKind::mention);
      i = j;
      continue;
    }

    if (starts_with_ci(text.substr(i), "http")) {
      std::size_t j = i;
      std::size_t stop = std::min(n, emo_barrier());
      while (j < stop && !is_ascii_space(text[j])) ++j;
      // trailing sentence punctuation is not part of the url
      while (j > i + 4 && detail::is_url_trail_punct(text[j - 1])) --j;
      push(i, j, TokenKind::url);
      i = j;
      continue;
    }

    if (detail::is_alpha(c) || c >= 0x80 || c == '_') {
      std::size_t j = i;
      std::size_t stop = std::min(n, emo_barrier());
      while (j < stop) {
        unsigned char w = static_cast<unsigned char>(text[j]);
        if (detail::is_word_char(w)) {
          ++j;
        } else if (w == '\'' && j + 1 < stop &&
                   detail::is_word_char(static_cast<unsigned char>(text[j + 1]))) {
          ++j;  // internal apostrophe
        } else {
          break;
        }
      }
      // split a trailing "n't" into its own token (negation cue)
      std::size_t len = j - i;
      std::string lower = to_lower(text.substr(i, len));
      if (len > 3 && lower.size() >= 3 && lower.compare(lower.size() - 3, 3, "n't") == 0) {
        push(i, j - 3, TokenKind::word);
        push(j - 3, j, TokenKind::word);
      } else {
        push(i, j, TokenKind::word);
      }
      i = j;
      continue;
    }

    if (detail::is_digit(c)) {
      std::size_t j = i;
      std::size_t stop = std::min(n, emo_barrier());
      while (j < stop && detail::is_digit(static_cast<unsigned char>(text[j]))) ++j;
      push(i, j, TokenKind::number);
      i = j;
      continue;
    }

    push(i, i + 1, TokenKind::punct);
    ++i;
  }
  return tokens;
}

// Sentence boundaries fall after '.', '!' and '?' (runs of them close a
// single sentence) and after newlines; periods inside url tokens never
// split. A final unterminated segment forms the last sentence.
inline std::vector<Sentence> split_sentences(std::string_view text,
                                             const std::vector<Token>& tokens) {
  std::vector<Sentence> sentences;
  if (tokens.empty()) return sentences;

  auto close = [&](std::size_t begin, std::size_t end) {
    if (end <= begin) return;
    Sentence s;
    s.token_begin = begin;
    s.token_end = end;
    s.span = {tokens[begin].span.start, tokens[end - 1].span.end};
    sentences.push_back(s);
  };

  std::size_t begin = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    bool boundary = false;
    if (t.kind == TokenKind::punct && t.surface.size() == 1 &&
        detail::is_terminal_punct(t.surface[0])) {
      // absorb the whole terminal-punctuation run
      while (i + 1 < tokens.size() && tokens[i + 1].kind == TokenKind::punct &&
             tokens[i + 1].surface.size() == 1 &&
             detail::is_terminal_punct(tokens[i + 1].surface[0]))
        ++i;
      boundary = true;
    }
    if (!boundary && i + 1 < tokens.size()) {
      std::string_view gap = text.substr(t.span.end, tokens[i + 1].span.start - t.span.end);
      if (gap.find('\n') != std::string_view::npos) boundary = true;
    }
    if (boundary) {
      close(begin, i + 1);
      begin = i + 1;
    }
  }
  close(begin, tokens.size());
  return sentences;
}

inline bool contains_url(const std::vector<Token>& tokens) {
  return std::any_of(tokens.begin(), tokens.end(),
                     [](const Token& t) { return t.kind == TokenKind::url; });
}

}  // namespace ilitrack
