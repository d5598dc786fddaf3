#pragma once

// Streaming corpus access. Input is JSONL, plain or gzip, one record
// per line. Readers hold O(longest line) memory and never load a file
// whole, so multi-gigabyte archives stream in constant space. Malformed
// lines surface as per-line issues and never abort the stream.

#include <zlib.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/textproc.hpp"
#include "ilitrack/tweet.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

// Reads '\n'-terminated lines from a possibly gzip-compressed file.
// zlib transparently passes plain files through, so one code path
// serves both. A trailing unterminated line is still returned.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : path_(path) {
    file_ = gzopen(path.c_str(), "rb");
    if (!file_) throw IoError("cannot open corpus: " + path);
    gzbuffer(file_, 1 << 16);
  }
  ~LineReader() {
    if (file_) gzclose(file_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  // Fills `line` without the terminator. False at end of stream.
  bool next(std::string& line) {
    line.clear();
    char buf[1 << 12];
    while (true) {
      if (gzgets(file_, buf, sizeof buf) == nullptr) {
        check_error();
        return !line.empty();
      }
      std::string_view chunk(buf);
      if (!chunk.empty() && chunk.back() == '\n') {
        chunk.remove_suffix(1);
        if (!chunk.empty() && chunk.back() == '\r') chunk.remove_suffix(1);
        line.append(chunk);
        return true;
      }
      line.append(chunk);  // line longer than buffer, keep reading
    }
  }

 private:
  void check_error() {
    int errnum = 0;
    const char* msg = gzerror(file_, &errnum);
    if (errnum != Z_OK && errnum != Z_STREAM_END)
      throw IoError("read error in " + path_ + ": " + (msg ? msg : "unknown"));
  }

  std::string path_;
  gzFile file_ = nullptr;
};

// One corpus line: either a parsed record or the reason it failed.
using CorpusItem = std::variant<Tweet, ParseIssue>;

class CorpusReader {
 public:
  explicit CorpusReader(const std::string& path) : lines_(path) {}

  std::optional<CorpusItem> next() {
    std::string line;
    if (!lines_.next(line)) return std::nullopt;
    ++line_no_;
    if (trim(line).empty())  // blank lines are malformed records, position still advances
      return CorpusItem(ParseIssue{line_no_, "empty line"});
    std::string error;
    if (auto tweet = parse_record(line, &error)) return CorpusItem(std::move(*tweet));
    return CorpusItem(ParseIssue{line_no_, std::move(error)});
  }

  // Streams every record through `on_tweet`; issues go to `on_issue`
  // when given, otherwise they are counted and dropped.
  void for_each(const std::function<void(const Tweet&)>& on_tweet,
                const std::function<void(const ParseIssue&)>& on_issue = nullptr) {
    while (auto item = next()) {
      if (auto* t = std::get_if<Tweet>(&*item)) {
        on_tweet(*t);
      } else {
        ++issue_count_;
        if (on_issue) on_issue(std::get<ParseIssue>(*item));
      }
    }
  }

  std::uint64_t lines_read() const { return line_no_; }
  std::uint64_t issues_seen() const { return issue_count_; }

 private:
  LineReader lines_;
  std::uint64_t line_no_ = 0;
  std::uint64_t issue_count_ = 0;
};

struct CorpusStats {
  std::uint64_t total_tweets = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t unique_users = 0;
  std::uint64_t url_tweets = 0;
  std::uint64_t hashtag_tokens_total = 0;
  std::uint64_t hashtag_tokens_unique = 0;  // distinct by norm
};

// Single-pass corpus summary. Distinct-user and distinct-hashtag sets
// are the only unbounded state; both grow with vocabulary, not volume.
inline CorpusStats scan_corpus(const std::string& path,
                               const EmoticonLexicon* emoticons = nullptr) {
  CorpusReader reader(path);
  CorpusStats stats;
  std::set<std::string> users;
  std::set<std::string> hashtags;
  reader.for_each(
      [&](const Tweet& t) {
        ++stats.total_tweets;
        users.insert(t.user_id);
        auto tokens = tokenize(t.text, emoticons);
        if (contains_url(tokens)) ++stats.url_tweets;
        for (const auto& tok : tokens) {
          if (tok.kind != TokenKind::hashtag) continue;
          ++stats.hashtag_tokens_total;
          hashtags.insert(tok.norm);
        }
      },
      [&](const ParseIssue&) {});
  stats.parse_errors = reader.issues_seen();
  stats.unique_users = users.size();
  stats.hashtag_tokens_unique = hashtags.size();
  return stats;
}

}  // namespace ilitrack
