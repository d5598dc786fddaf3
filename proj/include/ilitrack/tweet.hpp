#pragma once

// The message unit: one micro-blog post with id, UTC timestamp, text,
// author id and the free-text profile location (optional). Records
// travel as JSON lines; timestamps are normalized to UTC epoch seconds
// at ingestion and re-serialized canonically.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ilitrack/errors.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

struct Tweet {
  std::string id;
  std::int64_t created_at = 0;  // UTC epoch seconds
  std::string text;
  std::string user_id;
  std::optional<std::string> user_location;
};

// One recoverable per-line failure inside a record stream.
struct ParseIssue {
  std::uint64_t line_no = 0;  // 1-based
  std::string message;
};

namespace detail {

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len,
                             int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < len; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

// Parses ISO-8601 "YYYY-MM-DDTHH:MM:SS" with a required zone designator
// ("Z", "+HH:MM", "+HHMM") and optional fractional seconds (dropped).
// A space is accepted in place of 'T'. Returns UTC epoch seconds, or
// nullopt when the text is not a real instant.
inline std::optional<std::int64_t> parse_iso8601_utc(std::string_view s) {
  using namespace std::chrono;
  s = trim(s);
  int y, mo, d, h, mi, se;
  if (!detail::parse_fixed_uint(s, 0, 4, y)) return std::nullopt;
  if (s.size() < 19 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  if (s[13] != ':' || s[16] != ':') return std::nullopt;
  if (!detail::parse_fixed_uint(s, 5, 2, mo) || !detail::parse_fixed_uint(s, 8, 2, d) ||
      !detail::parse_fixed_uint(s, 11, 2, h) || !detail::parse_fixed_uint(s, 14, 2, mi) ||
      !detail::parse_fixed_uint(s, 17, 2, se))
    return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos, ++digits;
    if (digits == 0) return std::nullopt;
  }

  std::int64_t offset_sec = 0;
  if (pos >= s.size()) return std::nullopt;  // zone designator required
  char zc = s[pos];
  if (zc == 'Z' || zc == 'z') {
    ++pos;
  } else if (zc == '+' || zc == '-') {
    int oh = 0, om = 0;
    std::size_t zp = pos + 1;
    if (!detail::parse_fixed_uint(s, zp, 2, oh)) return std::nullopt;
    zp += 2;
    if (zp < s.size() && s[zp] == ':') ++zp;
    if (!detail::parse_fixed_uint(s, zp, 2, om)) return std::nullopt;
    zp += 2;
    if (oh > 14 || om > 59) return std::nullopt;
    offset_sec = (zc == '+' ? 1 : -1) * (oh * 3600 + om * 60);
    pos = zp;
  } else {
    return std::nullopt;
  }
  if (pos != s.size()) return std::nullopt;

  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  if (h > 23 || mi > 59 || se > 59) return std::nullopt;

  std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  return days * 86400 + h * 3600 + mi * 60 + se - offset_sec;
}

inline std::string format_iso8601_utc(std::int64_t epoch_sec) {
  using namespace std::chrono;
  std::int64_t days = epoch_sec / 86400;
  std::int64_t rem = epoch_sec % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                static_cast<int>((rem / 60) % 60), static_cast<int>(rem % 60));
  return std::string(buf);
}

// Parses one JSON-lines record. Mandatory fields: id, created_at, text,
// user_id. user_location is optional; a missing or empty value means
// "no location". Any violation is a recoverable per-line error.
inline std::optional<Tweet> parse_record(std::string_view line, std::string* error = nullptr) {
  auto fail = [&](const char* msg) -> std::optional<Tweet> {
    if (error) *error = msg;
    return std::nullopt;
  };
  if (trim(line).empty()) return fail("empty line");

  nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return fail("not a JSON object");

  Tweet t;
  auto get_string = [&](const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
  };
  if (!get_string("id", t.id) || t.id.empty()) return fail("missing or empty id");
  std::string created;
  if (!get_string("created_at", created)) return fail("missing created_at");
  auto ts = parse_iso8601_utc(created);
  if (!ts) return fail("created_at is not a valid ISO-8601 UTC instant");
  t.created_at = *ts;
  if (!get_string("text", t.text)) return fail("missing text");
  if (!get_string("user_id", t.user_id)) return fail("missing user_id");

  auto loc = j.find("user_location");
  if (loc != j.end() && loc->is_string()) {
    std::string v = loc->get<std::string>();
    if (!v.empty()) t.user_location = std::move(v);
  }
  return t;
}

// Canonical serialization; nlohmann orders keys alphabetically, which
// keeps survivor files byte-stable across runs.
inline std::string write_record(const Tweet& t) {
  nlohmann::json j;
  j["id"] = t.id;
  j["created_at"] = format_iso8601_utc(t.created_at);
  j["text"] = t.text;
  j["user_id"] = t.user_id;
  if (t.user_location) j["user_location"] = *t.user_location;
  return j.dump();
}

}  // namespace ilitrack
