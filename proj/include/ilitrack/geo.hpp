#pragma once

// Offline-first resolution of free-text profile locations to a
// country. Coordinates beat names, the shipped gazetteer beats the
// network, and an external geocoder is a pluggable last resort whose
// responses persist in an on-disk cache. Anything unresolved stays
// unresolved; the geo stage then drops it, which is the conservative
// reading of a country-restricted corpus.

#include <cstdio>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

namespace detail {

// Strictly parse one signed decimal number covering the whole field.
inline std::optional<double> parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') ++i;
  std::size_t digits = 0, dots = 0;
  for (; i < s.size(); ++i) {
    if (s[i] >= '0' && s[i] <= '9')
      ++digits;
    else if (s[i] == '.')
      ++dots;
    else
      return std::nullopt;
  }
  if (digits == 0 || dots > 1) return std::nullopt;
  return std::stod(std::string(s));
}

// Consume a mobile-client coordinate tag: "ÜT:" in any case mix,
// where Ü may appear as plain U. Returns the remainder, or the input
// unchanged when no tag is present.
inline std::string_view strip_coord_tag(std::string_view s) {
  std::string_view rest = s;
  if (rest.size() >= 2 && static_cast<unsigned char>(rest[0]) == 0xC3 &&
      (static_cast<unsigned char>(rest[1]) == 0x9C || static_cast<unsigned char>(rest[1]) == 0xBC))
    rest.remove_prefix(2);  // Ü / ü
  else if (!rest.empty() && (rest[0] == 'U' || rest[0] == 'u'))
    rest.remove_prefix(1);
  else
    return s;
  if (rest.empty() || (rest[0] != 'T' && rest[0] != 't')) return s;
  rest.remove_prefix(1);
  if (rest.empty() || rest[0] != ':') return s;
  rest.remove_prefix(1);
  return rest;
}

}  // namespace detail

// Recognizes "ÜT: lat,lon" and bare "lat,lon"; out-of-range or
// non-numeric content is simply not a coordinate.
inline std::optional<LatLon> parse_coordinates(std::string_view location) {
  std::string_view s = detail::strip_coord_tag(trim(location));
  std::size_t comma = s.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  if (s.find(',', comma + 1) != std::string_view::npos) return std::nullopt;
  auto lat = detail::parse_decimal(s.substr(0, comma));
  auto lon = detail::parse_decimal(s.substr(comma + 1));
  if (!lat || !lon) return std::nullopt;
  if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) return std::nullopt;
  return LatLon{*lat, *lon};
}

struct BBox {
  double lat_min, lat_max, lon_min, lon_max;
  bool contains(LatLon p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
  }
};

struct CountryBoxes {
  std::string country;
  std::vector<BBox> boxes;
  bool contains(LatLon p) const {
    for (const auto& b : boxes)
      if (b.contains(p)) return true;
    return false;
  }
};

// CONUS + Alaska + Hawaii as rectangles; a desk-scale approximation
// that is exact enough for corpus filtering.
inline CountryBoxes us_bounding_boxes() {
  return {"US",
          {{24.5, 49.4, -125.0, -66.9},      // contiguous states
           {51.2, 71.4, -179.15, -129.97},   // Alaska
           {18.9, 22.25, -160.3, -154.8}}};  // Hawaii
}

// Case-insensitive place name -> ISO country code.
class Gazetteer {
 public:
  void add(std::string_view name, std::string_view country) {
    entries_[normalize_phrase(name)] = std::string(country);
  }

  std::optional<std::string> lookup(std::string_view name) const {
    auto it = entries_.find(normalize_phrase(name));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

// CSV rows `name,country_code`; the last comma separates the code so
// names may themselves contain commas ("Washington, D.C.").
inline Gazetteer load_gazetteer(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open gazetteer: " + path);
  Gazetteer gaz;
  std::string line;
  std::uint64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    std::size_t comma = v.rfind(',');
    if (comma == std::string_view::npos || comma == 0 || comma + 1 == v.size())
      throw ConfigError("gazetteer row " + std::to_string(line_no) + " is not name,country: " +
                        path);
    gaz.add(v.substr(0, comma), trim(v.substr(comma + 1)));
  }
  if (gaz.size() == 0) throw ConfigError("empty gazetteer: " + path);
  return gaz;
}

// Last-resort resolver, typically HTTP-backed. Implementations return
// a country code, or nullopt for unknown/failed; they never throw
// across this boundary.
class ExternalGeocoder {
 public:
  virtual ~ExternalGeocoder() = default;
  virtual std::optional<std::string> lookup(const std::string& query) = 0;
};

// Wraps a geocoder with an on-disk response cache (CSV `query,country`,
// empty country marks a cached negative). At most one outbound request
// per distinct query per process, misses included.
class CachedGeocoder : public ExternalGeocoder {
 public:
  CachedGeocoder(std::shared_ptr<ExternalGeocoder> inner, std::string cache_path)
      : inner_(std::move(inner)), cache_path_(std::move(cache_path)) {
    load_cache();
  }

  std::optional<std::string> lookup(const std::string& query) override {
    std::string key = normalize_phrase(query);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end())
        return it->second.empty() ? std::nullopt : std::optional<std::string>(it->second);
    }
    std::optional<std::string> result;
    if (inner_) {
      ++outbound_;
      try {
        result = inner_->lookup(query);
      } catch (const std::exception&) {
        ++failures_;  // degrade to unresolved, never fatal
      }
    }
    std::lock_guard<std::mutex> lock(mu_);
    cache_[key] = result.value_or("");
    append_cache_row(key, result.value_or(""));
    return result;
  }

  std::uint64_t outbound_requests() const { return outbound_; }
  std::uint64_t failures() const { return failures_; }

 private:
  void load_cache() {
    std::ifstream in(cache_path_, std::ios::binary);
    if (!in) return;  // no cache yet
    std::string line;
    while (std::getline(in, line)) {
      auto fields = csv_split(line);
      if (fields.size() != 2) continue;
      cache_[fields[0]] = fields[1];
    }
  }

  void append_cache_row(const std::string& key, const std::string& country) {
    if (cache_path_.empty()) return;
    std::ofstream out(cache_path_, std::ios::binary | std::ios::app);
    out << csv_quote(key) << ',' << csv_quote(country) << '\n';
  }

  std::shared_ptr<ExternalGeocoder> inner_;
  std::string cache_path_;
  std::unordered_map<std::string, std::string> cache_;
  std::mutex mu_;
  std::uint64_t outbound_ = 0;
  std::uint64_t failures_ = 0;
};

enum class GeoMethod { coordinates, gazetteer, external, unresolved };

inline const char* to_string(GeoMethod m) {
  switch (m) {
    case GeoMethod::coordinates: return "coordinates";
    case GeoMethod::gazetteer: return "gazetteer";
    case GeoMethod::external: return "external";
    default: return "unresolved";
  }
}

struct GeoResolution {
  std::optional<std::string> country;  // present iff method != unresolved
  GeoMethod method = GeoMethod::unresolved;
  std::string raw;
};

// Resolution order: coordinates against the target's boxes, gazetteer
// over the full string then comma-separated suffixes right to left
// ("Brooklyn, NY" falls back to "NY"), then the external client.
// Coordinate strings never consult the gazetteer; they are not names.
inline GeoResolution resolve_country(const std::string& location, const Gazetteer& gazetteer,
                                     const CountryBoxes& bboxes,
                                     ExternalGeocoder* external = nullptr) {
  GeoResolution res;
  res.raw = location;
  if (trim(location).empty()) return res;

  if (auto point = parse_coordinates(location)) {
    if (bboxes.contains(*point)) {
      res.country = bboxes.country;
      res.method = GeoMethod::coordinates;
      return res;
    }
  } else {
    if (auto hit = gazetteer.lookup(location)) {
      res.country = *hit;
      res.method = GeoMethod::gazetteer;
      return res;
    }
    auto segments = split_char(location, ',');
    for (std::size_t i = segments.size(); i-- > 1;) {
      if (auto hit = gazetteer.lookup(segments[i])) {
        res.country = *hit;
        res.method = GeoMethod::gazetteer;
        return res;
      }
    }
  }

  if (external) {
    if (auto hit = external->lookup(location)) {
      res.country = *hit;
      res.method = GeoMethod::external;
      return res;
    }
  }
  return res;
}

}  // namespace ilitrack
