#pragma once

// Epi-week bucketing, normalization, and correlation against a gold
// weekly series. Weeks run Sunday through Saturday. Pearson r uses the
// standard product-moment form; significance comes from the exact
// Student-t relation via the regularized incomplete beta function, and
// method comparisons use the Fisher z approximation.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ilitrack/errors.hpp"
#include "ilitrack/util.hpp"

namespace ilitrack {

using Days = std::chrono::sys_days;

inline std::optional<Days> parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(std::string(s).c_str(), "%d-%d-%d", &y, &m, &d) != 3) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(m)},
                                  std::chrono::day{unsigned(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Days{ymd};
}

inline std::string format_date(Days d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", int(ymd.year()), unsigned(ymd.month()),
                unsigned(ymd.day()));
  return buf;
}

struct EpiWeek {
  int index = 0;  // 1-based
  Days start;     // Sunday
  Days end;       // Saturday, start + 6 days
};

// A surveillance season: `weeks` consecutive Sunday-to-Saturday weeks.
class Season {
 public:
  Season(Days start, int weeks) : start_(start), weeks_(weeks) {
    if (std::chrono::weekday{start} != std::chrono::Sunday)
      throw ConfigError("season start " + format_date(start) + " is not a Sunday");
    if (weeks < 1) throw ConfigError("season must span at least one week");
  }

  static Season from_strings(std::string_view start_date, int weeks) {
    auto d = parse_date(start_date);
    if (!d) throw ConfigError("bad season start date: " + std::string(start_date));
    return Season(*d, weeks);
  }

  Days start() const { return start_; }
  int weeks() const { return weeks_; }

  EpiWeek week(int index) const {
    if (index < 1 || index > weeks_) throw ConfigError("week index out of season");
    Days s = start_ + std::chrono::days{7 * (index - 1)};
    return {index, s, s + std::chrono::days{6}};
  }

  // Week index for a UTC timestamp, absent when out of season.
  std::optional<int> assign(std::int64_t epoch_seconds) const {
    Days day = std::chrono::floor<std::chrono::days>(
        std::chrono::sys_seconds{std::chrono::seconds{epoch_seconds}});
    auto delta = (day - start_).count();
    if (delta < 0) return std::nullopt;
    int idx = static_cast<int>(delta / 7) + 1;
    if (idx > weeks_) return std::nullopt;
    return idx;
  }

 private:
  Days start_;
  int weeks_;
};

struct WeeklySeries {
  Days season_start{};
  std::vector<std::uint64_t> filtered;  // index 0 = week 1
  std::vector<std::uint64_t> total;
  std::vector<double> normalized;
  std::uint64_t out_of_season = 0;
  std::uint64_t zero_total_weeks = 0;  // set by normalize
};

// Accumulates per-week totals and survivor counts. Partial aggregators
// from parallel shards merge by addition.
class WeeklyAggregator {
 public:
  explicit WeeklyAggregator(const Season& season)
      : season_(season), filtered_(static_cast<std::size_t>(season.weeks()), 0),
        total_(static_cast<std::size_t>(season.weeks()), 0) {}

  void add(std::int64_t epoch_seconds, bool kept) {
    auto idx = season_.assign(epoch_seconds);
    if (!idx) {
      ++out_of_season_;
      return;
    }
    std::size_t i = static_cast<std::size_t>(*idx - 1);
    ++total_[i];
    if (kept) ++filtered_[i];
  }

  void merge(const WeeklyAggregator& other) {
    for (std::size_t i = 0; i < total_.size(); ++i) {
      filtered_[i] += other.filtered_[i];
      total_[i] += other.total_[i];
    }
    out_of_season_ += other.out_of_season_;
  }

  WeeklySeries series() const {
    WeeklySeries s;
    s.season_start = season_.start();
    s.filtered = filtered_;
    s.total = total_;
    s.out_of_season = out_of_season_;
    return s;
  }

 private:
  Season season_;
  std::vector<std::uint64_t> filtered_;
  std::vector<std::uint64_t> total_;
  std::uint64_t out_of_season_ = 0;
};

// normalized_i = K * filtered_i / total_i; zero-total weeks normalize
// to 0 and are counted so callers can warn.
inline void normalize(WeeklySeries& s, double k) {
  if (!(k > 0.0)) throw ConfigError("normalization constant K must be positive");
  s.normalized.assign(s.filtered.size(), 0.0);
  s.zero_total_weeks = 0;
  for (std::size_t i = 0; i < s.filtered.size(); ++i) {
    if (s.total[i] == 0) {
      ++s.zero_total_weeks;
      continue;
    }
    s.normalized[i] = k * static_cast<double>(s.filtered[i]) / static_cast<double>(s.total[i]);
  }
}

struct GoldSeries {
  std::vector<double> values;  // index 0 = week 1
};

// CSV `week,value`, exactly `weeks` rows covering 1..weeks once each.
inline GoldSeries load_gold(const std::string& path, int weeks) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open gold series: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("gold file empty: " + path);
  auto header = csv_split(line);
  if (header.size() != 2 || trim(header[0]) != "week" || trim(header[1]) != "value")
    throw ConfigError("gold header must be week,value: " + path);
  GoldSeries gold;
  gold.values.assign(static_cast<std::size_t>(weeks), std::numeric_limits<double>::quiet_NaN());
  std::uint64_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto fields = csv_split(line);
    if (fields.size() != 2)
      throw ConfigError("gold row " + std::to_string(row_no) + " needs 2 fields");
    int week = 0;
    try {
      week = std::stoi(fields[0]);
    } catch (const std::exception&) {
      throw ConfigError("gold row " + std::to_string(row_no) + ": bad week number");
    }
    if (week < 1 || week > weeks)
      throw ConfigError("gold week " + std::to_string(week) + " outside 1.." +
                        std::to_string(weeks));
    std::size_t i = static_cast<std::size_t>(week - 1);
    if (!std::isnan(gold.values[i]))
      throw ConfigError("gold week " + std::to_string(week) + " duplicated");
    double value = std::numeric_limits<double>::quiet_NaN();
    try {
      std::size_t used = 0;
      value = std::stod(fields[1], &used);
      if (trim(std::string_view(fields[1]).substr(used)) != "") throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError("gold row " + std::to_string(row_no) + ": bad value");
    }
    if (value < 0.0)
      throw ConfigError("gold week " + std::to_string(week) + " is negative");
    gold.values[i] = value;
  }
  for (int w = 1; w <= weeks; ++w)
    if (std::isnan(gold.values[static_cast<std::size_t>(w - 1)]))
      throw ConfigError("gold week " + std::to_string(w) + " missing");
  return gold;
}

// Standard product-moment correlation.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw StatsError("length_mismatch", "series lengths differ");
  std::size_t n = x.size();
  if (n < 2) throw StatsError("too_short", "need at least 2 paired samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw StatsError("zero_variance", "constant series");
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

namespace detail {

// Continued-fraction core of the regularized incomplete beta function
// (modified Lentz), valid for x < (a+1)/(a+b+2).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double ibeta_reg(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided p for H0: rho = 0, via t = r*sqrt(n-2)/sqrt(1-r^2) with
// n-2 degrees of freedom. P(|T| > t) = I_{v/(v+t^2)}(v/2, 1/2).
inline double pearson_pvalue(double r, std::size_t n) {
  if (n < 3) throw StatsError("insufficient_n", "p-value needs n >= 3");
  if (!(r >= -1.0 && r <= 1.0)) throw StatsError("bad_r", "correlation outside [-1,1]");
  if (r == 1.0 || r == -1.0) return 0.0;  // beyond machine-representable significance
  double v = static_cast<double>(n - 2);
  double t2 = r * r * v / (1.0 - r * r);
  return detail::ibeta_reg(v / 2.0, 0.5, v / (v + t2));
}

struct ComparisonResult {
  double z = 0.0;  // Fisher z statistic
  double p = 1.0;  // two-sided normal p
};

// Independent-samples comparison of two correlations via Fisher
// z-transform; an approximation, adequate for ranking methods.
inline ComparisonResult compare_correlations(double r1, std::size_t n1, double r2,
                                             std::size_t n2) {
  if (n1 < 4 || n2 < 4) throw StatsError("insufficient_n", "comparison needs n >= 4");
  if (!(std::fabs(r1) < 1.0) || !(std::fabs(r2) < 1.0))
    throw StatsError("bad_r", "comparison needs |r| < 1");
  double se = std::sqrt(1.0 / static_cast<double>(n1 - 3) + 1.0 / static_cast<double>(n2 - 3));
  double z = (std::atanh(r1) - std::atanh(r2)) / se;
  double p = std::erfc(std::fabs(z) / std::sqrt(2.0));
  return {z, p};
}

struct MethodResult {
  std::string name;
  std::uint64_t tweets = 0;  // survivor total across weeks
  double r = 0.0;
  double p = 1.0;
  std::size_t n = 0;  // paired weeks used
};

struct ComparisonRow {
  std::string method_a;
  std::string method_b;
  double z = 0.0;
  double p = 1.0;
};

struct CorrelationReport {
  std::vector<MethodResult> methods;
  std::vector<ComparisonRow> comparisons;
  std::size_t excluded_trailing_weeks = 0;
};

// Pairs a normalized weekly series with the gold series. Trailing
// weeks with zero total tweets carry no observation and are excluded
// (counted, so callers can warn) rather than treated as rate 0.
inline std::pair<std::vector<double>, std::vector<double>> pair_series(
    const WeeklySeries& series, const GoldSeries& gold, std::size_t* excluded = nullptr) {
  if (series.normalized.size() != gold.values.size())
    throw StatsError("length_mismatch", "series and gold cover different week counts");
  std::size_t n = series.normalized.size();
  while (n > 0 && series.total[n - 1] == 0) --n;
  if (excluded) *excluded = series.normalized.size() - n;
  std::vector<double> x(gold.values.begin(), gold.values.begin() + static_cast<long>(n));
  std::vector<double> y(series.normalized.begin(),
                        series.normalized.begin() + static_cast<long>(n));
  return {std::move(x), std::move(y)};
}

inline void write_series(const std::string& path, const WeeklySeries& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write series: " + path);
  out << "week,filtered,total,normalized\n";
  for (std::size_t i = 0; i < s.filtered.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.normalized.empty() ? 0.0 : s.normalized[i]);
    out << (i + 1) << ',' << s.filtered[i] << ',' << s.total[i] << ',' << buf << '\n';
  }
}

inline WeeklySeries load_series(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open series: " + path);
  std::string line;
  if (!std::getline(in, line) || csv_split(line).size() != 4)
    throw ConfigError("series header must be week,filtered,total,normalized: " + path);
  WeeklySeries s;
  std::uint64_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    auto f = csv_split(line);
    if (f.size() != 4)
      throw ConfigError("series row " + std::to_string(row_no) + " needs 4 fields: " + path);
    try {
      if (std::stoull(f[0]) != s.filtered.size() + 1)
        throw ConfigError("series row " + std::to_string(row_no) + " out of order: " + path);
      s.filtered.push_back(std::stoull(f[1]));
      s.total.push_back(std::stoull(f[2]));
      s.normalized.push_back(std::stod(f[3]));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("series row " + std::to_string(row_no) + " malformed: " + path);
    }
  }
  if (s.filtered.empty()) throw ConfigError("series has no rows: " + path);
  return s;
}

// Display convention for reports: r as a percent, two decimals.
inline std::string format_percent(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", r * 100.0);
  return buf;
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// p-values below double precision print as an inequality, matching how
// statistical software reports them.
inline std::string format_pvalue(double p) {
  if (p < 2.2e-16) return "<2.2e-16";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", p);
  return buf;
}

}  // namespace ilitrack
