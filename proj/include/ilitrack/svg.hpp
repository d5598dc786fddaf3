#pragma once

// Dependency-free SVG line charts: one polyline per weekly series,
// axes, ticks, and a legend. Output is deterministic (fixed layout,
// fixed palette, coordinates printed with two decimals) so chart files
// can be compared byte for byte across runs.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "ilitrack/errors.hpp"

namespace ilitrack {

struct ChartSeries {
  std::string name;
  std::vector<double> values;  // index 0 = week 1
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

// When scale_each is set every series is divided by its own maximum,
// which overlays series of very different magnitudes the way a shared
// chart with per-series scale constants would.
inline std::string render_line_chart(const std::vector<ChartSeries>& series,
                                     const std::string& title, bool scale_each = true) {
  if (series.empty()) throw ConfigError("chart needs at least one series");
  std::size_t weeks = series.front().values.size();
  for (const auto& s : series)
    if (s.values.size() != weeks || weeks < 2)
      throw ConfigError("chart series must share one length >= 2");

  const double width = 960, height = 520;
  const double left = 70, right = 30, top = 50, bottom = 60;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  const std::size_t palette_n = sizeof kPalette / sizeof kPalette[0];

  std::vector<std::vector<double>> scaled;
  double y_max = 0.0;
  for (const auto& s : series) {
    double m = *std::max_element(s.values.begin(), s.values.end());
    std::vector<double> v = s.values;
    if (scale_each && m > 0.0)
      for (auto& x : v) x /= m;
    for (double x : v) y_max = std::max(y_max, x);
    scaled.push_back(std::move(v));
  }
  if (y_max <= 0.0) y_max = 1.0;
  y_max *= 1.05;

  auto x_of = [&](std::size_t i) {
    return left + plot_w * static_cast<double>(i) / static_cast<double>(weeks - 1);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) +
         "\" height=\"" + detail::num(height) + "\" viewBox=\"0 0 " + detail::num(width) + " " +
         detail::num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + detail::num(width / 2) + "\" y=\"28\" text-anchor=\"middle\" " +
         "font-family=\"sans-serif\" font-size=\"18\">" + detail::xml_escape(title) +
         "</text>\n";

  // horizontal grid with value ticks
  for (int g = 0; g <= 5; ++g) {
    double v = y_max * g / 5.0;
    double y = y_of(v);
    svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(y) + "\" x2=\"" +
           detail::num(left + plot_w) + "\" y2=\"" + detail::num(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::num(left - 8) + "\" y=\"" + detail::num(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::tick_label(v) + "</text>\n";
  }
  // x ticks each 5 weeks plus the last
  for (std::size_t i = 0; i < weeks; ++i) {
    if (i % 5 != 0 && i != weeks - 1) continue;
    double x = x_of(i);
    svg += "<line x1=\"" + detail::num(x) + "\" y1=\"" + detail::num(top + plot_h) + "\" x2=\"" +
           detail::num(x) + "\" y2=\"" + detail::num(top + plot_h + 5) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::num(x) + "\" y=\"" + detail::num(top + plot_h + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           std::to_string(i + 1) + "</text>\n";
  }
  svg += "<text x=\"" + detail::num(left + plot_w / 2) + "\" y=\"" +
         detail::num(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">week</text>\n";

  // axes
  svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top) + "\" x2=\"" +
         detail::num(left) + "\" y2=\"" + detail::num(top + plot_h) +
         "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
  svg += "<line x1=\"" + detail::num(left) + "\" y1=\"" + detail::num(top + plot_h) +
         "\" x2=\"" + detail::num(left + plot_w) + "\" y2=\"" + detail::num(top + plot_h) +
         "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % palette_n];
    std::string points;
    for (std::size_t i = 0; i < weeks; ++i) {
      if (i) points += ' ';
      points += detail::num(x_of(i)) + "," + detail::num(y_of(scaled[s][i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    double ly = top + 16.0 + 18.0 * static_cast<double>(s);
    svg += "<line x1=\"" + detail::num(left + plot_w - 150) + "\" y1=\"" + detail::num(ly - 4) +
           "\" x2=\"" + detail::num(left + plot_w - 120) + "\" y2=\"" + detail::num(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::num(left + plot_w - 112) + "\" y=\"" + detail::num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + detail::xml_escape(series[s].name) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace ilitrack
