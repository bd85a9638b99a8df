#include "fds/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fds/errors.hpp"

namespace fds {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 0.05 * kWidth;
constexpr double kRight = 0.95 * kWidth;
constexpr double kTop = 0.05 * kHeight;
constexpr double kBottom = 0.95 * kHeight;
constexpr int kOverlaySamples = 200;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
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

struct Frame {
  double y_max = 1.0;
  double x(double theta) const { return kLeft + theta * (kRight - kLeft); }
  double y(double value) const { return kBottom - std::clamp(value, 0.0, y_max) / y_max * (kBottom - kTop); }
};

std::string polyline(const std::vector<std::pair<double, double>>& pts, const Frame& f, const char* colour,
                     const char* extra) {
  std::string out = "<polyline fill=\"none\" stroke=\"";
  out += colour;
  out += "\" stroke-width=\"2\"";
  out += extra;
  out += " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += num(f.x(pts[i].first)) + "," + num(f.y(pts[i].second));
  }
  out += "\"/>\n";
  return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options) {
  if (series.empty()) throw DomainError("nothing to plot");
  Frame f;
  for (const auto& s : series) {
    if (s.rows.empty()) throw DomainError("series '" + s.label + "' has no rows");
    for (const auto& r : s.rows) {
      if (r.theta && (*r.theta <= 0.0 || *r.theta >= 1.0)) throw DomainError("theta outside (0,1) in '" + s.label + "'");
      if (!std::isfinite(r.value)) throw DomainError("non-finite value in '" + s.label + "'");
      f.y_max = std::max(f.y_max, std::ceil(r.value * 4.0) / 4.0);
    }
  }

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" width=\"800\" height=\"600\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
  // axes and ticks
  svg += "<g stroke=\"#444\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(kRight) + "\" y2=\"" + num(kBottom) + "\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kBottom) + "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double t = i / 4.0;
    svg += "<line x1=\"" + num(f.x(t)) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(f.x(t)) + "\" y2=\"" +
           num(kBottom + 4) + "\"/>\n";
    double v = f.y_max * t;
    svg += "<line x1=\"" + num(kLeft - 4) + "\" y1=\"" + num(f.y(v)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" +
           num(f.y(v)) + "\"/>\n";
  }
  svg += "</g>\n<g font-family=\"sans-serif\" font-size=\"10\" fill=\"#444\">\n";
  for (int i = 0; i <= 4; ++i) {
    double t = i / 4.0;
    svg += "<text x=\"" + num(f.x(t)) + "\" y=\"" + num(kBottom + 14) + "\" text-anchor=\"middle\">" + num(t) + "</text>\n";
    double v = f.y_max * t;
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.y(v) + 3) + "\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  svg += "<text x=\"" + num(kRight) + "\" y=\"" + num(kBottom - 6) + "\" text-anchor=\"end\">theta</text>\n";
  svg += "</g>\n";

  std::vector<std::pair<std::string, std::string>> legend;  // label, colour
  if (options.overlay_u) {
    const auto [s, t] = *options.overlay_u;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= kOverlaySamples; ++i) {
      double theta = (i + 0.5) / (kOverlaySamples + 1);
      pts.emplace_back(theta, closed_form_u(s.to_double(), t.to_double(), theta));
    }
    svg += polyline(pts, f, "#999999", " stroke-dasharray=\"6 4\"");
    legend.emplace_back("min{" + s.str() + "/(1-theta), " + t.str() + "}", "#999999");
  }
  if (options.overlay_target) {
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= kOverlaySamples; ++i) {
      double theta = static_cast<double>(i) / kOverlaySamples;
      pts.emplace_back(theta, (*options.overlay_target)(theta));
    }
    svg += polyline(pts, f, "#555555", " stroke-dasharray=\"2 3\"");
    legend.emplace_back("target f", "#555555");
  }

  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* colour = kPalette[k % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : series[k].rows) {
      if (r.theta) pts.emplace_back(*r.theta, r.value);
    }
    if (pts.empty()) {
      // box estimate: one level across the whole axis
      pts = {{0.0, series[k].rows.front().value}, {1.0, series[k].rows.front().value}};
    }
    std::stable_sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first < b.first; });
    svg += polyline(pts, f, colour, "");
    legend.emplace_back(series[k].label, colour);
  }

  svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < legend.size(); ++i) {
    double y = kBottom - 16.0 * static_cast<double>(legend.size() - i);
    double x = kRight - 220.0;
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(y - 4) + "\" x2=\"" + num(x + 20) + "\" y2=\"" + num(y - 4) +
           "\" stroke=\"" + legend[i].second + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(x + 26) + "\" y=\"" + num(y) + "\">" + escape(legend[i].first) + "</text>\n";
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

}  // namespace fds
