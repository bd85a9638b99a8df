#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fds/constructions.hpp"
#include "fds/io.hpp"

namespace fds {

/// One curve: (theta, value) points; rows without theta (box estimates)
/// become a horizontal line.
struct PlotSeries {
  std::string label;
  std::vector<CsvRow> rows;
};

struct PlotOptions {
  std::optional<std::pair<Rational, Rational>> overlay_u;  // (s, t)
  std::optional<Polynomial> overlay_target;
};

/// Deterministic SVG: 800x600 viewBox, 5% margins, theta on [0,1], dimension
/// on [0, max(1, largest value)].
std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& options = {});

}  // namespace fds
