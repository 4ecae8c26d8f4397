#pragma once

// Self-contained SVG figures from run logs.

#include <optional>
#include <string>
#include <vector>

#include "plume/simulator.hpp"

namespace plume {

enum class PlotKind { kTrajectory, kTimeseries };

PlotKind parse_plot_kind(const std::string& s);

// Head-point path with start/end markers, plus the plume centroid path
// when supplied.
std::string render_trajectory(const RunLog& log, const std::vector<Vec2>& source_path);

// Four sensor series, their mean and a horizontal reference at c0.
std::string render_timeseries(const RunLog& log, double c0);

}  // namespace plume
