#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vtp/core/types.hpp"
#include "vtp/predict/predict.hpp"

namespace vtp::io {

struct ScatterSeries {
    std::string label;
    Matrix points;  // rows (north, east)
};

/// Scatter plot with east on the horizontal axis and north up.
std::string scatter_svg(const std::vector<ScatterSeries>& series, const std::vector<Trajectory>& lines,
                        const std::string& title);

/// Grey-scale heatmap of a density grid.
std::string heatmap_svg(const predict::PdfGrid& grid, const std::string& title);

}  // namespace vtp::io
