#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace metacure::cli {

// Renders a square grid of values as a self-contained SVG: color-mapped
// cells, axis tick labels at the corners, and a labeled color bar. Values
// are row-major with y varying first (index iy * n + ix), matching the grid
// structs produced by the training loop. No external references.
void write_heatmap_svg(const std::filesystem::path& path, std::size_t n,
                       const std::vector<double>& xs, const std::vector<double>& ys,
                       const std::vector<double>& values, const std::string& title);

}  // namespace metacure::cli
