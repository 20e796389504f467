#pragma once

#include "tsg/common.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsg {

/// Projection onto the two leading principal components (N x 2). Component
/// signs are fixed so that each axis' largest-magnitude loading is positive.
Mat pca_2d(const Mat& x);

/// Scatter plot of 2-D points coloured by cluster (-1 drawn grey).
void write_scatter_svg(const std::filesystem::path& path, const Mat& points, const std::vector<int>& assignment,
                       const std::string& title);

}  // namespace tsg
