#pragma once

#include "tsg/common.hpp"

#include <vector>

namespace tsg {

struct HdbscanResult {
    std::vector<int> labels;  // -1 = noise, clusters numbered from 0
    int num_clusters = 0;
};

/// HDBSCAN* with excess-of-mass cluster selection over Euclidean distance.
/// `min_samples` <= 0 means "same as min_cluster_size". The root of the
/// condensed tree is never selected, except that a point set with zero spread
/// forms a single cluster.
HdbscanResult hdbscan(const Mat& x, int min_cluster_size, int min_samples = 0);

}  // namespace tsg
