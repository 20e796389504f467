#pragma once

#include "tsg/common.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace tsg {

using LabelSet = std::set<std::string>;

/// Fraction of samples whose predicted set contains the whole true set.
double contain_accuracy(const std::vector<LabelSet>& predicted, const std::vector<LabelSet>& truth);

/// Mean per-sample average precision of the label ranking induced by
/// `scores` (samples x vocab). Equal scores rank by vocabulary index. Samples
/// with an empty true set are skipped.
double sample_auprc(const Mat& scores, const std::vector<LabelSet>& truth, const std::vector<std::string>& vocab);

/// Average precision of one ranking; `relevant[k]` marks rank k (0 = best).
double average_precision(const std::vector<bool>& relevant);

/// Most frequent label over the members of each cluster; ties go to the
/// lexicographically smallest label. Noise (-1) is ignored. Clusters whose
/// members are all unlabeled get no entry.
std::map<int, std::string> primary_labels(const std::vector<int>& assignment, const std::vector<LabelSet>& labels);

/// Fraction of clustered samples whose label set contains their cluster's
/// primary label.
double multilabel_acc(const std::vector<int>& assignment, const std::vector<LabelSet>& labels,
                      const std::map<int, std::string>& primary);

/// Mean silhouette (Euclidean) over samples with assignment != -1. Throws
/// ValidationError when fewer than two clusters are present.
double silhouette_clustered(const Mat& x, const std::vector<int>& assignment);

/// Sentinel form: nullopt instead of throwing for the degenerate case.
std::optional<double> try_silhouette_clustered(const Mat& x, const std::vector<int>& assignment);

}  // namespace tsg
