#pragma once

#include <cstdint>
#include <vector>

#include "mcc/errors.hpp"

namespace mcc {

using LabelVector = std::vector<int>;

/// counts[i][j] = number of samples with predicted label i and true label j.
struct ContingencyTable {
    std::vector<std::vector<long long>> counts;
    long long total = 0;

    std::size_t rows() const { return counts.size(); }
    std::size_t cols() const { return counts.empty() ? 0 : counts.front().size(); }
};

ContingencyTable contingency(const LabelVector& pred, const LabelVector& truth);

/// Fraction of samples matched under the best one-to-one cluster/class
/// assignment (optimal assignment on the contingency table; the table is
/// zero-padded to square when cluster and class counts differ). In [0,1].
double clustering_accuracy(const LabelVector& pred, const LabelVector& truth);

/// Normalized mutual information with geometric-mean normalization:
/// I(pred;true)/sqrt(H(pred) H(true)); 0 when either marginal entropy is 0.
double nmi(const LabelVector& pred, const LabelVector& truth);

/// Adjusted Rand index. 1 iff the partitions are identical up to
/// relabeling; degenerate 0/0 cases return 1.
double ari(const LabelVector& pred, const LabelVector& truth);

/// Minimum-cost perfect assignment on a square cost matrix; returns
/// row_of_column (column j is matched to row row_of[j]).
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace mcc
