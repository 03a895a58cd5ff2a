#pragma once

#include <cstddef>
#include <vector>

#include "mcc/errors.hpp"

namespace mcc {

using Vec = std::vector<double>;

/// Tags which orientation a representation batch is stored in.
/// `instance`: one column per sample (d1 x n).
/// `cluster`: one column per cluster (n entries each), i.e. the transposed
/// orientation the cluster-level contrastive loss and the entropy consume.
enum class Layout { instance, cluster };

/// A batch of representation vectors, stored column-wise. All losses and
/// representation-space gradients operate on this type.
struct RepBatch {
    std::vector<Vec> cols;
    Layout layout{Layout::instance};

    std::size_t size() const { return cols.size(); }
    std::size_t dim() const { return cols.empty() ? 0 : cols.front().size(); }
};

double dot(const Vec& u, const Vec& v);
double norm2(const Vec& u);

/// Sum of absolute entries.
double l1_norm(const Vec& u);

/// u.v / (|u||v|), clamped to [-1, 1] so downstream exp(s/tau) never sees
/// round-off spill past the mathematical bounds.
/// Throws ZeroNormVector if either norm is zero, DimMismatch on unequal dims.
double cosine_similarity(const Vec& u, const Vec& v);

/// Rearranges n rows of dimension d into a cluster-layout batch of d columns
/// of dimension n.
RepBatch cluster_batch_from_rows(const std::vector<Vec>& rows);

/// Shared precondition of the contrastive ops: equal column counts and
/// dimensions, at least two columns.
void check_contrastive_pair(const RepBatch& u, const RepBatch& v);

// In-place y += a*x.
void axpy(double a, const Vec& x, Vec& y);

}  // namespace mcc
