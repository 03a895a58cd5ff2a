#pragma once

#include <string>
#include <vector>

#include "mcc/numerics.hpp"
#include "mcc/rng.hpp"

namespace mcc {

/// A data point with its class label. Labels are available to evaluation
/// only; no training path reads them.
struct Sample {
    Vec x;
    int label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    int num_classes = 0;

    std::size_t size() const { return samples.size(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().x.size(); }
};

/// k isotropic unit-variance Gaussian clusters. For k <= dim+1 the means are
/// the vertices of a regular simplex with side `sep`, rotated by a random
/// orthonormal frame drawn from `rng`; for larger k the means fall back to
/// random directions at radius `sep`. Samples are ordered class-major.
Dataset make_blobs(int k, int n_per_class, int dim, double sep, Rng& rng);

/// k concentric rings (radius sep, 2*sep, ...) in the first two coordinates
/// with unit Gaussian noise on every coordinate. Requires dim >= 2.
Dataset make_rings(int k, int n_per_class, int dim, double sep, Rng& rng);

/// CSV rows of the form "label,v1,...,vd" (no header).
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

struct ClientDataset {
    int client_id = 0;
    std::vector<Sample> samples;
};

/// Class-balanced split: per class, a seeded shuffle then round-robin
/// assignment, so per-class counts across clients differ by at most one.
std::vector<ClientDataset> partition_iid(const Dataset& data, int k_clients, Rng& rng);

/// Disjoint contiguous class blocks: client k receives classes
/// [k*C/K, (k+1)*C/K). Throws IndivisibleClasses when C % K != 0.
std::vector<ClientDataset> partition_noniid(const Dataset& data, int k_clients);

}  // namespace mcc
