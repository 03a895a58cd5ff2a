#pragma once

#include "mcc/numerics.hpp"

namespace mcc {

/// Temperature parameter of a contrastive loss; strictly positive.
struct Temperature {
    double value;
    explicit Temperature(double v) : value(v) {
        if (!(v > 0.0)) throw ValidationError("temperature must be > 0");
    }
};

/// Selects which part of the four-view loss a training step optimizes:
/// the full loss, the instance-level part (representation-learning stage),
/// or the cluster-level part (clustering stage).
enum class LossMode { full_mcc, instance_only, cluster_only };

/// The eight representation batches produced by feeding two augmented views
/// of a batch to both the online (O) and target (T) networks.
/// Instance batches hold n columns of dimension d1; cluster batches hold
/// d2 columns of dimension n (cluster layout).
struct FourViewBatch {
    RepBatch z_ao, z_bo, z_at, z_bt;
    RepBatch c_ao, c_bo, c_at, c_bt;
};

/// Sign applied to the entropy terms when they are assembled into the
/// clustering losses. Training minimizes the loss, and the cluster heads
/// must be pushed toward balanced (maximum-entropy) cluster masses to avoid
/// the trivial solution where every sample lands in one cluster, so the
/// assembled term is -H.
inline constexpr double kEntropyTermSign = -1.0;

/// Contrastive loss over paired column batches:
///   (1/n) sum_i -log[ exp(s(u_i,v_i)/tau) /
///                     sum_{j != i} (exp(s(u_i,u_j)/tau) + exp(s(u_i,v_j)/tau)) ]
/// The positive pair is not part of the denominator and the j = i terms are
/// excluded from both denominator sums. Exponents are stabilized by a
/// per-row max shift before exponentiation.
double contrastive_loss(const RepBatch& u, const RepBatch& v, Temperature tau);

/// Entropy of the normalized column L1 masses:
///   H = -sum_i (|c_i|_1 / |C|_1) log(|c_i|_1 / |C|_1)
/// Columns with zero mass contribute 0 (x log x -> 0 limit).
/// Throws AllZeroMatrix when every entry is zero.
double entropy(const RepBatch& c);

/// Two-view clustering loss:
///   1/2 (L(z_a, z_b; tau_i) + L(c_a, c_b; tau_c)) + sign*(H(c_a) + H(c_b))
double cc_loss(const RepBatch& z_a, const RepBatch& z_b, const RepBatch& c_a,
               const RepBatch& c_b, Temperature tau_i, Temperature tau_c);

/// Four-view momentum clustering loss:
///   1/2 (L(z_aO,z_bT) + L(z_aT,z_bO) + L(c_aO,c_bT) + L(c_aT,c_bO))
///   + sign*(H(c_aO) + H(c_bO) + H(c_aT) + H(c_bT))
double mcc_loss(const FourViewBatch& views, Temperature tau_i, Temperature tau_c);

/// Instance-level half of the four-view loss: 1/2 (L(z_aO,z_bT) + L(z_aT,z_bO)).
double instance_loss(const RepBatch& z_ao, const RepBatch& z_bt, const RepBatch& z_at,
                     const RepBatch& z_bo, Temperature tau_i);

/// Cluster-level half: 1/2 (L(c_aO,c_bT) + L(c_aT,c_bO)) plus the four
/// entropy terms. instance_loss + cluster_loss == mcc_loss.
double cluster_loss(const RepBatch& c_ao, const RepBatch& c_bt, const RepBatch& c_at,
                    const RepBatch& c_bo, Temperature tau_c);

}  // namespace mcc
