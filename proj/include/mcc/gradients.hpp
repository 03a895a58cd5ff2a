#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "mcc/losses.hpp"
#include "mcc/model.hpp"

namespace mcc {

/// d s(u,v) / du = v/(|u||v|) - s(u,v) u/|u|^2. Orthogonal to u; zero at
/// u parallel to v.
Vec cosine_grad(const Vec& u, const Vec& v);

/// xi_i = sum_{j != i} exp(s(u_i,u_j)/tau) + exp(s(u_i,v_j)/tau).
std::vector<double> xi_table(const RepBatch& u, const RepBatch& v, Temperature tau);

/// Gradient of contrastive_loss(u, v, tau) w.r.t. column u[ell]:
///   n tau dL/du_l = -s'(u_l,v_l)
///     + sum_{i != l} [ (1/xi_l + 1/xi_i) exp(s(u_l,u_i)/tau) s'(u_l,u_i)
///                      + (1/xi_l)        exp(s(u_l,v_i)/tau) s'(u_l,v_i) ]
/// The 1/xi_l factor on the u-v summand is required for the closed form to
/// match finite differences of the loss (see the oracle tests).
Vec contrastive_grad_u(const RepBatch& u, const RepBatch& v, Temperature tau, std::size_t ell);

/// Gradient w.r.t. column v[ell]:
///   n tau dL/dv_l = -s'(v_l,u_l)
///     + sum_{i != l} (1/xi_i) exp(s(u_i,v_l)/tau) s'(v_l,u_i)
Vec contrastive_grad_v(const RepBatch& u, const RepBatch& v, Temperature tau, std::size_t ell);

/// Gradient of entropy(c) w.r.t. column ell:
///   dH/du_l = sum_i (|u_i|_1 - 1(i=l)|U|_1)/|U|_1^2 (1 + log(|u_i|_1/|U|_1)) sign(u_l)
/// Zero-mass columns i != l contribute 0. Throws NondifferentiablePoint if
/// any entry of column ell is exactly 0 (sign undefined there).
Vec entropy_grad(const RepBatch& c, std::size_t ell);

/// Per-sample representation-space gradients of the assembled loss, built in
/// pass one and consumed by the two-pass parameter gradient.
/// a1/a2 pair with z-side columns (dim d1); a3..a6 with cluster-head rows
/// (dim d2). Slots not touched by the selected loss are zero.
struct AlphaCache {
    std::vector<Vec> a1, a2, a3, a4, a5, a6;
    std::array<std::uint64_t, 3> model_version{0, 0, 0};

    std::size_t batch_size() const { return a1.size(); }
};

/// Two-view cache: alphas of cc_loss w.r.t. every online representation.
/// `version_stamp` should be the owning network's versions() when the cache
/// will drive a parameter update.
AlphaCache build_alpha_cache(const RepBatch& z_a, const RepBatch& z_b, const RepBatch& c_a,
                             const RepBatch& c_b, Temperature tau_i, Temperature tau_c,
                             std::array<std::uint64_t, 3> version_stamp = {0, 0, 0});

/// Four-view cache: alphas of the loss selected by `mode` w.r.t. the online
/// representations (z_aO, z_bO and the cluster-head rows y_aO, y_bO); target
/// representations are constants.
AlphaCache build_alpha_cache(const FourViewBatch& views, Temperature tau_i, Temperature tau_c,
                             LossMode mode,
                             std::array<std::uint64_t, 3> version_stamp = {0, 0, 0});

struct ModelGrad {
    MlpGrad f, g_i, g_c;
};

/// Pass two: re-forwards each augmented sample through `net` one at a time
/// and accumulates the alpha-weighted parameter gradient, in batch index
/// order. Peak live activation state is one sample's traces, independent of
/// batch size. Throws StaleCache when the cache's version stamp does not
/// match the network's current versions.
ModelGrad two_pass_gradient(const EncoderStacks& net, std::span<const Vec> x_a,
                            std::span<const Vec> x_b, const AlphaCache& cache);

/// Convenience overload for the online branch of a model pair.
ModelGrad two_pass_gradient(const MccModel& model, std::span<const Vec> x_a,
                            std::span<const Vec> x_b, const AlphaCache& cache);

}  // namespace mcc
