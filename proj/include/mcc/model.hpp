#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "mcc/losses.hpp"
#include "mcc/mlp.hpp"
#include "mcc/rng.hpp"

namespace mcc {

/// EMA decay rate, in (0,1).
struct EmaMomentum {
    double value;
    explicit EmaMomentum(double v) : value(v) {
        if (!(v > 0.0 && v < 1.0)) throw ValidationError("ema momentum must be in (0,1)");
    }
};

/// Vector augmentation family: coordinate-wise Gaussian noise, independent
/// zero-masking, then a global uniform scale, applied in that order.
struct AugmentConfig {
    double noise_sigma = 0.0;
    double mask_prob = 0.0;
    double scale_lo = 1.0;
    double scale_hi = 1.0;

    void validate() const {
        if (noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
        if (!(mask_prob >= 0.0 && mask_prob < 1.0))
            throw ValidationError("mask_prob must be in [0,1)");
        if (!(scale_lo > 0.0 && scale_lo <= scale_hi))
            throw ValidationError("scale range must satisfy 0 < lo <= hi");
    }
};

/// One branch of the architecture: encoder f, instance projector g_i,
/// cluster projector g_c. Cluster-head outputs are row-softmaxed by the
/// forward helpers so they act as soft assignments.
struct EncoderStacks {
    MlpParams f, g_i, g_c;

    std::array<std::uint64_t, 3> versions() const {
        return {f.version, g_i.version, g_c.version};
    }
};

/// Online/target network pair. Only the online branch receives gradient
/// updates; the target branch is written exclusively by ema_update.
struct MccModel {
    EncoderStacks online, target;

    std::size_t input_dim() const { return online.f.in_dim(); }
    std::size_t d1() const { return online.g_i.out_dim(); }
    std::size_t d2() const { return online.g_c.out_dim(); }
    std::array<std::uint64_t, 3> online_version() const { return online.versions(); }
};

/// Encoder with `hidden_layers` relu layers of width `hidden`, then single
/// linear projectors to d1 and d2. Target starts as a copy of online.
MccModel make_mcc_model(std::size_t in_dim, std::size_t hidden, std::size_t hidden_layers,
                        std::size_t d1, std::size_t d2, Rng& rng);

EncoderStacks make_encoder_stacks(std::size_t in_dim, std::size_t hidden,
                                  std::size_t hidden_layers, std::size_t d1, std::size_t d2,
                                  Rng& rng);

Vec softmax(const Vec& logits);

/// Pulls upstream through the softmax Jacobian: returns J^T * upstream where
/// y = softmax(logits).
Vec softmax_backward(const Vec& y, const Vec& upstream);

Vec augment(const Vec& x, const AugmentConfig& cfg, Rng& rng);

/// p_T <- m p_T + (1-m) p_O for every parameter of f, g_i, g_c.
/// Implemented as p_T += (1-m)(p_O - p_T) so p_T == p_O is an exact fixed
/// point in floating point. Bumps target versions; online untouched.
void ema_update(MccModel& model, EmaMomentum m);

/// Per-sample representations through one branch: z = g_i(f(x)),
/// y = softmax(g_c(f(x))).
struct StackOut {
    Vec z;
    Vec y;
};
StackOut forward_reps(const EncoderStacks& net, const Vec& x);

enum class OptimKind { sgd, adam };

/// Adam state for one stack (moments shaped like the gradients).
struct AdamState {
    MlpGrad m, v;
    long long t = 0;
    bool initialized = false;
};

struct StackOptimizer {
    OptimKind kind = OptimKind::sgd;
    AdamState adam;

    void apply(MlpParams& p, const MlpGrad& g, double lr);
};

struct ModelOptimizer {
    StackOptimizer f, g_i, g_c;

    explicit ModelOptimizer(OptimKind kind = OptimKind::sgd) {
        f.kind = g_i.kind = g_c.kind = kind;
    }
};

struct TrainConfig {
    Temperature tau_i{0.5};
    Temperature tau_c{1.0};
    double lr = 3e-4;
    EmaMomentum momentum{0.99};
    LossMode loss_mode = LossMode::full_mcc;
    AugmentConfig aug;
};

struct StepResult {
    double loss = 0.0;           // value selected by loss_mode, pre-step
    double instance_part = 0.0;  // instance-level half of the full loss
    double cluster_part = 0.0;   // cluster-level half (with entropy terms)
};

/// One four-view training step: augment, forward through both branches,
/// build the representation-gradient cache, two-pass parameter gradient,
/// optimizer step on the online stacks selected by loss_mode, then EMA.
/// Returns the pre-step loss.
StepResult mcc_train_step(MccModel& model, std::span<const Vec> batch, const TrainConfig& cfg,
                          ModelOptimizer& opt, Rng& rng);

/// Two-view ablation step without a target network: both views pass through
/// the same stacks and the two-view clustering loss is descended.
StepResult cc_train_step(EncoderStacks& net, std::span<const Vec> batch, const TrainConfig& cfg,
                         ModelOptimizer& opt, Rng& rng);

}  // namespace mcc
