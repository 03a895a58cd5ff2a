#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "mcc/numerics.hpp"
#include "mcc/rng.hpp"

namespace mcc {

enum class Activation : std::uint8_t { relu = 0, identity = 1 };

struct Layer {
    std::vector<Vec> w;  // out rows of dimension in
    Vec b;               // out
    Activation act{Activation::identity};

    std::size_t out_dim() const { return b.size(); }
    std::size_t in_dim() const { return w.empty() ? 0 : w.front().size(); }
};

/// A fully-connected stack. `version` increases monotonically on every
/// parameter write; gradient caches record it to detect staleness.
struct MlpParams {
    std::vector<Layer> layers;
    std::uint64_t version = 0;

    std::size_t in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    std::size_t out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
    std::size_t param_count() const;
};

/// Per-sample activation record kept while back-propagating one input.
/// Construction/destruction is counted so tests can assert that the
/// two-pass scheme keeps O(1) of these alive regardless of batch size.
struct ForwardTrace {
    std::vector<Vec> inputs;  // inputs[l] = input to layer l
    std::vector<Vec> pre;     // pre-activation of layer l
    Vec output;

    ForwardTrace();
    ForwardTrace(const ForwardTrace&);
    ForwardTrace(ForwardTrace&&) noexcept;
    ForwardTrace& operator=(const ForwardTrace&) = default;
    ForwardTrace& operator=(ForwardTrace&&) noexcept = default;
    ~ForwardTrace();

    static long live_count();
    static long peak_live_count();
    static void reset_peak();
};

/// Gradient holder shaped like an MlpParams.
struct MlpGrad {
    std::vector<std::vector<Vec>> w;
    std::vector<Vec> b;

    void add_scaled(const MlpGrad& other, double scale);
    void scale(double s);
};

MlpGrad zero_grad_like(const MlpParams& p);

/// Gaussian init: relu layers use std sqrt(2/in), identity layers sqrt(1/in);
/// biases start at zero. Bumps version.
MlpParams make_mlp(const std::vector<std::size_t>& dims,
                   const std::vector<Activation>& acts, Rng& rng);

Vec forward(const MlpParams& p, const Vec& x);
ForwardTrace forward_trace(const MlpParams& p, const Vec& x);

/// Reverse-mode gradient of <upstream, output> w.r.t. all stack parameters.
/// If input_grad is non-null it receives d<upstream,output>/dx.
MlpGrad backward(const MlpParams& p, const Vec& x, const Vec& upstream,
                 Vec* input_grad = nullptr);

/// Trace-reusing variant that accumulates into `into`.
void backward_accumulate(const MlpParams& p, const ForwardTrace& t, const Vec& upstream,
                         MlpGrad& into, Vec* input_grad = nullptr);

void sgd_step(MlpParams& p, const MlpGrad& g, double lr);

}  // namespace mcc
