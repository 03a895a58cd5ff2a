#include "mcc/mlp.hpp"

#include <cmath>
#include <string>

namespace mcc {

namespace {

std::atomic<long> g_trace_live{0};
std::atomic<long> g_trace_peak{0};

void trace_created() {
    long live = ++g_trace_live;
    long peak = g_trace_peak.load();
    while (live > peak && !g_trace_peak.compare_exchange_weak(peak, live)) {
    }
}

}  // namespace

ForwardTrace::ForwardTrace() { trace_created(); }
ForwardTrace::ForwardTrace(const ForwardTrace& o)
    : inputs(o.inputs), pre(o.pre), output(o.output) {
    trace_created();
}
ForwardTrace::ForwardTrace(ForwardTrace&& o) noexcept
    : inputs(std::move(o.inputs)), pre(std::move(o.pre)), output(std::move(o.output)) {
    trace_created();
}
ForwardTrace::~ForwardTrace() { --g_trace_live; }

long ForwardTrace::live_count() { return g_trace_live.load(); }
long ForwardTrace::peak_live_count() { return g_trace_peak.load(); }
void ForwardTrace::reset_peak() { g_trace_peak.store(g_trace_live.load()); }

std::size_t MlpParams::param_count() const {
    std::size_t c = 0;
    for (const Layer& l : layers) c += l.out_dim() * l.in_dim() + l.out_dim();
    return c;
}

MlpParams make_mlp(const std::vector<std::size_t>& dims,
                   const std::vector<Activation>& acts, Rng& rng) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1) {
        throw ValidationError("make_mlp: need dims of length L+1 and acts of length L");
    }
    MlpParams p;
    p.layers.resize(dims.size() - 1);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        Layer& layer = p.layers[l];
        std::size_t in = dims[l];
        std::size_t out = dims[l + 1];
        layer.act = acts[l];
        double std_dev =
            layer.act == Activation::relu ? std::sqrt(2.0 / static_cast<double>(in))
                                          : std::sqrt(1.0 / static_cast<double>(in));
        layer.w.assign(out, Vec(in));
        layer.b.assign(out, 0.0);
        for (Vec& row : layer.w) {
            for (double& x : row) x = rng.normal(0.0, std_dev);
        }
    }
    p.version = 1;
    return p;
}

namespace {

Vec apply_layer(const Layer& layer, const Vec& x, Vec* pre_out) {
    if (x.size() != layer.in_dim()) {
        throw DimMismatch("forward: input dim " + std::to_string(x.size()) +
                          " != layer in dim " + std::to_string(layer.in_dim()));
    }
    Vec pre(layer.out_dim());
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
        double s = layer.b[r];
        const Vec& row = layer.w[r];
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
        pre[r] = s;
    }
    if (pre_out) *pre_out = pre;
    if (layer.act == Activation::relu) {
        for (double& v : pre) v = v > 0.0 ? v : 0.0;
    }
    return pre;
}

}  // namespace

Vec forward(const MlpParams& p, const Vec& x) {
    Vec cur = x;
    for (const Layer& layer : p.layers) cur = apply_layer(layer, cur, nullptr);
    return cur;
}

ForwardTrace forward_trace(const MlpParams& p, const Vec& x) {
    ForwardTrace t;
    t.inputs.reserve(p.layers.size());
    t.pre.reserve(p.layers.size());
    Vec cur = x;
    for (const Layer& layer : p.layers) {
        t.inputs.push_back(cur);
        Vec pre;
        cur = apply_layer(layer, cur, &pre);
        t.pre.push_back(std::move(pre));
    }
    t.output = cur;
    return t;
}

MlpGrad zero_grad_like(const MlpParams& p) {
    MlpGrad g;
    g.w.resize(p.layers.size());
    g.b.resize(p.layers.size());
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        g.w[l].assign(p.layers[l].out_dim(), Vec(p.layers[l].in_dim(), 0.0));
        g.b[l].assign(p.layers[l].out_dim(), 0.0);
    }
    return g;
}

void MlpGrad::add_scaled(const MlpGrad& other, double scale) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (std::size_t r = 0; r < w[l].size(); ++r) {
            axpy(scale, other.w[l][r], w[l][r]);
        }
        axpy(scale, other.b[l], b[l]);
    }
}

void MlpGrad::scale(double s) {
    for (auto& lw : w) {
        for (Vec& row : lw) {
            for (double& x : row) x *= s;
        }
    }
    for (Vec& lb : b) {
        for (double& x : lb) x *= s;
    }
}

void backward_accumulate(const MlpParams& p, const ForwardTrace& t, const Vec& upstream,
                         MlpGrad& into, Vec* input_grad) {
    if (upstream.size() != p.out_dim()) {
        throw DimMismatch("backward: upstream dim " + std::to_string(upstream.size()) +
                          " != output dim " + std::to_string(p.out_dim()));
    }
    Vec delta = upstream;
    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const Layer& layer = p.layers[li];
        if (layer.act == Activation::relu) {
            // Subgradient 0 at exactly 0.
            for (std::size_t r = 0; r < delta.size(); ++r) {
                if (!(t.pre[li][r] > 0.0)) delta[r] = 0.0;
            }
        }
        const Vec& x = t.inputs[li];
        for (std::size_t r = 0; r < layer.out_dim(); ++r) {
            axpy(delta[r], x, into.w[li][r]);
            into.b[li][r] += delta[r];
        }
        if (li > 0 || input_grad) {
            Vec next(layer.in_dim(), 0.0);
            for (std::size_t r = 0; r < layer.out_dim(); ++r) {
                axpy(delta[r], layer.w[r], next);
            }
            delta = std::move(next);
        }
    }
    if (input_grad) *input_grad = delta;
}

MlpGrad backward(const MlpParams& p, const Vec& x, const Vec& upstream, Vec* input_grad) {
    ForwardTrace t = forward_trace(p, x);
    MlpGrad g = zero_grad_like(p);
    backward_accumulate(p, t, upstream, g, input_grad);
    return g;
}

void sgd_step(MlpParams& p, const MlpGrad& g, double lr) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t r = 0; r < p.layers[l].out_dim(); ++r) {
            axpy(-lr, g.w[l][r], p.layers[l].w[r]);
            p.layers[l].b[r] -= lr * g.b[l][r];
        }
    }
    ++p.version;
}

}  // namespace mcc
