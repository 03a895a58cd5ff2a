#include "mcc/model.hpp"

#include <algorithm>
#include <cmath>

#include "mcc/gradients.hpp"

namespace mcc {

EncoderStacks make_encoder_stacks(std::size_t in_dim, std::size_t hidden,
                                  std::size_t hidden_layers, std::size_t d1, std::size_t d2,
                                  Rng& rng) {
    if (hidden_layers == 0) throw ValidationError("encoder needs at least one hidden layer");
    std::vector<std::size_t> enc_dims{in_dim};
    std::vector<Activation> enc_acts;
    for (std::size_t i = 0; i < hidden_layers; ++i) {
        enc_dims.push_back(hidden);
        enc_acts.push_back(Activation::relu);
    }
    EncoderStacks net;
    net.f = make_mlp(enc_dims, enc_acts, rng);
    net.g_i = make_mlp({hidden, d1}, {Activation::identity}, rng);
    net.g_c = make_mlp({hidden, d2}, {Activation::identity}, rng);
    return net;
}

MccModel make_mcc_model(std::size_t in_dim, std::size_t hidden, std::size_t hidden_layers,
                        std::size_t d1, std::size_t d2, Rng& rng) {
    MccModel m;
    m.online = make_encoder_stacks(in_dim, hidden, hidden_layers, d1, d2, rng);
    m.target = m.online;
    return m;
}

Vec softmax(const Vec& logits) {
    double mx = logits.front();
    for (double v : logits) mx = std::max(mx, v);
    Vec y(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        y[i] = std::exp(logits[i] - mx);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

Vec softmax_backward(const Vec& y, const Vec& upstream) {
    if (y.size() != upstream.size()) throw DimMismatch("softmax_backward: dims differ");
    double inner = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += y[i] * upstream[i];
    Vec g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] * (upstream[i] - inner);
    return g;
}

Vec augment(const Vec& x, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    Vec out = x;
    if (cfg.noise_sigma > 0.0) {
        for (double& v : out) v += rng.normal(0.0, cfg.noise_sigma);
    }
    if (cfg.mask_prob > 0.0) {
        for (double& v : out) {
            if (rng.uniform() < cfg.mask_prob) v = 0.0;
        }
    }
    double scale = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    for (double& v : out) v *= scale;
    return out;
}

namespace {

void ema_stack(MlpParams& target, const MlpParams& online, double m) {
    if (target.layers.size() != online.layers.size()) {
        throw ShapeMismatch("ema_update: stack shapes differ");
    }
    double one_minus_m = 1.0 - m;
    for (std::size_t l = 0; l < target.layers.size(); ++l) {
        Layer& t = target.layers[l];
        const Layer& o = online.layers[l];
        if (t.out_dim() != o.out_dim() || t.in_dim() != o.in_dim()) {
            throw ShapeMismatch("ema_update: layer shapes differ");
        }
        for (std::size_t r = 0; r < t.out_dim(); ++r) {
            for (std::size_t c = 0; c < t.in_dim(); ++c) {
                t.w[r][c] += one_minus_m * (o.w[r][c] - t.w[r][c]);
            }
            t.b[r] += one_minus_m * (o.b[r] - t.b[r]);
        }
    }
    ++target.version;
}

}  // namespace

void ema_update(MccModel& model, EmaMomentum m) {
    ema_stack(model.target.f, model.online.f, m.value);
    ema_stack(model.target.g_i, model.online.g_i, m.value);
    ema_stack(model.target.g_c, model.online.g_c, m.value);
}

StackOut forward_reps(const EncoderStacks& net, const Vec& x) {
    Vec h = forward(net.f, x);
    StackOut out;
    out.z = forward(net.g_i, h);
    out.y = softmax(forward(net.g_c, h));
    return out;
}

void StackOptimizer::apply(MlpParams& p, const MlpGrad& g, double lr) {
    if (kind == OptimKind::sgd) {
        sgd_step(p, g, lr);
        return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    if (!adam.initialized) {
        adam.m = zero_grad_like(p);
        adam.v = zero_grad_like(p);
        adam.t = 0;
        adam.initialized = true;
    }
    ++adam.t;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        for (std::size_t r = 0; r < p.layers[l].out_dim(); ++r) {
            for (std::size_t c = 0; c < p.layers[l].in_dim(); ++c) {
                double gw = g.w[l][r][c];
                double& mw = adam.m.w[l][r][c];
                double& vw = adam.v.w[l][r][c];
                mw = beta1 * mw + (1.0 - beta1) * gw;
                vw = beta2 * vw + (1.0 - beta2) * gw * gw;
                p.layers[l].w[r][c] -= lr * (mw / bc1) / (std::sqrt(vw / bc2) + eps);
            }
            double gb = g.b[l][r];
            double& mb = adam.m.b[l][r];
            double& vb = adam.v.b[l][r];
            mb = beta1 * mb + (1.0 - beta1) * gb;
            vb = beta2 * vb + (1.0 - beta2) * gb * gb;
            p.layers[l].b[r] -= lr * (mb / bc1) / (std::sqrt(vb / bc2) + eps);
        }
    }
    ++p.version;
}

namespace {

struct ViewReps {
    std::vector<Vec> z;  // n vectors of dim d1
    std::vector<Vec> y;  // n rows of dim d2
};

ViewReps forward_view(const EncoderStacks& net, const std::vector<Vec>& xs) {
    ViewReps reps;
    reps.z.reserve(xs.size());
    reps.y.reserve(xs.size());
    for (const Vec& x : xs) {
        StackOut o = forward_reps(net, x);
        reps.z.push_back(std::move(o.z));
        reps.y.push_back(std::move(o.y));
    }
    return reps;
}

RepBatch instance_batch(std::vector<Vec> cols) {
    RepBatch b;
    b.cols = std::move(cols);
    b.layout = Layout::instance;
    return b;
}

}  // namespace

StepResult mcc_train_step(MccModel& model, std::span<const Vec> batch, const TrainConfig& cfg,
                          ModelOptimizer& opt, Rng& rng) {
    if (batch.size() < 2) throw BatchTooSmall("mcc_train_step: batch size must be >= 2");

    std::vector<Vec> x_a, x_b;
    x_a.reserve(batch.size());
    x_b.reserve(batch.size());
    for (const Vec& x : batch) {
        x_a.push_back(augment(x, cfg.aug, rng));
        x_b.push_back(augment(x, cfg.aug, rng));
    }

    ViewReps a_online = forward_view(model.online, x_a);
    ViewReps b_online = forward_view(model.online, x_b);
    ViewReps a_target = forward_view(model.target, x_a);
    ViewReps b_target = forward_view(model.target, x_b);

    FourViewBatch views;
    views.z_ao = instance_batch(std::move(a_online.z));
    views.z_bo = instance_batch(std::move(b_online.z));
    views.z_at = instance_batch(std::move(a_target.z));
    views.z_bt = instance_batch(std::move(b_target.z));
    views.c_ao = cluster_batch_from_rows(a_online.y);
    views.c_bo = cluster_batch_from_rows(b_online.y);
    views.c_at = cluster_batch_from_rows(a_target.y);
    views.c_bt = cluster_batch_from_rows(b_target.y);

    StepResult res;
    res.instance_part = instance_loss(views.z_ao, views.z_bt, views.z_at, views.z_bo, cfg.tau_i);
    res.cluster_part = cluster_loss(views.c_ao, views.c_bt, views.c_at, views.c_bo, cfg.tau_c);
    switch (cfg.loss_mode) {
        case LossMode::full_mcc: res.loss = res.instance_part + res.cluster_part; break;
        case LossMode::instance_only: res.loss = res.instance_part; break;
        case LossMode::cluster_only: res.loss = res.cluster_part; break;
    }

    AlphaCache cache =
        build_alpha_cache(views, cfg.tau_i, cfg.tau_c, cfg.loss_mode, model.online_version());
    ModelGrad grad = two_pass_gradient(model, x_a, x_b, cache);

    // Only the stacks the selected loss trains receive the step; in
    // cluster-only mode the encoder gradient exists but f stays frozen.
    if (cfg.loss_mode != LossMode::cluster_only) {
        opt.f.apply(model.online.f, grad.f, cfg.lr);
        opt.g_i.apply(model.online.g_i, grad.g_i, cfg.lr);
    }
    if (cfg.loss_mode != LossMode::instance_only) {
        opt.g_c.apply(model.online.g_c, grad.g_c, cfg.lr);
    }

    ema_update(model, cfg.momentum);
    return res;
}

StepResult cc_train_step(EncoderStacks& net, std::span<const Vec> batch, const TrainConfig& cfg,
                         ModelOptimizer& opt, Rng& rng) {
    if (batch.size() < 2) throw BatchTooSmall("cc_train_step: batch size must be >= 2");

    std::vector<Vec> x_a, x_b;
    x_a.reserve(batch.size());
    x_b.reserve(batch.size());
    for (const Vec& x : batch) {
        x_a.push_back(augment(x, cfg.aug, rng));
        x_b.push_back(augment(x, cfg.aug, rng));
    }

    ViewReps a = forward_view(net, x_a);
    ViewReps b = forward_view(net, x_b);
    RepBatch z_a = instance_batch(std::move(a.z));
    RepBatch z_b = instance_batch(std::move(b.z));
    RepBatch c_a = cluster_batch_from_rows(a.y);
    RepBatch c_b = cluster_batch_from_rows(b.y);

    StepResult res;
    res.instance_part = 0.5 * contrastive_loss(z_a, z_b, cfg.tau_i);
    res.cluster_part = 0.5 * contrastive_loss(c_a, c_b, cfg.tau_c) +
                       kEntropyTermSign * (entropy(c_a) + entropy(c_b));
    res.loss = res.instance_part + res.cluster_part;

    AlphaCache cache =
        build_alpha_cache(z_a, z_b, c_a, c_b, cfg.tau_i, cfg.tau_c, net.versions());
    ModelGrad grad = two_pass_gradient(net, x_a, x_b, cache);

    opt.f.apply(net.f, grad.f, cfg.lr);
    opt.g_i.apply(net.g_i, grad.g_i, cfg.lr);
    opt.g_c.apply(net.g_c, grad.g_c, cfg.lr);
    return res;
}

}  // namespace mcc
