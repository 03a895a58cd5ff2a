#include "mcc/gradients.hpp"

#include <cmath>
#include <string>

namespace mcc {

Vec cosine_grad(const Vec& u, const Vec& v) {
    double nu = norm2(u);
    double nv = norm2(v);
    if (nu == 0.0 || nv == 0.0) throw ZeroNormVector("cosine_grad: zero-norm input");
    if (u.size() != v.size()) throw DimMismatch("cosine_grad: dims differ");
    double s = cosine_similarity(u, v);
    Vec g(u.size());
    double a = 1.0 / (nu * nv);
    double b = s / (nu * nu);
    for (std::size_t i = 0; i < u.size(); ++i) g[i] = a * v[i] - b * u[i];
    return g;
}

std::vector<double> xi_table(const RepBatch& u, const RepBatch& v, Temperature tau) {
    check_contrastive_pair(u, v);
    const std::size_t n = u.size();
    const double inv_tau = 1.0 / tau.value;
    std::vector<double> xi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            s += std::exp(cosine_similarity(u.cols[i], u.cols[j]) * inv_tau);
            s += std::exp(cosine_similarity(u.cols[i], v.cols[j]) * inv_tau);
        }
        xi[i] = s;
    }
    return xi;
}

Vec contrastive_grad_u(const RepBatch& u, const RepBatch& v, Temperature tau,
                       std::size_t ell) {
    check_contrastive_pair(u, v);
    const std::size_t n = u.size();
    if (ell >= n) throw IndexOutOfRange("contrastive_grad_u: ell=" + std::to_string(ell));
    const double inv_tau = 1.0 / tau.value;
    std::vector<double> xi = xi_table(u, v, tau);

    Vec g = cosine_grad(u.cols[ell], v.cols[ell]);
    for (double& x : g) x = -x;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == ell) continue;
        double e_uu = std::exp(cosine_similarity(u.cols[ell], u.cols[i]) * inv_tau);
        double e_uv = std::exp(cosine_similarity(u.cols[ell], v.cols[i]) * inv_tau);
        axpy((1.0 / xi[ell] + 1.0 / xi[i]) * e_uu, cosine_grad(u.cols[ell], u.cols[i]), g);
        axpy((1.0 / xi[ell]) * e_uv, cosine_grad(u.cols[ell], v.cols[i]), g);
    }
    double scale = 1.0 / (static_cast<double>(n) * tau.value);
    for (double& x : g) x *= scale;
    return g;
}

Vec contrastive_grad_v(const RepBatch& u, const RepBatch& v, Temperature tau,
                       std::size_t ell) {
    check_contrastive_pair(u, v);
    const std::size_t n = u.size();
    if (ell >= n) throw IndexOutOfRange("contrastive_grad_v: ell=" + std::to_string(ell));
    const double inv_tau = 1.0 / tau.value;
    std::vector<double> xi = xi_table(u, v, tau);

    Vec g = cosine_grad(v.cols[ell], u.cols[ell]);
    for (double& x : g) x = -x;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == ell) continue;
        double e_uv = std::exp(cosine_similarity(u.cols[i], v.cols[ell]) * inv_tau);
        axpy((1.0 / xi[i]) * e_uv, cosine_grad(v.cols[ell], u.cols[i]), g);
    }
    double scale = 1.0 / (static_cast<double>(n) * tau.value);
    for (double& x : g) x *= scale;
    return g;
}

Vec entropy_grad(const RepBatch& c, std::size_t ell) {
    if (ell >= c.size()) throw IndexOutOfRange("entropy_grad: ell=" + std::to_string(ell));
    for (double x : c.cols[ell]) {
        if (x == 0.0) {
            throw NondifferentiablePoint("entropy_grad: column has an exactly-zero entry");
        }
    }
    std::vector<double> masses(c.size());
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        masses[i] = l1_norm(c.cols[i]);
        total += masses[i];
    }
    if (total == 0.0) throw AllZeroMatrix("entropy_grad: all entries are zero");

    double scalar = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (masses[i] == 0.0) continue;  // x(1+log x) -> 0 limit
        double coeff = (masses[i] - (i == ell ? total : 0.0)) / (total * total);
        scalar += coeff * (1.0 + std::log(masses[i] / total));
    }
    Vec g(c.cols[ell].size());
    for (std::size_t t = 0; t < g.size(); ++t) {
        g[t] = scalar * (c.cols[ell][t] > 0.0 ? 1.0 : -1.0);
    }
    return g;
}

namespace {

// Collects the cluster-level alphas: for each sample row i, entry j comes
// from the gradient w.r.t. cluster column j. grad_fn(j) must return the
// dim-n gradient for column j.
template <typename F>
std::vector<Vec> rows_from_column_grads(std::size_t n, std::size_t d2, F&& grad_fn,
                                        double scale) {
    std::vector<Vec> rows(n, Vec(d2, 0.0));
    for (std::size_t j = 0; j < d2; ++j) {
        Vec col_grad = grad_fn(j);
        for (std::size_t i = 0; i < n; ++i) rows[i][j] = scale * col_grad[i];
    }
    return rows;
}

std::vector<Vec> zero_rows(std::size_t n, std::size_t d) {
    return std::vector<Vec>(n, Vec(d, 0.0));
}

// Entropy gradients are evaluated on a +1e-12 perturbed copy when a column
// holds an exact zero (softmax underflow can produce them); entropy_grad
// itself refuses exact zeros.
RepBatch perturb_exact_zeros(const RepBatch& c) {
    bool has_zero = false;
    for (const Vec& col : c.cols) {
        for (double x : col) {
            if (x == 0.0) {
                has_zero = true;
                break;
            }
        }
        if (has_zero) break;
    }
    if (!has_zero) return c;
    RepBatch out = c;
    for (Vec& col : out.cols) {
        for (double& x : col) {
            if (x == 0.0) x = 1e-12;
        }
    }
    return out;
}

}  // namespace

AlphaCache build_alpha_cache(const RepBatch& z_a, const RepBatch& z_b, const RepBatch& c_a,
                             const RepBatch& c_b, Temperature tau_i, Temperature tau_c,
                             std::array<std::uint64_t, 3> version_stamp) {
    check_contrastive_pair(z_a, z_b);
    const std::size_t n = z_a.size();
    const std::size_t d2 = c_a.size();
    if (c_a.dim() != n || c_b.dim() != n) {
        throw DimMismatch("build_alpha_cache: cluster batches must have n-dim columns");
    }

    AlphaCache cache;
    cache.model_version = version_stamp;
    cache.a1.reserve(n);
    cache.a2.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec g1 = contrastive_grad_u(z_a, z_b, tau_i, i);
        Vec g2 = contrastive_grad_v(z_a, z_b, tau_i, i);
        for (double& x : g1) x *= 0.5;
        for (double& x : g2) x *= 0.5;
        cache.a1.push_back(std::move(g1));
        cache.a2.push_back(std::move(g2));
    }
    cache.a3 = rows_from_column_grads(
        n, d2, [&](std::size_t j) { return contrastive_grad_u(c_a, c_b, tau_c, j); }, 0.5);
    cache.a4 = rows_from_column_grads(
        n, d2, [&](std::size_t j) { return contrastive_grad_v(c_a, c_b, tau_c, j); }, 0.5);
    RepBatch ca_safe = perturb_exact_zeros(c_a);
    RepBatch cb_safe = perturb_exact_zeros(c_b);
    cache.a5 = rows_from_column_grads(
        n, d2, [&](std::size_t j) { return entropy_grad(ca_safe, j); }, kEntropyTermSign);
    cache.a6 = rows_from_column_grads(
        n, d2, [&](std::size_t j) { return entropy_grad(cb_safe, j); }, kEntropyTermSign);
    return cache;
}

AlphaCache build_alpha_cache(const FourViewBatch& views, Temperature tau_i, Temperature tau_c,
                             LossMode mode, std::array<std::uint64_t, 3> version_stamp) {
    const std::size_t n = views.z_ao.size();
    const std::size_t d1 = views.z_ao.dim();
    const std::size_t d2 = views.c_ao.size();

    AlphaCache cache;
    cache.model_version = version_stamp;

    if (mode != LossMode::cluster_only) {
        check_contrastive_pair(views.z_ao, views.z_bt);
        check_contrastive_pair(views.z_at, views.z_bo);
        cache.a1.reserve(n);
        cache.a2.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            // z_aO is the u-side of L(z_aO, z_bT); z_bO the v-side of
            // L(z_aT, z_bO). Target-side columns are constants.
            Vec g1 = contrastive_grad_u(views.z_ao, views.z_bt, tau_i, i);
            Vec g2 = contrastive_grad_v(views.z_at, views.z_bo, tau_i, i);
            for (double& x : g1) x *= 0.5;
            for (double& x : g2) x *= 0.5;
            cache.a1.push_back(std::move(g1));
            cache.a2.push_back(std::move(g2));
        }
    } else {
        cache.a1 = zero_rows(n, d1);
        cache.a2 = zero_rows(n, d1);
    }

    if (mode != LossMode::instance_only) {
        cache.a3 = rows_from_column_grads(
            n, d2, [&](std::size_t j) { return contrastive_grad_u(views.c_ao, views.c_bt, tau_c, j); },
            0.5);
        cache.a4 = rows_from_column_grads(
            n, d2, [&](std::size_t j) { return contrastive_grad_v(views.c_at, views.c_bo, tau_c, j); },
            0.5);
        RepBatch ca_safe = perturb_exact_zeros(views.c_ao);
        RepBatch cb_safe = perturb_exact_zeros(views.c_bo);
        cache.a5 = rows_from_column_grads(
            n, d2, [&](std::size_t j) { return entropy_grad(ca_safe, j); }, kEntropyTermSign);
        cache.a6 = rows_from_column_grads(
            n, d2, [&](std::size_t j) { return entropy_grad(cb_safe, j); }, kEntropyTermSign);
    } else {
        cache.a3 = zero_rows(n, d2);
        cache.a4 = zero_rows(n, d2);
        cache.a5 = zero_rows(n, d2);
        cache.a6 = zero_rows(n, d2);
    }
    return cache;
}

namespace {

// Backprop one sample-view: g_i gets `alpha_z`, the cluster head gets
// `alpha_y` (pulled through the softmax), and the encoder receives the sum
// of both branch upstreams. Exactly one sample's traces are live at a time.
void accumulate_sample(const EncoderStacks& net, const Vec& x, const Vec& alpha_z,
                       const Vec& alpha_y, ModelGrad& into) {
    ForwardTrace tf = forward_trace(net.f, x);
    const Vec& h = tf.output;

    Vec dh_total(h.size(), 0.0);
    {
        ForwardTrace tz = forward_trace(net.g_i, h);
        Vec dh(h.size(), 0.0);
        backward_accumulate(net.g_i, tz, alpha_z, into.g_i, &dh);
        axpy(1.0, dh, dh_total);
    }
    {
        ForwardTrace ty = forward_trace(net.g_c, h);
        Vec y = softmax(ty.output);
        Vec dlogits = softmax_backward(y, alpha_y);
        Vec dh(h.size(), 0.0);
        backward_accumulate(net.g_c, ty, dlogits, into.g_c, &dh);
        axpy(1.0, dh, dh_total);
    }
    backward_accumulate(net.f, tf, dh_total, into.f, nullptr);
}

}  // namespace

ModelGrad two_pass_gradient(const EncoderStacks& net, std::span<const Vec> x_a,
                            std::span<const Vec> x_b, const AlphaCache& cache) {
    if (cache.model_version != net.versions()) {
        throw StaleCache("two_pass_gradient: parameters changed since cache construction");
    }
    const std::size_t n = cache.batch_size();
    if (x_a.size() != n || x_b.size() != n) {
        throw DimMismatch("two_pass_gradient: batch size does not match cache");
    }

    ModelGrad grad{zero_grad_like(net.f), zero_grad_like(net.g_i), zero_grad_like(net.g_c)};
    Vec alpha_y(net.g_c.out_dim());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < alpha_y.size(); ++j) {
            alpha_y[j] = cache.a3[i][j] + cache.a5[i][j];
        }
        accumulate_sample(net, x_a[i], cache.a1[i], alpha_y, grad);
        for (std::size_t j = 0; j < alpha_y.size(); ++j) {
            alpha_y[j] = cache.a4[i][j] + cache.a6[i][j];
        }
        accumulate_sample(net, x_b[i], cache.a2[i], alpha_y, grad);
    }
    return grad;
}

ModelGrad two_pass_gradient(const MccModel& model, std::span<const Vec> x_a,
                            std::span<const Vec> x_b, const AlphaCache& cache) {
    return two_pass_gradient(model.online, x_a, x_b, cache);
}

}  // namespace mcc
