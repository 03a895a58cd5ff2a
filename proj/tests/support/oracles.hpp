#pragma once

// Test-side oracles, kept independent of the library's implementation paths:
// the losses are re-evaluated literally (no stabilization), and gradients are
// checked against central finite differences.

#include <cmath>
#include <functional>
#include <vector>

#include "mcc/numerics.hpp"
#include "mcc/rng.hpp"

namespace oracle {

inline double naive_cosine(const mcc::Vec& u, const mcc::Vec& v) {
    double d = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    return d / (std::sqrt(nu) * std::sqrt(nv));
}

// Term-by-term evaluation of the contrastive loss exactly as defined:
// positive pair absent from the denominator, j = i excluded from both sums.
inline double naive_contrastive_loss(const mcc::RepBatch& u, const mcc::RepBatch& v,
                                     double tau) {
    const std::size_t n = u.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double num = std::exp(naive_cosine(u.cols[i], v.cols[i]) / tau);
        double den = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            den += std::exp(naive_cosine(u.cols[i], u.cols[j]) / tau);
            den += std::exp(naive_cosine(u.cols[i], v.cols[j]) / tau);
        }
        total += -std::log(num / den);
    }
    return total / static_cast<double>(n);
}

inline double naive_entropy(const mcc::RepBatch& c) {
    double total = 0.0;
    std::vector<double> masses;
    for (const mcc::Vec& col : c.cols) {
        double m = 0.0;
        for (double x : col) m += std::abs(x);
        masses.push_back(m);
        total += m;
    }
    double h = 0.0;
    for (double m : masses) {
        if (m > 0.0) h -= (m / total) * std::log(m / total);
    }
    return h;
}

// Central finite difference of f with respect to the referenced slot.
inline double fd(const std::function<double()>& f, double& slot, double h = 1e-6) {
    const double orig = slot;
    slot = orig + h;
    double up = f();
    slot = orig - h;
    double down = f();
    slot = orig;
    return (up - down) / (2.0 * h);
}

inline bool close(double a, double b, double rel, double abs_tol) {
    double diff = std::abs(a - b);
    if (diff <= abs_tol) return true;
    return diff <= rel * std::max(std::abs(a), std::abs(b));
}

inline mcc::RepBatch random_batch(std::size_t n, std::size_t d, mcc::Rng& rng,
                                  bool strictly_positive = false) {
    mcc::RepBatch b;
    b.cols.resize(n);
    for (mcc::Vec& c : b.cols) {
        c.resize(d);
        for (double& x : c) {
            x = strictly_positive ? rng.uniform(0.1, 2.0) : rng.normal();
        }
        if (!strictly_positive && mcc::norm2(c) < 0.3) {
            for (double& x : c) x += 0.7;
        }
    }
    return b;
}

}  // namespace oracle
