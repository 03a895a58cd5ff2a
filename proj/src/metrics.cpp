#include "mcc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mcc {

namespace {

void check_labels(const LabelVector& pred, const LabelVector& truth) {
    if (pred.size() != truth.size()) {
        throw LengthMismatch("metrics: label vectors have lengths " +
                             std::to_string(pred.size()) + " and " +
                             std::to_string(truth.size()));
    }
    if (pred.empty()) throw LengthMismatch("metrics: empty label vectors");
    for (int l : pred) {
        if (l < 0) throw ValidationError("metrics: negative predicted label");
    }
    for (int l : truth) {
        if (l < 0) throw ValidationError("metrics: negative true label");
    }
}

long long choose2(long long x) { return x * (x - 1) / 2; }

}  // namespace

ContingencyTable contingency(const LabelVector& pred, const LabelVector& truth) {
    check_labels(pred, truth);
    int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    int kt = *std::max_element(truth.begin(), truth.end()) + 1;
    ContingencyTable t;
    t.counts.assign(kp, std::vector<long long>(kt, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        ++t.counts[pred[i]][truth[i]];
    }
    t.total = static_cast<long long>(pred.size());
    return t;
}

std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    // Kuhn-Munkres with potentials, O(n^3).
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = -1;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_of(n);
    for (int j = 1; j <= n; ++j) row_of[j - 1] = p[j] - 1;
    return row_of;
}

double clustering_accuracy(const LabelVector& pred, const LabelVector& truth) {
    ContingencyTable t = contingency(pred, truth);
    std::size_t k = std::max(t.rows(), t.cols());
    // Pad with zero rows/columns; maximize matches == minimize negated counts.
    std::vector<std::vector<double>> cost(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            cost[i][j] = -static_cast<double>(t.counts[i][j]);
        }
    }
    std::vector<int> row_of = min_cost_assignment(cost);
    long long matched = 0;
    for (std::size_t j = 0; j < k; ++j) {
        std::size_t i = static_cast<std::size_t>(row_of[j]);
        if (i < t.rows() && j < t.cols()) matched += t.counts[i][j];
    }
    return static_cast<double>(matched) / static_cast<double>(t.total);
}

double nmi(const LabelVector& pred, const LabelVector& truth) {
    ContingencyTable t = contingency(pred, truth);
    const double n = static_cast<double>(t.total);
    std::vector<long long> a(t.rows(), 0), b(t.cols(), 0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            a[i] += t.counts[i][j];
            b[j] += t.counts[i][j];
        }
    }
    double hp = 0.0, ht = 0.0;
    for (long long x : a) {
        if (x > 0) {
            double p = static_cast<double>(x) / n;
            hp -= p * std::log(p);
        }
    }
    for (long long x : b) {
        if (x > 0) {
            double p = static_cast<double>(x) / n;
            ht -= p * std::log(p);
        }
    }
    if (hp == 0.0 || ht == 0.0) return 0.0;
    double mi = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            long long nij = t.counts[i][j];
            if (nij == 0) continue;
            double pij = static_cast<double>(nij) / n;
            mi += pij * std::log((static_cast<double>(nij) * n) /
                                 (static_cast<double>(a[i]) * static_cast<double>(b[j])));
        }
    }
    double val = mi / std::sqrt(hp * ht);
    return std::clamp(val, 0.0, 1.0);
}

double ari(const LabelVector& pred, const LabelVector& truth) {
    if (pred.size() < 2) throw LengthMismatch("ari: need at least 2 samples");
    ContingencyTable t = contingency(pred, truth);
    long long sum_ij = 0, sum_a = 0, sum_b = 0;
    std::vector<long long> a(t.rows(), 0), b(t.cols(), 0);
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            sum_ij += choose2(t.counts[i][j]);
            a[i] += t.counts[i][j];
            b[j] += t.counts[i][j];
        }
    }
    for (long long x : a) sum_a += choose2(x);
    for (long long x : b) sum_b += choose2(x);
    double total_pairs = static_cast<double>(choose2(t.total));
    double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total_pairs;
    double numer = static_cast<double>(sum_ij) - expected;
    double denom = 0.5 * static_cast<double>(sum_a + sum_b) - expected;
    if (numer == denom) return 1.0;  // covers the degenerate 0/0 cases
    return numer / denom;
}

}  // namespace mcc
