#include "mcc/numerics.hpp"

#include <cmath>
#include <string>

namespace mcc {

double dot(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) {
        throw DimMismatch("dot: dims " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm2(const Vec& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

double l1_norm(const Vec& u) {
    double s = 0.0;
    for (double x : u) s += std::abs(x);
    return s;
}

double cosine_similarity(const Vec& u, const Vec& v) {
    if (u.size() != v.size()) {
        throw DimMismatch("cosine_similarity: dims " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
    }
    double nu = norm2(u);
    double nv = norm2(v);
    if (nu == 0.0 || nv == 0.0) {
        throw ZeroNormVector("cosine_similarity: zero-norm input");
    }
    double s = dot(u, v) / (nu * nv);
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    return s;
}

RepBatch cluster_batch_from_rows(const std::vector<Vec>& rows) {
    RepBatch out;
    out.layout = Layout::cluster;
    if (rows.empty()) return out;
    std::size_t n = rows.size();
    std::size_t d = rows.front().size();
    for (const Vec& r : rows) {
        if (r.size() != d) throw DimMismatch("cluster_batch_from_rows: ragged rows");
    }
    out.cols.assign(d, Vec(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) out.cols[j][i] = rows[i][j];
    }
    return out;
}

void check_contrastive_pair(const RepBatch& u, const RepBatch& v) {
    if (u.size() != v.size()) {
        throw DimMismatch("contrastive pair: column counts " + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()));
    }
    if (u.size() < 2) {
        throw BatchTooSmall("contrastive pair: need at least 2 columns, got " +
                            std::to_string(u.size()));
    }
    std::size_t d = u.dim();
    for (const Vec& c : u.cols) {
        if (c.size() != d) throw DimMismatch("contrastive pair: ragged columns in u");
    }
    for (const Vec& c : v.cols) {
        if (c.size() != d) throw DimMismatch("contrastive pair: ragged columns in v");
    }
}

void axpy(double a, const Vec& x, Vec& y) {
    if (x.size() != y.size()) throw DimMismatch("axpy: dims differ");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

}  // namespace mcc
