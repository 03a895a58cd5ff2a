#include "mcc/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mcc {

double contrastive_loss(const RepBatch& u, const RepBatch& v, Temperature tau) {
    check_contrastive_pair(u, v);
    const std::size_t n = u.size();
    const double inv_tau = 1.0 / tau.value;

    double total = 0.0;
    std::vector<double> terms;
    terms.reserve(2 * (n - 1));
    for (std::size_t i = 0; i < n; ++i) {
        const double e_pos = cosine_similarity(u.cols[i], v.cols[i]) * inv_tau;
        terms.clear();
        double m = e_pos;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double e_uu = cosine_similarity(u.cols[i], u.cols[j]) * inv_tau;
            double e_uv = cosine_similarity(u.cols[i], v.cols[j]) * inv_tau;
            terms.push_back(e_uu);
            terms.push_back(e_uv);
            m = std::max(m, std::max(e_uu, e_uv));
        }
        double denom = 0.0;
        for (double t : terms) denom += std::exp(t - m);
        total += -(e_pos - m) + std::log(denom);
    }
    return total / static_cast<double>(n);
}

double entropy(const RepBatch& c) {
    if (c.size() == 0) throw AllZeroMatrix("entropy: empty batch");
    std::vector<double> masses(c.size());
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        masses[i] = l1_norm(c.cols[i]);
        total += masses[i];
    }
    if (total == 0.0) throw AllZeroMatrix("entropy: all entries are zero");
    double h = 0.0;
    for (double m : masses) {
        if (m == 0.0) continue;  // 0 log 0 = 0
        double p = m / total;
        h -= p * std::log(p);
    }
    return h;
}

double cc_loss(const RepBatch& z_a, const RepBatch& z_b, const RepBatch& c_a,
               const RepBatch& c_b, Temperature tau_i, Temperature tau_c) {
    return 0.5 * (contrastive_loss(z_a, z_b, tau_i) + contrastive_loss(c_a, c_b, tau_c)) +
           kEntropyTermSign * (entropy(c_a) + entropy(c_b));
}

double mcc_loss(const FourViewBatch& views, Temperature tau_i, Temperature tau_c) {
    return instance_loss(views.z_ao, views.z_bt, views.z_at, views.z_bo, tau_i) +
           cluster_loss(views.c_ao, views.c_bt, views.c_at, views.c_bo, tau_c);
}

double instance_loss(const RepBatch& z_ao, const RepBatch& z_bt, const RepBatch& z_at,
                     const RepBatch& z_bo, Temperature tau_i) {
    return 0.5 * (contrastive_loss(z_ao, z_bt, tau_i) + contrastive_loss(z_at, z_bo, tau_i));
}

double cluster_loss(const RepBatch& c_ao, const RepBatch& c_bt, const RepBatch& c_at,
                    const RepBatch& c_bo, Temperature tau_c) {
    return 0.5 * (contrastive_loss(c_ao, c_bt, tau_c) + contrastive_loss(c_at, c_bo, tau_c)) +
           kEntropyTermSign * (entropy(c_ao) + entropy(c_bo) + entropy(c_at) + entropy(c_bt));
}

}  // namespace mcc
