#include "mcc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcc {

namespace {

// Orthonormal frame via Gram-Schmidt on Gaussian draws.
std::vector<Vec> random_rotation(int dim, Rng& rng) {
    std::vector<Vec> q;
    q.reserve(dim);
    while (static_cast<int>(q.size()) < dim) {
        Vec v(dim);
        for (double& x : v) x = rng.normal();
        for (const Vec& u : q) {
            double p = dot(u, v);
            axpy(-p, u, v);
        }
        double nv = norm2(v);
        if (nv < 1e-9) continue;  // degenerate draw; take another
        for (double& x : v) x /= nv;
        q.push_back(std::move(v));
    }
    return q;
}

// Regular simplex with k vertices and side `side`, centered at the origin,
// expressed in k-1 coordinates.
std::vector<Vec> simplex_vertices(int k, double side) {
    // Vertices side/sqrt(2) * e_i in R^k, centered, then rotated into the
    // (k-1)-dimensional subspace they span.
    double c = side / std::sqrt(2.0);
    std::vector<Vec> u(k, Vec(k, 0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) u[i][j] = (i == j ? c : 0.0) - c / k;
    }
    // Orthonormal basis of span{u_i - u_0}.
    std::vector<Vec> basis;
    for (int i = 1; i < k; ++i) {
        Vec v(k);
        for (int j = 0; j < k; ++j) v[j] = u[i][j] - u[0][j];
        for (const Vec& b : basis) {
            double p = dot(b, v);
            axpy(-p, b, v);
        }
        double nv = norm2(v);
        for (double& x : v) x /= nv;
        basis.push_back(std::move(v));
    }
    std::vector<Vec> w(k, Vec(k - 1));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k - 1; ++j) w[i][j] = dot(basis[j], u[i]);
    }
    return w;
}

std::vector<Vec> blob_means(int k, int dim, double sep, Rng& rng) {
    std::vector<Vec> frame = random_rotation(dim, rng);
    std::vector<Vec> means(k, Vec(dim, 0.0));
    if (k <= dim + 1) {
        std::vector<Vec> w = simplex_vertices(k, sep);
        for (int c = 0; c < k; ++c) {
            for (int j = 0; j < k - 1; ++j) axpy(w[c][j], frame[j], means[c]);
        }
    } else {
        for (int c = 0; c < k; ++c) {
            Vec dir(dim);
            for (double& x : dir) x = rng.normal();
            double nd = norm2(dir);
            for (std::size_t j = 0; j < dir.size(); ++j) means[c][j] = sep * dir[j] / nd;
        }
    }
    return means;
}

}  // namespace

Dataset make_blobs(int k, int n_per_class, int dim, double sep, Rng& rng) {
    if (k < 2) throw ValidationError("make_blobs: k must be >= 2");
    if (n_per_class < 1) throw ValidationError("make_blobs: n_per_class must be >= 1");
    if (dim < 1) throw ValidationError("make_blobs: dim must be >= 1");
    if (!(sep > 0.0)) throw ValidationError("make_blobs: sep must be > 0");
    if (k > dim + 1 && dim < 1) throw ValidationError("make_blobs: bad dims");

    std::vector<Vec> means = blob_means(k, dim, sep, rng);
    Dataset data;
    data.num_classes = k;
    data.samples.reserve(static_cast<std::size_t>(k) * n_per_class);
    for (int c = 0; c < k; ++c) {
        for (int s = 0; s < n_per_class; ++s) {
            Sample sm;
            sm.label = c;
            sm.x = means[c];
            for (double& x : sm.x) x += rng.normal();
            data.samples.push_back(std::move(sm));
        }
    }
    return data;
}

Dataset make_rings(int k, int n_per_class, int dim, double sep, Rng& rng) {
    if (k < 2) throw ValidationError("make_rings: k must be >= 2");
    if (dim < 2) throw ValidationError("make_rings: dim must be >= 2");
    if (!(sep > 0.0)) throw ValidationError("make_rings: sep must be > 0");

    Dataset data;
    data.num_classes = k;
    data.samples.reserve(static_cast<std::size_t>(k) * n_per_class);
    for (int c = 0; c < k; ++c) {
        double radius = sep * (c + 1);
        for (int s = 0; s < n_per_class; ++s) {
            double theta = rng.uniform(0.0, 6.28318530717958647692);
            Sample sm;
            sm.label = c;
            sm.x.assign(dim, 0.0);
            sm.x[0] = radius * std::cos(theta);
            sm.x[1] = radius * std::sin(theta);
            for (double& x : sm.x) x += rng.normal();
            data.samples.push_back(std::move(sm));
        }
    }
    return data;
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_dataset_csv: cannot open " + path);
    Dataset data;
    std::string line;
    int line_no = 0;
    std::size_t dim = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        Sample sm;
        bool first = true;
        while (std::getline(ss, field, ',')) {
            try {
                if (first) {
                    sm.label = std::stoi(field);
                    first = false;
                } else {
                    sm.x.push_back(std::stod(field));
                }
            } catch (const std::exception&) {
                throw ParseError("dataset line " + std::to_string(line_no) +
                                 ": bad field '" + field + "'");
            }
        }
        if (first || sm.x.empty()) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": too few fields");
        }
        if (sm.label < 0) {
            throw ParseError("dataset line " + std::to_string(line_no) + ": negative label");
        }
        if (dim == 0) {
            dim = sm.x.size();
        } else if (sm.x.size() != dim) {
            throw ParseError("dataset line " + std::to_string(line_no) +
                             ": inconsistent dimension");
        }
        data.num_classes = std::max(data.num_classes, sm.label + 1);
        data.samples.push_back(std::move(sm));
    }
    if (data.samples.empty()) throw EmptyDataset("load_dataset_csv: no samples in " + path);
    return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("save_dataset_csv: cannot open " + path);
    char buf[64];
    for (const Sample& s : data.samples) {
        f << s.label;
        for (double v : s.x) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            f << ',' << buf;
        }
        f << '\n';
    }
}

std::vector<ClientDataset> partition_iid(const Dataset& data, int k_clients, Rng& rng) {
    if (data.samples.empty()) throw EmptyDataset("partition_iid: empty dataset");
    if (k_clients < 1) throw ValidationError("partition_iid: need at least one client");

    std::vector<std::vector<std::size_t>> by_class(data.num_classes);
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        by_class[data.samples[i].label].push_back(i);
    }
    std::vector<ClientDataset> out(k_clients);
    for (int k = 0; k < k_clients; ++k) out[k].client_id = k;
    for (auto& idx : by_class) {
        rng.shuffle(idx);
        for (std::size_t j = 0; j < idx.size(); ++j) {
            out[j % k_clients].samples.push_back(data.samples[idx[j]]);
        }
    }
    for (const ClientDataset& c : out) {
        if (c.samples.empty()) {
            throw EmptyDataset("partition_iid: a client received no samples");
        }
    }
    return out;
}

std::vector<ClientDataset> partition_noniid(const Dataset& data, int k_clients) {
    if (data.samples.empty()) throw EmptyDataset("partition_noniid: empty dataset");
    if (k_clients < 1) throw ValidationError("partition_noniid: need at least one client");
    if (data.num_classes % k_clients != 0) {
        throw IndivisibleClasses("partition_noniid: " + std::to_string(data.num_classes) +
                                 " classes not divisible by " + std::to_string(k_clients) +
                                 " clients");
    }
    int per_client = data.num_classes / k_clients;
    std::vector<ClientDataset> out(k_clients);
    for (int k = 0; k < k_clients; ++k) out[k].client_id = k;
    for (const Sample& s : data.samples) {
        out[s.label / per_client].samples.push_back(s);
    }
    for (const ClientDataset& c : out) {
        if (c.samples.empty()) {
            throw EmptyDataset("partition_noniid: a client received no samples");
        }
    }
    return out;
}

}  // namespace mcc
