#include "mcc/federated.hpp"

#include <cmath>
#include <string>

#include "mcc/checkpoint.hpp"

namespace mcc {

void FederatedConfig::validate() const {
    if (clients < 1) throw ValidationError("K must be >= 1");
    if (rounds < 1) throw ValidationError("R must be >= 1");
    if (local_epochs < 1) throw ValidationError("E must be >= 1");
    if (batch < 2) throw ValidationError("n must be >= 2");
    aug.validate();
}

double exact_sum(const std::vector<double>& terms) {
    // Shewchuk's expansion sum (as in Python's math.fsum): partials are
    // non-overlapping, so the final left-to-right add is exactly rounded.
    std::vector<double> partials;
    for (double x : terms) {
        std::size_t i = 0;
        for (std::size_t j = 0; j < partials.size(); ++j) {
            double y = partials[j];
            if (std::abs(x) < std::abs(y)) std::swap(x, y);
            double hi = x + y;
            double lo = y - (hi - x);
            if (lo != 0.0) partials[i++] = lo;
            x = hi;
        }
        partials.resize(i);
        partials.push_back(x);
    }
    double s = 0.0;
    for (double p : partials) s += p;
    return s;
}

MlpParams federated_average(const std::vector<FedPart>& parts) {
    if (parts.empty()) throw ValidationError("federated_average: no parts");
    long long total = 0;
    for (const FedPart& p : parts) {
        if (p.weight <= 0) throw ValidationError("federated_average: weights must be > 0");
        total += p.weight;
    }
    const MlpParams& ref = *parts.front().params;
    for (const FedPart& p : parts) {
        if (p.params->layers.size() != ref.layers.size()) {
            throw ShapeMismatch("federated_average: stack depths differ");
        }
        for (std::size_t l = 0; l < ref.layers.size(); ++l) {
            if (p.params->layers[l].out_dim() != ref.layers[l].out_dim() ||
                p.params->layers[l].in_dim() != ref.layers[l].in_dim() ||
                p.params->layers[l].act != ref.layers[l].act) {
                throw ShapeMismatch("federated_average: layer shapes differ");
            }
        }
    }

    std::vector<double> weights(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) {
        weights[k] =
            static_cast<double>(parts[k].weight) / static_cast<double>(total);
    }

    MlpParams out = ref;
    std::vector<double> terms(parts.size());
    for (std::size_t l = 0; l < out.layers.size(); ++l) {
        for (std::size_t r = 0; r < out.layers[l].out_dim(); ++r) {
            for (std::size_t c = 0; c < out.layers[l].in_dim(); ++c) {
                for (std::size_t k = 0; k < parts.size(); ++k) {
                    terms[k] = weights[k] * parts[k].params->layers[l].w[r][c];
                }
                out.layers[l].w[r][c] = exact_sum(terms);
            }
            for (std::size_t k = 0; k < parts.size(); ++k) {
                terms[k] = weights[k] * parts[k].params->layers[l].b[r];
            }
            out.layers[l].b[r] = exact_sum(terms);
        }
    }
    ++out.version;
    return out;
}

FederatedState make_federated_state(const Dataset& data, const FederatedConfig& cfg,
                                    const MccModel& server_init, const Rng& rng) {
    if (cfg.clients < 1) throw ValidationError("make_federated_state: K must be >= 1");
    FederatedState st;
    st.server = server_init;
    Rng part_rng = rng.split(0x9A47);
    st.client_data = cfg.partition == PartitionKind::iid
                         ? partition_iid(data, cfg.clients, part_rng)
                         : partition_noniid(data, cfg.clients);
    st.clients.assign(cfg.clients, server_init);
    return st;
}

namespace {

// Broadcast through the wire format so a real transport can slot in.
void broadcast_stack(const MlpParams& src, MlpParams& dst) {
    dst = deserialize_stack(serialize_stack(src));
}

// E local epochs of size-n batches over this client's data; incomplete
// trailing batches are dropped. Returns the mean selected-loss across steps.
double client_local_training(MccModel& model, const ClientDataset& data,
                             const FederatedConfig& cfg, LossMode mode, Rng stream) {
    TrainConfig tc{cfg.tau_i, cfg.tau_c, cfg.lr, cfg.momentum, mode, cfg.aug};
    ModelOptimizer opt(cfg.optimizer);
    double loss_sum = 0.0;
    long steps = 0;
    std::vector<std::size_t> order(data.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t n = static_cast<std::size_t>(cfg.batch);
    std::vector<Vec> batch(n);
    for (int e = 0; e < cfg.local_epochs; ++e) {
        stream.shuffle(order);
        std::size_t full_batches = order.size() / n;
        for (std::size_t b = 0; b < full_batches; ++b) {
            for (std::size_t i = 0; i < n; ++i) {
                batch[i] = data.samples[order[b * n + i]].x;
            }
            StepResult res = mcc_train_step(model, batch, tc, opt, stream);
            loss_sum += res.loss;
            ++steps;
        }
    }
    return steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
}

}  // namespace

StageResult run_stage1(FederatedState& state, const FederatedConfig& cfg, const Rng& rng,
                       const EvalHook& hook) {
    cfg.validate();
    if (static_cast<int>(state.clients.size()) != cfg.clients) {
        throw ValidationError("run_stage1: state/client count mismatch");
    }
    StageResult result;
    for (int r = 1; r <= cfg.rounds; ++r) {
        StageRoundLog log;
        log.round = r;
        for (int k = 0; k < cfg.clients; ++k) {
            MccModel& client = state.clients[k];
            broadcast_stack(state.server.online.f, client.online.f);
            broadcast_stack(state.server.online.g_i, client.online.g_i);
            client.target.f = client.online.f;
            client.target.g_i = client.online.g_i;
            Rng stream = rng.split(0x51A6E100ull + static_cast<std::uint64_t>(r) * 4096u +
                                   static_cast<std::uint64_t>(k));
            log.client_mean_loss.push_back(client_local_training(
                client, state.client_data[k], cfg, LossMode::instance_only, stream));
        }
        std::vector<FedPart> parts_f, parts_gi;
        for (int k = 0; k < cfg.clients; ++k) {
            long long w = static_cast<long long>(state.client_data[k].samples.size());
            parts_f.push_back({&state.clients[k].online.f, w});
            parts_gi.push_back({&state.clients[k].online.g_i, w});
        }
        state.server.online.f = federated_average(parts_f);
        state.server.online.g_i = federated_average(parts_gi);
        state.server.target.f = state.server.online.f;
        state.server.target.g_i = state.server.online.g_i;
        state.round = r;
        result.rounds.push_back(std::move(log));
        if (hook) hook(r, state.server);
    }
    return result;
}

StageResult run_stage2(FederatedState& state, const FederatedConfig& cfg, const Rng& rng,
                       const EvalHook& hook) {
    cfg.validate();
    if (static_cast<int>(state.clients.size()) != cfg.clients) {
        throw ValidationError("run_stage2: state/client count mismatch");
    }
    // Fresh global cluster projector; the encoder from stage one is frozen.
    {
        Rng init = rng.split(0x51A6E200ull);
        std::size_t hidden = state.server.online.g_c.in_dim();
        std::size_t d2 = state.server.online.g_c.out_dim();
        state.server.online.g_c = make_mlp({hidden, d2}, {Activation::identity}, init);
        state.server.target.g_c = state.server.online.g_c;
    }
    StageResult result;
    for (int r = 1; r <= cfg.rounds; ++r) {
        StageRoundLog log;
        log.round = r;
        for (int k = 0; k < cfg.clients; ++k) {
            MccModel& client = state.clients[k];
            broadcast_stack(state.server.online.f, client.online.f);
            client.target.f = client.online.f;
            broadcast_stack(state.server.online.g_c, client.online.g_c);
            client.target.g_c = client.online.g_c;
            Rng stream = rng.split(0x51A6E300ull + static_cast<std::uint64_t>(r) * 4096u +
                                   static_cast<std::uint64_t>(k));
            log.client_mean_loss.push_back(client_local_training(
                client, state.client_data[k], cfg, LossMode::cluster_only, stream));
        }
        std::vector<FedPart> parts_gc;
        for (int k = 0; k < cfg.clients; ++k) {
            long long w = static_cast<long long>(state.client_data[k].samples.size());
            parts_gc.push_back({&state.clients[k].online.g_c, w});
        }
        state.server.online.g_c = federated_average(parts_gc);
        state.server.target.g_c = state.server.online.g_c;
        state.round = r;
        result.rounds.push_back(std::move(log));
        if (hook) hook(r, state.server);
    }
    return result;
}

int infer_cluster(const MlpParams& f, const MlpParams& g_c, const Vec& x) {
    Vec y = softmax(forward(g_c, forward(f, x)));
    int best = 0;
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (y[i] > y[best]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace mcc
