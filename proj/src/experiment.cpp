#include "mcc/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mcc/checkpoint.hpp"

namespace mcc {

const char* const kVersionString = "fedmcc 1.0.0";

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_fmt(const std::optional<double>& v) {
    return v ? fmt(*v) : std::string();
}

struct SplitData {
    Dataset train;
    Dataset eval;
};

// Class-major generators let us carve the eval set off the tail of each
// class, so train and eval share the same cluster frame.
SplitData make_split(const ExperimentConfig& cfg, const Rng& rng) {
    SplitData out;
    if (cfg.dataset == DatasetKind::file) {
        Dataset all = load_dataset_csv(cfg.path);
        std::vector<std::vector<std::size_t>> by_class(all.num_classes);
        for (std::size_t i = 0; i < all.samples.size(); ++i) {
            by_class[all.samples[i].label].push_back(i);
        }
        out.train.num_classes = out.eval.num_classes = all.num_classes;
        for (const auto& idx : by_class) {
            if (static_cast<int>(idx.size()) <= cfg.holdout_per_class) {
                throw ValidationError(
                    "dataset file: every class needs more than holdout_per_class samples");
            }
            std::size_t cut = idx.size() - static_cast<std::size_t>(cfg.holdout_per_class);
            for (std::size_t j = 0; j < idx.size(); ++j) {
                (j < cut ? out.train : out.eval).samples.push_back(all.samples[idx[j]]);
            }
        }
        return out;
    }

    Rng gen = rng.split(0xDA7A);
    int per_class = cfg.n_per_class + cfg.holdout_per_class;
    Dataset all = cfg.dataset == DatasetKind::blobs
                      ? make_blobs(cfg.k, per_class, cfg.dim, cfg.sep, gen)
                      : make_rings(cfg.k, per_class, cfg.dim, cfg.sep, gen);
    out.train.num_classes = out.eval.num_classes = all.num_classes;
    for (int c = 0; c < cfg.k; ++c) {
        std::size_t base = static_cast<std::size_t>(c) * per_class;
        for (int j = 0; j < per_class; ++j) {
            (j < cfg.n_per_class ? out.train : out.eval)
                .samples.push_back(all.samples[base + j]);
        }
    }
    return out;
}

class RowLog {
public:
    explicit RowLog(std::vector<RunRow>& rows)
        : rows_(rows), start_(std::chrono::steady_clock::now()) {}

    RunRow& append(int round, std::string scope) {
        RunRow row;
        row.round = round;
        row.scope = std::move(scope);
        row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
        rows_.push_back(std::move(row));
        return rows_.back();
    }

private:
    std::vector<RunRow>& rows_;
    std::chrono::steady_clock::time_point start_;
};

void eval_row(RunRow& row, const MlpParams& f, const MlpParams& g_c, const Dataset& eval_set) {
    EvalMetrics m = evaluate_model(f, g_c, eval_set);
    row.acc = m.acc;
    row.nmi = m.nmi;
    row.ari = m.ari;
}

int centralized_eval_interval(const ExperimentConfig& cfg) {
    return cfg.eval_interval > 0 ? cfg.eval_interval : 10;
}

RunResult run_centralized(const ExperimentConfig& cfg, const SplitData& data, const Rng& rng) {
    RunResult result;
    RowLog log(result.rows);
    int d2 = cfg.d2 > 0 ? cfg.d2 : data.train.num_classes;
    Rng init = rng.split(0x1217);
    MccModel model = make_mcc_model(static_cast<std::size_t>(cfg.dim),
                                    static_cast<std::size_t>(cfg.hidden),
                                    static_cast<std::size_t>(cfg.hidden_layers),
                                    static_cast<std::size_t>(cfg.d1),
                                    static_cast<std::size_t>(d2), init);

    TrainConfig tc{Temperature(cfg.tau_i), Temperature(cfg.tau_c), cfg.lr,
                   EmaMomentum(cfg.m), LossMode::full_mcc,
                   AugmentConfig{cfg.noise_sigma, cfg.mask_prob, cfg.scale_lo, cfg.scale_hi}};
    ModelOptimizer opt(cfg.optim_kind());

    const bool use_target = cfg.mode == RunMode::mcc;
    const std::size_t n = static_cast<std::size_t>(cfg.n);
    std::vector<std::size_t> order(data.train.samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<Vec> batch(n);
    int interval = centralized_eval_interval(cfg);

    {
        RunRow& row = log.append(0, "global");
        eval_row(row, model.online.f, model.online.g_c, data.eval);
    }
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng stream = rng.split(0xE90C000ull + static_cast<std::uint64_t>(epoch));
        stream.shuffle(order);
        double li = 0.0, lc = 0.0;
        long steps = 0;
        std::size_t full_batches = order.size() / n;
        for (std::size_t b = 0; b < full_batches; ++b) {
            for (std::size_t i = 0; i < n; ++i) batch[i] = data.train.samples[order[b * n + i]].x;
            StepResult res = use_target ? mcc_train_step(model, batch, tc, opt, stream)
                                        : cc_train_step(model.online, batch, tc, opt, stream);
            li += res.instance_part;
            lc += res.cluster_part;
            ++steps;
        }
        if (epoch % interval == 0 || epoch == cfg.epochs) {
            RunRow& row = log.append(epoch, "global");
            if (steps > 0) {
                row.loss_instance = li / static_cast<double>(steps);
                row.loss_cluster = lc / static_cast<double>(steps);
            }
            eval_row(row, model.online.f, model.online.g_c, data.eval);
        }
    }
    result.final_metrics = evaluate_model(model.online.f, model.online.g_c, data.eval);
    result.model = std::move(model);
    return result;
}

RunResult run_federated(const ExperimentConfig& cfg, const SplitData& data, const Rng& rng) {
    RunResult result;
    RowLog log(result.rows);
    int d2 = cfg.d2 > 0 ? cfg.d2 : data.train.num_classes;
    Rng init = rng.split(0x1217);
    MccModel server = make_mcc_model(static_cast<std::size_t>(cfg.dim),
                                     static_cast<std::size_t>(cfg.hidden),
                                     static_cast<std::size_t>(cfg.hidden_layers),
                                     static_cast<std::size_t>(cfg.d1),
                                     static_cast<std::size_t>(d2), init);

    FederatedConfig fed{cfg.clients,
                        std::max(cfg.rounds, 1),
                        cfg.local_epochs,
                        cfg.n,
                        Temperature(cfg.tau_i),
                        Temperature(cfg.tau_c),
                        EmaMomentum(cfg.m),
                        cfg.lr,
                        cfg.optim_kind(),
                        cfg.partition_kind(),
                        AugmentConfig{cfg.noise_sigma, cfg.mask_prob, cfg.scale_lo, cfg.scale_hi}};
    FederatedState state = make_federated_state(data.train, fed, server, rng);

    int interval = cfg.eval_interval > 0 ? cfg.eval_interval : 1;
    {
        RunRow& row = log.append(0, "global");
        eval_row(row, state.server.online.f, state.server.online.g_c, data.eval);
    }

    // Evaluations run inside the round hooks (they need the server state at
    // that round); rows are emitted afterwards in round order.
    auto emit_stage = [&](const StageResult& stage, const std::vector<EvalMetrics>& evals,
                          const std::vector<int>& eval_rounds, int round_offset,
                          bool instance_stage) {
        std::size_t e = 0;
        for (const StageRoundLog& rl : stage.rounds) {
            for (std::size_t k = 0; k < rl.client_mean_loss.size(); ++k) {
                RunRow& row = log.append(round_offset + rl.round, "client" + std::to_string(k));
                (instance_stage ? row.loss_instance : row.loss_cluster) =
                    rl.client_mean_loss[k];
            }
            if (e < eval_rounds.size() && eval_rounds[e] == rl.round) {
                RunRow& row = log.append(round_offset + rl.round, "global");
                row.acc = evals[e].acc;
                row.nmi = evals[e].nmi;
                row.ari = evals[e].ari;
                ++e;
            }
        }
    };

    if (cfg.rounds > 0) {
        std::vector<EvalMetrics> evals;
        std::vector<int> eval_rounds;
        StageResult s1 = run_stage1(state, fed, rng, [&](int r, const MccModel& srv) {
            if (r % interval == 0 || r == fed.rounds) {
                evals.push_back(evaluate_model(srv.online.f, srv.online.g_c, data.eval));
                eval_rounds.push_back(r);
            }
        });
        emit_stage(s1, evals, eval_rounds, 0, true);
    }
    if (cfg.stage2_rounds > 0 && cfg.rounds > 0) {
        FederatedConfig fed2 = fed;
        fed2.rounds = cfg.stage2_rounds;
        fed2.local_epochs = cfg.stage2_epochs > 0 ? cfg.stage2_epochs : cfg.local_epochs;
        std::vector<EvalMetrics> evals;
        std::vector<int> eval_rounds;
        StageResult s2 = run_stage2(state, fed2, rng, [&](int r, const MccModel& srv) {
            if (r % interval == 0 || r == fed2.rounds) {
                evals.push_back(evaluate_model(srv.online.f, srv.online.g_c, data.eval));
                eval_rounds.push_back(r);
            }
        });
        emit_stage(s2, evals, eval_rounds, fed.rounds, false);
    }
    result.final_metrics =
        evaluate_model(state.server.online.f, state.server.online.g_c, data.eval);
    result.model = std::move(state.server);
    return result;
}

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "seed = " << c.seed << '\n';
    out << "mode = " << (c.mode == RunMode::mcc ? "mcc" : c.mode == RunMode::cc ? "cc" : "fedmcc")
        << '\n';
    out << "dataset = "
        << (c.dataset == DatasetKind::blobs ? "blobs"
                                            : c.dataset == DatasetKind::rings ? "rings" : "file")
        << '\n';
    if (c.dataset == DatasetKind::file) {
        out << "path = " << c.path << '\n';
    } else {
        out << "k = " << c.k << '\n';
        out << "n_per_class = " << c.n_per_class << '\n';
        out << "dim = " << c.dim << '\n';
        out << "sep = " << fmt(c.sep) << '\n';
    }
    out << "hidden = " << c.hidden << '\n';
    out << "hidden_layers = " << c.hidden_layers << '\n';
    out << "d1 = " << c.d1 << '\n';
    out << "d2 = " << c.d2 << '\n';
    out << "epochs = " << c.epochs << '\n';
    out << "n = " << c.n << '\n';
    out << "tau_I = " << fmt(c.tau_i) << '\n';
    out << "tau_C = " << fmt(c.tau_c) << '\n';
    out << "m = " << fmt(c.m) << '\n';
    out << "lr = " << fmt(c.lr) << '\n';
    out << "optimizer = " << c.optimizer << '\n';
    out << "K = " << c.clients << '\n';
    out << "R = " << c.rounds << '\n';
    out << "E = " << c.local_epochs << '\n';
    out << "partition = " << c.partition << '\n';
    out << "stage2_rounds = " << c.stage2_rounds << '\n';
    out << "stage2_epochs = " << c.stage2_epochs << '\n';
    out << "noise_sigma = " << fmt(c.noise_sigma) << '\n';
    out << "mask_prob = " << fmt(c.mask_prob) << '\n';
    out << "scale_lo = " << fmt(c.scale_lo) << '\n';
    out << "scale_hi = " << fmt(c.scale_hi) << '\n';
    out << "eval_interval = " << c.eval_interval << '\n';
    out << "holdout_per_class = " << c.holdout_per_class << '\n';
    out << "output_dir = " << c.output_dir << '\n';
    return out.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path);
    f << text;
}

}  // namespace

EvalMetrics evaluate_model(const MlpParams& f, const MlpParams& g_c, const Dataset& eval_set) {
    LabelVector pred, truth;
    pred.reserve(eval_set.samples.size());
    truth.reserve(eval_set.samples.size());
    for (const Sample& s : eval_set.samples) {
        pred.push_back(infer_cluster(f, g_c, s.x));
        truth.push_back(s.label);
    }
    EvalMetrics m;
    m.acc = clustering_accuracy(pred, truth);
    m.nmi = nmi(pred, truth);
    m.ari = ari(pred, truth);
    return m;
}

void write_metrics_csv(const std::vector<RunRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw IoError("write_metrics_csv: cannot open " + path);
    f << "round,scope,loss_instance,loss_cluster,acc,nmi,ari\n";
    for (const RunRow& r : rows) {
        f << r.round << ',' << r.scope << ',' << opt_fmt(r.loss_instance) << ','
          << opt_fmt(r.loss_cluster) << ',' << opt_fmt(r.acc) << ',' << opt_fmt(r.nmi) << ','
          << opt_fmt(r.ari) << '\n';
    }
}

void write_timing_csv(const std::vector<RunRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::trunc | std::ios::binary);
    if (!f) throw IoError("write_timing_csv: cannot open " + path);
    f << "round,scope,wall_ms\n";
    for (const RunRow& r : rows) {
        f << r.round << ',' << r.scope << ',' << r.wall_ms << '\n';
    }
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    return run_experiment(cfg, dump_config(cfg));
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::string& config_text) {
    validate_config(cfg);
    Rng rng(cfg.seed);
    SplitData data = make_split(cfg, rng);
    int d2 = cfg.d2 > 0 ? cfg.d2 : data.train.num_classes;
    if (d2 != data.train.num_classes) {
        throw ValidationError("d2 must equal the dataset's class count k");
    }

    RunResult result;
    try {
        result = cfg.mode == RunMode::fedmcc ? run_federated(cfg, data, rng)
                                             : run_centralized(cfg, data, rng);
    } catch (const Error& e) {
        throw Error(std::string(cfg.mode == RunMode::fedmcc ? "federated" : "centralized") +
                    " stage failed: " + e.what());
    }

    std::filesystem::create_directories(cfg.output_dir);
    write_metrics_csv(result.rows, cfg.output_dir + "/metrics.csv");
    write_timing_csv(result.rows, cfg.output_dir + "/timing.csv");
    write_text(cfg.output_dir + "/config.txt", config_text);
    write_text(cfg.output_dir + "/seed.txt", std::to_string(cfg.seed) + "\n");
    write_text(cfg.output_dir + "/VERSION", std::string(kVersionString) + "\n");
    save_checkpoint(result.model, cfg.output_dir + "/model.ckpt");
    return result;
}

}  // namespace mcc
