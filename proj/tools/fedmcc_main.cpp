#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mcc/checkpoint.hpp"
#include "mcc/experiment.hpp"
#include "mcc/gradients.hpp"

namespace {

using mcc::RepBatch;
using mcc::Temperature;
using mcc::Vec;

int cmd_run(const std::string& config_path, long long seed_override,
            const std::string& out_override) {
    mcc::ExperimentConfig cfg = mcc::load_config(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;
    mcc::RunResult res = mcc::run_experiment(cfg);
    std::printf("final: acc=%.4f nmi=%.4f ari=%.4f (artifacts in %s)\n",
                res.final_metrics.acc, res.final_metrics.nmi, res.final_metrics.ari,
                cfg.output_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path) {
    mcc::MccModel model = mcc::load_checkpoint(checkpoint_path);
    mcc::Dataset data = mcc::load_dataset_csv(dataset_path);
    mcc::EvalMetrics m = mcc::evaluate_model(model.online.f, model.online.g_c, data);
    std::printf("acc=%.6f nmi=%.6f ari=%.6f n=%zu\n", m.acc, m.nmi, m.ari,
                data.samples.size());
    return 0;
}

// Central finite difference of a scalar function of one coordinate.
template <typename F>
double fd(F&& f, double& slot, double h = 1e-6) {
    double orig = slot;
    slot = orig + h;
    double up = f();
    slot = orig - h;
    double down = f();
    slot = orig;
    return (up - down) / (2.0 * h);
}

bool close(double a, double b, double rel, double abs_tol) {
    double diff = std::abs(a - b);
    return diff <= abs_tol || diff <= rel * std::max(std::abs(a), std::abs(b));
}

RepBatch random_batch(std::size_t n, std::size_t d, mcc::Rng& rng, bool positive) {
    RepBatch b;
    b.cols.resize(n);
    for (Vec& c : b.cols) {
        c.resize(d);
        for (double& x : c) x = positive ? rng.uniform(0.1, 2.0) : rng.normal();
        if (!positive && mcc::norm2(c) < 0.3) {
            for (double& x : c) x += 0.5;
        }
    }
    return b;
}

int cmd_gradcheck(int trials) {
    mcc::Rng rng(20240);
    int failures = 0;
    double worst = 0.0;
    auto check = [&](double analytic, double numeric, const char* what) {
        double diff = std::abs(analytic - numeric);
        double denom = std::max(std::abs(analytic), std::abs(numeric));
        double rel = denom > 0 ? diff / denom : diff;
        worst = std::max(worst, std::min(rel, diff));
        if (!close(analytic, numeric, 1e-5, 1e-8)) {
            ++failures;
            std::fprintf(stderr, "MISMATCH %s: analytic=%.12g numeric=%.12g\n", what, analytic,
                         numeric);
        }
    };

    for (int t = 0; t < trials; ++t) {
        std::size_t n = 2 + rng.uniform_index(7);
        std::size_t d = 2 + rng.uniform_index(15);
        Temperature tau(rng.uniform(0.3, 2.0));

        RepBatch u = random_batch(n, d, rng, false);
        RepBatch v = random_batch(n, d, rng, false);

        // cosine_grad
        {
            Vec g = mcc::cosine_grad(u.cols[0], v.cols[0]);
            for (std::size_t i = 0; i < d; ++i) {
                double num = fd([&] { return mcc::cosine_similarity(u.cols[0], v.cols[0]); },
                                u.cols[0][i]);
                check(g[i], num, "cosine_grad");
            }
        }
        // contrastive_grad_u / _v
        std::size_t ell = rng.uniform_index(n);
        {
            Vec g = mcc::contrastive_grad_u(u, v, tau, ell);
            for (std::size_t i = 0; i < d; ++i) {
                double num =
                    fd([&] { return mcc::contrastive_loss(u, v, tau); }, u.cols[ell][i]);
                check(g[i], num, "contrastive_grad_u");
            }
            g = mcc::contrastive_grad_v(u, v, tau, ell);
            for (std::size_t i = 0; i < d; ++i) {
                double num =
                    fd([&] { return mcc::contrastive_loss(u, v, tau); }, v.cols[ell][i]);
                check(g[i], num, "contrastive_grad_v");
            }
        }
        // entropy_grad on strictly positive matrices
        {
            RepBatch c = random_batch(n, d, rng, true);
            std::size_t col = rng.uniform_index(n);
            Vec g = mcc::entropy_grad(c, col);
            for (std::size_t i = 0; i < d; ++i) {
                double num = fd([&] { return mcc::entropy(c); }, c.cols[col][i]);
                check(g[i], num, "entropy_grad");
            }
        }
    }
    std::printf("gradcheck: %d trials, %d mismatches (tolerance max(1e-5 rel, 1e-8 abs))\n",
                trials, failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"momentum contrastive clustering: centralized and federated runs"};
    app.require_subcommand(1);

    std::string config_path, out_dir, checkpoint_path, dataset_path;
    long long seed = -1;
    int trials = 120;

    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "config file path")->required();
    run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out_dir, "override the output directory");

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset CSV");
    eval->add_option("checkpoint", checkpoint_path, "model checkpoint")->required();
    eval->add_option("dataset", dataset_path, "dataset CSV (label,v1,...,vd)")->required();

    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference check of all closed-form gradients");
    gc->add_option("--trials", trials, "number of random instances");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out_dir);
        if (eval->parsed()) return cmd_eval(checkpoint_path, dataset_path);
        if (gc->parsed()) return cmd_gradcheck(trials);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
