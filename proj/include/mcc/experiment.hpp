#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mcc/config.hpp"
#include "mcc/metrics.hpp"

namespace mcc {

/// One logged event. Loss columns are filled where the stage computes them;
/// metric columns only on global evaluation rows.
struct RunRow {
    int round = 0;
    std::string scope;  // "global" or "clientK"
    std::optional<double> loss_instance;
    std::optional<double> loss_cluster;
    std::optional<double> acc;
    std::optional<double> nmi;
    std::optional<double> ari;
    long long wall_ms = 0;
};

struct EvalMetrics {
    double acc = 0.0;
    double nmi = 0.0;
    double ari = 0.0;
};

struct RunResult {
    std::vector<RunRow> rows;
    MccModel model;
    EvalMetrics final_metrics;
};

/// Deterministic given the config seed. Writes metrics.csv, timing.csv,
/// config.txt, seed.txt, VERSION and model.ckpt under cfg.output_dir.
/// Wall-clock timings live in timing.csv only, so metrics.csv is
/// byte-identical across runs with the same seed.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Variant that records the verbatim config text in the provenance copy.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& config_text);

EvalMetrics evaluate_model(const MlpParams& f, const MlpParams& g_c, const Dataset& eval_set);

void write_metrics_csv(const std::vector<RunRow>& rows, const std::string& path);
void write_timing_csv(const std::vector<RunRow>& rows, const std::string& path);

extern const char* const kVersionString;

}  // namespace mcc
