#pragma once

#include <cstdint>
#include <string>

#include "mcc/federated.hpp"

namespace mcc {

enum class RunMode { mcc, cc, fedmcc };
enum class DatasetKind { blobs, rings, file };

/// Fully validated run description. Defaults follow the standard
/// hyperparameters (n=128, tau_I=0.5, tau_C=1.0, m=0.99, lr=0.0003, d1=128,
/// E=5, R=100); desk-scale runs override per config file.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    RunMode mode = RunMode::mcc;

    DatasetKind dataset = DatasetKind::blobs;
    int k = 3;
    int n_per_class = 200;
    int dim = 2;
    double sep = 6.0;
    std::string path;  // dataset=file only

    int hidden = 64;
    int hidden_layers = 2;
    int d1 = 128;
    int d2 = 0;  // 0 = derive from the dataset's class count

    int epochs = 300;  // centralized modes
    int n = 128;       // batch size
    double tau_i = 0.5;
    double tau_c = 1.0;
    double m = 0.99;
    double lr = 0.0003;
    std::string optimizer = "adam";

    int clients = 2;
    int rounds = 100;
    int local_epochs = 5;
    std::string partition = "iid";
    int stage2_rounds = 10;
    int stage2_epochs = 0;  // 0 = same as local_epochs

    double noise_sigma = 1.0;
    double mask_prob = 0.0;
    double scale_lo = 1.0;
    double scale_hi = 1.0;

    int eval_interval = 0;  // 0 = every round (fedmcc) / every 10 epochs (centralized)
    int holdout_per_class = 50;
    std::string output_dir = "out";

    OptimKind optim_kind() const;
    PartitionKind partition_kind() const;
};

/// Key-value text format, one `key = value` per line, '#' comments.
/// Unknown keys are rejected (ParseError with the line number); invalid
/// values raise ValidationError naming the field.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
void validate_config(const ExperimentConfig& cfg);

}  // namespace mcc
