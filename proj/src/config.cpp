#include "mcc/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace mcc {

OptimKind ExperimentConfig::optim_kind() const {
    if (optimizer == "sgd") return OptimKind::sgd;
    if (optimizer == "adam") return OptimKind::adam;
    throw ValidationError("optimizer must be sgd or adam");
}

PartitionKind ExperimentConfig::partition_kind() const {
    if (partition == "iid") return PartitionKind::iid;
    if (partition == "noniid") return PartitionKind::noniid;
    throw ValidationError("partition must be iid or noniid");
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(key + " must be an integer, got '" + v + "'");
    }
}

double to_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw ValidationError(key + " must be a number, got '" + v + "'");
    }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string::size_type hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::string::size_type eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": expected 'key = value'");
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) {
            throw ParseError("config line " + std::to_string(line_no) +
                             ": empty key or value");
        }

        if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(to_int(key, val));
        } else if (key == "mode") {
            if (val == "mcc") cfg.mode = RunMode::mcc;
            else if (val == "cc") cfg.mode = RunMode::cc;
            else if (val == "fedmcc") cfg.mode = RunMode::fedmcc;
            else throw ValidationError("mode must be mcc, cc or fedmcc");
        } else if (key == "dataset") {
            if (val == "blobs") cfg.dataset = DatasetKind::blobs;
            else if (val == "rings") cfg.dataset = DatasetKind::rings;
            else if (val == "file") cfg.dataset = DatasetKind::file;
            else throw ValidationError("dataset must be blobs, rings or file");
        } else if (key == "k") {
            cfg.k = static_cast<int>(to_int(key, val));
        } else if (key == "n_per_class") {
            cfg.n_per_class = static_cast<int>(to_int(key, val));
        } else if (key == "dim") {
            cfg.dim = static_cast<int>(to_int(key, val));
        } else if (key == "sep") {
            cfg.sep = to_real(key, val);
        } else if (key == "path") {
            cfg.path = val;
        } else if (key == "hidden") {
            cfg.hidden = static_cast<int>(to_int(key, val));
        } else if (key == "hidden_layers") {
            cfg.hidden_layers = static_cast<int>(to_int(key, val));
        } else if (key == "d1") {
            cfg.d1 = static_cast<int>(to_int(key, val));
        } else if (key == "d2") {
            cfg.d2 = static_cast<int>(to_int(key, val));
        } else if (key == "epochs") {
            cfg.epochs = static_cast<int>(to_int(key, val));
        } else if (key == "n") {
            cfg.n = static_cast<int>(to_int(key, val));
        } else if (key == "tau_I") {
            cfg.tau_i = to_real(key, val);
        } else if (key == "tau_C") {
            cfg.tau_c = to_real(key, val);
        } else if (key == "m") {
            cfg.m = to_real(key, val);
        } else if (key == "lr") {
            cfg.lr = to_real(key, val);
        } else if (key == "optimizer") {
            cfg.optimizer = val;
        } else if (key == "K") {
            cfg.clients = static_cast<int>(to_int(key, val));
        } else if (key == "R") {
            cfg.rounds = static_cast<int>(to_int(key, val));
        } else if (key == "E") {
            cfg.local_epochs = static_cast<int>(to_int(key, val));
        } else if (key == "partition") {
            cfg.partition = val;
        } else if (key == "stage2_rounds") {
            cfg.stage2_rounds = static_cast<int>(to_int(key, val));
        } else if (key == "stage2_epochs") {
            cfg.stage2_epochs = static_cast<int>(to_int(key, val));
        } else if (key == "noise_sigma") {
            cfg.noise_sigma = to_real(key, val);
        } else if (key == "mask_prob") {
            cfg.mask_prob = to_real(key, val);
        } else if (key == "scale_lo") {
            cfg.scale_lo = to_real(key, val);
        } else if (key == "scale_hi") {
            cfg.scale_hi = to_real(key, val);
        } else if (key == "eval_interval") {
            cfg.eval_interval = static_cast<int>(to_int(key, val));
        } else if (key == "holdout_per_class") {
            cfg.holdout_per_class = static_cast<int>(to_int(key, val));
        } else if (key == "output_dir") {
            cfg.output_dir = val;
        } else {
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" +
                             key + "'");
        }
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_config: cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config(const ExperimentConfig& cfg) {
    if (!(cfg.tau_i > 0.0)) throw ValidationError("tau_I must be > 0");
    if (!(cfg.tau_c > 0.0)) throw ValidationError("tau_C must be > 0");
    if (!(cfg.m > 0.0 && cfg.m < 1.0)) throw ValidationError("m must be in (0,1)");
    if (cfg.lr < 0.0) throw ValidationError("lr must be >= 0");
    if (cfg.n < 2) throw ValidationError("n must be >= 2");
    if (cfg.epochs < 0) throw ValidationError("epochs must be >= 0");
    if (cfg.hidden < 1) throw ValidationError("hidden must be >= 1");
    if (cfg.hidden_layers < 1) throw ValidationError("hidden_layers must be >= 1");
    if (cfg.d1 < 1) throw ValidationError("d1 must be >= 1");
    if (cfg.d2 < 0) throw ValidationError("d2 must be >= 0");
    if (cfg.clients < 1) throw ValidationError("K must be >= 1");
    if (cfg.rounds < 0) throw ValidationError("R must be >= 0");
    if (cfg.local_epochs < 1) throw ValidationError("E must be >= 1");
    if (cfg.stage2_rounds < 0) throw ValidationError("stage2_rounds must be >= 0");
    if (cfg.stage2_epochs < 0) throw ValidationError("stage2_epochs must be >= 0");
    if (cfg.holdout_per_class < 1) throw ValidationError("holdout_per_class must be >= 1");
    if (cfg.eval_interval < 0) throw ValidationError("eval_interval must be >= 0");
    cfg.optim_kind();
    cfg.partition_kind();
    AugmentConfig aug{cfg.noise_sigma, cfg.mask_prob, cfg.scale_lo, cfg.scale_hi};
    aug.validate();
    if (cfg.dataset == DatasetKind::file) {
        if (cfg.path.empty()) throw ValidationError("path is required when dataset=file");
        if (!std::filesystem::exists(cfg.path)) {
            throw ValidationError("path does not exist: " + cfg.path);
        }
    } else {
        if (cfg.k < 2) throw ValidationError("k must be >= 2");
        if (cfg.n_per_class < 1) throw ValidationError("n_per_class must be >= 1");
        if (cfg.dim < 1) throw ValidationError("dim must be >= 1");
        if (!(cfg.sep > 0.0)) throw ValidationError("sep must be > 0");
        if (cfg.d2 != 0 && cfg.d2 != cfg.k) {
            throw ValidationError("d2 must equal the dataset's class count k");
        }
    }
}

}  // namespace mcc
