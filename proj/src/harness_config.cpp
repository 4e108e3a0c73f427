// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tryonlab/error.hpp"

namespace tryonlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    raise(ErrorCode::ConfigInvalid, "expected a boolean for " + key, value);
}

long long parse_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(value, &used);
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigInvalid, "expected an integer for " + key, value);
    }
    if (used != value.size())
        raise(ErrorCode::ConfigInvalid, "expected an integer for " + key, value);
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        raise(ErrorCode::ConfigInvalid, "expected a number for " + key, value);
    }
    if (used != value.size())
        raise(ErrorCode::ConfigInvalid, "expected a number for " + key, value);
    return out;
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void set_config_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset") cfg.dataset = value;
    else if (key == "split") cfg.split = split_from_name(value);
    else if (key == "eval_split") cfg.eval_split = split_from_name(value);
    else if (key == "pose_mode") cfg.pose_mode = pose_mode_from_name(value);
    else if (key == "heatmap_radius") cfg.heatmap_radius = static_cast<int>(parse_int(key, value));
    else if (key == "attention") cfg.attention = parse_bool(key, value);
    else if (key == "activation") cfg.activation = activation_from_name(value);
    else if (key == "flow") cfg.flow = parse_bool(key, value);
    else if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(key, value));
    else if (key == "accumulated_batch")
        cfg.accumulated_batch = static_cast<int>(parse_int(key, value));
    else if (key == "micro_batch") cfg.micro_batch = static_cast<int>(parse_int(key, value));
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "decay_start_epoch")
        cfg.decay_start_epoch = static_cast<int>(parse_int(key, value));
    else if (key == "mixed_precision") cfg.mixed_precision = parse_bool(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "w_l1") cfg.loss_weights.w_l1 = parse_double(key, value);
    else if (key == "w_mask") cfg.loss_weights.w_mask = parse_double(key, value);
    else if (key == "w_vgg") cfg.loss_weights.w_vgg = parse_double(key, value);
    else if (key == "lambda_f") cfg.loss_weights.lambda_f = parse_double(key, value);
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "steps_per_epoch")
        cfg.steps_per_epoch = static_cast<int>(parse_int(key, value));
    else if (key == "base_width") cfg.base_width = static_cast<int>(parse_int(key, value));
    else if (key == "depth") cfg.depth = static_cast<int>(parse_int(key, value));
    else if (key == "num_threads") cfg.num_threads = static_cast<int>(parse_int(key, value));
    else if (key == "force_zero_flow_mask") cfg.force_zero_flow_mask = parse_bool(key, value);
    else raise(ErrorCode::ConfigInvalid, "unknown config key", key);
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            raise(ErrorCode::ConfigInvalid, "expected key=value on line " + std::to_string(lineno),
                  line);
        set_config_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    validate_experiment_config(cfg);
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoFailure, "cannot open config file", path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "dataset = " << cfg.dataset << "\n";
    out << "split = " << split_name(cfg.split) << "\n";
    out << "eval_split = " << split_name(cfg.eval_split) << "\n";
    out << "pose_mode = " << pose_mode_name(cfg.pose_mode) << "\n";
    out << "heatmap_radius = " << cfg.heatmap_radius << "\n";
    out << "attention = " << (cfg.attention ? "true" : "false") << "\n";
    out << "activation = " << activation_name(cfg.activation) << "\n";
    out << "flow = " << (cfg.flow ? "true" : "false") << "\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "accumulated_batch = " << cfg.accumulated_batch << "\n";
    out << "micro_batch = " << cfg.micro_batch << "\n";
    out << "lr = " << fmt_double(cfg.lr) << "\n";
    out << "decay_start_epoch = " << cfg.decay_start_epoch << "\n";
    out << "mixed_precision = " << (cfg.mixed_precision ? "true" : "false") << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "w_l1 = " << fmt_double(cfg.loss_weights.w_l1) << "\n";
    out << "w_mask = " << fmt_double(cfg.loss_weights.w_mask) << "\n";
    out << "w_vgg = " << fmt_double(cfg.loss_weights.w_vgg) << "\n";
    out << "lambda_f = " << fmt_double(cfg.loss_weights.lambda_f) << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "steps_per_epoch = " << cfg.steps_per_epoch << "\n";
    out << "base_width = " << cfg.base_width << "\n";
    out << "depth = " << cfg.depth << "\n";
    out << "num_threads = " << cfg.num_threads << "\n";
    out << "force_zero_flow_mask = " << (cfg.force_zero_flow_mask ? "true" : "false") << "\n";
    return out.str();
}

void validate_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.epochs < 1) raise(ErrorCode::ConfigInvalid, "epochs must be >= 1");
    if (cfg.accumulated_batch < 1)
        raise(ErrorCode::ConfigInvalid, "accumulated_batch must be >= 1");
    if (cfg.micro_batch < 1) raise(ErrorCode::ConfigInvalid, "micro_batch must be >= 1");
    if (cfg.accumulated_batch % cfg.micro_batch != 0)
        raise(ErrorCode::ConfigInvalid, "accumulated_batch must be divisible by micro_batch");
    if (!(cfg.lr > 0) || !std::isfinite(cfg.lr))
        raise(ErrorCode::ConfigInvalid, "lr must be positive and finite");
    if (cfg.decay_start_epoch < 0 || cfg.decay_start_epoch > cfg.epochs)
        raise(ErrorCode::ConfigInvalid, "decay_start_epoch must lie in [0, epochs]");
    if (cfg.heatmap_radius < 1) raise(ErrorCode::ConfigInvalid, "heatmap_radius must be >= 1");
    if (cfg.steps_per_epoch < 0) raise(ErrorCode::ConfigInvalid, "steps_per_epoch must be >= 0");
    if (cfg.num_threads < 0) raise(ErrorCode::ConfigInvalid, "num_threads must be >= 0");
    if (cfg.force_zero_flow_mask && !cfg.flow)
        raise(ErrorCode::ConfigInvalid, "force_zero_flow_mask requires flow");
    validate_loss_weights(cfg.loss_weights);
    validate_config(tryon_config(cfg));
}

std::filesystem::path resolve_dataset_root(const ExperimentConfig& cfg) {
    if (!cfg.dataset.empty()) return cfg.dataset;
    const char* env = std::getenv("TRYON_LAB_DATA");
    if (env != nullptr && *env != '\0') return env;
    raise(ErrorCode::ConfigInvalid, "no dataset root: set dataset= or TRYON_LAB_DATA");
}

int input_channels(const ExperimentConfig& cfg) {
    // person representation (7 common channels + pose block) + warped cloth
    // image (3) + warped cloth mask (1)
    const int pose = cfg.pose_mode == PoseModeKind::dense ? 3 : KeypointSet::kNumPoints;
    return 7 + pose + 4;
}

TryonConfig tryon_config(const ExperimentConfig& cfg) {
    TryonConfig net;
    net.in_channels = input_channels(cfg);
    net.base_width = cfg.base_width;
    net.depth = cfg.depth;
    net.attention = cfg.attention;
    net.activation = cfg.activation;
    net.flow = cfg.flow;
    net.seed = cfg.seed;
    return net;
}

double lr_schedule(int epoch, const ExperimentConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs)
        raise(ErrorCode::ConfigInvalid, "epoch outside [0, epochs)", std::to_string(epoch));
    if (epoch < cfg.decay_start_epoch) return cfg.lr;
    return cfg.lr *
           (1.0 - static_cast<double>(epoch - cfg.decay_start_epoch) /
                      static_cast<double>(cfg.epochs - cfg.decay_start_epoch));
}

} // namespace tryonlab
