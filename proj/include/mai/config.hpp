#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "mai/engine.hpp"

namespace mai::cfg {

struct TaskConfig {
    std::string name = "t1";          // t1 | t2 | t3
    std::string shape = "circle";
    std::string shape_b;              // t3 student shape; empty = same as shape
    int steps = 65;
    double jitter = 0.01;
    std::string permute_mode = "none";  // none | preserving | breaking
    int segment_len = 0;                // 0 = follow engine.bin
    bool open_loops = false;
    int epochs = 5;
    int episodes_per_epoch = 6;
    std::string introduce_shape;        // optional second class
    int introduce_at = -1;              // global episode index; -1 = never
};

struct ChecksConfig {
    bool h1 = true;
    bool h2 = true;
    bool h3 = true;
    bool h4 = true;
    bool h5 = true;
    double h2_gamma_max = 0.95;
    double h3_epsilon = 0.05;
    double h3_vr_scale = 0.8;
    int h3_permutations = 50;
    double h5_ratio_max = 0.5;
    int h5_held_out = 8;
    double a2_phi_factor = 5.0;
    double a4_fraction = 0.9;
    int a4_trials = 30;
    int t3_expected_groups = 1;
};

/// Full run description. Parsing is strict: one versioned schema, unknown
/// keys rejected, seed mandatory.
struct RunConfig {
    int schema_version = 1;
    std::uint64_t seed = 0;
    TaskConfig task;
    engine::EngineConfig engine;
    ChecksConfig checks;
    std::string out_dir;
    std::string library_path;
    std::string ablation;

    int total_episodes() const { return task.epochs * task.episodes_per_epoch; }
    int segment_len() const { return task.segment_len > 0 ? task.segment_len : engine.bin; }
};

RunConfig parse_run_config(const nlohmann::json& j);   // ErrorCode::config
RunConfig parse_run_config_text(const std::string& text);  // also ErrorCode::parse
nlohmann::json to_json(const RunConfig& c);

}  // namespace mai::cfg
