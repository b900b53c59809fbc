#include "mai/config.hpp"

#include <set>

namespace mai::cfg {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& scope) {
    if (!j.is_object()) fail(ErrorCode::config, scope + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            fail(ErrorCode::config, "unknown field \"" + (scope.empty() ? key : scope + "." + key) + "\"");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::config, std::string("field \"") + key + "\" has the wrong type");
    }
}

TaskConfig parse_task(const json& j) {
    expect_keys(j, {"name", "shape", "shape_b", "steps", "jitter", "permute_mode",
                    "segment_len", "open_loops", "epochs", "episodes_per_epoch",
                    "introduce_shape", "introduce_at"},
                "task");
    TaskConfig t;
    read(j, "name", t.name);
    read(j, "shape", t.shape);
    read(j, "shape_b", t.shape_b);
    read(j, "steps", t.steps);
    read(j, "jitter", t.jitter);
    read(j, "permute_mode", t.permute_mode);
    read(j, "segment_len", t.segment_len);
    read(j, "open_loops", t.open_loops);
    read(j, "epochs", t.epochs);
    read(j, "episodes_per_epoch", t.episodes_per_epoch);
    read(j, "introduce_shape", t.introduce_shape);
    read(j, "introduce_at", t.introduce_at);
    if (t.name != "t1" && t.name != "t2" && t.name != "t3")
        fail(ErrorCode::config, "task.name must be t1, t2 or t3");
    if (t.permute_mode != "none" && t.permute_mode != "preserving" && t.permute_mode != "breaking")
        fail(ErrorCode::config, "task.permute_mode must be none, preserving or breaking");
    if (t.steps < 8) fail(ErrorCode::config, "task.steps must be >= 8");
    if (t.epochs < 1 || t.episodes_per_epoch < 1)
        fail(ErrorCode::config, "task.epochs and task.episodes_per_epoch must be >= 1");
    return t;
}

engine::EngineConfig parse_engine(const json& j) {
    expect_keys(j, {"tau", "tau_mode", "k", "eta_fast", "eta_slow", "lambda_r", "lambda_p",
                    "gamma_target", "bin", "knn", "latent_dim", "lipschitz", "leak",
                    "landmark_cap", "landmark_gate", "fill_factor", "residual_target",
                    "residual_window", "scaffold_bound", "entropy_bins", "entropy_range",
                    "decoder_blend", "retrieval_enabled"},
                "engine");
    engine::EngineConfig e;
    read(j, "tau", e.tau);
    read(j, "tau_mode", e.tau_mode);
    read(j, "k", e.k);
    read(j, "eta_fast", e.eta_fast);
    read(j, "eta_slow", e.eta_slow);
    read(j, "lambda_r", e.lambda_r);
    read(j, "lambda_p", e.lambda_p);
    read(j, "gamma_target", e.gamma_target);
    read(j, "bin", e.bin);
    read(j, "knn", e.knn);
    read(j, "latent_dim", e.latent_dim);
    read(j, "lipschitz", e.lipschitz);
    read(j, "leak", e.leak);
    read(j, "landmark_cap", e.landmark_cap);
    read(j, "landmark_gate", e.landmark_gate);
    read(j, "fill_factor", e.fill_factor);
    read(j, "residual_target", e.residual_target);
    read(j, "residual_window", e.residual_window);
    read(j, "scaffold_bound", e.scaffold_bound);
    read(j, "entropy_bins", e.entropy_bins);
    read(j, "entropy_range", e.entropy_range);
    read(j, "decoder_blend", e.decoder_blend);
    read(j, "retrieval_enabled", e.retrieval_enabled);
    return e;
}

ChecksConfig parse_checks(const json& j) {
    expect_keys(j, {"h1", "h2", "h3", "h4", "h5", "h2_gamma_max", "h3_epsilon", "h3_vr_scale",
                    "h3_permutations", "h5_ratio_max", "h5_held_out", "a2_phi_factor",
                    "a4_fraction", "a4_trials", "t3_expected_groups"},
                "checks");
    ChecksConfig c;
    read(j, "h1", c.h1);
    read(j, "h2", c.h2);
    read(j, "h3", c.h3);
    read(j, "h4", c.h4);
    read(j, "h5", c.h5);
    read(j, "h2_gamma_max", c.h2_gamma_max);
    read(j, "h3_epsilon", c.h3_epsilon);
    read(j, "h3_vr_scale", c.h3_vr_scale);
    read(j, "h3_permutations", c.h3_permutations);
    read(j, "h5_ratio_max", c.h5_ratio_max);
    read(j, "h5_held_out", c.h5_held_out);
    read(j, "a2_phi_factor", c.a2_phi_factor);
    read(j, "a4_fraction", c.a4_fraction);
    read(j, "a4_trials", c.a4_trials);
    read(j, "t3_expected_groups", c.t3_expected_groups);
    return c;
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& j) {
    expect_keys(j,
                {"schema_version", "seed", "task", "engine", "checks", "out_dir", "library",
                 "ablation"},
                "");
    RunConfig c;
    if (!j.contains("schema_version"))
        fail(ErrorCode::config, "missing required field \"schema_version\"");
    read(j, "schema_version", c.schema_version);
    if (c.schema_version != 1) fail(ErrorCode::config, "unsupported schema_version");
    if (!j.contains("seed")) fail(ErrorCode::config, "missing required field \"seed\"");
    read(j, "seed", c.seed);
    if (j.contains("task")) c.task = parse_task(j.at("task"));
    if (j.contains("engine")) c.engine = parse_engine(j.at("engine"));
    if (j.contains("checks")) c.checks = parse_checks(j.at("checks"));
    read(j, "out_dir", c.out_dir);
    read(j, "library", c.library_path);
    read(j, "ablation", c.ablation);
    c.engine.seed = c.seed;
    c.engine.validate();
    return c;
}

RunConfig parse_run_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::parse, std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["schema_version"] = c.schema_version;
    j["seed"] = c.seed;
    j["task"] = {{"name", c.task.name},
                 {"shape", c.task.shape},
                 {"shape_b", c.task.shape_b},
                 {"steps", c.task.steps},
                 {"jitter", c.task.jitter},
                 {"permute_mode", c.task.permute_mode},
                 {"segment_len", c.task.segment_len},
                 {"open_loops", c.task.open_loops},
                 {"epochs", c.task.epochs},
                 {"episodes_per_epoch", c.task.episodes_per_epoch},
                 {"introduce_shape", c.task.introduce_shape},
                 {"introduce_at", c.task.introduce_at}};
    j["engine"] = {{"tau", c.engine.tau},
                   {"tau_mode", c.engine.tau_mode},
                   {"k", c.engine.k},
                   {"eta_fast", c.engine.eta_fast},
                   {"eta_slow", c.engine.eta_slow},
                   {"lambda_r", c.engine.lambda_r},
                   {"lambda_p", c.engine.lambda_p},
                   {"gamma_target", c.engine.gamma_target},
                   {"bin", c.engine.bin},
                   {"knn", c.engine.knn},
                   {"latent_dim", c.engine.latent_dim},
                   {"lipschitz", c.engine.lipschitz},
                   {"leak", c.engine.leak},
                   {"landmark_cap", c.engine.landmark_cap},
                   {"landmark_gate", c.engine.landmark_gate},
                   {"fill_factor", c.engine.fill_factor},
                   {"residual_target", c.engine.residual_target},
                   {"residual_window", c.engine.residual_window},
                   {"scaffold_bound", c.engine.scaffold_bound},
                   {"entropy_bins", c.engine.entropy_bins},
                   {"entropy_range", c.engine.entropy_range},
                   {"decoder_blend", c.engine.decoder_blend},
                   {"retrieval_enabled", c.engine.retrieval_enabled}};
    j["checks"] = {{"h1", c.checks.h1},
                   {"h2", c.checks.h2},
                   {"h3", c.checks.h3},
                   {"h4", c.checks.h4},
                   {"h5", c.checks.h5},
                   {"h2_gamma_max", c.checks.h2_gamma_max},
                   {"h3_epsilon", c.checks.h3_epsilon},
                   {"h3_vr_scale", c.checks.h3_vr_scale},
                   {"h3_permutations", c.checks.h3_permutations},
                   {"h5_ratio_max", c.checks.h5_ratio_max},
                   {"h5_held_out", c.checks.h5_held_out},
                   {"a2_phi_factor", c.checks.a2_phi_factor},
                   {"a4_fraction", c.checks.a4_fraction},
                   {"a4_trials", c.checks.a4_trials},
                   {"t3_expected_groups", c.checks.t3_expected_groups}};
    j["out_dir"] = c.out_dir;
    j["library"] = c.library_path;
    j["ablation"] = c.ablation;
    return j;
}

}  // namespace mai::cfg
