#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mai/config.hpp"
#include "mai/eval.hpp"

namespace mai::runner {

struct ExperimentResult {
    eval::ExperimentLog log;
    std::vector<eval::Verdict> verdicts;
    bool all_pass = true;
    nlohmann::json summary;
};

/// Run a configured experiment: the episode stream through the engine,
/// then every enabled hypothesis check. When out_dir is set, writes
/// reports.ndjson, aggregate.csv, verdicts.json and library.json there.
/// A library snapshot at config.library_path is loaded before the run and
/// saved back afterwards.
ExperimentResult run_experiment(const cfg::RunConfig& config);

/// Run the paired baseline/ablation arms and emit a comparison report.
nlohmann::json run_ablation_command(const cfg::RunConfig& config, const std::string& id);

}  // namespace mai::runner
