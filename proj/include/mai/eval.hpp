#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mai/config.hpp"
#include "mai/engine.hpp"

namespace mai::eval {

struct Verdict {
    std::string id;
    bool pass = false;
    double statistic = 0.0;
    nlohmann::json detail;  // raw series backing the statistic
};

struct ExperimentLog {
    std::vector<engine::EpisodeReport> reports;
    int episodes_per_epoch = 1;
    std::uint64_t seed = 0;

    int epochs() const {
        if (reports.empty() || episodes_per_epoch < 1) return 0;
        return (static_cast<int>(reports.size()) + episodes_per_epoch - 1) / episodes_per_epoch;
    }
};

/// Deterministic per-episode generation for a run: shape schedule,
/// permutation mode, and subseeds all derive from the run seed.
tasks::Episode stream_episode(const cfg::RunConfig& c, int index);
std::vector<tasks::Episode> build_stream(const cfg::RunConfig& c);

/// Fresh episode outside the training stream, rendered the way the task
/// renders its own episodes (held-out probes for H3/H5 and ablations).
tasks::Episode probe_episode(const cfg::RunConfig& c, std::uint64_t salt, int index);

/// Run the configured stream through a fresh engine.
struct StreamResult {
    ExperimentLog log;
    engine::Engine engine;
};
StreamResult run_stream(const cfg::RunConfig& c);

/// H1: library size nondecreasing except at recorded falsifications, with
/// at least one strict increase.
Verdict check_h1(const ExperimentLog& log);

/// H2: negative slope of log epoch-median residuals, restricted to
/// episodes where the library did not change (the conditioning on fixed
/// structure). gamma = exp(slope); pass iff gamma <= gamma_max.
Verdict check_h2(const ExperimentLog& log, double gamma_max);

/// H3: class-preserving permutations keep the admitted/matched class and
/// the latent diagram within epsilon bottleneck distance.
Verdict check_h3(const engine::Engine& trained, const tasks::Episode& episode,
                 int permutations, double epsilon, double vr_scale, int segment_len);

/// H4: epoch-mean window-decode coherence nondecreasing first to last.
Verdict check_h4(const ExperimentLog& log);

/// H5: median inner-steps ratio (retrieval vs from-scratch) at most
/// ratio_max on held-out episodes.
Verdict check_h5(const engine::Engine& trained, const std::vector<tasks::Episode>& held_out,
                 double ratio_max);

enum class Ablation { A1, A2, A3, A4, A5 };
Ablation ablation_from_string(const std::string& id);  // ErrorCode::unknown_ablation
std::string to_string(Ablation a);

/// The single config field each ablation changes; arms are constructed by
/// applying exactly this mutation to the base config.
struct AblationArm {
    cfg::RunConfig config;
    std::string changed_field;
};
AblationArm make_ablation_arm(Ablation a, const cfg::RunConfig& base);

struct AblationOutcome {
    Verdict verdict;
    nlohmann::json baseline;
    nlohmann::json arm;
    std::string changed_field;
};
AblationOutcome run_ablation(Ablation a, const cfg::RunConfig& base);

}  // namespace mai::eval
