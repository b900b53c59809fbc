#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mai/memory.hpp"
#include "mai/tasks.hpp"

namespace mai::engine {

struct EngineConfig {
    double tau = 0.15;
    std::string tau_mode = "fixed";  // "fixed" | "elbow"
    int k = 3;                       // retrieval count
    double eta_fast = 0.2;
    double eta_slow = 0.12;
    double lambda_r = 1.0;
    double lambda_p = 0.1;
    double gamma_target = 0.9;       // reported contraction target
    int bin = 4;
    int knn = 2;
    int latent_dim = 4;
    double lipschitz = 1.5;
    double leak = 0.0;
    int landmark_cap = 96;
    double landmark_gate = 0.15;
    double fill_factor = 1.6;
    double residual_target = 0.08;   // windowed residual norm defining "adapted"
    int residual_window = 8;
    double scaffold_bound = 8.0;
    int entropy_bins = 16;
    double entropy_range = 0.5;
    double decoder_blend = 0.25;  // weight of the slow readout in predictions
    bool retrieval_enabled = true;
    std::uint64_t seed = 0;

    void validate() const;  // ErrorCode::config on violations
};

/// Fast per-episode parameters: gain/offset correction applied to the
/// prediction, reset at every consolidation. Never persisted.
struct Scaffold {
    Eigen::VectorXd gain;
    Eigen::VectorXd offset;
    std::vector<double> residual_history;

    static Scaffold neutral(int dim);
    bool is_neutral() const;
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    void clip(double bound);
};

/// Closed polyline with a dense arc-length resampling, the prediction
/// template extracted from a record path or fitted to a trajectory.
class LoopTemplate {
public:
    LoopTemplate() = default;
    explicit LoopTemplate(std::vector<Eigen::VectorXd> points, int dense_points = 256);

    bool valid() const { return dense_.size() >= 3; }
    double perimeter() const { return perimeter_; }
    double mean_segment() const;
    const std::vector<Eigen::VectorXd>& control_points() const { return points_; }

    /// Dense equal-arc resampling of the loop.
    const std::vector<Eigen::VectorXd>& dense_points() const { return dense_; }

    /// Point on the loop closest to z.
    int nearest_phase(const Eigen::VectorXd& z) const;
    /// Advance (arc > 0) or rewind (arc < 0) from the phase nearest to z.
    Eigen::VectorXd advance_from(const Eigen::VectorXd& z, double arc) const;

private:
    std::vector<Eigen::VectorXd> points_;
    std::vector<Eigen::VectorXd> dense_;
    double perimeter_ = 0.0;
};

/// Direct per-episode template fit: time-bin centroids of the trajectory,
/// closed. This is the from-scratch inference path and doubles as the
/// amortization-gap oracle.
LoopTemplate fit_template(const std::vector<Eigen::VectorXd>& states, int bin);

struct EpisodeReport {
    int episode = 0;
    std::string loop_class;
    std::string modality;
    std::vector<double> residual_series;  // squared prediction errors per step
    double residual_median = 0.0;
    double boundary_norm = 0.0;           // R of the episode chain
    std::vector<int> admitted;
    std::vector<int> falsified;
    std::vector<int> matched;             // stored classes re-expressed this episode
    std::vector<std::pair<int, double>> retrieval;  // (class_id, align cost)
    int inner_steps_used = 0;
    int phi_size_after = 0;
    double entropy_proxy = 0.0;
    double window_coherence = 0.0;

    bool structure_changed() const { return !admitted.empty() || !falsified.empty(); }
};

/// Engine state: slow parameters, the cycle library, and the fast
/// scaffold. The library only changes inside the closure test; fast
/// adaptation touches the scaffold alone.
struct MAIState {
    std::map<tasks::Modality, tasks::Encoder> encoders;
    Eigen::MatrixXd decoder_w;       // linear readout, latent -> next latent
    Eigen::VectorXd decoder_b;
    mem::CycleLibrary library;
    Scaffold scaffold;
    int episode_counter = 0;
    double mean_step_arc = 0.0;  // running mean latent step length, drives replay
};

/// Number of odd-degree endpoints of the episode chain in the binned
/// graph: 0 for closed walks, 2 for a simple open path.
double residual_boundary_norm(const tasks::StateGraph& g);

/// Conditional residual-entropy proxy: Shannon entropy (bits) of a
/// fixed-width histogram of residual magnitudes, grouped by retrieved
/// class, averaged over classes. Reports with no retrieval pool under a
/// sentinel class.
double entropy_proxy(const std::vector<EpisodeReport>& history, const EngineConfig& cfg);

class Engine {
public:
    explicit Engine(EngineConfig cfg);

    const EngineConfig& config() const { return cfg_; }
    MAIState& state() { return state_; }
    const MAIState& state() const { return state_; }

    /// Full S1-S4 episode: retrieve, predict and fast-adapt, closure test
    /// with memory update, slow consolidation.
    EpisodeReport run_episode(const tasks::Episode& ep);

    /// One step along the retrieved record's loop from the phase aligned
    /// with z, scaffold correction applied. z_prev calibrates the arc
    /// advanced per step.
    Eigen::VectorXd bootstrap_forward(const Eigen::VectorXd& z,
                                      const Eigen::VectorXd* z_prev,
                                      const mem::CycleRecord& rec) const;

    /// One step backward along the best-matching stored loop. Throws
    /// ErrorCode::no_retrieval on an empty library.
    Eigen::VectorXd retrieval_inverse(const Eigen::VectorXd& z_next,
                                      const Eigen::VectorXd* z_prev) const;

    /// Residual-only update of the scaffold; slow parameters and library
    /// stay bit-identical.
    void fast_adapt(const Eigen::VectorXd& error, const Eigen::VectorXd& raw_prediction);

    struct ClosureOutcome {
        std::vector<int> admitted;
        std::vector<int> falsified;
        std::vector<int> matched;
        double boundary_norm = 0.0;
    };
    /// Graph, filtration, reduction, persistence filter, admission gated
    /// on a closed episode chain, then falsification. Applies the memory
    /// update.
    ClosureOutcome closure_test(const tasks::LatentTrajectory& tr, const std::string& modality);

    /// Fold the episode scaffold into the slow calibration, take a replay
    /// consistency step on the decoder, reset the scaffold. No-op except
    /// the reset while the library is empty.
    void slow_consolidate();

    /// Inner steps until the windowed residual first meets the target.
    /// The from-scratch arm pays one full pass to fit its own template
    /// before predictions start. Capped at setup + T when the target is
    /// never met (reported via `reached`).
    struct StepsToTarget {
        int steps = 0;
        bool reached = false;
    };
    StepsToTarget steps_to_target(const tasks::Episode& ep, bool use_retrieval);

    /// Mean squared prediction error of one adaptation pass with the given
    /// template source.
    double amortized_loss(const tasks::Episode& ep);
    double oracle_loss(const tasks::Episode& ep);

    const tasks::Encoder& encoder_for(const tasks::Episode& ep);

private:
    struct PassResult {
        std::vector<double> residual_sq;
        int first_target_step = -1;   // index into the pass, -1 when unmet
        Scaffold scaffold;            // post-pass fast parameters
    };
    PassResult adaptation_pass(const tasks::LatentTrajectory& tr, const LoopTemplate& tmpl,
                               bool adapt) const;
    Eigen::VectorXd raw_prediction(const tasks::LatentTrajectory& tr, int t,
                                   const LoopTemplate& tmpl) const;
    const LoopTemplate& template_for(const mem::CycleRecord& rec) const;
    double window_coherence(const tasks::LatentTrajectory& tr) const;

    EngineConfig cfg_;
    MAIState state_;
    std::vector<EpisodeReport> history_;
    mutable std::map<int, LoopTemplate> template_cache_;
};

struct GapEstimate {
    double epsilon = 0.0;
    double amortized = 0.0;
    double oracle = 0.0;
};

/// Amortization gap over held-out episodes: mean amortized loss minus
/// mean per-episode direct-fit loss. Needs at least five episodes.
GapEstimate amortization_gap(Engine engine, const std::vector<tasks::Episode>& episodes);

}  // namespace mai::engine
