#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mai/persistence.hpp"
#include "mai/tasks.hpp"

namespace mai::mem {

/// One persistent content record: a closed latent landmark path with the
/// lifetime it had when admitted. Records are immutable after admission
/// except for the retrieval hit counter.
struct CycleRecord {
    int class_id = 0;
    std::vector<Eigen::VectorXd> path;  // closed: first == last within tolerance
    double lifetime = 0.0;
    int dim = 1;
    std::set<std::string> modality_tags;
    int hit_count = 0;
    int created_episode = 0;
};

/// The cycle library plus the persistent landmark set used to compare
/// classes across episodes. Landmarks grow by greedy max-min insertion
/// and are never moved or removed, so older records keep mapping into the
/// same ambient complex.
class CycleLibrary {
public:
    explicit CycleLibrary(int landmark_cap = 96, double landmark_gate = 0.15)
        : landmark_cap_(landmark_cap), landmark_gate_(landmark_gate) {}

    const std::vector<CycleRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const CycleRecord* find(int class_id) const;
    CycleRecord* find_mutable(int class_id);

    int next_class_id() const { return next_class_id_; }
    int allocate_class_id() { return next_class_id_++; }
    void set_next_class_id(int id) { next_class_id_ = id; }

    /// Fold new latent states into the landmark set: greedy max-min
    /// insertion, stopping at the cap or once every state sits within the
    /// gate distance of an existing landmark. Landmarks never move, so the
    /// anchor space only refines.
    void observe_states(const std::vector<Eigen::VectorXd>& states);
    const std::vector<Eigen::VectorXd>& landmarks() const { return landmarks_; }
    int landmark_cap() const { return landmark_cap_; }
    double landmark_gate() const { return landmark_gate_; }

    void insert(CycleRecord rec);
    void erase(int class_id);  // ErrorCode::unknown_class_id

private:
    std::vector<CycleRecord> records_;  // sorted by class_id
    std::vector<Eigen::VectorXd> landmarks_;
    int landmark_cap_;
    double landmark_gate_;
    int next_class_id_ = 1;
};

/// Alignment cost between a latent trajectory and a stored record:
/// dynamic-time-warping cost normalized by warp-path length, minimized
/// over cyclic rotations of both the representative and the trajectory.
/// The double rotation makes the cost exactly invariant to the start
/// point of a closed query.
double align_cost(const tasks::LatentTrajectory& tr, const CycleRecord& rec);

/// The k cheapest records by align_cost, ascending, ties broken by
/// class_id. Fewer are returned when the library is smaller; an empty
/// library yields an empty list.
std::vector<std::pair<const CycleRecord*, double>> retrieve(
    const tasks::LatentTrajectory& tr, const CycleLibrary& lib, int k);

/// Shared ambient complex for cross-episode class comparisons. Paths are
/// mapped to cycles over the landmark set; the complex carries every
/// mapped cycle's edges plus proximity edges, with triangles filled only
/// below the fill scale so genuine holes stay open.
class AnchorContext {
public:
    AnchorContext(std::vector<Eigen::VectorXd> landmarks,
                  const std::vector<std::vector<Eigen::VectorXd>>& paths,
                  double fill_factor, double fill_floor = 0.0);

    /// Nearest-landmark cycle of a closed path; empty when fewer than
    /// three distinct landmarks are hit.
    chain::Chain map_path(const std::vector<Eigen::VectorXd>& path) const;

    /// The underlying closed landmark walk (consecutive duplicates merged).
    std::vector<int> map_path_vertices(const std::vector<Eigen::VectorXd>& path) const;

    bool class_equal(const chain::Chain& a, const chain::Chain& b) const;
    /// Lifetime of a cycle inside the anchored filtration; zero for the
    /// empty chain.
    double lifetime(const chain::Chain& c) const;

    const ph::Filtration& filtration() const { return filtration_; }
    const chain::SimplicialComplex& complex() const { return complex_; }
    double fill_scale() const { return fill_scale_; }

private:
    std::vector<Eigen::VectorXd> landmarks_;
    ph::Filtration filtration_;
    chain::SimplicialComplex complex_;
    double fill_scale_ = 0.0;
};

/// Context over the library's landmarks covering all stored record paths
/// plus any extra paths from the current episode.
AnchorContext build_anchor_context(const CycleLibrary& lib,
                                   const std::vector<std::vector<Eigen::VectorXd>>& extra_paths,
                                   double fill_factor);

struct AdmitResult {
    std::vector<CycleRecord> admitted;   // staged records with fresh ids
    std::vector<int> matched_existing;   // stored classes this episode re-expressed
};

/// Map each bar's representative (a cycle over graph nodes) to a closed
/// landmark path and stage it for admission unless it is class-equal to a
/// stored record in the anchored complex. Bars are expected to have
/// passed the persistence filter already.
AdmitResult admit(CycleLibrary& lib, const std::vector<ph::Bar>& bars,
                  const tasks::StateGraph& graph, int episode_id,
                  const std::string& modality_tag, double fill_factor);

/// Stored classes whose lifetime re-evaluated in the given context falls
/// below tau.
std::vector<int> falsify(const CycleLibrary& lib, const AnchorContext& context, double tau);

/// Union with staged admissions then removal of falsified ids; survivors
/// keep their hit counts. Unknown falsified ids raise unknown_class_id.
void update_memory(CycleLibrary& lib, const std::vector<CycleRecord>& admitted,
                   const std::vector<int>& falsified);

/// Groups of records, one per library, pairwise class-equal after mapping
/// every library into a shared latent space. Requires one linear map per
/// library (ErrorCode::no_shared_anchor otherwise).
std::vector<std::vector<int>> intersect(const std::vector<const CycleLibrary*>& libs,
                                        const std::vector<Eigen::MatrixXd>& to_shared,
                                        double fill_factor, int landmark_cap = 96,
                                        double landmark_gate = 0.15);

/// Least-squares linear map sending paired source states onto target
/// states; the alignment fit used before intersecting libraries.
Eigen::MatrixXd fit_alignment(const std::vector<Eigen::VectorXd>& source,
                              const std::vector<Eigen::VectorXd>& target);

}  // namespace mai::mem
