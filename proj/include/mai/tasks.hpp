#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mai/error.hpp"
#include "mai/persistence.hpp"

namespace mai::tasks {

enum class Shape { circle, figure8 };
Shape shape_from_string(const std::string& name);  // ErrorCode::unknown_shape
std::string to_string(Shape s);

enum class Modality { A, B };
inline std::string to_string(Modality m) { return m == Modality::A ? "A" : "B"; }

/// One observation sequence. When jitter is zero and the episode is
/// class-preserving, the first and last observation coincide.
struct Episode {
    std::vector<Eigen::VectorXd> observations;
    Modality modality = Modality::A;
    std::string loop_class;
    std::uint64_t permutation_seed = 0;
    double jitter = 0.0;

    int steps() const { return static_cast<int>(observations.size()); }
    int obs_dim() const { return observations.empty() ? 0 : static_cast<int>(observations[0].size()); }
};

struct T1Options {
    Shape shape = Shape::circle;
    int steps = 65;                   // includes the closing duplicate sample
    double jitter = 0.0;
    bool permute = false;             // class-preserving segment rotation
    std::uint64_t seed = 0;
    int segment_len = 4;              // rotation granularity; pair with the engine bin
    bool open_loop = false;           // emit a non-returning arc instead (ablation A1)
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    Modality modality = Modality::A;
};

/// Looped navigation episodes. Observations are the 2-d position on the
/// loop plus the cyclic first difference, 4 channels total; noise of the
/// given scale (max norm) is added to the whole observation vector.
Episode gen_t1(Shape shape, int steps, double jitter, bool permute, std::uint64_t seed);
Episode gen_t1_ex(const T1Options& opt);

/// Cross-modal pair: one latent loop rendered through two fixed random
/// orthonormal-column maps of different dimension (A=12, B=7). The maps
/// derive from map_seed, so a stream of episodes keeps its rendering
/// fixed while the loop seed varies.
std::pair<Episode, Episode> gen_t2(Shape shape, int steps, std::uint64_t seed);
std::pair<Episode, Episode> gen_t2_ex(Shape shape, int steps, std::uint64_t seed,
                                      std::uint64_t map_seed);

/// Teacher/student pair: the same loop through independent mixing
/// matrices, one per agent.
std::pair<Episode, Episode> gen_t3(Shape shape, int steps, std::uint64_t seed);
std::pair<Episode, Episode> gen_t3_shapes(Shape teacher, Shape student, int steps,
                                          std::uint64_t seed, std::uint64_t map_seed);

/// Class-preserving permutation of a realized episode: cyclic rotation by
/// whole segments, so the traversal order changes while the sample set and
/// closure are untouched. Optional micro-shuffle reorders segment
/// interiors and recomputes the difference channels there.
Episode permute_episode(const Episode& ep, std::uint64_t seed, int segment_len,
                        bool micro_shuffle = false);

/// Class-breaking global step shuffle (ablation A4): destroys temporal
/// adjacency and closure; difference channels recomputed.
Episode scramble_episode(const Episode& ep, std::uint64_t seed);

struct LatentTrajectory {
    std::vector<Eigen::VectorXd> states;
    int time_bin = 1;

    int steps() const { return static_cast<int>(states.size()); }
    int latent_dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
};

/// Leaky linear encoder with spectral clipping: z_t = leak * z_{t-1} + W x_t,
/// z_0 = 0. The operator norm of W is clipped to the Lipschitz bound on
/// construction, so each step is L-Lipschitz in the observation.
class Encoder {
public:
    Encoder(Eigen::MatrixXd weights, double leak, double lipschitz_bound);

    static Encoder identity(int dim, double leak = 0.0, double lipschitz_bound = 1.0);
    /// Orthonormal basis of the top principal directions of the raw second
    /// moment. Distance-preserving on data that spans at most latent_dim
    /// linear dimensions.
    static Encoder fit_pca(const std::vector<Eigen::VectorXd>& observations,
                           int latent_dim, double leak, double lipschitz_bound);

    int obs_dim() const { return static_cast<int>(weights_.cols()); }
    int latent_dim() const { return static_cast<int>(weights_.rows()); }
    double leak() const { return leak_; }
    double lipschitz_bound() const { return lipschitz_; }
    const Eigen::MatrixXd& weights() const { return weights_; }

    Eigen::VectorXd step(const Eigen::VectorXd& prev_state, const Eigen::VectorXd& x) const;
    LatentTrajectory encode(const Episode& ep) const;  // ErrorCode::dimension_mismatch

private:
    Eigen::MatrixXd weights_;
    double leak_;
    double lipschitz_;
};

/// Binned state graph of a latent trajectory. Nodes are time-bin
/// centroids; every sample is then assigned to its nearest centroid, so a
/// returning trajectory closes its walk through the starting node. Edges:
/// transitions between consecutive assigned nodes, plus optional k-nearest
/// neighbors in latent space. The episode chain is the mod-2 sum of the
/// traversed edges.
struct StateGraph {
    std::vector<Eigen::VectorXd> nodes;
    std::vector<std::tuple<int, int, double>> edges;   // (i, j, weight), i < j
    std::vector<int> assignment;                       // per-sample node id
    std::vector<std::pair<int, int>> chain_edges;      // surviving mod-2 walk edges
};

StateGraph build_state_graph(const LatentTrajectory& tr, int bin, int knn);

ph::WeightedGraph to_weighted_graph(const StateGraph& g);

}  // namespace mai::tasks
