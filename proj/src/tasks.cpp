#include "mai/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "mai/rng.hpp"

namespace mai::tasks {

namespace {

constexpr double kTwoPi = 6.283185307179586;

Eigen::Vector2d loop_point(Shape shape, double s, const Eigen::Vector2d& center) {
    switch (shape) {
        case Shape::circle:
            return center + Eigen::Vector2d(std::cos(s), std::sin(s));
        case Shape::figure8:
            // Gerono lemniscate at unit scale; crosses itself at s = 0 and pi.
            return center + Eigen::Vector2d(std::sin(s), std::sin(s) * std::cos(s));
    }
    fail(ErrorCode::unknown_shape, "unhandled shape");
}

/// Positions -> observations with cyclic first-difference channels.
/// diff_t = p_{(t+1) mod P} - p_t over the P distinct points, so the
/// closing duplicate reproduces the first observation exactly.
std::vector<Eigen::VectorXd> with_diff_channels(const std::vector<Eigen::Vector2d>& pts,
                                                bool cyclic) {
    const int P = static_cast<int>(pts.size());
    std::vector<Eigen::VectorXd> obs(P);
    for (int t = 0; t < P; ++t) {
        Eigen::Vector2d diff;
        if (cyclic) {
            diff = pts[(t + 1) % P] - pts[t];
        } else {
            diff = (t + 1 < P) ? (pts[t + 1] - pts[t]) : (pts[t] - pts[t - 1]);
        }
        Eigen::VectorXd o(4);
        o << pts[t], diff;
        obs[t] = o;
    }
    return obs;
}

void add_jitter(std::vector<Eigen::VectorXd>& obs, double jitter, rng::Rng& r) {
    if (jitter <= 0) return;
    for (auto& o : obs) o += r.ball(static_cast<int>(o.size()), jitter);
}

/// Random matrix with orthonormal columns, rows x cols, rows >= cols.
Eigen::MatrixXd random_orthonormal_columns(int rows, int cols, std::uint64_t seed) {
    rng::Rng r(seed);
    Eigen::MatrixXd g(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) g(i, j) = r.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
    // Fix signs so the factorization is stable across equivalent inputs.
    for (int j = 0; j < cols; ++j) {
        int arg = 0;
        q.col(j).cwiseAbs().maxCoeff(&arg);
        if (q(arg, j) < 0) q.col(j) = -q.col(j);
    }
    return q;
}

Episode render_through(const Episode& base, const Eigen::MatrixXd& mix, Modality modality) {
    Episode out = base;
    out.modality = modality;
    for (auto& o : out.observations) o = mix * o;
    return out;
}

}  // namespace

Shape shape_from_string(const std::string& name) {
    if (name == "circle") return Shape::circle;
    if (name == "figure8") return Shape::figure8;
    fail(ErrorCode::unknown_shape, "unknown shape: " + name);
}

std::string to_string(Shape s) { return s == Shape::circle ? "circle" : "figure8"; }

Episode gen_t1(Shape shape, int steps, double jitter, bool permute, std::uint64_t seed) {
    T1Options opt;
    opt.shape = shape;
    opt.steps = steps;
    opt.jitter = jitter;
    opt.permute = permute;
    opt.seed = seed;
    if (shape == Shape::figure8) opt.center = Eigen::Vector2d(3.0, 0.0);
    return gen_t1_ex(opt);
}

Episode gen_t1_ex(const T1Options& opt) {
    if (opt.steps < 8) fail(ErrorCode::invalid_argument, "episodes need at least 8 steps");
    const int P = opt.steps - 1;  // distinct samples; the last step closes the loop

    std::vector<Eigen::Vector2d> pts(P);
    if (opt.open_loop) {
        // Four fifths of the loop, never returning.
        for (int t = 0; t < P; ++t)
            pts[t] = loop_point(opt.shape, 0.8 * kTwoPi * t / P, opt.center);
    } else {
        for (int t = 0; t < P; ++t)
            pts[t] = loop_point(opt.shape, kTwoPi * t / P, opt.center);
    }

    Episode ep;
    ep.modality = opt.modality;
    ep.loop_class = to_string(opt.shape);
    ep.jitter = opt.jitter;
    ep.permutation_seed = opt.seed;

    auto obs = with_diff_channels(pts, !opt.open_loop);
    if (!opt.open_loop) obs.push_back(obs.front());  // closing duplicate
    rng::Rng noise(rng::subseed(opt.seed, 0, 0, /*salt=*/1));
    add_jitter(obs, opt.jitter, noise);
    ep.observations = std::move(obs);

    if (opt.permute)
        ep = permute_episode(ep, rng::subseed(opt.seed, 0, 0, /*salt=*/2), opt.segment_len);
    return ep;
}

std::pair<Episode, Episode> gen_t2(Shape shape, int steps, std::uint64_t seed) {
    return gen_t2_ex(shape, steps, seed, seed);
}

std::pair<Episode, Episode> gen_t2_ex(Shape shape, int steps, std::uint64_t seed,
                                      std::uint64_t map_seed) {
    T1Options opt;
    opt.shape = shape;
    opt.steps = steps;
    opt.seed = seed;
    Episode base = gen_t1_ex(opt);
    auto mix_a = random_orthonormal_columns(12, 4, rng::subseed(map_seed, 0, 0, 11));
    auto mix_b = random_orthonormal_columns(7, 4, rng::subseed(map_seed, 0, 0, 12));
    return {render_through(base, mix_a, Modality::A),
            render_through(base, mix_b, Modality::B)};
}

std::pair<Episode, Episode> gen_t3(Shape shape, int steps, std::uint64_t seed) {
    return gen_t3_shapes(shape, shape, steps, seed, seed);
}

std::pair<Episode, Episode> gen_t3_shapes(Shape teacher, Shape student, int steps,
                                          std::uint64_t seed, std::uint64_t map_seed) {
    T1Options opt;
    opt.steps = steps;
    opt.seed = seed;
    opt.shape = teacher;
    Episode teacher_base = gen_t1_ex(opt);
    opt.shape = student;
    Episode student_base = gen_t1_ex(opt);
    // Idiosyncratic per-agent encodings of the same underlying loop.
    auto mix_t = random_orthonormal_columns(12, 4, rng::subseed(map_seed, 0, 0, 21));
    auto mix_s = random_orthonormal_columns(12, 4, rng::subseed(map_seed, 0, 0, 22));
    return {render_through(teacher_base, mix_t, Modality::A),
            render_through(student_base, mix_s, Modality::B)};
}

Episode permute_episode(const Episode& ep, std::uint64_t seed, int segment_len,
                        bool micro_shuffle) {
    if (segment_len < 1) fail(ErrorCode::invalid_argument, "segment_len must be >= 1");
    const int T = ep.steps();
    if (T < 3) return ep;
    const int P = T - 1;  // treat the last sample as the closing duplicate

    rng::Rng r(seed);
    const int num_segments = std::max(1, P / segment_len);
    const int rot_segments = 1 + static_cast<int>(r.below(std::max(1, num_segments - 1)));
    const int offset = (rot_segments * segment_len) % P;

    Episode out = ep;
    out.permutation_seed = seed;
    for (int t = 0; t < P; ++t) out.observations[t] = ep.observations[(t + offset) % P];
    out.observations[P] = out.observations[0];

    if (micro_shuffle && segment_len >= 4) {
        // Reorder segment interiors, endpoints fixed, then recompute the
        // difference channels so they still describe the emitted order.
        std::vector<Eigen::Vector2d> pos(P);
        for (int t = 0; t < P; ++t) pos[t] = out.observations[t].head<2>();
        for (int s = 0; s + segment_len <= P; s += segment_len) {
            std::vector<int> interior;
            for (int t = s + 1; t < s + segment_len - 1; ++t) interior.push_back(t);
            auto shuffled = interior;
            r.shuffle(shuffled);
            std::vector<Eigen::Vector2d> tmp(interior.size());
            for (std::size_t i = 0; i < interior.size(); ++i) tmp[i] = pos[shuffled[i]];
            for (std::size_t i = 0; i < interior.size(); ++i) pos[interior[i]] = tmp[i];
        }
        auto obs = with_diff_channels(pos, true);
        obs.push_back(obs.front());
        out.observations = std::move(obs);
    }
    return out;
}

Episode scramble_episode(const Episode& ep, std::uint64_t seed) {
    Episode out = ep;
    out.permutation_seed = seed;
    rng::Rng r(seed);
    const int T = ep.steps();
    std::vector<int> order(T);
    std::iota(order.begin(), order.end(), 0);
    r.shuffle(order);
    std::vector<Eigen::Vector2d> pos(T);
    bool planar = ep.obs_dim() == 4;
    for (int t = 0; t < T; ++t) {
        out.observations[t] = ep.observations[order[t]];
        if (planar) pos[t] = out.observations[t].head<2>();
    }
    if (planar) {
        // Recompute experienced velocities for the scrambled order.
        for (int t = 0; t < T; ++t) {
            Eigen::Vector2d diff =
                (t + 1 < T) ? (pos[t + 1] - pos[t]) : (pos[t] - pos[t - 1]);
            out.observations[t].tail<2>() = diff;
        }
    }
    return out;
}

Encoder::Encoder(Eigen::MatrixXd weights, double leak, double lipschitz_bound)
    : weights_(std::move(weights)), leak_(leak), lipschitz_(lipschitz_bound) {
    if (leak_ < 0.0 || leak_ >= 1.0)
        fail(ErrorCode::invalid_argument, "leak must lie in [0, 1)");
    if (lipschitz_ <= 0.0)
        fail(ErrorCode::invalid_argument, "lipschitz bound must be positive");
    // Spectral clipping: scale so the operator norm meets the bound.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weights_);
    double top = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    if (top > lipschitz_) weights_ *= lipschitz_ / top;
}

Encoder Encoder::identity(int dim, double leak, double lipschitz_bound) {
    return Encoder(Eigen::MatrixXd::Identity(dim, dim), leak, lipschitz_bound);
}

Encoder Encoder::fit_pca(const std::vector<Eigen::VectorXd>& observations,
                         int latent_dim, double leak, double lipschitz_bound) {
    if (observations.empty()) fail(ErrorCode::empty_input, "no observations to fit");
    const int d = static_cast<int>(observations[0].size());
    if (latent_dim > d)
        fail(ErrorCode::invalid_argument, "latent dimension exceeds observation dimension");
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (const auto& o : observations) second += o * o.transpose();
    second /= static_cast<double>(observations.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(second);
    // Eigenvalues ascend; take the top latent_dim directions.
    Eigen::MatrixXd w(latent_dim, d);
    for (int i = 0; i < latent_dim; ++i) {
        Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - i);
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        w.row(i) = v.transpose();
    }
    return Encoder(std::move(w), leak, lipschitz_bound);
}

Eigen::VectorXd Encoder::step(const Eigen::VectorXd& prev_state,
                              const Eigen::VectorXd& x) const {
    if (x.size() != weights_.cols())
        fail(ErrorCode::dimension_mismatch, "observation dimension mismatch");
    return leak_ * prev_state + weights_ * x;
}

LatentTrajectory Encoder::encode(const Episode& ep) const {
    if (ep.obs_dim() != obs_dim())
        fail(ErrorCode::dimension_mismatch, "episode does not match encoder");
    LatentTrajectory tr;
    tr.states.reserve(ep.observations.size());
    Eigen::VectorXd z = Eigen::VectorXd::Zero(latent_dim());
    for (const auto& x : ep.observations) {
        z = step(z, x);
        tr.states.push_back(z);
    }
    return tr;
}

StateGraph build_state_graph(const LatentTrajectory& tr, int bin, int knn) {
    if (bin < 1) fail(ErrorCode::invalid_argument, "bin must be >= 1");
    if (knn < 0) fail(ErrorCode::invalid_argument, "knn must be >= 0");
    StateGraph g;
    const int T = tr.steps();
    if (T == 0) return g;

    // Time-bin centroids.
    std::vector<Eigen::VectorXd> centroids;
    for (int start = 0; start < T; start += bin) {
        int end = std::min(T, start + bin);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(tr.latent_dim());
        for (int t = start; t < end; ++t) c += tr.states[t];
        centroids.push_back(c / static_cast<double>(end - start));
    }

    // Nearest-centroid assignment; centroids that win no sample drop out.
    std::vector<int> raw_assign(T);
    for (int t = 0; t < T; ++t) {
        int best = 0;
        double best_d = (tr.states[t] - centroids[0]).norm();
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            double d = (tr.states[t] - centroids[c]).norm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        raw_assign[t] = best;
    }
    std::map<int, int> remap;
    for (int t = 0; t < T; ++t)
        if (!remap.count(raw_assign[t])) {
            int id = static_cast<int>(remap.size());
            remap[raw_assign[t]] = id;
        }
    g.nodes.resize(remap.size());
    for (const auto& [raw, id] : remap) g.nodes[id] = centroids[raw];
    g.assignment.resize(T);
    for (int t = 0; t < T; ++t) g.assignment[t] = remap.at(raw_assign[t]);

    std::set<std::pair<int, int>> edge_set;
    auto add_edge = [&](int i, int j) {
        if (i == j) return;
        edge_set.emplace(std::min(i, j), std::max(i, j));
    };

    // Temporal transitions plus the episode chain (mod-2 edge multiset).
    std::set<std::pair<int, int>> chain;
    for (int t = 0; t + 1 < T; ++t) {
        int a = g.assignment[t], b = g.assignment[t + 1];
        if (a == b) continue;
        add_edge(a, b);
        auto key = std::minmax(a, b);
        auto it = chain.find({key.first, key.second});
        if (it != chain.end())
            chain.erase(it);
        else
            chain.insert({key.first, key.second});
    }
    g.chain_edges.assign(chain.begin(), chain.end());

    // k nearest neighbors in latent space.
    const int n = static_cast<int>(g.nodes.size());
    for (int i = 0; i < n && knn > 0; ++i) {
        std::vector<std::pair<double, int>> order;
        for (int j = 0; j < n; ++j)
            if (j != i) order.emplace_back((g.nodes[i] - g.nodes[j]).norm(), j);
        std::sort(order.begin(), order.end());
        for (int k = 0; k < knn && k < static_cast<int>(order.size()); ++k)
            add_edge(i, order[k].second);
    }

    for (const auto& [i, j] : edge_set)
        g.edges.emplace_back(i, j, (g.nodes[i] - g.nodes[j]).norm());
    return g;
}

ph::WeightedGraph to_weighted_graph(const StateGraph& g) {
    ph::WeightedGraph out;
    out.num_nodes = g.nodes.size();
    out.edges = g.edges;
    return out;
}

}  // namespace mai::tasks
