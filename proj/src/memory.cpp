#include "mai/memory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace mai::mem {

const CycleRecord* CycleLibrary::find(int class_id) const {
    for (const auto& r : records_)
        if (r.class_id == class_id) return &r;
    return nullptr;
}

CycleRecord* CycleLibrary::find_mutable(int class_id) {
    for (auto& r : records_)
        if (r.class_id == class_id) return &r;
    return nullptr;
}

void CycleLibrary::observe_states(const std::vector<Eigen::VectorXd>& states) {
    if (states.empty()) return;
    if (landmarks_.empty()) landmarks_.push_back(states.front());
    while (static_cast<int>(landmarks_.size()) < landmark_cap_) {
        double best_d = -1.0;
        const Eigen::VectorXd* best = nullptr;
        for (const auto& z : states) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto& l : landmarks_) nearest = std::min(nearest, (z - l).norm());
            if (nearest > best_d) {
                best_d = nearest;
                best = &z;
            }
        }
        if (!best || best_d <= landmark_gate_) break;
        landmarks_.push_back(*best);
    }
}

void CycleLibrary::insert(CycleRecord rec) {
    auto pos = std::lower_bound(records_.begin(), records_.end(), rec.class_id,
                                [](const CycleRecord& r, int id) { return r.class_id < id; });
    if (pos != records_.end() && pos->class_id == rec.class_id)
        fail(ErrorCode::invalid_argument, "duplicate class id");
    records_.insert(pos, std::move(rec));
}

void CycleLibrary::erase(int class_id) {
    auto pos = std::find_if(records_.begin(), records_.end(),
                            [&](const CycleRecord& r) { return r.class_id == class_id; });
    if (pos == records_.end())
        fail(ErrorCode::unknown_class_id, "unknown class id " + std::to_string(class_id));
    records_.erase(pos);
}

namespace {

// Warp cost and path length of standard DTW over a cached distance matrix
// with both sequences rotated. Ties prefer the diagonal, then the query
// advance, so the backtracked length is deterministic.
struct DtwScratch {
    std::vector<double> cost;
    std::vector<int> steps;
};

double dtw_normalized(const Eigen::MatrixXd& dist, int rot_q, int rot_r, DtwScratch& scratch) {
    const int T = static_cast<int>(dist.rows());
    const int R = static_cast<int>(dist.cols());
    auto at = [&](int i, int j) -> double { return dist((i + rot_q) % T, (j + rot_r) % R); };

    scratch.cost.assign(static_cast<std::size_t>(T) * R, 0.0);
    scratch.steps.assign(static_cast<std::size_t>(T) * R, 0);
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(i) * R + j; };

    for (int i = 0; i < T; ++i) {
        for (int j = 0; j < R; ++j) {
            double d = at(i, j);
            if (i == 0 && j == 0) {
                scratch.cost[idx(0, 0)] = d;
                scratch.steps[idx(0, 0)] = 1;
                continue;
            }
            double best = std::numeric_limits<double>::infinity();
            int best_steps = 0;
            if (i > 0 && j > 0 && scratch.cost[idx(i - 1, j - 1)] < best) {
                best = scratch.cost[idx(i - 1, j - 1)];
                best_steps = scratch.steps[idx(i - 1, j - 1)];
            }
            if (i > 0 && scratch.cost[idx(i - 1, j)] < best) {
                best = scratch.cost[idx(i - 1, j)];
                best_steps = scratch.steps[idx(i - 1, j)];
            }
            if (j > 0 && scratch.cost[idx(i, j - 1)] < best) {
                best = scratch.cost[idx(i, j - 1)];
                best_steps = scratch.steps[idx(i, j - 1)];
            }
            scratch.cost[idx(i, j)] = best + d;
            scratch.steps[idx(i, j)] = best_steps + 1;
        }
    }
    return scratch.cost[idx(T - 1, R - 1)] / scratch.steps[idx(T - 1, R - 1)];
}

std::vector<Eigen::VectorXd> drop_closing_duplicate(const std::vector<Eigen::VectorXd>& path) {
    if (path.size() >= 2 && (path.front() - path.back()).norm() < 1e-9) {
        return {path.begin(), path.end() - 1};
    }
    return path;
}

}  // namespace

double align_cost(const tasks::LatentTrajectory& tr, const CycleRecord& rec) {
    if (tr.steps() == 0 || rec.path.empty())
        fail(ErrorCode::invalid_argument, "empty trajectory or record");
    if (tr.latent_dim() != static_cast<int>(rec.path[0].size()))
        fail(ErrorCode::dimension_mismatch, "latent dimensions differ");

    auto rep = drop_closing_duplicate(rec.path);
    auto query = drop_closing_duplicate(tr.states);
    const int T = static_cast<int>(query.size());
    const int R = static_cast<int>(rep.size());

    Eigen::MatrixXd dist(T, R);
    for (int i = 0; i < T; ++i)
        for (int j = 0; j < R; ++j) dist(i, j) = (query[i] - rep[j]).norm();

    DtwScratch scratch;
    double best = std::numeric_limits<double>::infinity();
    for (int rot_q = 0; rot_q < T; ++rot_q)
        for (int rot_r = 0; rot_r < R; ++rot_r)
            best = std::min(best, dtw_normalized(dist, rot_q, rot_r, scratch));
    return best;
}

std::vector<std::pair<const CycleRecord*, double>> retrieve(
    const tasks::LatentTrajectory& tr, const CycleLibrary& lib, int k) {
    if (k < 1) fail(ErrorCode::invalid_argument, "k must be >= 1");
    std::vector<std::pair<const CycleRecord*, double>> scored;
    for (const auto& rec : lib.records()) scored.emplace_back(&rec, align_cost(tr, rec));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;
        return a.first->class_id < b.first->class_id;
    });
    if (static_cast<int>(scored.size()) > k) scored.resize(k);
    return scored;
}

AnchorContext::AnchorContext(std::vector<Eigen::VectorXd> landmarks,
                             const std::vector<std::vector<Eigen::VectorXd>>& paths,
                             double fill_factor, double fill_floor)
    : landmarks_(std::move(landmarks)) {
    std::vector<ph::FiltrationEntry> entries;
    for (std::size_t v = 0; v < landmarks_.size(); ++v)
        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(v)}, 0.0});

    // Hop edges of every mapped path fix the scale of the complex. The
    // fill scale follows the median hop, so discrepancies between copies
    // of one loop get triangulated away while spans of two or more hops
    // stay open.
    std::map<std::pair<int, int>, double> edges;
    std::vector<double> hops;
    auto add_edge = [&](int i, int j) {
        if (i == j) return;
        auto key = std::minmax(i, j);
        double w = (landmarks_[key.first] - landmarks_[key.second]).norm();
        edges.emplace(std::make_pair(key.first, key.second), w);
    };
    for (const auto& path : paths) {
        auto cyc = map_path_vertices(path);
        for (std::size_t i = 0; i + 1 < cyc.size(); ++i) {
            add_edge(cyc[i], cyc[i + 1]);
            hops.push_back((landmarks_[cyc[i]] - landmarks_[cyc[i + 1]]).norm());
        }
    }
    double median_hop = 0.0;
    if (!hops.empty()) {
        std::sort(hops.begin(), hops.end());
        std::size_t m = hops.size() / 2;
        median_hop = hops.size() % 2 ? hops[m] : 0.5 * (hops[m - 1] + hops[m]);
    }
    fill_scale_ = fill_factor * std::max(median_hop, fill_floor);

    // Proximity edges below the fill scale.
    const int n = static_cast<int>(landmarks_.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((landmarks_[i] - landmarks_[j]).norm() <= fill_scale_) add_edge(i, j);

    for (const auto& [e, w] : edges)
        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(e.first),
                                          static_cast<chain::VertexId>(e.second)},
                           w});

    // Triangles only between short edges; long cycle hops never fill.
    std::vector<std::set<int>> adj(n);
    for (const auto& [e, w] : edges) {
        if (w > fill_scale_) continue;
        adj[e.first].insert(e.second);
        adj[e.second].insert(e.first);
    }
    for (const auto& [e, w] : edges) {
        if (w > fill_scale_) continue;
        int i = e.first, j = e.second;
        for (int k : adj[i]) {
            if (k <= j || !adj[j].count(k)) continue;
            double b = std::max({w, edges.at({std::min(i, k), std::max(i, k)}),
                                 edges.at({std::min(j, k), std::max(j, k)})});
            entries.push_back({chain::Simplex{static_cast<chain::VertexId>(i),
                                              static_cast<chain::VertexId>(j),
                                              static_cast<chain::VertexId>(k)},
                               b});
        }
    }
    filtration_ = ph::Filtration::from_entries(std::move(entries));
    complex_ = filtration_.full_complex();
}

std::vector<int> AnchorContext::map_path_vertices(
    const std::vector<Eigen::VectorXd>& path) const {
    std::vector<int> seq;
    if (landmarks_.empty()) return seq;
    for (const auto& p : path) {
        int best = 0;
        double best_d = (p - landmarks_[0]).norm();
        for (std::size_t l = 1; l < landmarks_.size(); ++l) {
            double d = (p - landmarks_[l]).norm();
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(l);
            }
        }
        if (seq.empty() || seq.back() != best) seq.push_back(best);
    }
    if (seq.size() >= 2 && seq.front() == seq.back()) seq.pop_back();
    if (!seq.empty()) seq.push_back(seq.front());  // explicit closure
    return seq;
}

chain::Chain AnchorContext::map_path(const std::vector<Eigen::VectorXd>& path) const {
    auto seq = map_path_vertices(path);
    std::set<int> distinct(seq.begin(), seq.end());
    if (distinct.size() < 3) return chain::Chain();
    chain::Chain c(1);
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        if (seq[i] == seq[i + 1]) continue;
        c.toggle(chain::Simplex::from_unsorted({static_cast<chain::VertexId>(seq[i]),
                                                static_cast<chain::VertexId>(seq[i + 1])}));
    }
    if (c.empty() || !chain::is_cycle(c)) return chain::Chain();
    return c;
}

bool AnchorContext::class_equal(const chain::Chain& a, const chain::Chain& b) const {
    if (a.empty() && b.empty()) return true;
    if (a.empty() || b.empty()) return false;
    return chain::class_equal(a, b, complex_);
}

double AnchorContext::lifetime(const chain::Chain& c) const {
    if (c.empty()) return 0.0;
    return ph::cycle_lifetime(c, filtration_);
}

AnchorContext build_anchor_context(const CycleLibrary& lib,
                                   const std::vector<std::vector<Eigen::VectorXd>>& extra_paths,
                                   double fill_factor) {
    std::vector<std::vector<Eigen::VectorXd>> paths;
    for (const auto& rec : lib.records()) paths.push_back(rec.path);
    for (const auto& p : extra_paths) paths.push_back(p);
    return AnchorContext(lib.landmarks(), paths, fill_factor, lib.landmark_gate());
}

namespace {

// Turn a bar representative (an edge chain over graph nodes) into a
// closed vertex walk. Representatives may be sums of loops; the longest
// simple cycle wins.
std::vector<int> extract_cycle_vertices(const chain::Chain& rep) {
    std::map<int, std::vector<int>> adj;
    for (const auto& s : rep.terms()) {
        int a = static_cast<int>(s.vertices()[0]);
        int b = static_cast<int>(s.vertices()[1]);
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::set<std::pair<int, int>> unused;
    for (const auto& s : rep.terms())
        unused.emplace(static_cast<int>(s.vertices()[0]), static_cast<int>(s.vertices()[1]));

    auto take = [&](int a, int b) {
        auto key = std::minmax(a, b);
        auto it = unused.find({key.first, key.second});
        if (it == unused.end()) return false;
        unused.erase(it);
        return true;
    };

    std::vector<int> best;
    while (!unused.empty()) {
        int start = unused.begin()->first;
        std::vector<int> walk{start};
        int cur = start;
        while (true) {
            bool advanced = false;
            for (int nxt : adj[cur]) {
                if (!take(cur, nxt)) continue;
                walk.push_back(nxt);
                cur = nxt;
                advanced = true;
                break;
            }
            if (!advanced || cur == start) break;
        }
        if (walk.size() >= 4 && walk.front() == walk.back() && walk.size() > best.size())
            best = walk;
    }
    return best;
}

}  // namespace

AdmitResult admit(CycleLibrary& lib, const std::vector<ph::Bar>& bars,
                  const tasks::StateGraph& graph, int episode_id,
                  const std::string& modality_tag, double fill_factor) {
    AdmitResult result;
    if (bars.empty()) return result;

    // Candidate landmark paths from the bar representatives.
    std::vector<std::pair<std::vector<Eigen::VectorXd>, double>> candidates;
    for (const auto& bar : bars) {
        if (bar.dim != 1) continue;
        auto verts = extract_cycle_vertices(bar.representative);
        if (verts.size() < 4) continue;  // need at least a closed triangle
        std::vector<Eigen::VectorXd> path;
        for (int v : verts) path.push_back(graph.nodes[v]);
        candidates.emplace_back(std::move(path), bar.lifetime());
    }
    if (candidates.empty()) return result;

    std::vector<std::vector<Eigen::VectorXd>> extra;
    for (const auto& [path, life] : candidates) extra.push_back(path);
    AnchorContext context = build_anchor_context(lib, extra, fill_factor);

    std::vector<chain::Chain> stored;
    for (const auto& rec : lib.records()) stored.push_back(context.map_path(rec.path));
    std::vector<chain::Chain> staged;

    for (const auto& [path, life] : candidates) {
        chain::Chain c = context.map_path(path);
        if (c.empty()) continue;  // degenerate under the current landmarks
        bool duplicate = false;
        for (std::size_t i = 0; i < stored.size(); ++i) {
            if (context.class_equal(c, stored[i])) {
                result.matched_existing.push_back(lib.records()[i].class_id);
                duplicate = true;
                break;
            }
        }
        if (!duplicate)
            for (std::size_t i = 0; i < staged.size(); ++i)
                if (context.class_equal(c, staged[i])) {
                    duplicate = true;
                    break;
                }
        if (duplicate) continue;

        CycleRecord rec;
        rec.class_id = lib.allocate_class_id();
        rec.path = path;
        rec.lifetime = life;
        rec.dim = 1;
        rec.modality_tags.insert(modality_tag);
        rec.created_episode = episode_id;
        staged.push_back(c);
        result.admitted.push_back(std::move(rec));
    }
    // Deduplicate the matched list while keeping order.
    std::vector<int> unique_matched;
    for (int id : result.matched_existing)
        if (std::find(unique_matched.begin(), unique_matched.end(), id) == unique_matched.end())
            unique_matched.push_back(id);
    result.matched_existing = std::move(unique_matched);
    return result;
}

std::vector<int> falsify(const CycleLibrary& lib, const AnchorContext& context, double tau) {
    std::vector<int> out;
    if (tau <= 0) return out;  // nothing is ever falsified at tau = 0
    for (const auto& rec : lib.records()) {
        chain::Chain c = context.map_path(rec.path);
        double life = context.lifetime(c);
        if (life < tau) out.push_back(rec.class_id);
    }
    return out;
}

void update_memory(CycleLibrary& lib, const std::vector<CycleRecord>& admitted,
                   const std::vector<int>& falsified) {
    for (const auto& rec : admitted) lib.insert(rec);
    for (int id : falsified) lib.erase(id);
}

std::vector<std::vector<int>> intersect(const std::vector<const CycleLibrary*>& libs,
                                        const std::vector<Eigen::MatrixXd>& to_shared,
                                        double fill_factor, int landmark_cap,
                                        double landmark_gate) {
    if (libs.size() < 2 || to_shared.size() != libs.size())
        fail(ErrorCode::no_shared_anchor, "need one alignment map per library");

    auto mapped_path = [&](std::size_t agent, const CycleRecord& rec) {
        std::vector<Eigen::VectorXd> out;
        out.reserve(rec.path.size());
        for (const auto& p : rec.path) out.push_back(to_shared[agent] * p);
        return out;
    };

    // Shared landmarks over everything the agents remember.
    CycleLibrary shared(landmark_cap, landmark_gate);
    std::vector<std::vector<Eigen::VectorXd>> all_paths;
    for (std::size_t a = 0; a < libs.size(); ++a)
        for (const auto& rec : libs[a]->records()) {
            auto path = mapped_path(a, rec);
            shared.observe_states(path);
            all_paths.push_back(std::move(path));
        }
    AnchorContext context(shared.landmarks(), all_paths, fill_factor, landmark_gate);

    std::vector<std::vector<int>> groups;
    for (const auto& seed_rec : libs[0]->records()) {
        chain::Chain seed = context.map_path(mapped_path(0, seed_rec));
        if (seed.empty()) continue;
        std::vector<int> group{seed_rec.class_id};
        bool complete = true;
        for (std::size_t a = 1; a < libs.size(); ++a) {
            int found = -1;
            for (const auto& rec : libs[a]->records()) {
                chain::Chain c = context.map_path(mapped_path(a, rec));
                if (!c.empty() && context.class_equal(seed, c)) {
                    found = rec.class_id;
                    break;
                }
            }
            if (found < 0) {
                complete = false;
                break;
            }
            group.push_back(found);
        }
        if (complete) groups.push_back(std::move(group));
    }
    return groups;
}

Eigen::MatrixXd fit_alignment(const std::vector<Eigen::VectorXd>& source,
                              const std::vector<Eigen::VectorXd>& target) {
    if (source.empty() || source.size() != target.size())
        fail(ErrorCode::invalid_argument, "alignment needs paired states");
    const int ds = static_cast<int>(source[0].size());
    const int dt = static_cast<int>(target[0].size());
    Eigen::MatrixXd sts = Eigen::MatrixXd::Zero(ds, ds);
    Eigen::MatrixXd tts = Eigen::MatrixXd::Zero(dt, ds);
    for (std::size_t i = 0; i < source.size(); ++i) {
        sts += source[i] * source[i].transpose();
        tts += target[i] * source[i].transpose();
    }
    sts += 1e-9 * Eigen::MatrixXd::Identity(ds, ds);
    return tts * sts.inverse();
}

}  // namespace mai::mem
