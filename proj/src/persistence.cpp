#include "mai/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mai/gf2.hpp"

namespace mai::ph {

Filtration Filtration::from_entries(std::vector<FiltrationEntry> entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.birth != b.birth) return a.birth < b.birth;
        return a.simplex < b.simplex;  // dim first, then lexicographic
    });
    // Validate: faces present and born no later.
    std::map<chain::Simplex, double> births;
    for (const auto& e : entries) {
        if (births.count(e.simplex))
            fail(ErrorCode::invalid_argument, "duplicate simplex in filtration");
        if (e.simplex.dim() > 0) {
            for (int i = 0; i <= e.simplex.dim(); ++i) {
                auto it = births.find(e.simplex.face_without(i));
                if (it == births.end() || it->second > e.birth)
                    fail(ErrorCode::invalid_argument,
                         "filtration face missing or born after its coface");
            }
        }
        births.emplace(e.simplex, e.birth);
    }
    Filtration f;
    f.entries_ = std::move(entries);
    return f;
}

chain::SimplicialComplex Filtration::complex_at(double scale) const {
    chain::SimplicialComplex K;
    for (const auto& e : entries_)
        if (e.birth <= scale) K.insert_with_faces(e.simplex);
    return K;
}

chain::SimplicialComplex Filtration::full_complex() const {
    return complex_at(kInf);
}

std::vector<double> Filtration::distinct_births() const {
    std::vector<double> out;
    for (const auto& e : entries_) out.push_back(e.birth);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Bar> PersistenceDiagram::bars_in_dim(int dim) const {
    std::vector<Bar> out;
    for (const auto& b : bars_)
        if (b.dim == dim) out.push_back(b);
    return out;
}

std::size_t PersistenceDiagram::alive_at(double scale, int dim) const {
    std::size_t n = 0;
    for (const auto& b : bars_)
        if (b.dim == dim && b.birth <= scale && scale < b.death) ++n;
    return n;
}

Filtration build_vr(const std::vector<Eigen::VectorXd>& points, int max_dim,
                    double max_scale) {
    if (points.empty()) fail(ErrorCode::empty_input, "no points");
    if (max_dim < 0 || max_dim > 2)
        fail(ErrorCode::invalid_argument, "VR max_dim must be 0, 1 or 2");
    if (max_scale <= 0) fail(ErrorCode::invalid_argument, "max_scale must be positive");
    const int n = static_cast<int>(points.size());
    const auto d0 = points[0].size();
    for (const auto& p : points)
        if (p.size() != d0) fail(ErrorCode::dimension_mismatch, "point dimensions differ");

    std::vector<FiltrationEntry> entries;
    for (int i = 0; i < n; ++i)
        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(i)}, 0.0});

    Eigen::MatrixXd dist(n, n);
    for (int i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            double d = (points[i] - points[j]).norm();
            dist(i, j) = dist(j, i) = d;
        }
    }
    if (max_dim >= 1) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (dist(i, j) <= max_scale)
                    entries.push_back({chain::Simplex{static_cast<chain::VertexId>(i),
                                                      static_cast<chain::VertexId>(j)},
                                       dist(i, j)});
    }
    if (max_dim >= 2) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                if (dist(i, j) > max_scale) continue;
                for (int k = j + 1; k < n; ++k) {
                    double b = std::max({dist(i, j), dist(i, k), dist(j, k)});
                    if (b <= max_scale)
                        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(i),
                                                          static_cast<chain::VertexId>(j),
                                                          static_cast<chain::VertexId>(k)},
                                           b});
                }
            }
    }
    return Filtration::from_entries(std::move(entries));
}

Filtration build_graph_filtration(const WeightedGraph& g) {
    std::vector<FiltrationEntry> entries;
    for (std::size_t v = 0; v < g.num_nodes; ++v)
        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(v)}, 0.0});

    std::map<std::pair<int, int>, double> weight;
    for (const auto& [i, j, w] : g.edges) {
        if (w < 0) fail(ErrorCode::negative_weight, "negative edge weight");
        if (i == j) fail(ErrorCode::invalid_argument, "self loop");
        auto key = std::minmax(i, j);
        auto [it, fresh] = weight.emplace(std::make_pair(key.first, key.second), w);
        if (!fresh) it->second = std::min(it->second, w);
    }
    std::vector<std::set<int>> adj(g.num_nodes);
    for (const auto& [e, w] : weight) {
        entries.push_back({chain::Simplex{static_cast<chain::VertexId>(e.first),
                                          static_cast<chain::VertexId>(e.second)},
                           w});
        adj[e.first].insert(e.second);
        adj[e.second].insert(e.first);
    }
    // Flag triangles: every 3-clique, born at its heaviest edge.
    for (const auto& [e, w] : weight) {
        int i = e.first, j = e.second;
        for (int k : adj[i]) {
            if (k <= j) continue;
            if (!adj[j].count(k)) continue;
            double b = std::max({w, weight.at({std::min(i, k), std::max(i, k)}),
                                 weight.at({std::min(j, k), std::max(j, k)})});
            entries.push_back({chain::Simplex{static_cast<chain::VertexId>(i),
                                              static_cast<chain::VertexId>(j),
                                              static_cast<chain::VertexId>(k)},
                               b});
        }
    }
    return Filtration::from_entries(std::move(entries));
}

PersistenceDiagram reduce(const Filtration& f) {
    const auto& entries = f.entries();
    const std::size_t m = entries.size();

    // Column index of each simplex, for boundary lookups.
    std::map<chain::Simplex, int> col_of;
    for (std::size_t j = 0; j < m; ++j) col_of.emplace(entries[j].simplex, static_cast<int>(j));

    std::vector<gf2::SparseVec> R(m);           // reduced boundary columns
    std::vector<gf2::SparseVec> V(m);           // R = D * V bookkeeping
    std::map<int, int> pivot;                   // low row -> column holding it
    std::vector<int> paired_with(m, -1);        // creator -> killer

    std::vector<Bar> bars;
    auto to_chain = [&](const gf2::SparseVec& rows) {
        chain::Chain c;
        for (int r : rows) c.toggle(entries[r].simplex);
        return c;
    };

    for (std::size_t j = 0; j < m; ++j) {
        const auto& s = entries[j].simplex;
        gf2::SparseVec col;
        if (s.dim() > 0) {
            for (int i = 0; i <= s.dim(); ++i)
                col.push_back(col_of.at(s.face_without(i)));
            std::sort(col.begin(), col.end());
        }
        gf2::SparseVec v{static_cast<int>(j)};
        while (!col.empty()) {
            auto it = pivot.find(gf2::low(col));
            if (it == pivot.end()) break;
            col = gf2::sym_diff(col, R[it->second]);
            v = gf2::sym_diff(v, V[it->second]);
        }
        R[j] = std::move(col);
        V[j] = std::move(v);
        if (!R[j].empty()) {
            int i = gf2::low(R[j]);
            pivot.emplace(i, static_cast<int>(j));
            paired_with[i] = static_cast<int>(j);
            Bar bar;
            bar.dim = entries[i].simplex.dim();
            bar.birth = entries[i].birth;
            bar.death = entries[j].birth;
            bar.representative = to_chain(R[j]);
            bars.push_back(std::move(bar));
        }
    }
    // Unpaired creators yield infinite bars.
    for (std::size_t j = 0; j < m; ++j) {
        if (!R[j].empty() || paired_with[j] != -1) continue;
        Bar bar;
        bar.dim = entries[j].simplex.dim();
        bar.birth = entries[j].birth;
        bar.death = kInf;
        bar.representative = to_chain(V[j]);
        bars.push_back(std::move(bar));
    }
    std::sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
        return std::tie(a.dim, a.birth, a.death) < std::tie(b.dim, b.birth, b.death);
    });
    return PersistenceDiagram(std::move(bars));
}

std::vector<Bar> pers_tau(const PersistenceDiagram& d, double tau) {
    std::vector<Bar> out;
    for (const auto& b : d.bars())
        if (b.infinite() || b.lifetime() >= tau) out.push_back(b);
    return out;
}

double elbow_tau(const PersistenceDiagram& d, int dim, double fallback) {
    std::vector<double> lives;
    for (const auto& b : d.bars())
        if (b.dim == dim && !b.infinite()) lives.push_back(b.lifetime());
    std::sort(lives.begin(), lives.end());
    lives.erase(std::unique(lives.begin(), lives.end()), lives.end());
    if (lives.size() < 2) return fallback;
    double best_gap = -1.0, tau = fallback;
    for (std::size_t i = 1; i < lives.size(); ++i) {
        double gap = lives[i] - lives[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            tau = 0.5 * (lives[i] + lives[i - 1]);
        }
    }
    return tau;
}

namespace {

// Kuhn's augmenting-path matching on the threshold graph.
struct ThresholdMatcher {
    // Left side: bars of A plus one diagonal slot per bar of B.
    // Right side: bars of B plus one diagonal slot per bar of A.
    const std::vector<Bar>& a;
    const std::vector<Bar>& b;
    double c = 0;

    std::size_t na, nb, n;
    std::vector<int> match_l, match_r;
    std::vector<char> seen;

    ThresholdMatcher(const std::vector<Bar>& a_, const std::vector<Bar>& b_)
        : a(a_), b(b_), na(a_.size()), nb(b_.size()), n(na + nb) {}

    static double dist_inf(const Bar& x, const Bar& y) {
        return std::max(std::abs(x.birth - y.birth), std::abs(x.death - y.death));
    }
    static double half_life(const Bar& x) { return 0.5 * (x.death - x.birth); }

    bool edge(std::size_t l, std::size_t r) const {
        bool l_bar = l < na, r_bar = r < nb;
        if (l_bar && r_bar) return dist_inf(a[l], b[r]) <= c;
        if (l_bar && !r_bar) return half_life(a[l]) <= c;   // a-bar to diagonal
        if (!l_bar && r_bar) return half_life(b[r]) <= c;   // diagonal to b-bar
        return true;                                        // diagonal to diagonal
    }

    bool try_augment(std::size_t l) {
        for (std::size_t r = 0; r < n; ++r) {
            if (seen[r] || !edge(l, r)) continue;
            seen[r] = 1;
            if (match_r[r] < 0 || try_augment(static_cast<std::size_t>(match_r[r]))) {
                match_l[l] = static_cast<int>(r);
                match_r[r] = static_cast<int>(l);
                return true;
            }
        }
        return false;
    }

    bool feasible(double cost) {
        c = cost;
        match_l.assign(n, -1);
        match_r.assign(n, -1);
        for (std::size_t l = 0; l < n; ++l) {
            seen.assign(n, 0);
            if (!try_augment(l)) return false;
        }
        return true;
    }
};

}  // namespace

double bottleneck(const PersistenceDiagram& da, const PersistenceDiagram& db, int dim) {
    std::vector<Bar> fa, fb;
    std::vector<double> ia, ib;
    // Zero-persistence bars lie on the diagonal and match it at no cost at
    // every threshold, so they are dropped exactly.
    for (const auto& bar : da.bars_in_dim(dim)) {
        if (bar.infinite())
            ia.push_back(bar.birth);
        else if (bar.lifetime() > 0)
            fa.push_back(bar);
    }
    for (const auto& bar : db.bars_in_dim(dim)) {
        if (bar.infinite())
            ib.push_back(bar.birth);
        else if (bar.lifetime() > 0)
            fb.push_back(bar);
    }

    if (ia.size() != ib.size()) return kInf;
    double inf_cost = 0.0;
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    for (std::size_t i = 0; i < ia.size(); ++i)
        inf_cost = std::max(inf_cost, std::abs(ia[i] - ib[i]));

    if (fa.empty() && fb.empty()) return inf_cost;

    std::vector<double> candidates{0.0};
    for (const auto& x : fa) candidates.push_back(ThresholdMatcher::half_life(x));
    for (const auto& y : fb) candidates.push_back(ThresholdMatcher::half_life(y));
    for (const auto& x : fa)
        for (const auto& y : fb) candidates.push_back(ThresholdMatcher::dist_inf(x, y));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    ThresholdMatcher matcher(fa, fb);
    std::size_t lo = 0, hi = candidates.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (matcher.feasible(candidates[mid]))
            hi = mid;
        else
            lo = mid + 1;
    }
    return std::max(candidates[lo], inf_cost);
}

double cycle_birth(const chain::Chain& c, const Filtration& f) {
    if (c.empty()) return 0.0;
    std::map<chain::Simplex, double> births;
    for (const auto& e : f.entries()) births.emplace(e.simplex, e.birth);
    double birth = 0.0;
    for (const auto& s : c.terms()) {
        auto it = births.find(s);
        if (it == births.end())
            fail(ErrorCode::invalid_argument, "cycle not supported on filtration");
        birth = std::max(birth, it->second);
    }
    return birth;
}

double cycle_death(const chain::Chain& c, const Filtration& f) {
    if (c.empty()) return 0.0;
    double birth = cycle_birth(c, f);
    auto scales = f.distinct_births();
    // Candidate death scales at or after the birth.
    std::vector<double> after;
    for (double s : scales)
        if (s >= birth) after.push_back(s);
    if (after.empty()) return kInf;
    if (!chain::is_boundary(c, f.full_complex())) return kInf;
    std::size_t lo = 0, hi = after.size() - 1;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (chain::is_boundary(c, f.complex_at(after[mid])))
            hi = mid;
        else
            lo = mid + 1;
    }
    return after[lo];
}

double cycle_lifetime(const chain::Chain& c, const Filtration& f) {
    double death = cycle_death(c, f);
    if (death == kInf) return kInf;
    return death - cycle_birth(c, f);
}

}  // namespace mai::ph
