// Test-side oracles, deliberately independent of the library's linear
// algebra: dense bitset elimination for ranks, subset enumeration for
// boundary membership, and random face-closed complex generators.
#pragma once

#include <algorithm>
#include <bitset>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "mai/chain.hpp"
#include "mai/persistence.hpp"
#include "mai/rng.hpp"

namespace oracle {

constexpr std::size_t kMaxCols = 256;
using Row = std::bitset<kMaxCols>;

/// Gaussian elimination over GF(2) on dense rows.
inline std::size_t dense_rank(std::vector<Row> rows) {
    std::size_t rank = 0;
    for (std::size_t col = 0; col < kMaxCols; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows.size() && !rows[pivot][col]) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (r != rank && rows[r][col]) rows[r] ^= rows[rank];
        if (++rank == rows.size()) break;
    }
    return rank;
}

/// Boundary matrix of dimension d as dense columns-as-rows: one Row per
/// d-simplex, bits indexing the (d-1)-simplices.
inline std::vector<Row> boundary_rows(const mai::chain::SimplicialComplex& K, int d) {
    std::vector<Row> rows;
    for (const auto& s : K.simplices(d)) {
        Row r;
        for (int i = 0; i <= d; ++i) {
            auto idx = K.index_of(s.face_without(i));
            r.set(*idx);
        }
        rows.push_back(r);
    }
    return rows;
}

/// Betti number by dense elimination: n_k - rank(d_k) - rank(d_{k+1}).
inline int betti(const mai::chain::SimplicialComplex& K, int k) {
    std::size_t nk = K.count(k);
    std::size_t rank_k = k > 0 ? dense_rank(boundary_rows(K, k)) : 0;
    std::size_t rank_k1 = dense_rank(boundary_rows(K, k + 1));
    return static_cast<int>(nk - rank_k - rank_k1);
}

/// Exhaustive boundary test: c bounds iff some subset of the
/// (dim+1)-simplices has boundary exactly c. Only for tiny complexes.
inline bool is_boundary_bruteforce(const mai::chain::Chain& c,
                                   const mai::chain::SimplicialComplex& K) {
    if (c.empty()) return true;
    const auto& cofaces = K.simplices(c.dim() + 1);
    const std::size_t n = cofaces.size();
    if (n > 20) throw std::runtime_error("brute force limited to 20 cofaces");
    for (std::uint64_t mask = 1; mask < (1ULL << n); ++mask) {
        mai::chain::Chain sum;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1ULL << i)) sum = sum + mai::chain::boundary(cofaces[i]);
        if (sum == c) return true;
    }
    return false;
}

/// Random face-closed complex with at most roughly `budget` simplices.
/// Always carries at least a few edges so every dimension is exercised.
inline mai::chain::SimplicialComplex random_complex(mai::rng::Rng& r, int budget) {
    using mai::chain::Simplex;
    using mai::chain::VertexId;
    mai::chain::SimplicialComplex K;
    int vertices = 3 + static_cast<int>(r.below(6));
    budget = std::max(budget, vertices + 4);
    for (int v = 0; v < vertices; ++v)
        K.insert_with_faces(Simplex{static_cast<VertexId>(v)});
    // Bounded tries; small vertex draws cannot fill large budgets.
    for (int tries = 0; tries < 400 && static_cast<int>(K.total_count()) < budget; ++tries) {
        double pick = r.uniform();
        if (pick < 0.6) {
            VertexId a = static_cast<VertexId>(r.below(vertices));
            VertexId b = static_cast<VertexId>(r.below(vertices));
            if (a == b) continue;
            K.insert_with_faces(Simplex::from_unsorted({a, b}));
        } else {
            VertexId a = static_cast<VertexId>(r.below(vertices));
            VertexId b = static_cast<VertexId>(r.below(vertices));
            VertexId c = static_cast<VertexId>(r.below(vertices));
            if (a == b || b == c || a == c) continue;
            K.insert_with_faces(Simplex::from_unsorted({a, b, c}));
        }
    }
    return K;
}

/// Random cycle via a closed random walk on the 1-skeleton; may return an
/// empty chain when the walk fails to close.
inline mai::chain::Chain random_cycle(mai::rng::Rng& r,
                                      const mai::chain::SimplicialComplex& K) {
    const auto& edges = K.simplices(1);
    if (edges.empty()) return mai::chain::Chain();
    std::map<mai::chain::VertexId, std::vector<mai::chain::VertexId>> adj;
    for (const auto& e : edges) {
        adj[e.vertices()[0]].push_back(e.vertices()[1]);
        adj[e.vertices()[1]].push_back(e.vertices()[0]);
    }
    auto start_edge = edges[r.below(edges.size())];
    mai::chain::VertexId start = start_edge.vertices()[0];
    mai::chain::VertexId cur = start;
    mai::chain::Chain c(1);
    for (int step = 0; step < 40; ++step) {
        const auto& nbrs = adj[cur];
        mai::chain::VertexId nxt = nbrs[r.below(nbrs.size())];
        c.toggle(mai::chain::Simplex::from_unsorted({cur, nxt}));
        cur = nxt;
        if (cur == start) break;
    }
    if (cur != start || !mai::chain::is_cycle(c)) return mai::chain::Chain();
    return c;
}

/// Random chain of the given dimension supported on K.
inline mai::chain::Chain random_chain(mai::rng::Rng& r,
                                      const mai::chain::SimplicialComplex& K, int dim) {
    mai::chain::Chain c(dim);
    for (const auto& s : K.simplices(dim))
        if (r.uniform() < 0.4) c.toggle(s);
    return c;
}

/// Random filtration over a random complex: births drawn per simplex and
/// then repaired so faces never appear late.
inline mai::ph::Filtration random_filtration(mai::rng::Rng& r, int budget) {
    auto K = random_complex(r, budget);
    std::vector<mai::ph::FiltrationEntry> entries;
    // Assign births dim-by-dim so cofaces inherit the max of their faces.
    std::vector<std::vector<double>> births(K.max_dim() + 1);
    for (int d = 0; d <= K.max_dim(); ++d) {
        const auto& level = K.simplices(d);
        births[d].resize(level.size());
        for (std::size_t i = 0; i < level.size(); ++i) {
            double b = d == 0 ? 0.0 : r.uniform(0.0, 2.0);
            if (d > 0) {
                for (int f = 0; f <= d; ++f) {
                    auto idx = K.index_of(level[i].face_without(f));
                    b = std::max(b, births[d - 1][*idx]);
                }
            }
            births[d][i] = b;
            entries.push_back({level[i], b});
        }
    }
    return mai::ph::Filtration::from_entries(std::move(entries));
}

}  // namespace oracle
