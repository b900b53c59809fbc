#pragma once

#include <limits>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "mai/chain.hpp"

namespace mai::ph {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct FiltrationEntry {
    chain::Simplex simplex;
    double birth = 0.0;
};

/// Birth-ordered simplices. Entries are sorted by (birth, dim, vertex
/// order), which guarantees faces precede cofaces and makes reduction
/// deterministic under ties.
class Filtration {
public:
    Filtration() = default;

    /// Sorts and validates: every face present at an equal-or-earlier
    /// position, births nondecreasing.
    static Filtration from_entries(std::vector<FiltrationEntry> entries);

    const std::vector<FiltrationEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    /// Subcomplex of everything born at or before the given scale.
    chain::SimplicialComplex complex_at(double scale) const;

    /// Full complex (all entries).
    chain::SimplicialComplex full_complex() const;

    /// Distinct birth values, ascending.
    std::vector<double> distinct_births() const;

private:
    std::vector<FiltrationEntry> entries_;
};

struct Bar {
    int dim = 0;
    double birth = 0.0;
    double death = kInf;
    /// A cycle born exactly at `birth`: for finite bars the reduced column
    /// of the killing simplex, for infinite bars the created cycle.
    chain::Chain representative;

    bool infinite() const { return death == kInf; }
    double lifetime() const { return death - birth; }
};

class PersistenceDiagram {
public:
    PersistenceDiagram() = default;
    explicit PersistenceDiagram(std::vector<Bar> bars) : bars_(std::move(bars)) {}

    const std::vector<Bar>& bars() const { return bars_; }
    std::vector<Bar> bars_in_dim(int dim) const;
    /// Bars alive at a scale: birth <= s < death.
    std::size_t alive_at(double scale, int dim) const;

private:
    std::vector<Bar> bars_;
};

/// Weighted undirected graph over dense node ids; the shared input shape
/// for flag-complex filtrations.
struct WeightedGraph {
    std::size_t num_nodes = 0;
    std::vector<std::tuple<int, int, double>> edges;  // (i, j, weight), i < j
};

/// Vietoris-Rips filtration up to triangles. Vertices are born at 0,
/// edges at their Euclidean length, triangles at the max of their edges;
/// anything born after max_scale is dropped.
Filtration build_vr(const std::vector<Eigen::VectorXd>& points, int max_dim,
                    double max_scale);

/// Flag filtration of a weighted graph up to dimension 2: vertices at 0,
/// edges at their weight, triangles at the max incident edge weight.
Filtration build_graph_filtration(const WeightedGraph& g);

/// Standard left-to-right column reduction of the boundary matrix, with
/// representative cycles for every bar. Zero-lifetime bars are kept.
PersistenceDiagram reduce(const Filtration& f);

/// Bars with lifetime >= tau; infinite bars are always kept.
std::vector<Bar> pers_tau(const PersistenceDiagram& d, double tau);

/// Elbow rule: threshold at the midpoint of the largest gap between
/// consecutive sorted finite lifetimes; falls back to `fallback` when
/// fewer than two distinct finite lifetimes exist.
double elbow_tau(const PersistenceDiagram& d, int dim, double fallback);

/// Exact bottleneck distance between the dim-k bars of two diagrams.
/// Finite bars are matched via binary search over candidate costs plus
/// bipartite matching with diagonal augmentation. Infinite bars must
/// match in count (their births are matched in sorted order); a count
/// mismatch yields +infinity.
double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

/// Scale at which a cycle first exists: max birth over its simplices.
double cycle_birth(const chain::Chain& c, const Filtration& f);

/// First scale at or after its birth where the cycle bounds; +infinity
/// when it never does. Monotonicity of "is a boundary" in the scale makes
/// binary search exact.
double cycle_death(const chain::Chain& c, const Filtration& f);

double cycle_lifetime(const chain::Chain& c, const Filtration& f);

}  // namespace mai::ph
