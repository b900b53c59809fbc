#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mai/error.hpp"

namespace mai::chain {

using VertexId = std::uint32_t;

/// Abstract simplex: strictly increasing vertex ids, dim = count - 1.
/// Vertex ids are dense nonnegative integers assigned by the caller; no
/// geometry lives at this level.
class Simplex {
public:
    Simplex() = default;
    Simplex(std::initializer_list<VertexId> vs) : Simplex(std::vector<VertexId>(vs)) {}
    explicit Simplex(std::vector<VertexId> vs);

    /// Sorts the vertices first; rejects duplicates.
    static Simplex from_unsorted(std::vector<VertexId> vs);

    int dim() const { return static_cast<int>(verts_.size()) - 1; }
    const std::vector<VertexId>& vertices() const { return verts_; }

    /// The face obtained by dropping the i-th vertex.
    Simplex face_without(int i) const;

    /// Ordering: by dimension first, then lexicographic on vertices.
    std::strong_ordering operator<=>(const Simplex& other) const;
    bool operator==(const Simplex& other) const { return verts_ == other.verts_; }

private:
    std::vector<VertexId> verts_;
};

/// Formal sum of same-dimension simplices over the two-element field.
/// Set semantics: toggling a simplex twice cancels it.
class Chain {
public:
    Chain() = default;
    explicit Chain(int dim) : dim_(dim) {}

    void toggle(const Simplex& s);
    bool contains(const Simplex& s) const { return terms_.count(s) > 0; }
    bool empty() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    /// -1 for the empty chain with no declared dimension.
    int dim() const { return dim_; }
    const std::set<Simplex>& terms() const { return terms_; }

    Chain operator+(const Chain& other) const;
    bool operator==(const Chain& other) const { return terms_ == other.terms_; }

private:
    int dim_ = -1;
    std::set<Simplex> terms_;
};

/// Finite face-closed simplicial complex. Simplices are stored per
/// dimension in sorted order, which fixes the index space used by the
/// boundary-matrix routines.
class SimplicialComplex {
public:
    SimplicialComplex() = default;

    /// Face closure of the given generators.
    static SimplicialComplex closure_of(const std::vector<Simplex>& generators);

    /// Insert a simplex together with all of its faces.
    void insert_with_faces(const Simplex& s);

    bool contains(const Simplex& s) const;
    int max_dim() const { return static_cast<int>(by_dim_.size()) - 1; }
    std::size_t count(int dim) const;
    std::size_t total_count() const;
    /// Sorted simplices of one dimension; empty for out-of-range dims.
    const std::vector<Simplex>& simplices(int dim) const;
    /// Position of s within its dimension's sorted list.
    std::optional<std::size_t> index_of(const Simplex& s) const;

    /// True when a chain's simplices all belong to the complex.
    bool supports(const Chain& c) const;

private:
    void seal() const;  // rebuild sorted index caches lazily

    std::vector<std::set<Simplex>> by_dim_;
    mutable std::vector<std::vector<Simplex>> sorted_;
    mutable bool dirty_ = false;
};

/// Boundary of a single simplex: the sum of its codimension-1 faces.
Chain boundary(const Simplex& s);

/// Boundary operator on chains. Total: the boundary of a 0-chain is the
/// empty chain, and boundary(boundary(c)) is always empty.
Chain boundary(const Chain& c);

/// True iff boundary(c) is empty.
bool is_cycle(const Chain& c);

/// True iff c is the boundary of some (dim+1)-chain supported on K,
/// decided by exact elimination over the two-element field. The empty
/// chain is a boundary; a nonempty chain with no higher simplices is not.
bool is_boundary(const Chain& c, const SimplicialComplex& K);

/// Betti number: rank ker(boundary_k) - rank im(boundary_{k+1}), exact.
int betti(const SimplicialComplex& K, int k);

/// Homology-class equality for cycles: c1 ~ c2 iff c1 + c2 bounds in K.
/// Throws ErrorCode::not_a_cycle when either input has a boundary.
bool class_equal(const Chain& c1, const Chain& c2, const SimplicialComplex& K);

/// Debug text format, one chain per line: "k: v0 v1 ... ; v0 v1 ...".
std::string format_chain(const Chain& c);
Chain parse_chain(const std::string& line);

/// A complex file is a list of chain lines; the complex is the face
/// closure of every listed simplex. Blank lines and '#' comments are
/// skipped. Parse failures report the 1-based line number.
SimplicialComplex parse_complex(const std::string& text);

}  // namespace mai::chain
