#pragma once

#include <map>
#include <vector>

namespace mai::gf2 {

/// Sparse vector over the two-element field: sorted indices of the
/// nonzero entries. Addition is symmetric difference.
using SparseVec = std::vector<int>;

inline SparseVec sym_diff(const SparseVec& a, const SparseVec& b) {
    SparseVec out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else if (b[j] < a[i]) {
            out.push_back(b[j++]);
        } else {
            ++i;
            ++j;
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return out;
}

inline int low(const SparseVec& v) { return v.empty() ? -1 : v.back(); }

/// Incremental echelon basis keyed by pivot (largest index). Supports rank
/// queries and membership tests for the span of the inserted columns.
class EchelonBasis {
public:
    /// Reduce v against the basis; the remainder has a pivot not yet used
    /// (or is empty).
    SparseVec reduce(SparseVec v) const {
        while (!v.empty()) {
            auto it = pivots_.find(low(v));
            if (it == pivots_.end()) break;
            v = sym_diff(v, it->second);
        }
        return v;
    }

    /// Insert a column. Returns true when it was independent of the span.
    bool insert(SparseVec v) {
        v = reduce(std::move(v));
        if (v.empty()) return false;
        pivots_.emplace(low(v), std::move(v));
        return true;
    }

    bool in_span(SparseVec v) const { return reduce(std::move(v)).empty(); }

    std::size_t rank() const { return pivots_.size(); }

private:
    std::map<int, SparseVec> pivots_;
};

}  // namespace mai::gf2
