#include "mai/chain.hpp"

#include <algorithm>
#include <sstream>

#include "mai/gf2.hpp"

namespace mai::chain {

Simplex::Simplex(std::vector<VertexId> vs) : verts_(std::move(vs)) {
    if (verts_.empty())
        fail(ErrorCode::invalid_argument, "simplex needs at least one vertex");
    for (std::size_t i = 1; i < verts_.size(); ++i)
        if (verts_[i - 1] >= verts_[i])
            fail(ErrorCode::invalid_argument, "simplex vertices must strictly increase");
}

Simplex Simplex::from_unsorted(std::vector<VertexId> vs) {
    std::sort(vs.begin(), vs.end());
    return Simplex(std::move(vs));
}

Simplex Simplex::face_without(int i) const {
    std::vector<VertexId> vs;
    vs.reserve(verts_.size() - 1);
    for (int j = 0; j < static_cast<int>(verts_.size()); ++j)
        if (j != i) vs.push_back(verts_[j]);
    return Simplex(std::move(vs));
}

std::strong_ordering Simplex::operator<=>(const Simplex& other) const {
    if (auto c = verts_.size() <=> other.verts_.size(); c != 0) return c;
    return verts_ <=> other.verts_;
}

void Chain::toggle(const Simplex& s) {
    if (dim_ == -1 && terms_.empty()) dim_ = s.dim();
    if (s.dim() != dim_)
        fail(ErrorCode::invalid_argument, "chain terms must share one dimension");
    auto it = terms_.find(s);
    if (it != terms_.end())
        terms_.erase(it);
    else
        terms_.insert(s);
}

Chain Chain::operator+(const Chain& other) const {
    if (!empty() && !other.empty() && dim_ != other.dim_)
        fail(ErrorCode::invalid_argument, "cannot add chains of different dimension");
    Chain out = *this;
    if (out.dim_ == -1) out.dim_ = other.dim_;
    for (const auto& s : other.terms_) out.toggle(s);
    return out;
}

SimplicialComplex SimplicialComplex::closure_of(const std::vector<Simplex>& generators) {
    SimplicialComplex K;
    for (const auto& s : generators) K.insert_with_faces(s);
    return K;
}

void SimplicialComplex::insert_with_faces(const Simplex& s) {
    int d = s.dim();
    if (static_cast<int>(by_dim_.size()) <= d) by_dim_.resize(d + 1);
    if (!by_dim_[d].insert(s).second) return;
    dirty_ = true;
    if (d > 0)
        for (int i = 0; i <= d; ++i) insert_with_faces(s.face_without(i));
}

bool SimplicialComplex::contains(const Simplex& s) const {
    int d = s.dim();
    if (d < 0 || d >= static_cast<int>(by_dim_.size())) return false;
    return by_dim_[d].count(s) > 0;
}

std::size_t SimplicialComplex::count(int dim) const {
    if (dim < 0 || dim >= static_cast<int>(by_dim_.size())) return 0;
    return by_dim_[dim].size();
}

std::size_t SimplicialComplex::total_count() const {
    std::size_t n = 0;
    for (const auto& level : by_dim_) n += level.size();
    return n;
}

void SimplicialComplex::seal() const {
    if (!dirty_ && sorted_.size() == by_dim_.size()) return;
    sorted_.assign(by_dim_.size(), {});
    for (std::size_t d = 0; d < by_dim_.size(); ++d)
        sorted_[d].assign(by_dim_[d].begin(), by_dim_[d].end());
    dirty_ = false;
}

const std::vector<Simplex>& SimplicialComplex::simplices(int dim) const {
    static const std::vector<Simplex> kEmpty;
    if (dim < 0 || dim >= static_cast<int>(by_dim_.size())) return kEmpty;
    seal();
    return sorted_[dim];
}

std::optional<std::size_t> SimplicialComplex::index_of(const Simplex& s) const {
    const auto& level = simplices(s.dim());
    auto it = std::lower_bound(level.begin(), level.end(), s);
    if (it == level.end() || !(*it == s)) return std::nullopt;
    return static_cast<std::size_t>(it - level.begin());
}

bool SimplicialComplex::supports(const Chain& c) const {
    for (const auto& s : c.terms())
        if (!contains(s)) return false;
    return true;
}

Chain boundary(const Simplex& s) {
    Chain out(s.dim() - 1);
    if (s.dim() == 0) return Chain();  // boundary of a vertex is empty
    for (int i = 0; i <= s.dim(); ++i) out.toggle(s.face_without(i));
    return out;
}

Chain boundary(const Chain& c) {
    if (c.empty() || c.dim() <= 0) return Chain();
    Chain out(c.dim() - 1);
    for (const auto& s : c.terms())
        for (int i = 0; i <= s.dim(); ++i) out.toggle(s.face_without(i));
    return out;
}

bool is_cycle(const Chain& c) { return boundary(c).empty(); }

namespace {

// Row-index vector of a chain within K's per-dimension index space.
gf2::SparseVec chain_rows(const Chain& c, const SimplicialComplex& K) {
    gf2::SparseVec rows;
    rows.reserve(c.size());
    for (const auto& s : c.terms()) {
        auto idx = K.index_of(s);
        if (!idx) fail(ErrorCode::invalid_argument, "chain not supported on complex");
        rows.push_back(static_cast<int>(*idx));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace

bool is_boundary(const Chain& c, const SimplicialComplex& K) {
    if (c.empty()) return true;
    if (!K.supports(c))
        fail(ErrorCode::invalid_argument, "chain not supported on complex");
    int d = c.dim();
    const auto& cofaces = K.simplices(d + 1);
    if (cofaces.empty()) return false;
    gf2::EchelonBasis basis;
    for (const auto& s : cofaces) basis.insert(chain_rows(boundary(s), K));
    return basis.in_span(chain_rows(c, K));
}

int betti(const SimplicialComplex& K, int k) {
    if (k < 0 || k > K.max_dim())
        fail(ErrorCode::invalid_argument, "betti dimension out of range");
    auto rank_boundary = [&](int d) -> std::size_t {
        // Rank of boundary_d as a map C_d -> C_{d-1}.
        if (d <= 0 || d > K.max_dim()) return 0;
        gf2::EchelonBasis basis;
        for (const auto& s : K.simplices(d)) basis.insert(chain_rows(boundary(s), K));
        return basis.rank();
    };
    std::size_t n_k = K.count(k);
    std::size_t rank_k = rank_boundary(k);        // rank of boundary_k
    std::size_t rank_k1 = rank_boundary(k + 1);   // rank of boundary_{k+1}
    return static_cast<int>(n_k - rank_k - rank_k1);
}

bool class_equal(const Chain& c1, const Chain& c2, const SimplicialComplex& K) {
    if (!is_cycle(c1) || !is_cycle(c2))
        fail(ErrorCode::not_a_cycle, "class_equal requires cycles");
    return is_boundary(c1 + c2, K);
}

std::string format_chain(const Chain& c) {
    std::ostringstream os;
    os << c.dim() << ':';
    bool first = true;
    for (const auto& s : c.terms()) {
        os << (first ? " " : " ; ");
        first = false;
        bool fv = true;
        for (auto v : s.vertices()) {
            if (!fv) os << ' ';
            fv = false;
            os << v;
        }
    }
    return os.str();
}

namespace {

Chain parse_chain_at(const std::string& line, int line_no) {
    auto colon = line.find(':');
    if (colon == std::string::npos)
        fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": missing ':'");
    int dim = 0;
    try {
        dim = std::stoi(line.substr(0, colon));
    } catch (const std::exception&) {
        fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad dimension");
    }
    if (dim < 0)
        fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": negative dimension");

    Chain out(dim);
    std::string rest = line.substr(colon + 1);
    std::stringstream ss(rest);
    std::string group;
    while (std::getline(ss, group, ';')) {
        std::stringstream gs(group);
        std::vector<VertexId> vs;
        long long v;
        while (gs >> v) {
            if (v < 0)
                fail(ErrorCode::parse,
                     "line " + std::to_string(line_no) + ": negative vertex id");
            vs.push_back(static_cast<VertexId>(v));
        }
        std::string trailing;
        gs.clear();
        if (gs >> trailing)
            fail(ErrorCode::parse, "line " + std::to_string(line_no) + ": bad token");
        if (vs.empty()) continue;
        if (static_cast<int>(vs.size()) != dim + 1)
            fail(ErrorCode::parse,
                 "line " + std::to_string(line_no) + ": simplex arity does not match dimension");
        try {
            out.toggle(Simplex(vs));
        } catch (const Error&) {
            fail(ErrorCode::parse,
                 "line " + std::to_string(line_no) + ": vertices must strictly increase");
        }
    }
    return out;
}

}  // namespace

Chain parse_chain(const std::string& line) { return parse_chain_at(line, 1); }

SimplicialComplex parse_complex(const std::string& text) {
    SimplicialComplex K;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    bool any = false;
    while (std::getline(ss, line)) {
        ++line_no;
        auto head = line.find_first_not_of(" \t\r");
        if (head == std::string::npos || line[head] == '#') continue;
        Chain c = parse_chain_at(line, line_no);
        any = true;
        for (const auto& s : c.terms()) K.insert_with_faces(s);
    }
    if (!any) fail(ErrorCode::empty_input, "complex file has no simplices");
    return K;
}

}  // namespace mai::chain
