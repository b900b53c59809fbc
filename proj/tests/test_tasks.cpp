#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "mai/chain.hpp"
#include "mai/rng.hpp"
#include "mai/tasks.hpp"

using namespace mai::tasks;

namespace {

int graph_betti1(const StateGraph& g) {
    auto f = mai::ph::build_graph_filtration(to_weighted_graph(g));
    auto K = f.full_complex();
    return K.max_dim() >= 1 ? mai::chain::betti(K, 1) : 0;
}

// The distinct samples of a closed episode: everything except the
// closing duplicate.
std::multiset<std::vector<double>> point_set(const Episode& ep) {
    std::multiset<std::vector<double>> s;
    for (int t = 0; t + 1 < ep.steps(); ++t) {
        const auto& o = ep.observations[t];
        s.insert(std::vector<double>(o.data(), o.data() + o.size()));
    }
    return s;
}

int chain_odd_endpoints(const StateGraph& g) {
    std::map<int, int> degree;
    for (auto [a, b] : g.chain_edges) {
        degree[a] ^= 1;
        degree[b] ^= 1;
    }
    int odd = 0;
    for (auto& [v, p] : degree) odd += p;
    return odd;
}

}  // namespace

TEST_CASE("t1 circle closes exactly at zero jitter") {
    auto ep = gen_t1(Shape::circle, 64, 0.0, false, 1);
    CHECK(ep.steps() == 64);
    CHECK(ep.loop_class == "circle");
    CHECK((ep.observations.front() - ep.observations.back()).norm() <= 1e-9);
}

TEST_CASE("t1 figure-8 latent image has two loops") {
    auto ep = gen_t1(Shape::figure8, 97, 0.0, false, 2);
    auto enc = Encoder::identity(4);
    auto tr = enc.encode(ep);
    auto g = build_state_graph(tr, 4, 2);
    CHECK(graph_betti1(g) == 2);
}

TEST_CASE("episodes are reproducible bit for bit") {
    auto a = gen_t1(Shape::circle, 65, 0.03, true, 77);
    auto b = gen_t1(Shape::circle, 65, 0.03, true, 77);
    REQUIRE(a.steps() == b.steps());
    for (int t = 0; t < a.steps(); ++t) CHECK(a.observations[t] == b.observations[t]);
}

TEST_CASE("unknown shape is rejected") {
    CHECK_THROWS_AS(shape_from_string("pentagon"), mai::Error);
    CHECK_THROWS_AS(gen_t1(Shape::circle, 4, 0.0, false, 0), mai::Error);  // too short
}

TEST_CASE("class-preserving permutation rotates without changing the sample set") {
    auto ep = gen_t1(Shape::circle, 65, 0.02, false, 5);
    auto rotated = permute_episode(ep, 99, 4);
    CHECK(point_set(ep) == point_set(rotated));
    CHECK((rotated.observations.front() - rotated.observations.back()).norm() <= 1e-9);
    bool moved = false;
    for (int t = 0; t < ep.steps(); ++t)
        if ((ep.observations[t] - rotated.observations[t]).norm() > 1e-12) moved = true;
    CHECK(moved);
}

TEST_CASE("class-preserving permutation keeps the graph class") {
    auto ep = gen_t1(Shape::circle, 65, 0.01, false, 6);
    auto enc = Encoder::identity(4);
    auto base_g = build_state_graph(enc.encode(ep), 4, 2);
    for (int i = 0; i < 10; ++i) {
        auto rotated = permute_episode(ep, 1000 + i, 4);
        auto g = build_state_graph(enc.encode(rotated), 4, 2);
        CHECK(graph_betti1(g) == graph_betti1(base_g));
    }
}

TEST_CASE("class-breaking scramble opens the walk") {
    auto ep = gen_t1(Shape::circle, 65, 0.01, false, 7);
    auto enc = Encoder::identity(4);
    int broken = 0;
    for (int i = 0; i < 10; ++i) {
        auto scrambled = scramble_episode(ep, 2000 + i);
        auto g = build_state_graph(enc.encode(scrambled), 4, 2);
        if (chain_odd_endpoints(g) > 0) ++broken;
    }
    CHECK(broken >= 9);
}

TEST_CASE("t2 renders one loop through two modalities") {
    auto [a, b] = gen_t2(Shape::circle, 65, 9);
    CHECK(a.obs_dim() == 12);
    CHECK(b.obs_dim() == 7);
    CHECK(a.loop_class == b.loop_class);
    CHECK(a.modality == Modality::A);
    CHECK(b.modality == Modality::B);
    // Modality A alone behaves like a T1 episode: closed at zero jitter.
    CHECK((a.observations.front() - a.observations.back()).norm() <= 1e-9);
}

TEST_CASE("t2 modalities give bottleneck-close dominant bars after PCA fits") {
    auto [a, b] = gen_t2(Shape::circle, 65, 21);
    auto enc_a = Encoder::fit_pca(a.observations, 4, 0.0, 2.0);
    auto enc_b = Encoder::fit_pca(b.observations, 4, 0.0, 2.0);
    auto da = mai::ph::reduce(mai::ph::build_vr(enc_a.encode(a).states, 2, 1.2));
    auto db = mai::ph::reduce(mai::ph::build_vr(enc_b.encode(b).states, 2, 1.2));
    CHECK(mai::ph::bottleneck(da, db, 1) <= 1e-6);
}

TEST_CASE("t3 agents share the loop class through different mixings") {
    auto [teacher, student] = gen_t3(Shape::circle, 65, 3);
    CHECK(teacher.obs_dim() == 12);
    CHECK(student.obs_dim() == 12);
    CHECK(teacher.loop_class == student.loop_class);
    bool differs = false;
    for (int t = 0; t < teacher.steps(); ++t)
        if ((teacher.observations[t] - student.observations[t]).norm() > 1e-9) differs = true;
    CHECK(differs);
}

TEST_CASE("encoder: identity weights reproduce observations") {
    auto ep = gen_t1(Shape::circle, 65, 0.0, false, 4);
    auto enc = Encoder::identity(4);
    auto tr = enc.encode(ep);
    REQUIRE(tr.steps() == ep.steps());
    for (int t = 0; t < ep.steps(); ++t) CHECK(tr.states[t] == ep.observations[t]);
}

TEST_CASE("encoder: zero observations give zero states") {
    Episode ep;
    ep.observations.assign(10, Eigen::VectorXd::Zero(4));
    auto enc = Encoder::identity(4, 0.3, 1.0);
    for (const auto& z : enc.encode(ep).states) CHECK(z.norm() == 0.0);
}

TEST_CASE("encoder step is Lipschitz after spectral clipping") {
    mai::rng::Rng r(55);
    Eigen::MatrixXd w(4, 6);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) w(i, j) = 3.0 * r.normal();
    const double bound = 1.5;
    Encoder enc(w, 0.0, bound);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
    for (int trial = 0; trial < 1000; ++trial) {
        Eigen::VectorXd x = r.normal_vector(6);
        Eigen::VectorXd y = r.normal_vector(6);
        double lhs = (enc.step(zero, x) - enc.step(zero, y)).norm();
        CHECK(lhs <= bound * (x - y).norm() + 1e-9);
    }
}

TEST_CASE("encoder leak accumulates history") {
    Episode ep;
    ep.observations.assign(3, Eigen::VectorXd::Ones(1));
    Encoder enc(Eigen::MatrixXd::Identity(1, 1), 0.5, 1.0);
    auto tr = enc.encode(ep);
    CHECK(tr.states[0][0] == doctest::Approx(1.0));
    CHECK(tr.states[1][0] == doctest::Approx(1.5));
    CHECK(tr.states[2][0] == doctest::Approx(1.75));
}

TEST_CASE("encoder dimension mismatch") {
    auto ep = gen_t1(Shape::circle, 65, 0.0, false, 4);
    auto enc = Encoder::identity(7);
    CHECK_THROWS_AS(enc.encode(ep), mai::Error);
}

TEST_CASE("jitter within delta moves the latent diagram by at most L*delta") {
    // Composition of persistence stability with the encoder bound: noise
    // with pairwise distortion <= delta maps through an L-Lipschitz step.
    mai::rng::Rng r(66);
    const double delta = 0.04;
    const double lipschitz = 1.5;
    Eigen::MatrixXd w(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) w(i, j) = 2.0 * r.normal();
    Encoder enc(w, 0.0, lipschitz);

    auto clean = gen_t1(Shape::circle, 65, 0.0, false, 8);
    auto d_clean = mai::ph::reduce(mai::ph::build_vr(enc.encode(clean).states, 2, 1.6));
    for (int trial = 0; trial < 20; ++trial) {
        Episode moved = clean;
        for (auto& o : moved.observations) o += r.ball(4, delta / 2);
        moved.observations.back() = moved.observations.front();
        auto d_moved = mai::ph::reduce(mai::ph::build_vr(enc.encode(moved).states, 2, 1.6));
        CHECK(mai::ph::bottleneck(d_clean, d_moved, 1) <= lipschitz * delta + 1e-9);
    }
}

TEST_CASE("state graph of a closed circle is one long cycle") {
    auto ep = gen_t1(Shape::circle, 65, 0.0, false, 10);
    auto tr = Encoder::identity(4).encode(ep);
    auto g = build_state_graph(tr, 4, 1);
    CHECK(graph_betti1(g) == 1);
    CHECK(chain_odd_endpoints(g) == 0);  // the walk closes
}

TEST_CASE("state graph with bin = T collapses to a single node") {
    auto ep = gen_t1(Shape::circle, 65, 0.0, false, 11);
    auto tr = Encoder::identity(4).encode(ep);
    auto g = build_state_graph(tr, 65, 0);
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
}

TEST_CASE("open trajectory gives a path graph with no loops") {
    T1Options opt;
    opt.shape = Shape::circle;
    opt.steps = 65;
    opt.open_loop = true;
    opt.seed = 12;
    auto ep = gen_t1_ex(opt);
    auto tr = Encoder::identity(4).encode(ep);
    auto g = build_state_graph(tr, 4, 1);
    CHECK(graph_betti1(g) == 0);
    CHECK(chain_odd_endpoints(g) == 2);
}
