// Exercises the shared library exactly the way an external client would:
// through the C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "mai/mai.h"

namespace {

struct Owned {
    char* ptr = nullptr;
    ~Owned() { mai_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

std::vector<double> circle_coords(int n) {
    std::vector<double> coords;
    for (int i = 0; i < n; ++i) {
        double a = 2.0 * M_PI * i / n;
        coords.push_back(std::cos(a));
        coords.push_back(std::sin(a));
    }
    return coords;
}

}  // namespace

TEST_CASE("version and error state") {
    CHECK(std::string(mai_version()).size() >= 5);
    CHECK(std::string(mai_last_error()).empty());
}

TEST_CASE("complex parse and betti") {
    mai_complex* k = nullptr;
    REQUIRE(mai_complex_parse("1: 0 1 ; 1 2 ; 0 2\n", &k) == MAI_OK);
    CHECK(mai_complex_max_dim(k) == 1);
    int b0 = -1, b1 = -1;
    CHECK(mai_complex_betti(k, 0, &b0) == MAI_OK);
    CHECK(mai_complex_betti(k, 1, &b1) == MAI_OK);
    CHECK(b0 == 1);
    CHECK(b1 == 1);
    CHECK(mai_complex_betti(k, 7, &b1) == MAI_ERR_INVALID_ARGUMENT);
    mai_complex_free(k);
}

TEST_CASE("parse failure reports line and maps to MAI_ERR_PARSE") {
    mai_complex* k = nullptr;
    CHECK(mai_complex_parse("1: 0 1\nnot a chain\n", &k) == MAI_ERR_PARSE);
    CHECK(std::string(mai_last_error()).find("line 2") != std::string::npos);
    CHECK(mai_complex_parse(nullptr, &k) == MAI_ERR_INVALID_ARGUMENT);
}

TEST_CASE("diagram from points, CSV and bottleneck") {
    auto coords = circle_coords(20);
    mai_diagram* d = nullptr;
    REQUIRE(mai_diagram_from_points(coords.data(), 20, 2, 2.0, 2, &d) == MAI_OK);
    CHECK(mai_diagram_num_bars(d) > 0);
    CHECK(mai_diagram_num_bars_in_dim(d, 0) == 20);

    Owned csv;
    REQUIRE(mai_diagram_to_csv(d, &csv.ptr) == MAI_OK);
    CHECK(csv.str().rfind("dim,birth,death,lifetime\n", 0) == 0);
    CHECK(csv.str().find("inf") != std::string::npos);

    double dist = -1;
    CHECK(mai_diagram_bottleneck(d, d, 1, nullptr) == MAI_ERR_INVALID_ARGUMENT);
    CHECK(mai_diagram_bottleneck(d, d, 1, &dist) == MAI_OK);
    CHECK(dist == 0.0);
    mai_diagram_free(d);
}

TEST_CASE("episode generation round trip") {
    Owned out;
    REQUIRE(mai_episode_generate(
                R"({"task":"t1","shape":"circle","steps":32,"jitter":0.0,"seed":5})",
                &out.ptr) == MAI_OK);
    auto s = out.str();
    CHECK(s.find("\"episodes\"") != std::string::npos);
    CHECK(s.find("circle") != std::string::npos);
    CHECK(s.find("t,x0,x1,x2,x3") != std::string::npos);

    Owned bad;
    CHECK(mai_episode_generate(R"({"shape":"pentagon"})", &bad.ptr) ==
          MAI_ERR_INVALID_ARGUMENT);
    CHECK(mai_episode_generate("not json", &bad.ptr) == MAI_ERR_PARSE);
}

TEST_CASE("experiment run and config errors") {
    Owned out;
    // Missing seed is a config error that names the field.
    CHECK(mai_experiment_run(R"({"schema_version":1})", &out.ptr) == MAI_ERR_CONFIG);
    CHECK(std::string(mai_last_error()).find("seed") != std::string::npos);
    // Unknown keys are rejected.
    CHECK(mai_experiment_run(R"({"schema_version":1,"seed":1,"frobnicate":2})", &out.ptr) ==
          MAI_ERR_CONFIG);
    CHECK(std::string(mai_last_error()).find("frobnicate") != std::string::npos);

    // A small run end to end.
    const char* cfg = R"({
      "schema_version": 1, "seed": 3,
      "task": {"epochs": 2, "episodes_per_epoch": 4, "jitter": 0.01},
      "checks": {"h3": false, "h5": false}
    })";
    REQUIRE(mai_experiment_run(cfg, &out.ptr) == MAI_OK);
    CHECK(out.str().find("\"verdicts\"") != std::string::npos);
    CHECK(out.str().find("\"all_pass\"") != std::string::npos);
}

TEST_CASE("ablation run through the C surface") {
    Owned out;
    const char* cfg = R"({
      "schema_version": 1, "seed": 3,
      "task": {"epochs": 2, "episodes_per_epoch": 4, "jitter": 0.01}
    })";
    REQUIRE(mai_ablation_run(cfg, "A1", &out.ptr) == MAI_OK);
    CHECK(out.str().find("\"changed_field\"") != std::string::npos);
    CHECK(mai_ablation_run(cfg, "A7", &out.ptr) == MAI_ERR_INVALID_ARGUMENT);
}
