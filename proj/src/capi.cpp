#include "mai/mai.h"

#include <cstring>
#include <string>

#include "mai/chain.hpp"
#include "mai/io.hpp"
#include "mai/persistence.hpp"
#include "mai/rng.hpp"
#include "mai/runner.hpp"
#include "mai/tasks.hpp"

namespace {

thread_local std::string g_last_error;

mai_status status_of(mai::ErrorCode code) {
    using mai::ErrorCode;
    switch (code) {
        case ErrorCode::parse:
            return MAI_ERR_PARSE;
        case ErrorCode::config:
            return MAI_ERR_CONFIG;
        case ErrorCode::io:
            return MAI_ERR_IO;
        case ErrorCode::dimension_mismatch:
            return MAI_ERR_DIMENSION;
        case ErrorCode::invalid_argument:
        case ErrorCode::empty_input:
        case ErrorCode::negative_weight:
        case ErrorCode::unknown_shape:
        case ErrorCode::unknown_ablation:
        case ErrorCode::unknown_class_id:
            return MAI_ERR_INVALID_ARGUMENT;
        default:
            return MAI_ERR_RUNTIME;
    }
}

template <typename Fn>
mai_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MAI_OK;
    } catch (const mai::Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MAI_ERR_RUNTIME;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mai_status require(bool ok, const char* message) {
    if (ok) return MAI_OK;
    g_last_error = message;
    return MAI_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct mai_complex {
    mai::chain::SimplicialComplex complex;
};

struct mai_diagram {
    mai::ph::PersistenceDiagram diagram;
};

extern "C" {

const char* mai_version(void) { return "0.1.0"; }

const char* mai_last_error(void) { return g_last_error.c_str(); }

void mai_string_free(char* s) { std::free(s); }

mai_status mai_complex_parse(const char* text, mai_complex** out) {
    if (auto st = require(text && out, "null argument"); st != MAI_OK) return st;
    return guarded([&] {
        auto* handle = new mai_complex{mai::chain::parse_complex(text)};
        *out = handle;
    });
}

int mai_complex_max_dim(const mai_complex* k) { return k ? k->complex.max_dim() : -1; }

mai_status mai_complex_betti(const mai_complex* k, int dim, int* out_betti) {
    if (auto st = require(k && out_betti, "null argument"); st != MAI_OK) return st;
    return guarded([&] { *out_betti = mai::chain::betti(k->complex, dim); });
}

void mai_complex_free(mai_complex* k) { delete k; }

mai_status mai_diagram_from_points(const double* coords, size_t num_points,
                                   size_t point_dim, double max_scale, int max_dim,
                                   mai_diagram** out) {
    if (auto st = require(coords && out && point_dim > 0, "null or empty input");
        st != MAI_OK)
        return st;
    return guarded([&] {
        std::vector<Eigen::VectorXd> points(num_points);
        for (size_t i = 0; i < num_points; ++i) {
            Eigen::VectorXd p(point_dim);
            for (size_t d = 0; d < point_dim; ++d) p[static_cast<int>(d)] = coords[i * point_dim + d];
            points[i] = std::move(p);
        }
        auto filtration = mai::ph::build_vr(points, max_dim, max_scale);
        *out = new mai_diagram{mai::ph::reduce(filtration)};
    });
}

size_t mai_diagram_num_bars(const mai_diagram* d) {
    return d ? d->diagram.bars().size() : 0;
}

size_t mai_diagram_num_bars_in_dim(const mai_diagram* d, int dim) {
    return d ? d->diagram.bars_in_dim(dim).size() : 0;
}

mai_status mai_diagram_to_csv(const mai_diagram* d, char** out_csv) {
    return mai_diagram_to_csv_ex(d, 0, out_csv);
}

mai_status mai_diagram_to_csv_ex(const mai_diagram* d, int with_representatives,
                                 char** out_csv) {
    if (auto st = require(d && out_csv, "null argument"); st != MAI_OK) return st;
    return guarded([&] {
        *out_csv = dup_string(mai::io::diagram_csv(d->diagram, with_representatives != 0));
    });
}

mai_status mai_diagram_bottleneck(const mai_diagram* a, const mai_diagram* b, int dim,
                                  double* out_distance) {
    if (auto st = require(a && b && out_distance, "null argument"); st != MAI_OK) return st;
    return guarded([&] { *out_distance = mai::ph::bottleneck(a->diagram, b->diagram, dim); });
}

void mai_diagram_free(mai_diagram* d) { delete d; }

mai_status mai_episode_generate(const char* spec_json, char** out_json) {
    if (auto st = require(spec_json && out_json, "null argument"); st != MAI_OK) return st;
    return guarded([&] {
        nlohmann::json spec;
        try {
            spec = nlohmann::json::parse(spec_json);
        } catch (const nlohmann::json::exception& e) {
            mai::fail(mai::ErrorCode::parse, std::string("bad episode spec: ") + e.what());
        }
        std::string task = spec.value("task", "t1");
        std::string shape = spec.value("shape", "circle");
        int steps = spec.value("steps", 65);
        double jitter = spec.value("jitter", 0.0);
        bool permute = spec.value("permute", false);
        std::uint64_t seed = spec.value("seed", 0ULL);

        std::vector<mai::tasks::Episode> episodes;
        auto sh = mai::tasks::shape_from_string(shape);
        if (task == "t1") {
            episodes.push_back(mai::tasks::gen_t1(sh, steps, jitter, permute, seed));
        } else if (task == "t2") {
            auto [a, b] = mai::tasks::gen_t2(sh, steps, seed);
            episodes.push_back(a);
            episodes.push_back(b);
        } else if (task == "t3") {
            auto [a, b] = mai::tasks::gen_t3(sh, steps, seed);
            episodes.push_back(a);
            episodes.push_back(b);
        } else {
            mai::fail(mai::ErrorCode::invalid_argument, "task must be t1, t2 or t3");
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& ep : episodes) {
            nlohmann::json entry = mai::io::episode_header(ep, task, seed);
            entry["csv"] = mai::io::episode_csv(ep);
            out.push_back(entry);
        }
        *out_json = dup_string(nlohmann::json{{"episodes", out}}.dump());
    });
}

mai_status mai_experiment_run(const char* config_json, char** out_verdicts_json) {
    if (auto st = require(config_json && out_verdicts_json, "null argument"); st != MAI_OK)
        return st;
    return guarded([&] {
        auto config = mai::cfg::parse_run_config_text(config_json);
        auto result = mai::runner::run_experiment(config);
        nlohmann::json out = {{"all_pass", result.all_pass},
                              {"verdicts", mai::io::verdicts_json(result.verdicts)},
                              {"summary", result.summary}};
        *out_verdicts_json = dup_string(out.dump());
    });
}

mai_status mai_ablation_run(const char* config_json, const char* ablation_id,
                            char** out_report_json) {
    if (auto st = require(config_json && ablation_id && out_report_json, "null argument");
        st != MAI_OK)
        return st;
    return guarded([&] {
        auto config = mai::cfg::parse_run_config_text(config_json);
        auto report = mai::runner::run_ablation_command(config, ablation_id);
        *out_report_json = dup_string(report.dump());
    });
}

}  // extern "C"
