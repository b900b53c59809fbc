// Command-line front end. All computation goes through the shared
// library's C API; this binary only handles files, flags and formatting.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mai/mai.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitHypothesisFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

int exit_code_for(mai_status status) {
    switch (status) {
        case MAI_OK:
            return kExitOk;
        case MAI_ERR_PARSE:
        case MAI_ERR_CONFIG:
        case MAI_ERR_INVALID_ARGUMENT:
        case MAI_ERR_DIMENSION:
            return kExitConfigError;
        default:
            return kExitRuntimeError;
    }
}

int report_failure(mai_status status, const std::string& what) {
    std::cerr << "error: " << what << ": " << mai_last_error() << "\n";
    return exit_code_for(status);
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) return false;
    out << content;
    return true;
}

struct OwnedString {
    char* ptr = nullptr;
    ~OwnedString() { mai_string_free(ptr); }
    std::string str() const { return ptr ? ptr : ""; }
};

int cmd_homology(const std::string& input) {
    auto text = read_file(input);
    if (!text) {
        std::cerr << "error: cannot open " << input << "\n";
        return kExitConfigError;
    }
    mai_complex* complex = nullptr;
    if (auto st = mai_complex_parse(text->c_str(), &complex); st != MAI_OK)
        return report_failure(st, input);
    std::ostringstream os;
    for (int dim = 0; dim <= mai_complex_max_dim(complex); ++dim) {
        int betti = 0;
        if (auto st = mai_complex_betti(complex, dim, &betti); st != MAI_OK) {
            mai_complex_free(complex);
            return report_failure(st, "betti");
        }
        if (dim > 0) os << ' ';
        os << "β" << dim << '=' << betti;
    }
    mai_complex_free(complex);
    std::cout << os.str() << "\n";
    return kExitOk;
}

int cmd_persistence(const std::string& input, double max_scale, int max_dim,
                    bool with_representatives, const std::string& out_path) {
    auto text = read_file(input);
    if (!text) {
        std::cerr << "error: cannot open " << input << "\n";
        return kExitConfigError;
    }
    // Minimal CSV scan; real validation happens inside the library.
    std::vector<double> coords;
    std::size_t num_points = 0, point_dim = 0;
    std::istringstream ss(*text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        auto head = line.find_first_not_of(" \t\r");
        if (head == std::string::npos || line[head] == '#') continue;
        std::istringstream ls(line);
        std::string cell;
        std::size_t dim = 0;
        while (std::getline(ls, cell, ',')) {
            try {
                coords.push_back(std::stod(cell));
            } catch (const std::exception&) {
                std::cerr << "error: line " << line_no << ": not a number: '" << cell << "'\n";
                return kExitConfigError;
            }
            ++dim;
        }
        if (dim == 0) continue;
        if (point_dim == 0) point_dim = dim;
        if (dim != point_dim) {
            std::cerr << "error: line " << line_no << ": inconsistent column count\n";
            return kExitConfigError;
        }
        ++num_points;
    }
    if (num_points == 0) {
        std::cerr << "error: " << input << ": no points\n";
        return kExitConfigError;
    }
    mai_diagram* diagram = nullptr;
    if (auto st = mai_diagram_from_points(coords.data(), num_points, point_dim, max_scale,
                                          max_dim, &diagram);
        st != MAI_OK)
        return report_failure(st, input);
    OwnedString csv;
    if (auto st = mai_diagram_to_csv_ex(diagram, with_representatives ? 1 : 0, &csv.ptr);
        st != MAI_OK) {
        mai_diagram_free(diagram);
        return report_failure(st, "diagram");
    }
    mai_diagram_free(diagram);
    if (out_path.empty()) {
        std::cout << csv.str();
    } else if (!write_file(out_path, csv.str())) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

int cmd_episode(const std::string& task, const std::string& shape, int steps, double jitter,
                bool permute, std::uint64_t seed, const std::string& out_dir) {
    nlohmann::json spec = {{"task", task},   {"shape", shape}, {"steps", steps},
                           {"jitter", jitter}, {"permute", permute}, {"seed", seed}};
    OwnedString out;
    if (auto st = mai_episode_generate(spec.dump().c_str(), &out.ptr); st != MAI_OK)
        return report_failure(st, "episode");
    auto parsed = nlohmann::json::parse(out.str());
    const auto& episodes = parsed.at("episodes");
    if (out_dir.empty()) {
        for (const auto& ep : episodes) {
            nlohmann::json header = ep;
            header.erase("csv");
            std::cout << header.dump() << "\n" << ep.at("csv").get<std::string>();
        }
        return kExitOk;
    }
    std::filesystem::create_directories(out_dir);
    int idx = 0;
    for (const auto& ep : episodes) {
        nlohmann::json header = ep;
        header.erase("csv");
        std::string stem =
            (std::filesystem::path(out_dir) / ("episode_" + std::to_string(idx))).string();
        if (!write_file(stem + ".json", header.dump(2) + "\n") ||
            !write_file(stem + ".csv", ep.at("csv").get<std::string>())) {
            std::cerr << "error: cannot write " << stem << "\n";
            return kExitRuntimeError;
        }
        ++idx;
    }
    return kExitOk;
}

// Apply command-line overrides onto the config document before handing it
// to the library.
std::optional<std::string> load_config(const std::string& path,
                                       const std::optional<std::uint64_t>& seed,
                                       const std::optional<double>& tau,
                                       const std::optional<std::string>& out_dir,
                                       const std::optional<std::string>& library,
                                       std::string* error) {
    auto text = read_file(path);
    if (!text) {
        *error = "cannot open " + path;
        return std::nullopt;
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        *error = std::string("config is not valid JSON: ") + e.what();
        return std::nullopt;
    }
    if (seed) j["seed"] = *seed;
    if (tau) j["engine"]["tau"] = *tau;
    if (out_dir) j["out_dir"] = *out_dir;
    if (library) j["library"] = *library;
    return j.dump();
}

void print_verdict_table(const nlohmann::json& verdicts) {
    std::cout << "\n  check   pass   statistic\n  -----   ----   ---------\n";
    for (const auto& v : verdicts) {
        std::ostringstream stat;
        stat << v.at("statistic").get<double>();
        std::cout << "  " << v.at("id").get<std::string>() << "\t  "
                  << (v.at("pass").get<bool>() ? "yes" : "NO") << "\t " << stat.str() << "\n";
    }
    std::cout << "\n";
}

int cmd_experiment(const std::string& config_text) {
    OwnedString out;
    if (auto st = mai_experiment_run(config_text.c_str(), &out.ptr); st != MAI_OK)
        return report_failure(st, "experiment");
    auto parsed = nlohmann::json::parse(out.str());
    print_verdict_table(parsed.at("verdicts"));
    bool all_pass = parsed.at("all_pass").get<bool>();
    std::cout << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
    return all_pass ? kExitOk : kExitHypothesisFailure;
}

int cmd_ablate(const std::string& config_text, const std::string& id) {
    OwnedString out;
    if (auto st = mai_ablation_run(config_text.c_str(), id.c_str(), &out.ptr); st != MAI_OK)
        return report_failure(st, "ablate");
    auto parsed = nlohmann::json::parse(out.str());
    std::cout << parsed.dump(2) << "\n";
    return parsed.at("pass").get<bool>() ? kExitOk : kExitHypothesisFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topological cycle memory: homology, persistence and amortized-inference experiments"};
    app.require_subcommand(1);

    // homology
    std::string homology_input;
    auto* homology = app.add_subcommand("homology", "Betti numbers of a complex file");
    homology->add_option("--input,input", homology_input, "complex in the chain text format")
        ->required();

    // persistence
    std::string persistence_input, persistence_out;
    double max_scale = 2.0;
    int max_dim = 2;
    bool with_representatives = false;
    auto* persistence =
        app.add_subcommand("persistence", "Vietoris-Rips diagram of a points CSV");
    persistence->add_option("--input,input", persistence_input, "numeric CSV, one point per row")
        ->required();
    persistence->add_option("--max-scale", max_scale, "filtration cutoff");
    persistence->add_option("--max-dim", max_dim, "top simplex dimension (<= 2)");
    persistence->add_flag("--representatives", with_representatives,
                          "append representative cycles in the chain text format");
    persistence->add_option("--out", persistence_out, "write the diagram CSV here");

    // episode
    std::string ep_task = "t1", ep_shape = "circle", ep_out;
    int ep_steps = 65;
    double ep_jitter = 0.0;
    bool ep_permute = false;
    std::uint64_t ep_seed = 0;
    auto* episode = app.add_subcommand("episode", "Generate task episodes");
    episode->add_option("--task", ep_task, "t1, t2 or t3");
    episode->add_option("--shape", ep_shape, "circle or figure8");
    episode->add_option("--steps", ep_steps, "steps per episode");
    episode->add_option("--jitter", ep_jitter, "observation noise scale");
    episode->add_flag("--permute", ep_permute, "apply a class-preserving permutation");
    episode->add_option("--seed", ep_seed, "generator seed")->required();
    episode->add_option("--out", ep_out, "write episode files into this directory");

    // shared experiment/ablate options
    std::string config_path, ablate_id;
    std::optional<std::uint64_t> seed_override;
    std::optional<double> tau_override;
    std::optional<std::string> out_override, library_override;
    std::uint64_t seed_raw = 0;
    double tau_raw = 0;
    std::string out_raw, lib_raw;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration JSON")->required();
        cmd->add_option("--seed", seed_raw, "override the run seed");
        cmd->add_option("--tau", tau_raw, "override the persistence threshold");
        cmd->add_option("--out", out_raw, "override the output directory");
        cmd->add_option("--library", lib_raw, "cycle library snapshot to load/save");
    };
    auto collect_overrides = [&](CLI::App* cmd) {
        if (cmd->count("--seed")) seed_override = seed_raw;
        if (cmd->count("--tau")) tau_override = tau_raw;
        if (cmd->count("--out")) out_override = out_raw;
        if (cmd->count("--library")) library_override = lib_raw;
    };

    auto* experiment = app.add_subcommand("experiment", "Run a configured experiment");
    add_common(experiment);

    auto* ablate = app.add_subcommand("ablate", "Run a paired baseline/ablation comparison");
    add_common(ablate);
    ablate->add_option("--id", ablate_id, "ablation id (A1..A5)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (homology->parsed()) return cmd_homology(homology_input);
        if (persistence->parsed())
            return cmd_persistence(persistence_input, max_scale, max_dim,
                                   with_representatives, persistence_out);
        if (episode->parsed())
            return cmd_episode(ep_task, ep_shape, ep_steps, ep_jitter, ep_permute, ep_seed,
                               ep_out);
        collect_overrides(experiment->parsed() ? experiment : ablate);
        std::string error;
        auto config = load_config(config_path, seed_override, tau_override, out_override,
                                  library_override, &error);
        if (!config) {
            std::cerr << "error: " << error << "\n";
            return kExitConfigError;
        }
        if (experiment->parsed()) return cmd_experiment(*config);
        if (ablate->parsed()) return cmd_ablate(*config, ablate_id);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitConfigError;
}
