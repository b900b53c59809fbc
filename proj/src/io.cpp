#include "mai/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mai::io {

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

std::string diagram_csv(const ph::PersistenceDiagram& d, bool with_representatives) {
    std::ostringstream os;
    os << "dim,birth,death,lifetime";
    if (with_representatives) os << ",representative";
    os << '\n';
    for (const auto& bar : d.bars()) {
        os << bar.dim << ',' << format_double(bar.birth) << ',';
        if (bar.infinite())
            os << "inf,inf";
        else
            os << format_double(bar.death) << ',' << format_double(bar.lifetime());
        if (with_representatives) os << ',' << chain::format_chain(bar.representative);
        os << '\n';
    }
    return os.str();
}

std::vector<Eigen::VectorXd> parse_points_csv(const std::string& text) {
    std::vector<Eigen::VectorXd> points;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    long expected = -1;
    while (std::getline(ss, line)) {
        ++line_no;
        auto head = line.find_first_not_of(" \t\r");
        if (head == std::string::npos || line[head] == '#') continue;
        std::vector<double> vals;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() &&
                       (cell[used] == ' ' || cell[used] == '\t' || cell[used] == '\r'))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument(cell);
                vals.push_back(v);
            } catch (const std::exception&) {
                fail(ErrorCode::parse,
                     "line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
            }
        }
        if (vals.empty()) continue;
        if (expected < 0) expected = static_cast<long>(vals.size());
        if (static_cast<long>(vals.size()) != expected)
            fail(ErrorCode::dimension_mismatch,
                 "line " + std::to_string(line_no) + ": expected " + std::to_string(expected) +
                     " columns");
        Eigen::VectorXd p(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) p[i] = vals[i];
        points.push_back(std::move(p));
    }
    if (points.empty()) fail(ErrorCode::empty_input, "no points in CSV");
    return points;
}

nlohmann::json episode_header(const tasks::Episode& ep, const std::string& task,
                              std::uint64_t seed) {
    return {{"task", task},
            {"shape", ep.loop_class},
            {"steps", ep.steps()},
            {"obs_dim", ep.obs_dim()},
            {"jitter", ep.jitter},
            {"seed", seed},
            {"modality", tasks::to_string(ep.modality)}};
}

std::string episode_csv(const tasks::Episode& ep) {
    std::ostringstream os;
    os << "t";
    for (int d = 0; d < ep.obs_dim(); ++d) os << ",x" << d;
    os << '\n';
    for (int t = 0; t < ep.steps(); ++t) {
        os << t;
        for (int d = 0; d < ep.obs_dim(); ++d)
            os << ',' << format_double(ep.observations[t][d]);
        os << '\n';
    }
    return os.str();
}

nlohmann::json report_json(const engine::EpisodeReport& rep) {
    nlohmann::json retrieval = nlohmann::json::array();
    for (const auto& [id, cost] : rep.retrieval)
        retrieval.push_back({{"class_id", id}, {"cost", cost}});
    return {{"episode", rep.episode},
            {"loop_class", rep.loop_class},
            {"modality", rep.modality},
            {"residual_series", rep.residual_series},
            {"residual_median", rep.residual_median},
            {"boundary_norm", rep.boundary_norm},
            {"admitted", rep.admitted},
            {"falsified", rep.falsified},
            {"matched", rep.matched},
            {"retrieval", retrieval},
            {"inner_steps_used", rep.inner_steps_used},
            {"phi_size_after", rep.phi_size_after},
            {"entropy_proxy", rep.entropy_proxy},
            {"window_coherence", rep.window_coherence}};
}

std::string aggregate_csv(const eval::ExperimentLog& log) {
    std::ostringstream os;
    os << "episode,phi_size,residual_median,R,admissions,falsifications,inner_steps,"
          "entropy_proxy\n";
    for (const auto& rep : log.reports) {
        os << rep.episode << ',' << rep.phi_size_after << ','
           << format_double(rep.residual_median) << ',' << format_double(rep.boundary_norm)
           << ',' << rep.admitted.size() << ',' << rep.falsified.size() << ','
           << rep.inner_steps_used << ',' << format_double(rep.entropy_proxy) << '\n';
    }
    return os.str();
}

std::string reports_ndjson(const eval::ExperimentLog& log) {
    std::ostringstream os;
    for (const auto& rep : log.reports) os << report_json(rep).dump() << '\n';
    return os.str();
}

nlohmann::json verdicts_json(const std::vector<eval::Verdict>& verdicts) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : verdicts)
        arr.push_back({{"id", v.id},
                       {"pass", v.pass},
                       {"statistic", v.statistic},
                       {"detail", v.detail}});
    return arr;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

}  // namespace

nlohmann::json library_to_json(const mem::CycleLibrary& lib) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : lib.records()) {
        nlohmann::json path = nlohmann::json::array();
        for (const auto& p : rec.path) path.push_back(vector_to_json(p));
        // JSON cannot carry infinities; unbounded lifetimes serialize as "inf".
        nlohmann::json lifetime =
            std::isinf(rec.lifetime) ? nlohmann::json("inf") : nlohmann::json(rec.lifetime);
        records.push_back({{"class_id", rec.class_id},
                           {"path", path},
                           {"lifetime", lifetime},
                           {"dim", rec.dim},
                           {"modality_tags", rec.modality_tags},
                           {"hit_count", rec.hit_count},
                           {"created_episode", rec.created_episode}});
    }
    nlohmann::json landmarks = nlohmann::json::array();
    for (const auto& l : lib.landmarks()) landmarks.push_back(vector_to_json(l));
    return {{"schema_version", 1},
            {"next_class_id", lib.next_class_id()},
            {"landmarks", landmarks},
            {"records", records}};
}

mem::CycleLibrary library_from_json(const nlohmann::json& j, int landmark_cap,
                                    double landmark_gate) {
    if (!j.is_object() || !j.contains("records"))
        fail(ErrorCode::parse, "not a library snapshot");
    mem::CycleLibrary lib(landmark_cap, landmark_gate);
    if (j.contains("landmarks")) {
        std::vector<Eigen::VectorXd> landmarks;
        for (const auto& l : j.at("landmarks")) landmarks.push_back(vector_from_json(l));
        lib.observe_states(landmarks);
    }
    for (const auto& r : j.at("records")) {
        mem::CycleRecord rec;
        rec.class_id = r.at("class_id").get<int>();
        for (const auto& p : r.at("path")) rec.path.push_back(vector_from_json(p));
        rec.lifetime = r.at("lifetime").is_string() ? ph::kInf : r.at("lifetime").get<double>();
        rec.dim = r.value("dim", 1);
        if (r.contains("modality_tags"))
            for (const auto& tag : r.at("modality_tags"))
                rec.modality_tags.insert(tag.get<std::string>());
        rec.hit_count = r.value("hit_count", 0);
        rec.created_episode = r.value("created_episode", 0);
        lib.insert(std::move(rec));
    }
    if (j.contains("next_class_id")) lib.set_next_class_id(j.at("next_class_id").get<int>());
    return lib;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path);
    out << content;
}

void ensure_directory(const std::string& path) {
    if (path.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) fail(ErrorCode::io, "cannot create directory " + path);
}

}  // namespace mai::io
