#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mai/engine.hpp"
#include "mai/eval.hpp"
#include "mai/memory.hpp"
#include "mai/persistence.hpp"
#include "mai/tasks.hpp"

namespace mai::io {

/// Fixed float formatting ("%.12g") so identical runs serialize byte for
/// byte on one platform.
std::string format_double(double value);

/// Diagram CSV: header then one `dim,birth,death,lifetime` row per bar,
/// with "inf" for unbounded deaths. Representatives are appended as a
/// final column in the chain text format on request.
std::string diagram_csv(const ph::PersistenceDiagram& d, bool with_representatives = false);

/// Numeric CSV, one point per row. Raises parse errors with the line
/// number; an empty file raises empty_input.
std::vector<Eigen::VectorXd> parse_points_csv(const std::string& text);

/// Episode serialization: a JSON header plus one CSV row per step.
nlohmann::json episode_header(const tasks::Episode& ep, const std::string& task,
                              std::uint64_t seed);
std::string episode_csv(const tasks::Episode& ep);

nlohmann::json report_json(const engine::EpisodeReport& rep);

/// Aggregate CSV over a run:
/// episode,phi_size,residual_median,R,admissions,falsifications,inner_steps,entropy_proxy
std::string aggregate_csv(const eval::ExperimentLog& log);

/// Newline-delimited JSON, one report per line.
std::string reports_ndjson(const eval::ExperimentLog& log);

nlohmann::json verdicts_json(const std::vector<eval::Verdict>& verdicts);

/// Library snapshots: records with landmark paths, lifetimes and tags,
/// plus the anchor landmarks, loadable across runs.
nlohmann::json library_to_json(const mem::CycleLibrary& lib);
mem::CycleLibrary library_from_json(const nlohmann::json& j, int landmark_cap,
                                    double landmark_gate);

std::string read_file(const std::string& path);       // ErrorCode::io
void write_file(const std::string& path, const std::string& content);
void ensure_directory(const std::string& path);

}  // namespace mai::io
