#pragma once

// Trial log on disk:
//
//   <name>.jsonl      line 1   {"schema_version":1,"kind":"trial_log",...}
//                     line 2.. {"kind":"trial",...}   one per trial
//                     last     {"kind":"end","records":N,"sidecar_rows":M}
//   <name>.paths.tsv  header "t x y vx vy fhx fhy frx fry", one row per tick
//
// Each record's path_ref reads "<sidecar file>#<first row>+<row count>".

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/metrics.hpp"
#include "oacollab/oa_model.hpp"
#include "oacollab/task_engine.hpp"

namespace oacollab::metrics {

inline constexpr int trial_log_schema_version = 1;
inline constexpr const char* sidecar_header = "t x y vx vy fhx fhy frx fry";

struct TrialLog {
  std::string session_id;
  Mode mode = Mode::individual;
  std::vector<TrialRecord> records;
  std::vector<task::CompletedTrial> trials;  ///< spec, outcome and path per record
};

namespace detail {

inline nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x, v.y}); }

inline Vec2 json_vec(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

inline std::optional<double> json_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline std::string sidecar_name(const std::filesystem::path& log_path) {
  std::string stem = log_path.filename().string();
  const std::string ext = ".jsonl";
  if (stem.size() > ext.size() && stem.compare(stem.size() - ext.size(), ext.size(), ext) == 0) {
    stem.resize(stem.size() - ext.size());
  }
  return stem + ".paths.tsv";
}

inline void write_row(std::ostream& os, const PathSample& s) {
  os << s.t << ' ' << s.position.x << ' ' << s.position.y << ' ' << s.velocity.x << ' ' << s.velocity.y << ' '
     << s.human_force.x << ' ' << s.human_force.y << ' ' << s.robot_force.x << ' ' << s.robot_force.y << '\n';
}

inline bool parse_double(std::string_view token, double& out) {
  // strtod round-trips 17 significant digits exactly.
  std::string tmp(token);
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end != tmp.c_str() && *end == '\0';
}

struct PathRef {
  std::string file;
  std::size_t first = 0;
  std::size_t count = 0;
};

inline PathRef parse_path_ref(const std::string& ref) {
  const auto hash = ref.rfind('#');
  const auto plus = ref.rfind('+');
  if (hash == std::string::npos || plus == std::string::npos || plus < hash) {
    throw Error(ErrorCode::IoError, "malformed path_ref '" + ref + "'");
  }
  PathRef p;
  p.file = ref.substr(0, hash);
  const std::string first = ref.substr(hash + 1, plus - hash - 1);
  const std::string count = ref.substr(plus + 1);
  auto r1 = std::from_chars(first.data(), first.data() + first.size(), p.first);
  auto r2 = std::from_chars(count.data(), count.data() + count.size(), p.count);
  if (r1.ec != std::errc{} || r2.ec != std::errc{}) throw Error(ErrorCode::IoError, "malformed path_ref '" + ref + "'");
  return p;
}

}  // namespace detail

inline nlohmann::json to_json(const TrialRecord& r) {
  using detail::vec_json;
  nlohmann::json j;
  j["kind"] = "trial";
  j["session_id"] = r.session_id;
  j["trial_id"] = r.trial_id;
  j["mode"] = std::string(to_string(r.mode));
  j["start"] = vec_json(r.spec.start);
  j["target_center"] = vec_json(r.spec.target_center);
  j["target_distance"] = r.spec.target_distance;
  j["target_width"] = r.spec.target_width;
  j["size"] = std::string(to_string(r.spec.size));
  j["obstacle"] = r.spec.obstacle ? nlohmann::json::array({vec_json(r.spec.obstacle->endpoint_a),
                                                           vec_json(r.spec.obstacle->endpoint_b)})
                                  : nlohmann::json(nullptr);
  j["id_bits"] = r.id_bits;
  j["success"] = r.success;
  j["collided"] = r.collided;
  j["movement_time"] = opt_json(r.movement_time);
  j["onset_time"] = opt_json(r.onset_time);
  j["target_shown_time"] = r.target_shown_time;
  j["target_removed_time"] = r.target_removed_time;
  j["path_ref"] = r.path_ref;
  return j;
}

inline TrialRecord record_from_json(const nlohmann::json& j) {
  using detail::json_vec;
  TrialRecord r;
  r.session_id = j.at("session_id").get<std::string>();
  r.trial_id = j.at("trial_id").get<int>();
  r.mode = parse_mode(j.at("mode").get<std::string>());
  r.spec.trial_id = r.trial_id;
  r.spec.start = json_vec(j.at("start"));
  r.spec.target_center = json_vec(j.at("target_center"));
  r.spec.target_distance = j.at("target_distance").get<double>();
  r.spec.target_width = j.at("target_width").get<double>();
  r.spec.size = parse_size_class(j.at("size").get<std::string>());
  if (!j.at("obstacle").is_null()) {
    r.spec.obstacle = Obstacle{json_vec(j.at("obstacle").at(0)), json_vec(j.at("obstacle").at(1))};
  }
  r.id_bits = j.at("id_bits").get<double>();
  r.spec.id_bits = r.id_bits;
  r.success = j.at("success").get<bool>();
  r.collided = j.at("collided").get<bool>();
  r.movement_time = detail::json_opt(j, "movement_time");
  r.onset_time = detail::json_opt(j, "onset_time");
  r.target_shown_time = j.at("target_shown_time").get<double>();
  r.target_removed_time = j.at("target_removed_time").get<double>();
  r.path_ref = j.at("path_ref").get<std::string>();
  return r;
}

/// Writes the records file and its trajectory sidecar next to it.
inline std::vector<TrialRecord> write_trial_log(const std::filesystem::path& path, const std::string& session_id,
                                                Mode mode, const std::vector<task::CompletedTrial>& trials) {
  const std::string sidecar = detail::sidecar_name(path);
  const std::filesystem::path sidecar_path = path.parent_path() / sidecar;

  std::ofstream rows(sidecar_path, std::ios::trunc);
  std::ofstream log(path, std::ios::trunc);
  if (!rows || !log) throw Error(ErrorCode::IoError, "cannot open trial log '" + path.string() + "' for writing");
  rows << std::setprecision(17) << sidecar_header << '\n';

  nlohmann::json header{{"schema_version", trial_log_schema_version},
                        {"kind", "trial_log"},
                        {"session_id", session_id},
                        {"mode", std::string(to_string(mode))},
                        {"sidecar", sidecar},
                        {"columns", sidecar_header}};
  log << header.dump() << '\n';

  std::vector<TrialRecord> records;
  std::size_t row = 0;
  for (const auto& c : trials) {
    const std::string ref = sidecar + "#" + std::to_string(row) + "+" + std::to_string(c.outcome.path.size());
    for (const auto& s : c.outcome.path) detail::write_row(rows, s);
    row += c.outcome.path.size();
    records.push_back(make_record(session_id, mode, c, ref));
    log << to_json(records.back()).dump() << '\n';
  }
  log << nlohmann::json{{"kind", "end"}, {"records", records.size()}, {"sidecar_rows", row}}.dump() << '\n';
  rows.flush();
  log.flush();
  if (!rows || !log) throw Error(ErrorCode::IoError, "failed writing trial log '" + path.string() + "'");
  return records;
}

/// Reads a trial log and its sidecar. Rejects unknown schema versions and truncated files.
inline TrialLog read_trial_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trial log '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "trial log is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::SchemaVersionMismatch, "trial log header is not valid JSON");
  }
  if (!header.is_object() || !header.contains("schema_version") || !header["schema_version"].is_number_integer() ||
      header["schema_version"].get<int>() != trial_log_schema_version) {
    throw Error(ErrorCode::SchemaVersionMismatch, "unsupported trial log schema version");
  }

  TrialLog out;
  std::string sidecar;
  try {
    out.session_id = header.at("session_id").get<std::string>();
    out.mode = parse_mode(header.at("mode").get<std::string>());
    sidecar = header.at("sidecar").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed trial log header: ") + e.what());
  }

  bool ended = false;
  std::size_t expected_rows = 0;
  while (std::getline(in, line)) {
    if (ended) throw Error(ErrorCode::IoError, "content after the end marker");
    if (in.eof()) throw Error(ErrorCode::IoError, "trial log truncated mid-line");
    try {
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "trial") {
        out.records.push_back(record_from_json(j));
      } else if (kind == "end") {
        if (j.at("records").get<std::size_t>() != out.records.size()) {
          throw Error(ErrorCode::IoError, "record count does not match the end marker");
        }
        expected_rows = j.at("sidecar_rows").get<std::size_t>();
        ended = true;
      } else {
        throw Error(ErrorCode::IoError, "unknown line kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::IoError, std::string("malformed trial log line: ") + e.what());
    }
  }
  if (!ended) throw Error(ErrorCode::IoError, "trial log is truncated (no end marker)");

  std::ifstream rows_in(path.parent_path() / sidecar);
  if (!rows_in) throw Error(ErrorCode::IoError, "cannot open trajectory sidecar '" + sidecar + "'");
  if (!std::getline(rows_in, line) || line != sidecar_header) {
    throw Error(ErrorCode::IoError, "trajectory sidecar header mismatch");
  }
  std::vector<PathSample> rows;
  rows.reserve(expected_rows);
  while (std::getline(rows_in, line)) {
    if (rows_in.eof()) throw Error(ErrorCode::IoError, "trajectory sidecar truncated mid-line");
    std::array<double, 9> v{};
    std::istringstream ss(line);
    std::string tok;
    std::size_t n = 0;
    while (ss >> tok) {
      if (n >= 9 || !detail::parse_double(tok, v[n])) throw Error(ErrorCode::IoError, "malformed sidecar row");
      ++n;
    }
    if (n != 9) throw Error(ErrorCode::IoError, "malformed sidecar row");
    rows.push_back(PathSample{v[0], {v[1], v[2]}, {v[3], v[4]}, {v[5], v[6]}, {v[7], v[8]}});
  }
  if (rows.size() != expected_rows) throw Error(ErrorCode::IoError, "trajectory sidecar row count mismatch");

  for (const auto& r : out.records) {
    const auto ref = detail::parse_path_ref(r.path_ref);
    if (ref.file != sidecar || ref.first + ref.count > rows.size()) {
      throw Error(ErrorCode::IoError, "path_ref out of range: " + r.path_ref);
    }
    task::CompletedTrial c;
    c.trial = r.spec;
    c.outcome.success = r.success;
    c.outcome.collided = r.collided;
    c.outcome.movement_time = r.movement_time;
    c.outcome.onset_time = r.onset_time;
    c.outcome.target_shown_time = r.target_shown_time;
    c.outcome.target_removed_time = r.target_removed_time;
    c.outcome.path.assign(rows.begin() + static_cast<std::ptrdiff_t>(ref.first),
                          rows.begin() + static_cast<std::ptrdiff_t>(ref.first + ref.count));
    out.trials.push_back(std::move(c));
  }
  return out;
}

/// Writes a planned trajectory in the sidecar column layout (force columns zero).
inline void write_plan(const std::filesystem::path& path, const model::PlannedTrajectory& plan) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  os << std::setprecision(17) << sidecar_header << '\n';
  for (std::size_t k = 0; k < plan.samples.size(); ++k) {
    detail::write_row(os, PathSample{static_cast<double>(k) * plan.dt, plan.samples[k].position,
                                     plan.samples[k].velocity, {}, {}});
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline void write_summary(const std::filesystem::path& path, const SessionSummary& summary) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  os << to_json(summary).dump(2) << '\n';
  if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

/// Fitting input from a log: every logged trial as a recording window.
inline std::vector<fit::RecordedTrial> recordings_from_log(const TrialLog& log) {
  std::vector<fit::RecordedTrial> out;
  for (const auto& c : log.trials) out.push_back(fit::recorded_trial_from_outcome(c.trial, c.outcome));
  return out;
}

}  // namespace oacollab::metrics
