#pragma once

// Service configuration from a plain key = value file (INI syntax, ';' comments,
// no sections). Unknown keys are rejected so typos do not pass silently.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "oacollab/error.hpp"
#include "oacollab/fitting.hpp"
#include "oacollab/robot_partner.hpp"
#include "oacollab/sim_human.hpp"
#include "oacollab/trial.hpp"
#include "oacollab/wire.hpp"

namespace oacollab::service {

struct Endpoint {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  ///< 0 picks a free port
};

struct ServiceConfig {
  SessionConfig session;
  std::string session_id;  ///< empty: derived from mode and seed
  Endpoint endpoint;
  InputMapping mapping;
  partner::RobotPartnerConfig robot;
  task::SimHumanParams human;
  std::optional<std::uint64_t> human_seed;  ///< empty: derived from the session seed
  fit::PersonLaws person;                   ///< model the robot imitates
  std::optional<std::filesystem::path> model_params;
  std::filesystem::path out_dir = "out";
  bool realtime = true;
  double broadcast_hz = 60.0;
  double stale_timeout = 0.25;  ///< s
  double stale_decay = 0.1;     ///< s
  double tlx_wait = 60.0;       ///< s a live session waits for a TLX form after its last trial

  std::string resolved_session_id() const {
    if (!session_id.empty()) return session_id;
    return std::string(to_string(session.mode)) + "-seed" + std::to_string(session.seed);
  }

  task::SimHumanParams resolved_human() const {
    task::SimHumanParams h = human;
    h.seed = human_seed ? *human_seed : session.seed * 1000003u + 7u;
    return h;
  }

  /// Robot wiring for the configured mode, or none for non-robot modes.
  std::optional<partner::RobotPartnerConfig> robot_config() const {
    const auto role = partner::role_for_mode(session.mode);
    if (!role) return std::nullopt;
    partner::RobotPartnerConfig r = robot;
    r.role = *role;
    return r;
  }

  void validate() const {
    session.validate();
    mapping.validate();
    robot.validate();
    human.validate();
    if (!(broadcast_hz > 0.0)) throw Error(ErrorCode::InvalidArgument, "broadcast_hz must be > 0");
    if (!(stale_timeout >= 0.0) || !(stale_decay >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "stale input timings must be >= 0");
    }
  }
};

/// Default robot model: the simulated human's own generating laws.
inline fit::PersonLaws default_person(const task::SimHumanParams& h) { return {h.tau, h.gain_laws, h.field_laws}; }

inline fit::PersonLaws load_person_laws(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open model parameters '" + path.string() + "'");
  try {
    return fit::person_laws_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("model parameters are not valid JSON: ") + e.what());
  }
}

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' expects a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream ss(v);
  T out{};
  ss >> out;
  if (ss.fail() || !(ss >> std::ws).eof()) {
    throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

}  // namespace detail

/// Parses configuration text. Relative paths resolve against `base_dir`.
inline ServiceConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }

  ServiceConfig c;
  for (const auto& [key, node] : tree) {
    if (!node.empty()) throw Error(ErrorCode::InvalidArgument, "config sections are not supported ('" + key + "')");
    const std::string v = node.data();
    auto num = [&] { return detail::parse_number<double>(key, v); };
    auto path = [&] {
      std::filesystem::path p(v);
      return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };

    if (key == "port") {
      const long p = detail::parse_number<long>(key, v);
      if (p < 0 || p > 65535) throw Error(ErrorCode::InvalidArgument, "port out of range");
      c.endpoint.port = static_cast<unsigned short>(p);
    } else if (key == "bind") {
      c.endpoint.address = v;
    } else if (key == "mode") {
      c.session.mode = parse_mode(v);
    } else if (key == "seed") {
      c.session.seed = detail::parse_number<std::uint64_t>(key, v);
    } else if (key == "session_id") {
      c.session_id = v;
    } else if (key == "trials") {
      c.session.trials_per_session = detail::parse_number<int>(key, v);
    } else if (key == "dwell_time") {
      c.session.dwell_time = num();
    } else if (key == "start_radius") {
      c.session.start_radius = num();
    } else if (key == "onset_speed") {
      c.session.onset_speed = num();
    } else if (key == "obstacle_enabled") {
      c.session.obstacle_enabled = detail::parse_bool(key, v);
    } else if (key == "obstacle_length") {
      c.session.obstacle_length = num();
    } else if (key == "width_small") {
      c.session.widths.small = num();
    } else if (key == "width_medium") {
      c.session.widths.medium = num();
    } else if (key == "width_large") {
      c.session.widths.large = num();
    } else if (key == "distance_near") {
      c.session.distances[0] = num();
    } else if (key == "distance_mid") {
      c.session.distances[1] = num();
    } else if (key == "distance_far") {
      c.session.distances[2] = num();
    } else if (key == "cursor_spring_k") {
      c.mapping.cursor_spring_k = num();
    } else if (key == "cursor_damping") {
      c.mapping.cursor_damping = num();
    } else if (key == "cursor_force_cap") {
      c.mapping.cursor_force_cap = num();
    } else if (key == "robot_kp") {
      c.robot.kp = num();
    } else if (key == "robot_kd") {
      c.robot.kd = num();
    } else if (key == "robot_force_cap") {
      c.robot.force_cap = num();
    } else if (key == "human_force_gain") {
      c.human.force_gain = num();
    } else if (key == "human_noise") {
      c.human.noise_sigma = num();
    } else if (key == "human_delay") {
      c.human.reaction_delay = num();
    } else if (key == "human_seed") {
      c.human_seed = detail::parse_number<std::uint64_t>(key, v);
    } else if (key == "model_params") {
      c.model_params = path();
    } else if (key == "out_dir") {
      c.out_dir = path();
    } else if (key == "realtime") {
      c.realtime = detail::parse_bool(key, v);
    } else if (key == "broadcast_hz") {
      c.broadcast_hz = num();
    } else if (key == "stale_timeout") {
      c.stale_timeout = num();
    } else if (key == "stale_decay") {
      c.stale_decay = num();
    } else if (key == "tlx_wait") {
      c.tlx_wait = num();
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "'");
    }
  }
  c.person = c.model_params ? load_person_laws(*c.model_params) : default_person(c.human);
  c.validate();
  return c;
}

inline ServiceConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + file.string() + "'");
  return parse_config(in, file.parent_path());
}

}  // namespace oacollab::service
