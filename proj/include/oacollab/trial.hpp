#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/fitts.hpp"
#include "oacollab/geometry.hpp"

namespace oacollab {

enum class SizeClass { small, medium, large };

enum class Mode { individual, robot_follower, robot_equal, robot_leader, human_pair_replay };

constexpr std::string_view to_string(SizeClass s) {
  switch (s) {
    case SizeClass::small: return "small";
    case SizeClass::medium: return "medium";
    case SizeClass::large: return "large";
  }
  return "?";
}

constexpr std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::individual: return "individual";
    case Mode::robot_follower: return "robot_follower";
    case Mode::robot_equal: return "robot_equal";
    case Mode::robot_leader: return "robot_leader";
    case Mode::human_pair_replay: return "human_pair_replay";
  }
  return "?";
}

inline SizeClass parse_size_class(std::string_view s) {
  if (s == "small") return SizeClass::small;
  if (s == "medium") return SizeClass::medium;
  if (s == "large") return SizeClass::large;
  throw Error(ErrorCode::InvalidArgument, "unknown size class '" + std::string(s) + "'");
}

inline Mode parse_mode(std::string_view s) {
  for (Mode m : {Mode::individual, Mode::robot_follower, Mode::robot_equal, Mode::robot_leader,
                 Mode::human_pair_replay}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(s) + "'");
}

constexpr bool is_robot_mode(Mode m) {
  return m == Mode::robot_follower || m == Mode::robot_equal || m == Mode::robot_leader;
}

/// Target diameters per size class, m.
struct TargetWidths {
  double small = 0.01;
  double medium = 0.02;
  double large = 0.03;

  double operator[](SizeClass s) const {
    switch (s) {
      case SizeClass::small: return small;
      case SizeClass::medium: return medium;
      case SizeClass::large: return large;
    }
    return medium;
  }
};

/// Geometry of one reaching trial.
struct TrialSpec {
  int trial_id = 0;
  Vec2 start;
  Vec2 target_center;
  double target_distance = 0.0;  ///< m, center to center
  double target_width = 0.0;     ///< m, diameter
  SizeClass size = SizeClass::medium;
  std::optional<Obstacle> obstacle;
  double id_bits = 0.0;

  /// Distance from the start to the obstacle midpoint (the `o` of the field laws).
  std::optional<double> obstacle_distance() const {
    if (!obstacle) return std::nullopt;
    return norm(obstacle->midpoint() - start);
  }

  bool inside_target(const Vec2& x) const { return norm(x - target_center) <= 0.5 * target_width; }

  friend bool operator==(const TrialSpec&, const TrialSpec&) = default;
};

/// Builds a trial along `direction` with an optional midway obstacle perpendicular to the path.
inline TrialSpec make_trial(int trial_id, Vec2 start, Vec2 direction, double distance, SizeClass size,
                            double width, bool with_obstacle, double obstacle_length = 0.04) {
  const double dn = norm(direction);
  if (!(dn > 0.0)) throw Error(ErrorCode::InvalidArgument, "target direction must be non-zero");
  if (!(distance > 0.0)) throw Error(ErrorCode::InvalidArgument, "target distance must be > 0");
  const Vec2 u = direction / dn;

  TrialSpec t;
  t.trial_id = trial_id;
  t.start = start;
  t.target_center = start + u * distance;
  t.target_distance = distance;
  t.target_width = width;
  t.size = size;
  t.id_bits = metrics::index_of_difficulty(distance, width);
  if (with_obstacle) {
    const Vec2 mid = start + u * (0.5 * distance);
    const Vec2 half = perp(u) * (0.5 * obstacle_length);
    t.obstacle = Obstacle{mid - half, mid + half};
  }
  return t;
}

/// One logged tick of a trial: plant state plus the human and robot force terms.
struct PathSample {
  double t = 0.0;
  Vec2 position;
  Vec2 velocity;
  Vec2 human_force;
  Vec2 robot_force;

  friend bool operator==(const PathSample&, const PathSample&) = default;
};

struct TrialOutcome {
  bool success = false;
  bool collided = false;
  std::optional<double> movement_time;  ///< s, present iff success
  std::optional<double> onset_time;     ///< s, first tick above the onset speed
  double target_shown_time = 0.0;       ///< s
  double target_removed_time = 0.0;     ///< s, success or collision
  std::vector<PathSample> path;

  friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct SessionConfig {
  Mode mode = Mode::individual;
  int trials_per_session = 45;
  double dwell_time = 0.5;      ///< s continuously inside the target
  double start_radius = 0.005;  ///< m
  std::uint64_t seed = 1;
  bool obstacle_enabled = true;
  TargetWidths widths;
  std::array<double, 3> distances{0.05, 0.15, 0.25};
  Vec2 start{0.0, 0.0};
  Vec2 direction{1.0, 0.0};
  double obstacle_length = 0.04;
  double onset_speed = 0.02;  ///< m/s threshold marking movement onset

  void validate() const {
    if (trials_per_session <= 0 || trials_per_session % 9 != 0) {
      throw Error(ErrorCode::UnbalancedConfig, "trials_per_session must be a positive multiple of 9");
    }
    if (!(dwell_time >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dwell_time must be >= 0");
    if (!(start_radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "start_radius must be > 0");
    for (SizeClass s : {SizeClass::small, SizeClass::medium, SizeClass::large}) {
      if (!(widths[s] > 0.0)) throw Error(ErrorCode::NonPositiveWidth, "target widths must be > 0");
    }
    for (double d : distances) {
      if (!(d > 0.0)) throw Error(ErrorCode::InvalidArgument, "target distances must be > 0");
    }
    if (!(norm(direction) > 0.0)) throw Error(ErrorCode::InvalidArgument, "direction must be non-zero");
    if (!(obstacle_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "obstacle_length must be > 0");
  }
};

/// The nine distance × size conditions in canonical order (distance-major).
inline std::vector<TrialSpec> condition_set(const SessionConfig& cfg, bool with_obstacle) {
  std::vector<TrialSpec> out;
  int id = 0;
  for (double d : cfg.distances) {
    for (SizeClass s : {SizeClass::small, SizeClass::medium, SizeClass::large}) {
      out.push_back(make_trial(id++, cfg.start, cfg.direction, d, s, cfg.widths[s], with_obstacle,
                               cfg.obstacle_length));
    }
  }
  return out;
}

/// Balanced, seeded-shuffled trial list: each condition appears trials_per_session / 9 times.
inline std::vector<TrialSpec> generate_session(const SessionConfig& cfg) {
  cfg.validate();
  const auto conditions = condition_set(cfg, cfg.obstacle_enabled);
  const int reps = cfg.trials_per_session / 9;

  std::vector<TrialSpec> trials;
  trials.reserve(static_cast<std::size_t>(cfg.trials_per_session));
  for (int r = 0; r < reps; ++r) trials.insert(trials.end(), conditions.begin(), conditions.end());

  std::mt19937_64 rng(cfg.seed);
  std::shuffle(trials.begin(), trials.end(), rng);
  for (std::size_t i = 0; i < trials.size(); ++i) trials[i].trial_id = static_cast<int>(i);
  return trials;
}

/// Order of the four evaluation sets: individual first, the robot roles permuted by seed.
inline std::array<Mode, 4> evaluation_set_order(std::uint64_t seed) {
  std::array<Mode, 3> robot{Mode::robot_follower, Mode::robot_equal, Mode::robot_leader};
  std::mt19937_64 rng(seed);
  std::shuffle(robot.begin(), robot.end(), rng);
  return {Mode::individual, robot[0], robot[1], robot[2]};
}

}  // namespace oacollab
