#pragma once

// Obstacle Avoidance Model: a linear dynamic movement primitive pulled toward the
// goal, plus a velocity-dependent repulsive field around the line obstacle.
//
//   tau * dv/dt = K (g - x) - D v + phi(x, v)
//   tau * dx/dt = v
//
// K and D follow the target's index of difficulty, the field strength lambda and
// exponent beta follow the start-to-obstacle distance o.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/geometry.hpp"
#include "oacollab/plant.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::model {

struct DmpParams {
  double spring_k = 25.0;   ///< K, 1/s²
  double damping_d = 10.0;  ///< D, 1/s
  double tau = 1.0;         ///< s

  void validate() const {
    if (!(spring_k > 0.0)) throw Error(ErrorCode::NonPositiveStiffness, "DMP spring constant must be > 0");
    if (!(damping_d >= 0.0)) throw Error(ErrorCode::NegativeDamping, "DMP damping must be >= 0");
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "DMP tau must be > 0");
  }
};

/// K = k1·ID + k2, D = k3·ID.
struct GainLawCoeffs {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  /// Both laws are affine in ID, so checking the interval ends covers the range.
  void check_range(double id_min, double id_max) const {
    for (double id : {id_min, id_max}) {
      if (!(k1 * id + k2 > 0.0)) throw Error(ErrorCode::NonPositiveStiffness, "K(ID) <= 0 inside the ID range");
      if (!(k3 * id >= 0.0)) throw Error(ErrorCode::NegativeDamping, "D(ID) < 0 inside the ID range");
    }
  }

  friend bool operator==(const GainLawCoeffs&, const GainLawCoeffs&) = default;
};

struct FieldParams {
  double lambda = 0.0;  ///< field strength
  double beta = 2.0;    ///< exponent, > 1

  void validate() const {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "field lambda must be >= 0");
    if (!(beta > 1.0)) throw Error(ErrorCode::BetaOutOfRange, "field beta must be > 1");
  }
};

/// lambda = l1/o + l2, beta = b3·o² + b4·o + b5.
struct FieldLawCoeffs {
  double l1 = 0.0;
  double l2 = 0.0;
  double b3 = 0.0;
  double b4 = 0.0;
  double b5 = 2.0;

  void check_range(double o_min, double o_max) const {
    if (!(o_min > 0.0) || o_max < o_min) throw Error(ErrorCode::ZeroObstacleDistance, "obstacle range must be positive");
    // lambda is monotone in o; beta may have its vertex inside the range.
    std::vector<double> probes{o_min, o_max};
    if (b3 != 0.0) {
      const double vertex = -b4 / (2.0 * b3);
      if (vertex > o_min && vertex < o_max) probes.push_back(vertex);
    }
    for (double o : probes) {
      if (!(l1 / o + l2 >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda(o) < 0 inside the obstacle range");
      if (!(b3 * o * o + b4 * o + b5 > 1.0)) throw Error(ErrorCode::BetaOutOfRange, "beta(o) <= 1 inside the obstacle range");
    }
  }

  friend bool operator==(const FieldLawCoeffs&, const FieldLawCoeffs&) = default;
};

inline double stiffness_from_id(double id, const GainLawCoeffs& c) {
  if (!(id >= 0.0)) throw Error(ErrorCode::InvalidArgument, "index of difficulty must be >= 0");
  const double k = c.k1 * id + c.k2;
  if (!(k > 0.0)) throw Error(ErrorCode::NonPositiveStiffness, "K(ID) must be > 0");
  return k;
}

inline double damping_from_id(double id, const GainLawCoeffs& c) {
  if (!(id >= 0.0)) throw Error(ErrorCode::InvalidArgument, "index of difficulty must be >= 0");
  const double d = c.k3 * id;
  if (!(d >= 0.0)) throw Error(ErrorCode::NegativeDamping, "D(ID) must be >= 0");
  return d;
}

inline double lambda_from_obstacle(double o, const FieldLawCoeffs& c) {
  if (!(o > 0.0)) throw Error(ErrorCode::ZeroObstacleDistance, "obstacle distance must be > 0");
  return c.l1 / o + c.l2;
}

inline double beta_from_obstacle(double o, const FieldLawCoeffs& c) {
  if (!(o > 0.0)) throw Error(ErrorCode::ZeroObstacleDistance, "obstacle distance must be > 0");
  const double b = c.b3 * o * o + c.b4 * o + c.b5;
  if (!(b > 1.0)) throw Error(ErrorCode::BetaOutOfRange, "beta(o) must be > 1");
  return b;
}

/// Goal attraction dv/dt = (K (g - x) - D v) / tau. `state.velocity` holds the DMP velocity v.
inline Vec2 dmp_accel(const BodyState& state, const Vec2& goal, const DmpParams& p) {
  return (p.spring_k * (goal - state.position) - p.damping_d * state.velocity) / p.tau;
}

struct FieldSettings {
  double cutoff = 0.1;      ///< m; the field vanishes at and beyond this distance
  double accel_cap = 50.0;  ///< m/s²
};

/// Repulsive term phi(x, v), the negative gradient of U = lambda (-cos θ)^beta ‖v‖ / p.
///
/// cos θ = v·∇p / ‖v‖ with ∇p = (x - c)/p, so the field only acts while the point
/// approaches the obstacle (cos θ < 0). The gradient of cos θ is taken with the
/// closest point c held fixed. Throws CollisionState when p = 0.
inline Vec2 field_accel(const BodyState& state, const Obstacle& obstacle, const FieldParams& field,
                        const FieldSettings& settings = {}) {
  const auto [p, closest] = segment_distance(state.position, obstacle);
  if (!(p > 0.0)) throw Error(ErrorCode::CollisionState, "point lies on the obstacle");

  const Vec2& v = state.velocity;
  const double speed = norm(v);
  if (speed == 0.0 || p >= settings.cutoff) return {};

  const Vec2 rel = state.position - closest;
  const Vec2 grad_p = rel / p;
  const double cos_theta = dot(v, grad_p) / speed;
  if (cos_theta >= 0.0) return {};

  const Vec2 grad_cos = v / (speed * p) - cos_theta * rel / (p * p);
  const double scale = field.lambda * std::pow(-cos_theta, field.beta - 1.0) * speed / p;
  const Vec2 phi = scale * (field.beta * grad_cos - (cos_theta / p) * grad_p);
  return clamp_norm(phi, settings.accel_cap);
}

struct PlanSample {
  Vec2 position;  ///< m
  Vec2 velocity;  ///< m/s (physical, dx/dt)

  friend bool operator==(const PlanSample&, const PlanSample&) = default;
};

/// Time-indexed reference, sampled every `dt` from t = 0.
struct PlannedTrajectory {
  double dt = 0.001;
  double horizon = 0.0;
  std::vector<PlanSample> samples;

  /// Sample at time t; clamps to the first sample before 0 and holds the last one after the horizon.
  const PlanSample& at(double t) const {
    if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty plan");
    if (!(t > 0.0)) return samples.front();
    const double idx = std::floor(t / dt + 0.5);
    if (idx >= static_cast<double>(samples.size() - 1)) return samples.back();
    return samples[static_cast<std::size_t>(idx)];
  }

  friend bool operator==(const PlannedTrajectory&, const PlannedTrajectory&) = default;
};

struct PlanOptions {
  double tau = 1.0;      ///< s
  double horizon = 5.0;  ///< s
  double dt = 0.001;     ///< s, sample spacing and integration step
  FieldSettings field;
  /// Side of the start→goal line the detour prefers: +1 left, -1 right.
  int side = 1;
  /// A head-on approach to an obstacle centred on the path is a symmetric equilibrium of the
  /// field; a lateral push of this fraction of |phi| toward `side` selects the detour direction.
  double symmetry_seed = 1e-3;
};

namespace detail {

struct FieldTerm {
  const Obstacle* obstacle = nullptr;
  FieldParams params;
  FieldSettings settings;
  Vec2 side_dir;
  double seed = 0.0;
  bool* contact = nullptr;

  Vec2 operator()(const Vec2& x, const Vec2& v) const {
    if (obstacle == nullptr) return {};
    Vec2 phi;
    try {
      phi = field_accel(BodyState{x, v, 0.0}, *obstacle, params, settings);
    } catch (const Error&) {
      if (contact) *contact = true;
      return {};
    }
    if (seed != 0.0 && (phi.x != 0.0 || phi.y != 0.0)) phi += (seed * norm(phi)) * side_dir;
    return phi;
  }
};

}  // namespace detail

/// Fixed-step RK4 integration of the obstacle-avoiding DMP, calling
/// `on_sample(k, position, physical_velocity)` for k = 0 .. n_samples-1.
/// Returns true if any step's swept motion touched the obstacle.
template <class OnSample>
bool integrate_oa(const Vec2& start, const Vec2& goal, const DmpParams& dmp, const Obstacle* obstacle,
                  const FieldParams& field, const PlanOptions& opt, std::size_t n_samples, OnSample&& on_sample) {
  bool contact = false;
  detail::FieldTerm phi;
  if (obstacle != nullptr && field.lambda != 0.0) {
    phi.obstacle = obstacle;
    phi.params = field;
    phi.settings = opt.field;
    const Vec2 along = goal - start;
    const double len = norm(along);
    phi.side_dir = len > 0.0 ? perp(along / len) * static_cast<double>(opt.side >= 0 ? 1 : -1) : Vec2{};
    phi.seed = opt.symmetry_seed;
    phi.contact = &contact;
  }

  const double k = dmp.spring_k;
  const double d = dmp.damping_d;
  const double inv_tau = 1.0 / dmp.tau;
  const double h = opt.dt;
  auto vdot = [&](const Vec2& x, const Vec2& v) { return (k * (goal - x) - d * v + phi(x, v)) * inv_tau; };

  Vec2 x = start;
  Vec2 v{};
  if (n_samples == 0) return false;
  on_sample(std::size_t{0}, x, v * inv_tau);
  for (std::size_t i = 1; i < n_samples; ++i) {
    const Vec2 kx1 = v * inv_tau;
    const Vec2 kv1 = vdot(x, v);
    const Vec2 x2 = x + (0.5 * h) * kx1, v2 = v + (0.5 * h) * kv1;
    const Vec2 kx2 = v2 * inv_tau;
    const Vec2 kv2 = vdot(x2, v2);
    const Vec2 x3 = x + (0.5 * h) * kx2, v3 = v + (0.5 * h) * kv2;
    const Vec2 kx3 = v3 * inv_tau;
    const Vec2 kv3 = vdot(x3, v3);
    const Vec2 x4 = x + h * kx3, v4 = v + h * kv3;
    const Vec2 kx4 = v4 * inv_tau;
    const Vec2 kv4 = vdot(x4, v4);

    const Vec2 next_x = x + (h / 6.0) * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
    v = v + (h / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    if (obstacle != nullptr && !contact && swept_collision(x, next_x, *obstacle)) contact = true;
    x = next_x;
    on_sample(i, x, v * inv_tau);
  }
  return contact;
}

inline std::size_t sample_count(double horizon, double dt) {
  return static_cast<std::size_t>(std::floor(horizon / dt + 0.5)) + 1;
}

/// DMP gains for a trial from the index-of-difficulty laws.
inline DmpParams dmp_for_trial(const TrialSpec& trial, const GainLawCoeffs& gains, double tau) {
  DmpParams p{stiffness_from_id(trial.id_bits, gains), damping_from_id(trial.id_bits, gains), tau};
  p.validate();
  return p;
}

/// Field parameters for a trial from the obstacle-distance laws; lambda = 0 when there is no obstacle.
inline FieldParams field_for_trial(const TrialSpec& trial, const std::optional<FieldLawCoeffs>& laws) {
  const auto o = trial.obstacle_distance();
  if (!o || !laws) return FieldParams{0.0, 2.0};
  FieldParams f{lambda_from_obstacle(*o, *laws), beta_from_obstacle(*o, *laws)};
  f.validate();
  return f;
}

struct RawPlan {
  PlannedTrajectory trajectory;
  bool collided = false;
};

/// Rolls the model out with explicit parameters; no collision policy applied.
inline RawPlan rollout(const Vec2& start, const Vec2& goal, const DmpParams& dmp,
                       const std::optional<Obstacle>& obstacle, const FieldParams& field, const PlanOptions& opt) {
  dmp.validate();
  if (!(opt.dt > 0.0) || !(opt.horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "plan dt/horizon invalid");
  RawPlan out;
  out.trajectory.dt = opt.dt;
  out.trajectory.horizon = opt.horizon;
  const std::size_t n = sample_count(opt.horizon, opt.dt);
  out.trajectory.samples.resize(n);
  out.collided = integrate_oa(start, goal, dmp, obstacle ? &*obstacle : nullptr, field, opt, n,
                              [&](std::size_t k, const Vec2& x, const Vec2& v) {
                                out.trajectory.samples[k] = PlanSample{x, v};
                              });
  return out;
}

/// Plans the reference movement for a trial. Throws PlanCollision if the plan touches the obstacle.
inline PlannedTrajectory plan_trajectory(const TrialSpec& trial, const GainLawCoeffs& gains,
                                         const std::optional<FieldLawCoeffs>& field_laws,
                                         const PlanOptions& opt = {}) {
  const DmpParams dmp = dmp_for_trial(trial, gains, opt.tau);
  const FieldParams field = field_for_trial(trial, field_laws);
  RawPlan raw = rollout(trial.start, trial.target_center, dmp, trial.obstacle, field, opt);
  if (raw.collided) {
    throw Error(ErrorCode::PlanCollision, "planned path for trial " + std::to_string(trial.trial_id) +
                                              " touches the obstacle");
  }
  return std::move(raw.trajectory);
}

/// Largest distance of the plan from the start→goal line.
inline double max_lateral_excursion(const PlannedTrajectory& plan, const Vec2& start, const Vec2& goal) {
  const Vec2 axis = goal - start;
  const double len = norm(axis);
  double best = 0.0;
  for (const auto& s : plan.samples) {
    const double lateral = len > 0.0 ? std::abs(cross(axis, s.position - start)) / len : norm(s.position - start);
    best = std::max(best, lateral);
  }
  return best;
}

}  // namespace oacollab::model
