#pragma once

#include "oacollab/error.hpp"
#include "oacollab/vec2.hpp"

namespace oacollab {

/// Kinematic state of the controlled point.
struct BodyState {
  Vec2 position;  ///< m
  Vec2 velocity;  ///< m/s
  double time = 0.0;  ///< s

  friend bool operator==(const BodyState&, const BodyState&) = default;
};

/// Point-mass plant standing in for the haptic interface's virtual dynamics.
struct PlantParams {
  double mass = 1.0;              ///< kg
  double viscous_damping = 10.0;  ///< N·s/m
  double force_cap = 60.0;        ///< N
  double dt = 0.001;              ///< s

  static constexpr double max_dt = 0.01;

  void validate() const {
    if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "plant mass must be > 0");
    if (!(viscous_damping >= 0.0)) throw Error(ErrorCode::InvalidArgument, "plant damping must be >= 0");
    if (!(force_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "plant force cap must be > 0");
    if (!(dt > 0.0) || dt > max_dt) throw Error(ErrorCode::InvalidArgument, "plant dt must lie in (0, 0.01] s");
  }
};

/// One semi-implicit Euler step of m·a = F - b·v. `total_force` is expected to be summed and capped already.
inline BodyState step_plant(const BodyState& state, const Vec2& total_force, const PlantParams& params) {
  if (!is_finite(total_force) || !is_finite(state.position) || !is_finite(state.velocity)) {
    throw Error(ErrorCode::NonFiniteInput, "step_plant received a non-finite state or force");
  }
  const Vec2 accel = (total_force - params.viscous_damping * state.velocity) / params.mass;
  BodyState next;
  next.velocity = state.velocity + params.dt * accel;
  next.position = state.position + params.dt * next.velocity;
  next.time = state.time + params.dt;
  return next;
}

}  // namespace oacollab
