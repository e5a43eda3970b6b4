#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "oacollab/error.hpp"
#include "oacollab/fitting.hpp"
#include "oacollab/oa_model.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::partner {

enum class Role { follower, equal, leader };

constexpr std::string_view to_string(Role r) {
  switch (r) {
    case Role::follower: return "follower";
    case Role::equal: return "equal";
    case Role::leader: return "leader";
  }
  return "?";
}

/// Leader coefficient K_l: below 1 the robot follows, above 1 it leads.
constexpr double role_coefficient(Role role) {
  switch (role) {
    case Role::follower: return 0.75;
    case Role::equal: return 1.0;
    case Role::leader: return 1.25;
  }
  return 1.0;
}

inline std::optional<Role> role_for_mode(Mode mode) {
  switch (mode) {
    case Mode::robot_follower: return Role::follower;
    case Mode::robot_equal: return Role::equal;
    case Mode::robot_leader: return Role::leader;
    default: return std::nullopt;
  }
}

struct RobotPartnerConfig {
  double kp = 100.0;  ///< N/m
  double kd = 20.0;   ///< N·s/m
  Role role = Role::equal;
  double force_cap = 40.0;  ///< N

  void validate() const {
    if (!(kp > 0.0)) throw Error(ErrorCode::InvalidArgument, "robot kp must be > 0");
    if (!(kd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "robot kd must be >= 0");
    if (!(force_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "robot force cap must be > 0");
  }
};

/// The person's fitted laws the partner imitates, plus planning options.
struct PersonModel {
  fit::PersonLaws laws;
  model::PlanOptions plan;

  model::PlanOptions options() const {
    model::PlanOptions o = plan;
    o.tau = laws.tau;
    return o;
  }
};

struct PartnerState {
  std::optional<model::PlannedTrajectory> plan;
  double plan_start = 0.0;  ///< s, session clock at which plan time 0 applies
  std::optional<std::string> diagnostic;

  double plan_clock(double now) const { return plan ? std::clamp(now - plan_start, 0.0, plan->horizon) : 0.0; }
};

/// Plans toward a newly shown target. A plan that would collide leaves the partner without a plan.
inline PartnerState retarget(const PartnerState& /*previous*/, const TrialSpec& trial, const PersonModel& person,
                             double now) {
  PartnerState next;
  next.plan_start = now;
  try {
    next.plan = model::plan_trajectory(trial, person.laws.gains, person.laws.field_laws, person.options());
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PlanCollision) throw;
    next.diagnostic = e.what();
  }
  return next;
}

/// Partner without a reference; produces no force.
inline PartnerState release(const PartnerState& /*previous*/) { return {}; }

/// F_r = K_l (K_p (p_t - p) + K_d (v_t - v)), capped; zero without a plan.
inline Vec2 robot_force(const PartnerState& partner, const BodyState& point, const RobotPartnerConfig& cfg) {
  if (!partner.plan) return {};
  const auto& ref = partner.plan->at(point.time - partner.plan_start);
  const Vec2 servo = cfg.kp * (ref.position - point.position) + cfg.kd * (ref.velocity - point.velocity);
  return clamp_norm(role_coefficient(cfg.role) * servo, cfg.force_cap);
}

}  // namespace oacollab::partner
