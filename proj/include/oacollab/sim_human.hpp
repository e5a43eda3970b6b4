#pragma once

#include <cstdint>
#include <utility>
#include <optional>
#include <random>

#include "oacollab/error.hpp"
#include "oacollab/oa_model.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::task {

/// Parameters of the simulated partner that stands in for a live human in headless runs.
struct SimHumanParams {
  model::GainLawCoeffs gain_laws{4.0, 14.0, 3.5};
  std::optional<model::FieldLawCoeffs> field_laws = model::FieldLawCoeffs{0.0005, 0.02, 40.0, -10.0, 3.5};
  double tau = 1.0;
  double reaction_delay = 0.2;  ///< s after target onset
  double force_gain = 200.0;    ///< N per m of tracking error
  double noise_sigma = 1.0;     ///< N per axis per tick
  std::uint64_t seed = 7;
  model::PlanOptions plan;

  void validate() const {
    if (!(reaction_delay >= 0.0)) throw Error(ErrorCode::InvalidArgument, "reaction_delay must be >= 0");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
    if (!(force_gain >= 0.0)) throw Error(ErrorCode::InvalidArgument, "force_gain must be >= 0");
    if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be > 0");
  }
};

/// Seeded simulated human. Each trial it follows its own model plan, started once the
/// reaction delay has passed, with a spring plus Gaussian force noise.
class SimHuman {
 public:
  explicit SimHuman(SimHumanParams params) : params_(std::move(params)), rng_(params_.seed) { params_.validate(); }

  const SimHumanParams& params() const { return params_; }

  /// Human force while a target is visible; `since_onset` is the time since the target appeared.
  Vec2 force(const BodyState& state, const TrialSpec& trial, double since_onset) {
    if (since_onset < params_.reaction_delay) return {};
    const auto& plan = plan_for(trial);
    const auto& ref = plan.at(since_onset - params_.reaction_delay);
    return params_.force_gain * (ref.position - state.position) + noise();
  }

  /// Force bringing the point back to the start once the target is gone.
  Vec2 return_force(const BodyState& state, const Vec2& start) {
    return params_.force_gain * (start - state.position) + noise();
  }

  const model::PlannedTrajectory& plan_for(const TrialSpec& trial) {
    if (current_ && current_->first == trial) return current_->second;
    model::PlanOptions opt = params_.plan;
    opt.tau = params_.tau;
    // The simulated person follows its plan even if the plan clips the obstacle.
    auto raw = model::rollout(trial.start, trial.target_center, model::dmp_for_trial(trial, params_.gain_laws, opt.tau),
                              trial.obstacle, model::field_for_trial(trial, params_.field_laws), opt);
    current_.emplace(trial, std::move(raw.trajectory));
    return current_->second;
  }

 private:
  Vec2 noise() {
    if (params_.noise_sigma == 0.0) return {};
    std::normal_distribution<double> n(0.0, params_.noise_sigma);
    const double nx = n(rng_);
    const double ny = n(rng_);
    return {nx, ny};
  }

  SimHumanParams params_;
  std::mt19937_64 rng_;
  std::optional<std::pair<TrialSpec, model::PlannedTrajectory>> current_;
};

/// Free-function form: force of `sim` at `state` for `trial`, `now` seconds after target onset.
inline Vec2 sim_human_force(SimHuman& sim, const BodyState& state, const TrialSpec& trial, double now) {
  return sim.force(state, trial, now);
}

}  // namespace oacollab::task
