#pragma once

// Executable reaching protocol. One Session owns the plant, the trial list and the
// robot partner; `tick` advances everything by one plant step.
//
//   at_start -> target_shown -> moving -> dwelling -> success -> returning -> at_start
//                                  ^---------'  (left the target early)
//   target_shown | moving | dwelling -> failed_collision -> returning

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/geometry.hpp"
#include "oacollab/plant.hpp"
#include "oacollab/robot_partner.hpp"
#include "oacollab/sim_human.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::task {

enum class TrialPhase { at_start, target_shown, moving, dwelling, success, failed_collision, returning };

constexpr std::string_view to_string(TrialPhase p) {
  switch (p) {
    case TrialPhase::at_start: return "at_start";
    case TrialPhase::target_shown: return "target_shown";
    case TrialPhase::moving: return "moving";
    case TrialPhase::dwelling: return "dwelling";
    case TrialPhase::success: return "success";
    case TrialPhase::failed_collision: return "failed_collision";
    case TrialPhase::returning: return "returning";
  }
  return "?";
}

constexpr bool target_visible(TrialPhase p) {
  return p == TrialPhase::target_shown || p == TrialPhase::moving || p == TrialPhase::dwelling;
}

enum class EventKind { phase_change, trial_complete, session_complete };

struct Event {
  EventKind kind = EventKind::phase_change;
  int trial_index = 0;
  int trial_id = 0;
  TrialPhase from = TrialPhase::at_start;
  TrialPhase to = TrialPhase::at_start;
  double t = 0.0;
};

struct CompletedTrial {
  TrialSpec trial;
  TrialOutcome outcome;
};

/// Robot partner wiring for robot modes.
struct RobotSetup {
  partner::RobotPartnerConfig config;
  partner::PersonModel person;
};

class Session {
 public:
  Session(SessionConfig cfg, std::vector<TrialSpec> trials, PlantParams plant = {},
          std::optional<RobotSetup> robot = std::nullopt)
      : cfg_(std::move(cfg)), trials_(std::move(trials)), plant_(plant), robot_(std::move(robot)) {
    cfg_.validate();
    plant_.validate();
    if (robot_) robot_->config.validate();
    if (trials_.empty()) throw Error(ErrorCode::EmptySession, "session has no trials");
    state_.position = trials_.front().start;
  }

  /// Places the point; only meaningful before the first tick.
  void set_initial_state(const BodyState& s) { state_ = s; }

  /// Advances the session by one plant step with the given human force.
  std::vector<Event> tick(const Vec2& human_force) {
    if (complete_) throw Error(ErrorCode::SessionComplete, "all trials finished");
    std::vector<Event> events;
    const TrialSpec& trial = trials_[index_];

    if (phase_ == TrialPhase::at_start && settled_at(trial.start, state_)) {
      outcome_ = TrialOutcome{};
      outcome_.target_shown_time = state_.time;
      outcome_.path.push_back(PathSample{state_.time, state_.position, state_.velocity, {}, {}});
      if (robot_) partner_ = partner::retarget(partner_, trial, robot_->person, state_.time);
      transition(TrialPhase::target_shown, events);
    }

    Vec2 fr{};
    if (robot_ && target_visible(phase_)) fr = partner::robot_force(partner_, state_, robot_->config);
    const Vec2 total = clamp_norm(fr + human_force, plant_.force_cap);
    const BodyState prev = state_;
    state_ = step_plant(state_, total, plant_);
    last_robot_force_ = fr;

    if (target_visible(phase_)) {
      if (trial.obstacle && swept_collision(prev.position, state_.position, *trial.obstacle)) {
        outcome_.collided = true;
        outcome_.target_removed_time = state_.time;
        transition(TrialPhase::failed_collision, events);
        end_target();
        transition(TrialPhase::returning, events);
      } else {
        advance_reach(trial, events);
      }
    }

    if (phase_ != TrialPhase::at_start) {
      outcome_.path.push_back(PathSample{state_.time, state_.position, state_.velocity, human_force, fr});
    }

    if (phase_ == TrialPhase::returning && settled_at(trial.start, state_)) {
      completed_.push_back(CompletedTrial{trial, std::move(outcome_)});
      outcome_ = TrialOutcome{};
      events.push_back(Event{EventKind::trial_complete, static_cast<int>(index_), trial.trial_id, phase_, phase_,
                             state_.time});
      transition(TrialPhase::at_start, events);
      ++index_;
      if (index_ == trials_.size()) {
        complete_ = true;
        events.push_back(Event{EventKind::session_complete, static_cast<int>(index_ - 1), trial.trial_id, phase_,
                               phase_, state_.time});
      }
    }
    return events;
  }

  bool complete() const { return complete_; }
  TrialPhase phase() const { return phase_; }
  const BodyState& state() const { return state_; }
  const SessionConfig& config() const { return cfg_; }
  const PlantParams& plant() const { return plant_; }
  const std::vector<TrialSpec>& trials() const { return trials_; }
  const std::vector<CompletedTrial>& completed() const { return completed_; }
  std::size_t trial_index() const { return index_; }
  const TrialSpec* current_trial() const { return complete_ ? nullptr : &trials_[index_]; }
  bool target_is_visible() const { return !complete_ && target_visible(phase_); }
  Vec2 last_robot_force() const { return last_robot_force_; }
  const partner::PartnerState& partner_state() const { return partner_; }
  /// Time since the current target appeared (0 when none is visible).
  double since_target_shown() const { return target_is_visible() ? state_.time - outcome_.target_shown_time : 0.0; }
  /// Ticks recorded so far in the current trial path, including the onset sample.
  std::size_t current_path_length() const { return outcome_.path.size(); }

 private:
  bool settled_at(const Vec2& start, const BodyState& s) const {
    return norm(s.position - start) <= cfg_.start_radius && norm(s.velocity) < cfg_.onset_speed;
  }

  void transition(TrialPhase to, std::vector<Event>& events) {
    const TrialSpec& trial = trials_[index_];
    events.push_back(Event{EventKind::phase_change, static_cast<int>(index_), trial.trial_id, phase_, to, state_.time});
    phase_ = to;
  }

  void end_target() {
    if (robot_) partner_ = partner::release(partner_);
  }

  void advance_reach(const TrialSpec& trial, std::vector<Event>& events) {
    if (!outcome_.onset_time && norm(state_.velocity) > cfg_.onset_speed) {
      outcome_.onset_time = state_.time;
      if (phase_ == TrialPhase::target_shown) transition(TrialPhase::moving, events);
    }
    const bool inside = trial.inside_target(state_.position);
    if (inside && phase_ != TrialPhase::dwelling) {
      if (phase_ == TrialPhase::target_shown) {
        outcome_.onset_time = outcome_.onset_time.value_or(outcome_.target_shown_time);
        transition(TrialPhase::moving, events);
      }
      entry_time_ = state_.time;
      transition(TrialPhase::dwelling, events);
    } else if (!inside && phase_ == TrialPhase::dwelling) {
      transition(TrialPhase::moving, events);
    }
    if (phase_ == TrialPhase::dwelling && state_.time - entry_time_ >= cfg_.dwell_time - 1e-9) {
      outcome_.success = true;
      outcome_.movement_time = entry_time_ - *outcome_.onset_time;
      outcome_.target_removed_time = state_.time;
      transition(TrialPhase::success, events);
      end_target();
      transition(TrialPhase::returning, events);
    }
  }

  SessionConfig cfg_;
  std::vector<TrialSpec> trials_;
  PlantParams plant_;
  std::optional<RobotSetup> robot_;

  BodyState state_;
  std::size_t index_ = 0;
  TrialPhase phase_ = TrialPhase::at_start;
  bool complete_ = false;
  double entry_time_ = 0.0;
  TrialOutcome outcome_;
  partner::PartnerState partner_;
  Vec2 last_robot_force_;
  std::vector<CompletedTrial> completed_;
};

/// Source of the human force for the upcoming tick.
using HumanForceSource = std::function<Vec2(const Session&)>;

/// Simulated human: plan tracking while a target is visible, a return spring otherwise.
inline HumanForceSource sim_human_source(SimHuman& human) {
  return [&human](const Session& s) -> Vec2 {
    const TrialSpec* trial = s.current_trial();
    if (trial == nullptr) return {};
    if (s.target_is_visible()) return human.force(s.state(), *trial, s.since_target_shown());
    if (s.phase() == TrialPhase::at_start) return {};
    return human.return_force(s.state(), trial->start);
  };
}

/// Replays the total force recorded per tick of each logged trial as the human term.
inline HumanForceSource replay_source(std::vector<std::vector<Vec2>> forces_per_trial) {
  return [forces = std::move(forces_per_trial)](const Session& s) -> Vec2 {
    const std::size_t trial = s.trial_index();
    if (trial >= forces.size()) return {};
    // The onset sample is pushed inside tick(), so the upcoming tick's force is at path length - 1,
    // or at 0 when the target is about to be shown.
    const std::size_t len = s.current_path_length();
    const std::size_t k = len == 0 ? 0 : len - 1;
    return k < forces[trial].size() ? forces[trial][k] : Vec2{};
  };
}

/// Runs a session to completion without real-time pacing.
/// Throws InvalidArgument if the simulated clock passes `max_time` first.
inline void run_to_completion(Session& session, const HumanForceSource& human, double max_time = 3600.0,
                              const std::function<void(const Session&, const std::vector<Event>&)>& on_tick = {}) {
  while (!session.complete()) {
    if (session.state().time > max_time) throw Error(ErrorCode::InvalidArgument, "session stalled before completion");
    const auto events = session.tick(human(session));
    if (on_tick) on_tick(session, events);
  }
}

/// Builds the robot setup for a mode, or none for non-robot modes.
inline std::optional<RobotSetup> robot_for_mode(Mode mode, partner::RobotPartnerConfig config,
                                                const partner::PersonModel& person) {
  const auto role = partner::role_for_mode(mode);
  if (!role) return std::nullopt;
  config.role = *role;
  return RobotSetup{config, person};
}

}  // namespace oacollab::task
