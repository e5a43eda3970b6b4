#pragma once

// JSON wire protocol between the session service and its clients. One message per
// frame: {"kind": ..., "seq": n, "t": sim seconds, "payload": {...}}.

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "oacollab/error.hpp"
#include "oacollab/metrics.hpp"
#include "oacollab/task_engine.hpp"

namespace oacollab::service {

enum class WireKind { hello, session_start, tick_state, input, trial_event, tlx_submit, session_summary, error };

inline constexpr std::array<WireKind, 8> wire_kinds{WireKind::hello,      WireKind::session_start, WireKind::tick_state,
                                                    WireKind::input,      WireKind::trial_event,   WireKind::tlx_submit,
                                                    WireKind::session_summary, WireKind::error};

constexpr std::string_view to_string(WireKind k) {
  switch (k) {
    case WireKind::hello: return "hello";
    case WireKind::session_start: return "session_start";
    case WireKind::tick_state: return "tick_state";
    case WireKind::input: return "input";
    case WireKind::trial_event: return "trial_event";
    case WireKind::tlx_submit: return "tlx_submit";
    case WireKind::session_summary: return "session_summary";
    case WireKind::error: return "error";
  }
  return "?";
}

inline WireKind parse_wire_kind(std::string_view s) {
  for (WireKind k : wire_kinds)
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown message kind '" + std::string(s) + "'");
}

struct WireMessage {
  WireKind kind = WireKind::error;
  std::uint64_t seq = 0;
  double t = 0.0;
  nlohmann::json payload = nlohmann::json::object();
};

inline nlohmann::json to_json(const WireMessage& m) {
  return {{"kind", std::string(to_string(m.kind))}, {"seq", m.seq}, {"t", m.t}, {"payload", m.payload}};
}

inline std::string serialize(const WireMessage& m) { return to_json(m).dump(); }

inline WireMessage parse_message(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "message is not valid JSON");
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw Error(ErrorCode::InvalidArgument, "message needs a string 'kind'");
  }
  WireMessage m;
  m.kind = parse_wire_kind(j["kind"].get<std::string>());
  if (j.contains("seq")) {
    if (!j["seq"].is_number_unsigned()) throw Error(ErrorCode::InvalidArgument, "'seq' must be a non-negative integer");
    m.seq = j["seq"].get<std::uint64_t>();
  }
  if (j.contains("t")) {
    if (!j["t"].is_number()) throw Error(ErrorCode::InvalidArgument, "'t' must be a number");
    m.t = j["t"].get<double>();
  }
  if (j.contains("payload")) m.payload = j["payload"];
  return m;
}

/// Per-connection sequence numbering. A new connection is a new epoch starting at 1.
class SeqCounter {
 public:
  explicit SeqCounter(std::uint64_t epoch = 0) : epoch_(epoch) {}
  std::uint64_t next() { return ++last_; }
  std::uint64_t last() const { return last_; }
  std::uint64_t epoch() const { return epoch_; }

 private:
  std::uint64_t epoch_;
  std::uint64_t last_ = 0;
};

// Payloads ---------------------------------------------------------------------

inline nlohmann::json vec_json(const Vec2& v) { return nlohmann::json::array({v.x, v.y}); }

/// Everything a client needs to draw the current frame.
inline nlohmann::json tick_state_payload(const task::Session& s) {
  nlohmann::json p;
  p["position"] = vec_json(s.state().position);
  p["velocity"] = vec_json(s.state().velocity);
  p["phase"] = std::string(task::to_string(s.phase()));
  p["robot_force"] = vec_json(s.last_robot_force());
  p["trial_index"] = s.trial_index();
  const TrialSpec* trial = s.current_trial();
  p["start"] = trial ? vec_json(trial->start) : nlohmann::json(nullptr);
  if (trial && s.target_is_visible()) {
    p["target"] = {{"center", vec_json(trial->target_center)}, {"width", trial->target_width}};
  } else {
    p["target"] = nullptr;
  }
  if (trial && trial->obstacle) {
    p["obstacle"] = nlohmann::json::array({vec_json(trial->obstacle->endpoint_a), vec_json(trial->obstacle->endpoint_b)});
  } else {
    p["obstacle"] = nullptr;
  }
  return p;
}

inline nlohmann::json trial_event_payload(const task::Event& e) {
  std::string_view kind = e.kind == task::EventKind::phase_change    ? "phase_change"
                          : e.kind == task::EventKind::trial_complete ? "trial_complete"
                                                                      : "session_complete";
  return {{"event", std::string(kind)},
          {"trial_index", e.trial_index},
          {"trial_id", e.trial_id},
          {"from", std::string(task::to_string(e.from))},
          {"to", std::string(task::to_string(e.to))}};
}

inline nlohmann::json error_payload(ErrorCode code, std::string_view message) {
  return {{"code", std::string(to_string(code))}, {"message", std::string(message)}};
}

/// Cursor position in metres from an input payload {"cursor": [x, y]}.
inline Vec2 cursor_from_input(const nlohmann::json& payload) {
  try {
    const auto& c = payload.at("cursor");
    const Vec2 v{c.at(0).get<double>(), c.at(1).get<double>()};
    if (!is_finite(v)) throw Error(ErrorCode::NonFiniteInput, "cursor must be finite");
    return v;
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "input payload needs 'cursor': [x, y]");
  }
}

// Cursor to force --------------------------------------------------------------

struct InputMapping {
  double cursor_spring_k = 100.0;  ///< N/m
  double cursor_damping = 5.0;     ///< N·s/m
  double cursor_force_cap = 30.0;  ///< N

  void validate() const {
    if (!(cursor_spring_k >= 0.0) || !(cursor_damping >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "cursor mapping gains must be >= 0");
    }
    if (!(cursor_force_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "cursor force cap must be > 0");
  }
};

/// Human force from a cursor: a spring toward the cursor with damping, capped.
inline Vec2 map_cursor_to_force(const Vec2& cursor, const BodyState& point, const InputMapping& m) {
  const Vec2 f = m.cursor_spring_k * (cursor - point.position) - m.cursor_damping * point.velocity;
  return clamp_norm(f, m.cursor_force_cap);
}

/// Newest-value-wins cursor slot shared between the network and the tick owner.
class InputMailbox {
 public:
  void post(const Vec2& cursor) {
    std::lock_guard lock(mutex_);
    cursor_ = cursor;
    ++version_;
  }

  struct Sample {
    std::optional<Vec2> cursor;
    std::uint64_t version = 0;
  };

  Sample sample() const {
    std::lock_guard lock(mutex_);
    return {cursor_, version_};
  }

 private:
  mutable std::mutex mutex_;
  std::optional<Vec2> cursor_;
  std::uint64_t version_ = 0;
};

/// Fades the human force out when input stops arriving while the point is moving.
class StaleInputGuard {
 public:
  StaleInputGuard(double timeout = 0.25, double decay = 0.1) : timeout_(timeout), decay_(decay) {}

  /// Records that fresh input was sampled at simulation time `t`.
  void fresh(double t) { last_ = t; }

  /// Scale in [0, 1] applied to the human force at time `t`.
  double scale(double t, task::TrialPhase phase) const {
    if (phase != task::TrialPhase::moving || !last_) return 1.0;
    const double idle = t - *last_;
    if (idle <= timeout_) return 1.0;
    if (decay_ <= 0.0) return 0.0;
    return std::max(0.0, 1.0 - (idle - timeout_) / decay_);
  }

 private:
  double timeout_;
  double decay_;
  std::optional<double> last_;
};

}  // namespace oacollab::service
