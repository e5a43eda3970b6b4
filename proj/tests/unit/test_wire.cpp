#include <gtest/gtest.h>

#include "oacollab/wire.hpp"

using namespace oacollab;
using namespace oacollab::service;

namespace {

ErrorCode parse_error(std::string_view text) {
  try {
    parse_message(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a parse error for " << text;
  return ErrorCode::IoError;
}

}  // namespace

TEST(WireKind, NamesRoundTrip) {
  for (auto k : wire_kinds) EXPECT_EQ(parse_wire_kind(to_string(k)), k);
  EXPECT_THROW(parse_wire_kind("tick"), Error);
}

TEST(WireMessage, RoundTrip) {
  WireMessage m{WireKind::tick_state, 42, 1.25, {{"position", {0.1, -0.2}}}};
  const auto back = parse_message(serialize(m));
  EXPECT_EQ(back.kind, m.kind);
  EXPECT_EQ(back.seq, 42u);
  EXPECT_EQ(back.t, 1.25);
  EXPECT_EQ(back.payload, m.payload);
  const auto j = nlohmann::json::parse(serialize(m));
  EXPECT_EQ(j["kind"], "tick_state");
}

TEST(WireMessage, ClientMessagesMayOmitSeqAndTime) {
  const auto m = parse_message(R"({"kind":"input","payload":{"cursor":[0.01,0.02]}})");
  EXPECT_EQ(m.kind, WireKind::input);
  EXPECT_EQ(cursor_from_input(m.payload), (Vec2{0.01, 0.02}));
}

TEST(WireMessage, ParseErrors) {
  EXPECT_EQ(parse_error("{"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("[1,2]"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error(R"({"seq":1})"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error(R"({"kind":"bogus"})"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error(R"({"kind":"input","seq":-1})"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error(R"({"kind":"input","t":"now"})"), ErrorCode::InvalidArgument);
}

TEST(WireMessage, CursorPayloadErrors) {
  EXPECT_THROW(cursor_from_input({{"cursor", {1.0}}}), Error);
  EXPECT_THROW(cursor_from_input({{"pos", {1.0, 2.0}}}), Error);
  EXPECT_THROW(cursor_from_input({{"cursor", {"a", 2.0}}}), Error);
}

TEST(SeqCounter, StartsAtOneAndIncrements) {
  SeqCounter c(7);
  EXPECT_EQ(c.epoch(), 7u);
  EXPECT_EQ(c.next(), 1u);
  EXPECT_EQ(c.next(), 2u);
  EXPECT_EQ(c.last(), 2u);
}

TEST(CursorMapping, Examples) {
  InputMapping m;
  EXPECT_EQ(map_cursor_to_force({0.1, 0.2}, BodyState{{0.1, 0.2}, {}, 0.0}, m), Vec2{});
  m.cursor_damping = 0.0;
  const Vec2 f = map_cursor_to_force({0.01, 0.0}, BodyState{}, m);
  EXPECT_DOUBLE_EQ(f.x, 1.0);
  EXPECT_EQ(f.y, 0.0);
  const Vec2 capped = map_cursor_to_force({100.0, 0.0}, BodyState{}, m);
  EXPECT_DOUBLE_EQ(capped.x, m.cursor_force_cap);
}

TEST(CursorMapping, DampingOpposesVelocity) {
  InputMapping m;
  const Vec2 f = map_cursor_to_force({}, BodyState{{}, {0.1, 0.0}, 0.0}, m);
  EXPECT_DOUBLE_EQ(f.x, -0.5);
}

TEST(CursorMapping, CapBoundsEveryForce) {
  InputMapping m;
  for (double x = -10.0; x <= 10.0; x += 0.37) {
    for (double v = -5.0; v <= 5.0; v += 0.77) {
      EXPECT_LE(norm(map_cursor_to_force({x, -x}, BodyState{{}, {v, 0.0}, 0.0}, m)), m.cursor_force_cap + 1e-12);
    }
  }
}

TEST(InputMailbox, LatestValueWins) {
  InputMailbox box;
  EXPECT_FALSE(box.sample().cursor.has_value());
  box.post({1.0, 0.0});
  box.post({2.0, 0.0});
  const auto s = box.sample();
  EXPECT_EQ(*s.cursor, (Vec2{2.0, 0.0}));
  EXPECT_EQ(s.version, 2u);
}

TEST(StaleInputGuard, DecaysOnlyWhileMoving) {
  StaleInputGuard g(0.25, 0.1);
  EXPECT_EQ(g.scale(5.0, task::TrialPhase::moving), 1.0);  // no input yet
  g.fresh(1.0);
  EXPECT_EQ(g.scale(1.25, task::TrialPhase::moving), 1.0);
  EXPECT_NEAR(g.scale(1.30, task::TrialPhase::moving), 0.5, 1e-9);
  EXPECT_EQ(g.scale(1.40, task::TrialPhase::moving), 0.0);
  EXPECT_EQ(g.scale(1.40, task::TrialPhase::dwelling), 1.0);
  EXPECT_EQ(g.scale(9.0, task::TrialPhase::returning), 1.0);
  g.fresh(1.39);
  EXPECT_EQ(g.scale(1.40, task::TrialPhase::moving), 1.0);
}

TEST(Payloads, TickState) {
  SessionConfig cfg;
  const auto t = make_trial(3, {}, {1.0, 0.0}, 0.15, SizeClass::medium, 0.02, true);
  task::Session s(cfg, {t});
  auto p = tick_state_payload(s);
  EXPECT_EQ(p["phase"], "at_start");
  EXPECT_TRUE(p["target"].is_null());
  EXPECT_EQ(p["obstacle"].size(), 2u);
  std::vector<task::Event> events;
  while (!s.target_is_visible()) {
    auto ev = s.tick({});
    events.insert(events.end(), ev.begin(), ev.end());
  }
  p = tick_state_payload(s);
  EXPECT_EQ(p["target"]["width"], 0.02);
  EXPECT_EQ(p["target"]["center"][0], 0.15);
  ASSERT_FALSE(events.empty());
  const auto e = trial_event_payload(events.back());
  EXPECT_EQ(e["event"], "phase_change");
  EXPECT_EQ(e["to"], "target_shown");
  EXPECT_EQ(e["trial_id"], 3);
}
