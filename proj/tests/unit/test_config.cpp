#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oacollab/config.hpp"

using namespace oacollab;
using namespace oacollab::service;
namespace fs = std::filesystem;

namespace {

ServiceConfig parse(const std::string& text, const fs::path& base = {}) {
  std::istringstream in(text);
  return parse_config(in, base);
}

ErrorCode parse_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected a config error for: " << text;
  return ErrorCode::IoError;
}

}  // namespace

TEST(Config, DefaultsFromEmptyText) {
  const auto c = parse("");
  EXPECT_EQ(c.endpoint.port, 8765);
  EXPECT_EQ(c.endpoint.address, "127.0.0.1");
  EXPECT_EQ(c.session.trials_per_session, 45);
  EXPECT_EQ(c.session.mode, Mode::individual);
  EXPECT_EQ(c.resolved_session_id(), "individual-seed1");
  EXPECT_FALSE(c.robot_config().has_value());
  EXPECT_EQ(c.person.gains, c.human.gain_laws);
}

TEST(Config, ParsesKeys) {
  const auto c = parse(
      "; lab setup\n"
      "port = 9001\n"
      "bind = 0.0.0.0\n"
      "mode = robot_follower\n"
      "seed = 12\n"
      "trials = 90\n"
      "obstacle_enabled = false\n"
      "width_small = 0.012\n"
      "distance_far = 0.3\n"
      "cursor_spring_k = 80\n"
      "robot_kp = 90\n"
      "human_seed = 5\n"
      "realtime = off\n"
      "broadcast_hz = 30\n"
      "out_dir = /tmp/x\n");
  EXPECT_EQ(c.endpoint.port, 9001);
  EXPECT_EQ(c.endpoint.address, "0.0.0.0");
  EXPECT_EQ(c.session.mode, Mode::robot_follower);
  EXPECT_EQ(c.session.seed, 12u);
  EXPECT_EQ(c.session.trials_per_session, 90);
  EXPECT_FALSE(c.session.obstacle_enabled);
  EXPECT_EQ(c.session.widths.small, 0.012);
  EXPECT_EQ(c.session.distances[2], 0.3);
  EXPECT_EQ(c.mapping.cursor_spring_k, 80.0);
  EXPECT_EQ(c.robot.kp, 90.0);
  EXPECT_EQ(c.resolved_human().seed, 5u);
  EXPECT_FALSE(c.realtime);
  EXPECT_EQ(c.broadcast_hz, 30.0);
  EXPECT_EQ(c.out_dir, fs::path("/tmp/x"));
  ASSERT_TRUE(c.robot_config().has_value());
  EXPECT_EQ(c.robot_config()->role, partner::Role::follower);
}

TEST(Config, HumanSeedDerivedFromSessionSeed) {
  const auto a = parse("seed = 1\n");
  const auto b = parse("seed = 2\n");
  EXPECT_NE(a.resolved_human().seed, b.resolved_human().seed);
  EXPECT_EQ(a.resolved_human().seed, parse("seed = 1\n").resolved_human().seed);
}

TEST(Config, Errors) {
  EXPECT_EQ(parse_error("colour = blue\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("[server]\nport = 1\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("port = 70000\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("port = 80x\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("realtime = maybe\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("mode = solo\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("trials = 44\n"), ErrorCode::UnbalancedConfig);
  EXPECT_EQ(parse_error("width_small = 0\n"), ErrorCode::NonPositiveWidth);
  EXPECT_EQ(parse_error("broadcast_hz = 0\n"), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_error("cursor_force_cap = -1\n"), ErrorCode::InvalidArgument);
}

TEST(Config, ModelParamsResolveAgainstConfigDirectory) {
  const fs::path dir = fs::temp_directory_path() / "oacollab_config_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "person.json") << R"({"kind":"fit_report","tau":1.0,"gain_laws":{"k1":5,"k2":12,"k3":3},)"
                                     << R"("field_laws":{"l1":0.001,"l2":0.01,"b3":30,"b4":-8,"b5":3}})";
  std::ofstream(dir / "lab.ini") << "model_params = person.json\nmode = robot_leader\n";
  const auto c = load_config(dir / "lab.ini");
  EXPECT_EQ(c.person.gains, (model::GainLawCoeffs{5.0, 12.0, 3.0}));
  ASSERT_TRUE(c.person.field_laws.has_value());
  EXPECT_EQ(c.person.field_laws->b3, 30.0);

  std::ofstream(dir / "bad.json") << R"({"gain_laws":{"k1":5}})";
  std::ofstream(dir / "bad.ini") << "model_params = bad.json\n";
  EXPECT_THROW(load_config(dir / "bad.ini"), Error);
  try {
    load_config(dir / "absent.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  fs::remove_all(dir);
}
