#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "oacollab/trial_log.hpp"

using namespace oacollab;
using namespace oacollab::metrics;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("oacollab_log_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<task::CompletedTrial> run_session(const SessionConfig& cfg) {
  task::SimHuman h(task::SimHumanParams{});
  task::Session s(cfg, generate_session(cfg));
  task::run_to_completion(s, task::sim_human_source(h));
  return s.completed();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode read_error(const fs::path& p) {
  try {
    read_trial_log(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected the read to fail";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(TrialLog, RoundTrip) {
  TempDir dir;
  SessionConfig cfg;
  const auto trials = run_session(cfg);
  const auto records = write_trial_log(dir.path / "s.jsonl", "s", Mode::individual, trials);
  ASSERT_EQ(records.size(), 45u);

  const auto log = read_trial_log(dir.path / "s.jsonl");
  EXPECT_EQ(log.session_id, "s");
  EXPECT_EQ(log.mode, Mode::individual);
  EXPECT_EQ(log.records, records);
  ASSERT_EQ(log.trials.size(), trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    EXPECT_EQ(log.trials[i].trial, trials[i].trial);
    EXPECT_EQ(log.trials[i].outcome, trials[i].outcome);
  }
}

TEST(TrialLog, SidecarRowsMatchPathRefs) {
  TempDir dir;
  SessionConfig cfg;
  cfg.trials_per_session = 9;
  const auto records = write_trial_log(dir.path / "s.jsonl", "s", Mode::individual, run_session(cfg));
  std::ifstream in(dir.path / "s.paths.tsv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t x y vx vy fhx fhy frx fry");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(records.front().path_ref.rfind("s.paths.tsv#0+", 0), 0u);
  std::size_t total = 0;
  for (const auto& r : records) total += std::stoul(r.path_ref.substr(r.path_ref.find('+') + 1));
  EXPECT_EQ(rows, total);
}

TEST(TrialLog, TruncationIsDetected) {
  TempDir dir;
  SessionConfig cfg;
  cfg.trials_per_session = 9;
  write_trial_log(dir.path / "s.jsonl", "s", Mode::individual, run_session(cfg));
  const std::string full = slurp(dir.path / "s.jsonl");
  const std::string rows = slurp(dir.path / "s.paths.tsv");

  for (std::size_t cut : {full.size() / 3, full.size() / 2, full.size() - 2, full.size() - 1}) {
    std::ofstream(dir.path / "s.jsonl", std::ios::trunc) << full.substr(0, cut);
    const auto code = read_error(dir.path / "s.jsonl");
    EXPECT_TRUE(code == ErrorCode::IoError || code == ErrorCode::SchemaVersionMismatch) << "cut " << cut;
  }
  std::ofstream(dir.path / "s.jsonl", std::ios::trunc) << full;
  std::ofstream(dir.path / "s.paths.tsv", std::ios::trunc) << rows.substr(0, rows.size() / 2);
  EXPECT_EQ(read_error(dir.path / "s.jsonl"), ErrorCode::IoError);
  fs::remove(dir.path / "s.paths.tsv");
  EXPECT_EQ(read_error(dir.path / "s.jsonl"), ErrorCode::IoError);
}

TEST(TrialLog, SchemaVersionMismatch) {
  TempDir dir;
  std::ofstream(dir.path / "s.jsonl") << R"({"schema_version":2,"kind":"trial_log"})" << "\n";
  EXPECT_EQ(read_error(dir.path / "s.jsonl"), ErrorCode::SchemaVersionMismatch);
  std::ofstream(dir.path / "t.jsonl") << "not json\n";
  EXPECT_EQ(read_error(dir.path / "t.jsonl"), ErrorCode::SchemaVersionMismatch);
  EXPECT_EQ(read_error(dir.path / "missing.jsonl"), ErrorCode::IoError);
}

TEST(TrialLog, FitFromLogIsReproducible) {
  TempDir dir;
  SessionConfig free_cfg, obst_cfg;
  free_cfg.trials_per_session = obst_cfg.trials_per_session = 9;
  free_cfg.obstacle_enabled = false;
  write_trial_log(dir.path / "free.jsonl", "free", Mode::individual, run_session(free_cfg));
  write_trial_log(dir.path / "obst.jsonl", "obst", Mode::individual, run_session(obst_cfg));

  auto fit_once = [&] {
    std::vector<fit::RecordedTrial> free, obst;
    for (auto& r : recordings_from_log(read_trial_log(dir.path / "free.jsonl"))) free.push_back(std::move(r));
    for (auto& r : recordings_from_log(read_trial_log(dir.path / "obst.jsonl"))) obst.push_back(std::move(r));
    return fit::to_json(fit::identify(free, obst, 1.0)).dump();
  };
  EXPECT_EQ(fit_once(), fit_once());
}

TEST(TrialLog, SummaryAndPlanWriters) {
  TempDir dir;
  SessionConfig cfg;
  cfg.trials_per_session = 9;
  const auto records = write_trial_log(dir.path / "s.jsonl", "s", Mode::individual, run_session(cfg));
  write_summary(dir.path / "s.summary.json", summarize_session(records));
  const auto j = nlohmann::json::parse(slurp(dir.path / "s.summary.json"));
  EXPECT_EQ(j["kind"], "session_summary");
  EXPECT_EQ(j["total"], 9);

  const auto t = make_trial(0, {}, {1.0, 0.0}, 0.15, SizeClass::medium, 0.02, true);
  const auto plan = model::plan_trajectory(t, {4.0, 14.0, 3.5}, model::FieldLawCoeffs{0.0005, 0.02, 40.0, -10.0, 3.5});
  write_plan(dir.path / "plan.tsv", plan);
  std::ifstream in(dir.path / "plan.tsv");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, plan.samples.size() + 1);
}
