#include <gtest/gtest.h>

#include <random>

#include "oacollab/fitting.hpp"

using namespace oacollab;
using namespace oacollab::fit;

namespace {

const model::GainLawCoeffs gains{4.0, 14.0, 3.5};
const model::FieldLawCoeffs field_laws{0.0005, 0.02, 40.0, -10.0, 3.5};

RecordedTrial record(const TrialSpec& trial, const model::DmpParams& dmp, const model::FieldParams& field,
                     double duration) {
  model::PlanOptions opt;
  opt.tau = dmp.tau;
  opt.horizon = duration;
  const auto raw = model::rollout(trial.start, trial.target_center, dmp, trial.obstacle, field, opt);
  RecordedTrial rec;
  rec.trial = trial;
  for (std::size_t k = 0; k < raw.trajectory.samples.size(); ++k) {
    rec.states.push_back(BodyState{raw.trajectory.samples[k].position, raw.trajectory.samples[k].velocity, k * opt.dt});
  }
  rec.outcome.collided = raw.collided;
  rec.outcome.success = !raw.collided;
  return rec;
}

TrialSpec free_trial() { return make_trial(0, {0.0, 0.0}, {1.0, 0.0}, 0.15, SizeClass::medium, 0.02, false); }
TrialSpec obstacle_trial() { return make_trial(1, {0.0, 0.0}, {1.0, 0.0}, 0.25, SizeClass::medium, 0.02, true); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(FitDmp, RecoversGeneratingGains) {
  const auto rec = record(free_trial(), {30.0, 11.0, 1.0}, {}, 2.0);
  const auto f = fit_dmp_trial(rec, 1.0);
  EXPECT_NEAR(f.spring_k, 30.0, 0.02 * 30.0);
  EXPECT_NEAR(f.damping_d, 11.0, 0.02 * 11.0);
  EXPECT_LT(f.rmse, 1e-6);
  EXPECT_FALSE(f.ill_conditioned);
}

TEST(FitDmp, InitialGuessIsTheOptimum) {
  const auto rec = record(free_trial(), {25.0, 10.0, 1.0}, {}, 2.0);
  const auto f = fit_dmp_trial(rec, 1.0);
  EXPECT_NEAR(f.spring_k, 25.0, 1e-3);
  EXPECT_NEAR(f.damping_d, 10.0, 1e-3);
  EXPECT_LT(f.rmse, 1e-8);
}

TEST(FitDmp, StationaryRecordingIsFlagged) {
  RecordedTrial rec;
  rec.trial = free_trial();
  rec.trial.target_center = rec.trial.start;
  for (int k = 0; k <= 1000; ++k) rec.states.push_back(BodyState{{0.0, 0.0}, {}, k * 0.001});
  try {
    const auto f = fit_dmp_trial(rec, 1.0);
    EXPECT_TRUE(f.ill_conditioned);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FitDiverged);
  }
}

TEST(FitDmp, InputValidation) {
  RecordedTrial rec = record(free_trial(), {25.0, 10.0, 1.0}, {}, 0.2);
  EXPECT_EQ(code_of([&] { fit_dmp_trial(rec, 1.0); }), ErrorCode::TrajectoryTooShort);
  rec = record(free_trial(), {25.0, 10.0, 1.0}, {}, 1.0);
  rec.states[10].time += 0.0005;
  EXPECT_EQ(code_of([&] { fit_dmp_trial(rec, 1.0); }), ErrorCode::InvalidArgument);
  rec = record(obstacle_trial(), {25.0, 10.0, 1.0}, {0.02, 3.0}, 1.0);
  EXPECT_EQ(code_of([&] { fit_dmp_trial(rec, 1.0); }), ErrorCode::InvalidArgument);
}

TEST(RegressGainLaws, ExactPoints) {
  std::vector<GainPoint> pts;
  for (double id : {1.0, 2.0, 3.5, 4.0}) pts.push_back({id, 2.0 * id + 1.0, 3.0 * id});
  const auto c = regress_gain_laws(pts);
  EXPECT_NEAR(c.k1, 2.0, 1e-9);
  EXPECT_NEAR(c.k2, 1.0, 1e-9);
  EXPECT_NEAR(c.k3, 3.0, 1e-9);
}

TEST(RegressGainLaws, RepeatedIdIsInsufficient) {
  std::vector<GainPoint> pts(10, GainPoint{2.0, 5.0, 4.0});
  EXPECT_EQ(code_of([&] { regress_gain_laws(pts); }), ErrorCode::InsufficientConditions);
}

TEST(RegressGainLaws, NoisyPointsMonteCarlo) {
  const std::vector<double> ids{1.4150, 1.8074, 2.5850, 3.0875, 3.2224, 3.7549, 4.0, 4.7004, 2.0};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<GainPoint> pts;
    for (int rep = 0; rep < 10; ++rep) {
      for (double id : ids) {
        const double k = gains.k1 * id + gains.k2, d = gains.k3 * id;
        pts.push_back({id, k * (1.0 + 0.05 * n(rng)), d * (1.0 + 0.05 * n(rng))});
      }
    }
    const auto c = regress_gain_laws(pts);
    EXPECT_NEAR(c.k1, gains.k1, 0.1 * gains.k1) << "seed " << seed;
    EXPECT_NEAR(c.k2, gains.k2, 0.1 * gains.k2) << "seed " << seed;
    EXPECT_NEAR(c.k3, gains.k3, 0.1 * gains.k3) << "seed " << seed;
  }
}

TEST(RegressFieldLaws, ExactPoints) {
  std::vector<FieldPoint> pts;
  for (double o : {0.025, 0.075, 0.125}) {
    pts.push_back({o, 0.001 / o + 0.05, 10.0 * o * o - 2.0 * o + 4.0});
  }
  const auto c = regress_field_laws(pts);
  EXPECT_NEAR(c.l1, 0.001, 1e-9);
  EXPECT_NEAR(c.l2, 0.05, 1e-9);
  EXPECT_NEAR(c.b3, 10.0, 1e-9);
  EXPECT_NEAR(c.b4, -2.0, 1e-9);
  EXPECT_NEAR(c.b5, 4.0, 1e-9);
}

TEST(RegressFieldLaws, DuplicateDistancesCollapse) {
  std::vector<FieldPoint> pts{{0.025, 0.1, 3.0}, {0.075, 0.05, 3.0}, {0.075, 0.06, 3.1}, {0.025, 0.1, 3.0}};
  EXPECT_EQ(code_of([&] { regress_field_laws(pts); }), ErrorCode::InsufficientConditions);
}

TEST(FitField, RecoversGeneratingParameters) {
  const auto trial = obstacle_trial();
  const auto dmp = model::dmp_for_trial(trial, gains, 1.0);
  const auto rec = record(trial, dmp, {0.02, 3.0}, 2.5);
  ASSERT_TRUE(rec.outcome.success);
  const auto f = fit_field_trial(rec, gains, 1.0);
  EXPECT_NEAR(f.lambda, 0.02, 0.1 * 0.02);
  EXPECT_NEAR(f.beta, 3.0, 0.1 * 3.0);
  EXPECT_LT(f.rmse, 1e-5);
}

TEST(FitField, NullFieldGivesNearZeroLambda) {
  // Obstacle beside the path, inside the field's reach but never touched.
  auto trial = obstacle_trial();
  trial.obstacle = Obstacle{{0.125, 0.004}, {0.125, 0.044}};
  const auto dmp = model::dmp_for_trial(trial, gains, 1.0);
  const auto rec = record(trial, dmp, {0.0, 3.0}, 2.5);
  ASSERT_TRUE(rec.outcome.success);
  const auto f = fit_field_trial(rec, gains, 1.0);
  EXPECT_LT(f.lambda, 1e-4);
}

TEST(FitField, CollidedRecordingIsRejected) {
  const auto trial = obstacle_trial();
  const auto rec = record(trial, model::dmp_for_trial(trial, gains, 1.0), {0.0, 3.0}, 2.5);
  ASSERT_TRUE(rec.outcome.collided);
  EXPECT_EQ(code_of([&] { fit_field_trial(rec, gains, 1.0); }), ErrorCode::CollidedTrialRejected);
}

TEST(Identify, RecoversLawsFromOneSyntheticSetEach) {
  SessionConfig cfg;
  std::vector<RecordedTrial> free, obstacle;
  for (const auto& t : condition_set(cfg, false)) {
    free.push_back(synthesize_recording(t, gains, field_laws, {}, 2.5));
  }
  for (const auto& t : condition_set(cfg, true)) {
    obstacle.push_back(synthesize_recording(t, gains, field_laws, {}, 2.5));
  }
  const auto report = identify(free, obstacle, 1.0);
  EXPECT_TRUE(report.diagnostics.rejected.empty());
  EXPECT_NEAR(report.gain_laws.k1, gains.k1, 0.05 * gains.k1);
  EXPECT_NEAR(report.gain_laws.k2, gains.k2, 0.05 * gains.k2);
  EXPECT_NEAR(report.gain_laws.k3, gains.k3, 0.05 * gains.k3);
  ASSERT_TRUE(report.field_laws.has_value());
  EXPECT_NEAR(report.field_laws->l1, field_laws.l1, 0.1 * field_laws.l1);
  EXPECT_NEAR(report.field_laws->l2, field_laws.l2, 0.1 * field_laws.l2);
  EXPECT_NEAR(report.field_laws->b3, field_laws.b3, 0.1 * std::abs(field_laws.b3));
  EXPECT_NEAR(report.field_laws->b4, field_laws.b4, 0.1 * std::abs(field_laws.b4));
  EXPECT_NEAR(report.field_laws->b5, field_laws.b5, 0.1 * field_laws.b5);

  const auto j = to_json(report);
  EXPECT_EQ(j["kind"], "fit_report");
  const auto person = person_laws_from_json(j);
  EXPECT_EQ(person.gains, report.gain_laws);
  EXPECT_EQ(person.field_laws, report.field_laws);
}

TEST(Identify, FreeOnlyLeavesFieldLawsEmpty) {
  SessionConfig cfg;
  std::vector<RecordedTrial> free;
  for (const auto& t : condition_set(cfg, false)) free.push_back(synthesize_recording(t, gains, field_laws, {}, 2.5));
  const auto report = identify(free, {}, 1.0);
  EXPECT_FALSE(report.field_laws.has_value());
  EXPECT_TRUE(to_json(report)["field_laws"].is_null());
}

TEST(RecordingWindow, StartsAtRestBeforeOnsetAndEndsAtRemoval) {
  TrialOutcome out;
  for (int k = 0; k <= 100; ++k) {
    const double t = k * 0.001;
    const double v = k < 20 ? 0.0 : 0.1;
    out.path.push_back(PathSample{t, {k < 20 ? 0.0 : (k - 19) * 1e-4, 0.0}, {v, 0.0}, {}, {}});
  }
  out.onset_time = 0.02;
  out.target_removed_time = 0.08;
  const auto rec = recorded_trial_from_outcome(free_trial(), out);
  ASSERT_FALSE(rec.states.empty());
  EXPECT_DOUBLE_EQ(rec.states.front().time, 0.019);
  EXPECT_DOUBLE_EQ(rec.states.back().time, 0.08);
}
