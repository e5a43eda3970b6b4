#pragma once

// Identification of a person's model coefficients from recorded trials.
//
// Stage 1 fits (K, D) per obstacle-free trial and regresses them on the index of
// difficulty. Stage 2 freezes those gain laws, fits (lambda, beta) per successful
// obstacle trial and regresses them on the obstacle distance.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/nelder_mead.hpp"
#include "oacollab/oa_model.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::fit {

struct RecordedTrial {
  TrialSpec trial;
  std::vector<BodyState> states;  ///< uniformly sampled
  TrialOutcome outcome;
};

struct DmpFit {
  double spring_k = 0.0;
  double damping_d = 0.0;
  double rmse = 0.0;  ///< m
  int evaluations = 0;
  bool ill_conditioned = false;
  std::string note;
};

struct FieldFit {
  double lambda = 0.0;
  double beta = 0.0;
  double rmse = 0.0;  ///< m
  int evaluations = 0;
};

struct FitSettings {
  int max_evaluations = 2000;
  double tolerance = 1e-10;   ///< on the spread of the RMSE objective over the simplex, m
  double min_duration = 0.3;  ///< s
  double beta_max = 20.0;     ///< field fits at this bound trade lambda against beta and are rejected
  model::FieldSettings field;
  double symmetry_seed = model::PlanOptions{}.symmetry_seed;
};

namespace detail {

inline double sample_spacing(const RecordedTrial& rec, double min_duration) {
  if (rec.states.size() < 2) throw Error(ErrorCode::TrajectoryTooShort, "recording has fewer than two samples");
  const double duration = rec.states.back().time - rec.states.front().time;
  if (duration < min_duration) throw Error(ErrorCode::TrajectoryTooShort, "recording shorter than the minimum duration");
  const double dt = duration / static_cast<double>(rec.states.size() - 1);
  for (std::size_t i = 1; i < rec.states.size(); ++i) {
    const double step = rec.states[i].time - rec.states[i - 1].time;
    if (std::abs(step - dt) > 1e-6 * dt) throw Error(ErrorCode::InvalidArgument, "recording is not uniformly sampled");
  }
  if (dt > PlantParams::max_dt) throw Error(ErrorCode::InvalidArgument, "recording sample spacing exceeds 0.01 s");
  return dt;
}

/// Side of the start→target line the recording strays to; +1 when it never leaves the line.
inline int detour_side(const RecordedTrial& rec) {
  const Vec2 axis = rec.trial.target_center - rec.trial.start;
  double extreme = 0.0;
  for (const auto& s : rec.states) {
    const double lateral = cross(axis, s.position - rec.trial.start);
    if (std::abs(lateral) > std::abs(extreme)) extreme = lateral;
  }
  return extreme < 0.0 ? -1 : 1;
}

/// Position RMSE between the recording and a model rollout with the given parameters.
inline double rollout_rmse(const RecordedTrial& rec, const model::DmpParams& dmp, const std::optional<Obstacle>& obstacle,
                           const model::FieldParams& field, const model::PlanOptions& opt) {
  double sse = 0.0;
  const Obstacle* obs = obstacle ? &*obstacle : nullptr;
  model::integrate_oa(rec.states.front().position, rec.trial.target_center, dmp, obs, field, opt, rec.states.size(),
                      [&](std::size_t k, const Vec2& x, const Vec2&) {
                        const Vec2 e = x - rec.states[k].position;
                        sse += dot(e, e);
                      });
  return std::sqrt(sse / static_cast<double>(rec.states.size()));
}

inline double path_length(const RecordedTrial& rec) {
  double len = 0.0;
  for (std::size_t i = 1; i < rec.states.size(); ++i) len += norm(rec.states[i].position - rec.states[i - 1].position);
  return len;
}

}  // namespace detail

/// Fits (K, D) of the obstacle-free DMP to one recording by simplex search on position RMSE.
inline DmpFit fit_dmp_trial(const RecordedTrial& rec, double tau, const FitSettings& settings = {}) {
  if (rec.trial.obstacle) throw Error(ErrorCode::InvalidArgument, "fit_dmp_trial expects an obstacle-free trial");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be > 0");
  const double dt = detail::sample_spacing(rec, settings.min_duration);

  model::PlanOptions opt;
  opt.tau = tau;
  opt.dt = dt;

  auto objective = [&](const optim::Point<2>& p) {
    if (!(p[0] > 0.0) || !(p[1] >= 0.0)) return std::numeric_limits<double>::infinity();
    return detail::rollout_rmse(rec, model::DmpParams{p[0], p[1], tau}, std::nullopt, model::FieldParams{}, opt);
  };

  const double k0 = 25.0 / (tau * tau);
  const double d0 = 2.0 * std::sqrt(k0);
  optim::NelderMeadOptions<2> nm;
  nm.max_evaluations = settings.max_evaluations;
  nm.f_tolerance = settings.tolerance;
  const auto res = optim::nelder_mead<2>(objective, {k0, d0}, nm);
  if (!res.converged) {
    throw Error(ErrorCode::FitDiverged, "DMP fit for trial " + std::to_string(rec.trial.trial_id) +
                                            " did not converge within " + std::to_string(nm.max_evaluations) +
                                            " evaluations");
  }

  DmpFit out{res.x[0], res.x[1], res.f, res.evaluations, false, {}};
  if (detail::path_length(rec) < 1e-6) {
    out.ill_conditioned = true;
    out.note = "recording shows no movement; K and D are not identifiable";
  } else if (out.spring_k < 1e-3 * k0 || out.spring_k > 1e3 * k0) {
    out.ill_conditioned = true;
    out.note = "fitted stiffness at the edge of the admissible range";
  }
  return out;
}

struct GainPoint {
  double id_bits = 0.0;
  double spring_k = 0.0;
  double damping_d = 0.0;
};

struct FieldPoint {
  double obstacle_distance = 0.0;
  double lambda = 0.0;
  double beta = 0.0;
};

namespace detail {

template <class T, class Key>
std::size_t distinct_count(const std::vector<T>& pts, Key key) {
  std::vector<double> keys;
  for (const auto& p : pts) keys.push_back(key(p));
  std::sort(keys.begin(), keys.end());
  std::size_t count = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i == 0 || std::abs(keys[i] - keys[i - 1]) > 1e-12 * std::max(1.0, std::abs(keys[i]))) ++count;
  }
  return count;
}

inline Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  return a.colPivHouseholderQr().solve(b);
}

}  // namespace detail

/// Ordinary least squares K = k1·ID + k2 and, through the origin, D = k3·ID.
inline model::GainLawCoeffs regress_gain_laws(const std::vector<GainPoint>& points) {
  if (detail::distinct_count(points, [](const GainPoint& p) { return p.id_bits; }) < 3) {
    throw Error(ErrorCode::InsufficientConditions, "gain-law regression needs at least 3 distinct ID values");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd k(n);
  double sxy = 0.0, sxx = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    a(i, 0) = p.id_bits;
    a(i, 1) = 1.0;
    k(i) = p.spring_k;
    sxy += p.id_bits * p.damping_d;
    sxx += p.id_bits * p.id_bits;
  }
  const Eigen::VectorXd kc = detail::least_squares(a, k);
  return {kc(0), kc(1), sxy / sxx};
}

/// Least squares of lambda on (1/o, 1) and beta on (o², o, 1).
inline model::FieldLawCoeffs regress_field_laws(const std::vector<FieldPoint>& points) {
  if (detail::distinct_count(points, [](const FieldPoint& p) { return p.obstacle_distance; }) < 3) {
    throw Error(ErrorCode::InsufficientConditions, "field-law regression needs at least 3 distinct obstacle distances");
  }
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd al(n, 2), ab(n, 3);
  Eigen::VectorXd lam(n), beta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    const double o = p.obstacle_distance;
    if (!(o > 0.0)) throw Error(ErrorCode::ZeroObstacleDistance, "obstacle distance must be > 0");
    al(i, 0) = 1.0 / o;
    al(i, 1) = 1.0;
    ab(i, 0) = o * o;
    ab(i, 1) = o;
    ab(i, 2) = 1.0;
    lam(i) = p.lambda;
    beta(i) = p.beta;
  }
  const Eigen::VectorXd lc = detail::least_squares(al, lam);
  const Eigen::VectorXd bc = detail::least_squares(ab, beta);
  return {lc(0), lc(1), bc(0), bc(1), bc(2)};
}

/// Fits (lambda, beta) of the full model to one successful obstacle recording, gains frozen.
inline FieldFit fit_field_trial(const RecordedTrial& rec, const model::GainLawCoeffs& gains, double tau,
                                const FitSettings& settings = {}) {
  if (!rec.trial.obstacle) throw Error(ErrorCode::InvalidArgument, "fit_field_trial expects an obstacle trial");
  if (rec.outcome.collided || !rec.outcome.success) {
    throw Error(ErrorCode::CollidedTrialRejected, "trial " + std::to_string(rec.trial.trial_id) + " was not a success");
  }
  const double dt = detail::sample_spacing(rec, settings.min_duration);
  const model::DmpParams dmp = model::dmp_for_trial(rec.trial, gains, tau);

  model::PlanOptions opt;
  opt.tau = tau;
  opt.dt = dt;
  opt.field = settings.field;
  opt.side = detail::detour_side(rec);
  opt.symmetry_seed = settings.symmetry_seed;

  auto objective = [&](const optim::Point<2>& p) {
    if (!(p[0] >= 0.0) || !(p[1] > 1.0) || p[1] > settings.beta_max) return std::numeric_limits<double>::infinity();
    return detail::rollout_rmse(rec, dmp, rec.trial.obstacle, model::FieldParams{p[0], p[1]}, opt);
  };

  optim::NelderMeadOptions<2> nm;
  nm.max_evaluations = settings.max_evaluations;
  nm.f_tolerance = settings.tolerance;
  const auto res = optim::nelder_mead<2>(objective, {0.01, 4.0}, nm);
  if (!res.converged) {
    throw Error(ErrorCode::FitDiverged, "field fit for trial " + std::to_string(rec.trial.trial_id) +
                                            " did not converge within " + std::to_string(nm.max_evaluations) +
                                            " evaluations");
  }
  if (res.x[1] >= 0.99 * settings.beta_max) {
    throw Error(ErrorCode::FitDiverged, "field fit for trial " + std::to_string(rec.trial.trial_id) +
                                            " ran into the beta bound; lambda and beta are not identifiable");
  }
  return {res.x[0], res.x[1], res.f, res.evaluations};
}

struct PerTrialFit {
  int trial_id = 0;
  double id_bits = 0.0;
  std::optional<double> obstacle_distance;
  double spring_k = 0.0;
  double damping_d = 0.0;
  std::optional<double> lambda;
  std::optional<double> beta;
  double rmse = 0.0;
};

struct RejectedTrial {
  int trial_id = 0;
  std::string reason;
};

struct FitDiagnostics {
  double gain_k_residual_rms = 0.0;
  double gain_d_residual_rms = 0.0;
  std::optional<double> lambda_residual_rms;
  std::optional<double> beta_residual_rms;
  double max_trial_rmse = 0.0;
  double mean_trial_rmse = 0.0;
  std::vector<RejectedTrial> rejected;
  std::vector<std::string> notes;
};

struct FitReport {
  double tau = 1.0;
  std::vector<PerTrialFit> per_trial;
  model::GainLawCoeffs gain_laws;
  std::optional<model::FieldLawCoeffs> field_laws;
  FitDiagnostics diagnostics;
};

/// Two-stage identification over a person's obstacle-free and obstacle recordings.
/// Per-trial fits are regressed directly; no per-condition averaging is applied first.
inline FitReport identify(const std::vector<RecordedTrial>& obstacle_free, const std::vector<RecordedTrial>& with_obstacle,
                          double tau, const FitSettings& settings = {}) {
  FitReport report;
  report.tau = tau;
  auto& diag = report.diagnostics;

  std::vector<GainPoint> gain_points;
  for (const auto& rec : obstacle_free) {
    try {
      const DmpFit f = fit_dmp_trial(rec, tau, settings);
      if (f.ill_conditioned) {
        diag.rejected.push_back({rec.trial.trial_id, f.note});
        continue;
      }
      gain_points.push_back({rec.trial.id_bits, f.spring_k, f.damping_d});
      report.per_trial.push_back({rec.trial.trial_id, rec.trial.id_bits, std::nullopt, f.spring_k, f.damping_d,
                                  std::nullopt, std::nullopt, f.rmse});
    } catch (const Error& e) {
      diag.rejected.push_back({rec.trial.trial_id, e.what()});
    }
  }
  report.gain_laws = regress_gain_laws(gain_points);

  std::vector<FieldPoint> field_points;
  for (const auto& rec : with_obstacle) {
    try {
      const FieldFit f = fit_field_trial(rec, report.gain_laws, tau, settings);
      const double o = *rec.trial.obstacle_distance();
      field_points.push_back({o, f.lambda, f.beta});
      report.per_trial.push_back({rec.trial.trial_id, rec.trial.id_bits, o,
                                  model::stiffness_from_id(rec.trial.id_bits, report.gain_laws),
                                  model::damping_from_id(rec.trial.id_bits, report.gain_laws), f.lambda, f.beta,
                                  f.rmse});
    } catch (const Error& e) {
      diag.rejected.push_back({rec.trial.trial_id, e.what()});
    }
  }
  try {
    report.field_laws = regress_field_laws(field_points);
    double o_min = field_points.front().obstacle_distance, o_max = o_min;
    for (const auto& p : field_points) {
      o_min = std::min(o_min, p.obstacle_distance);
      o_max = std::max(o_max, p.obstacle_distance);
    }
    report.field_laws->check_range(o_min, o_max);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InsufficientConditions) {
      if (!with_obstacle.empty()) diag.notes.push_back(e.what());
    } else if (e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::BetaOutOfRange) {
      diag.notes.push_back(std::string("field laws dropped: ") + e.what());
      report.field_laws.reset();
    } else {
      throw;
    }
  }

  auto rms = [](const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return r.empty() ? 0.0 : std::sqrt(s / static_cast<double>(r.size()));
  };
  std::vector<double> rk, rd, rl, rb;
  for (const auto& p : gain_points) {
    rk.push_back(p.spring_k - (report.gain_laws.k1 * p.id_bits + report.gain_laws.k2));
    rd.push_back(p.damping_d - report.gain_laws.k3 * p.id_bits);
  }
  diag.gain_k_residual_rms = rms(rk);
  diag.gain_d_residual_rms = rms(rd);
  if (report.field_laws) {
    const auto& fl = *report.field_laws;
    for (const auto& p : field_points) {
      const double o = p.obstacle_distance;
      rl.push_back(p.lambda - (fl.l1 / o + fl.l2));
      rb.push_back(p.beta - (fl.b3 * o * o + fl.b4 * o + fl.b5));
    }
    diag.lambda_residual_rms = rms(rl);
    diag.beta_residual_rms = rms(rb);
  }
  double sum = 0.0;
  for (const auto& t : report.per_trial) {
    diag.max_trial_rmse = std::max(diag.max_trial_rmse, t.rmse);
    sum += t.rmse;
  }
  if (!report.per_trial.empty()) diag.mean_trial_rmse = sum / static_cast<double>(report.per_trial.size());
  return report;
}

/// Noise-free recording of a trial produced by the model itself with the given laws.
inline RecordedTrial synthesize_recording(const TrialSpec& trial, const model::GainLawCoeffs& gains,
                                          const std::optional<model::FieldLawCoeffs>& field_laws,
                                          const model::PlanOptions& opt, double duration) {
  model::PlanOptions o = opt;
  o.horizon = duration;
  const model::DmpParams dmp = model::dmp_for_trial(trial, gains, o.tau);
  const model::FieldParams field = model::field_for_trial(trial, field_laws);
  const auto raw = model::rollout(trial.start, trial.target_center, dmp, trial.obstacle, field, o);

  RecordedTrial rec;
  rec.trial = trial;
  rec.states.reserve(raw.trajectory.samples.size());
  for (std::size_t k = 0; k < raw.trajectory.samples.size(); ++k) {
    const auto& s = raw.trajectory.samples[k];
    rec.states.push_back(BodyState{s.position, s.velocity, static_cast<double>(k) * o.dt});
  }
  rec.outcome.collided = raw.collided;
  rec.outcome.success = !raw.collided && trial.inside_target(rec.states.back().position);
  return rec;
}

/// Recording window of a logged trial: from the last resting sample before onset to target removal.
inline RecordedTrial recorded_trial_from_outcome(const TrialSpec& trial, const TrialOutcome& outcome,
                                                 double rest_speed = 0.002) {
  RecordedTrial rec;
  rec.trial = trial;
  rec.outcome = outcome;
  const auto& path = outcome.path;
  std::size_t first = 0;
  if (outcome.onset_time) {
    std::size_t onset = 0;
    while (onset < path.size() && path[onset].t < *outcome.onset_time) ++onset;
    first = std::min(onset, path.empty() ? 0 : path.size() - 1);
    while (first > 0 && norm(path[first].velocity) > rest_speed) --first;
  }
  for (std::size_t i = first; i < path.size() && path[i].t <= outcome.target_removed_time + 1e-12; ++i) {
    rec.states.push_back(BodyState{path[i].position, path[i].velocity, path[i].t});
  }
  if (!rec.states.empty()) rec.trial.start = rec.states.front().position;
  return rec;
}

// JSON ---------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const PerTrialFit& p) {
  j = nlohmann::json{{"trial_id", p.trial_id}, {"id_bits", p.id_bits},  {"K", p.spring_k},
                     {"D", p.damping_d},       {"rmse", p.rmse}};
  j["o"] = p.obstacle_distance ? nlohmann::json(*p.obstacle_distance) : nlohmann::json(nullptr);
  j["lambda"] = p.lambda ? nlohmann::json(*p.lambda) : nlohmann::json(nullptr);
  j["beta"] = p.beta ? nlohmann::json(*p.beta) : nlohmann::json(nullptr);
}

inline nlohmann::json gain_laws_json(const model::GainLawCoeffs& g) {
  return {{"k1", g.k1}, {"k2", g.k2}, {"k3", g.k3}};
}

inline nlohmann::json field_laws_json(const model::FieldLawCoeffs& f) {
  return {{"l1", f.l1}, {"l2", f.l2}, {"b3", f.b3}, {"b4", f.b4}, {"b5", f.b5}};
}

inline nlohmann::json to_json(const FitReport& r) {
  nlohmann::json j;
  j["kind"] = "fit_report";
  j["tau"] = r.tau;
  j["per_trial"] = r.per_trial;
  j["gain_laws"] = gain_laws_json(r.gain_laws);
  j["field_laws"] = r.field_laws ? field_laws_json(*r.field_laws) : nlohmann::json(nullptr);
  nlohmann::json d;
  d["gain_k_residual_rms"] = r.diagnostics.gain_k_residual_rms;
  d["gain_d_residual_rms"] = r.diagnostics.gain_d_residual_rms;
  d["lambda_residual_rms"] = r.diagnostics.lambda_residual_rms ? nlohmann::json(*r.diagnostics.lambda_residual_rms)
                                                               : nlohmann::json(nullptr);
  d["beta_residual_rms"] = r.diagnostics.beta_residual_rms ? nlohmann::json(*r.diagnostics.beta_residual_rms)
                                                           : nlohmann::json(nullptr);
  d["max_trial_rmse"] = r.diagnostics.max_trial_rmse;
  d["mean_trial_rmse"] = r.diagnostics.mean_trial_rmse;
  d["rejected"] = nlohmann::json::array();
  for (const auto& rej : r.diagnostics.rejected) d["rejected"].push_back({{"trial_id", rej.trial_id}, {"reason", rej.reason}});
  d["notes"] = r.diagnostics.notes;
  j["diagnostics"] = d;
  return j;
}

/// Person model (laws and tau) as stored in a fit report document.
struct PersonLaws {
  double tau = 1.0;
  model::GainLawCoeffs gains;
  std::optional<model::FieldLawCoeffs> field_laws;
};

inline PersonLaws person_laws_from_json(const nlohmann::json& j) {
  try {
    PersonLaws p;
    p.tau = j.value("tau", 1.0);
    const auto& g = j.at("gain_laws");
    p.gains = {g.at("k1").get<double>(), g.at("k2").get<double>(), g.at("k3").get<double>()};
    if (j.contains("field_laws") && !j.at("field_laws").is_null()) {
      const auto& f = j.at("field_laws");
      p.field_laws = model::FieldLawCoeffs{f.at("l1").get<double>(), f.at("l2").get<double>(), f.at("b3").get<double>(),
                                           f.at("b4").get<double>(), f.at("b5").get<double>()};
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed model parameters: ") + e.what());
  }
}

}  // namespace oacollab::fit
