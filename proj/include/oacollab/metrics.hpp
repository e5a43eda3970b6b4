#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "oacollab/error.hpp"
#include "oacollab/fitts.hpp"
#include "oacollab/task_engine.hpp"
#include "oacollab/trial.hpp"

namespace oacollab::metrics {

/// Persisted per-trial row.
struct TrialRecord {
  std::string session_id;
  int trial_id = 0;
  Mode mode = Mode::individual;
  TrialSpec spec;
  bool success = false;
  bool collided = false;
  std::optional<double> movement_time;
  std::optional<double> onset_time;
  double target_shown_time = 0.0;
  double target_removed_time = 0.0;
  double id_bits = 0.0;
  std::string path_ref;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline TrialRecord make_record(const std::string& session_id, Mode mode, const task::CompletedTrial& c,
                               std::string path_ref = {}) {
  TrialRecord r;
  r.session_id = session_id;
  r.trial_id = c.trial.trial_id;
  r.mode = mode;
  r.spec = c.trial;
  r.success = c.outcome.success;
  r.collided = c.outcome.collided;
  r.movement_time = c.outcome.movement_time;
  r.onset_time = c.outcome.onset_time;
  r.target_shown_time = c.outcome.target_shown_time;
  r.target_removed_time = c.outcome.target_removed_time;
  r.id_bits = index_of_difficulty(c.trial.target_distance, c.trial.target_width);
  r.path_ref = std::move(path_ref);
  return r;
}

// NASA-TLX -------------------------------------------------------------------

enum class TlxFactor { MD, PD, TD, PE, EF, FR };

inline constexpr std::array<TlxFactor, 6> tlx_factors{TlxFactor::MD, TlxFactor::PD, TlxFactor::TD,
                                                      TlxFactor::PE, TlxFactor::EF, TlxFactor::FR};

constexpr std::string_view to_string(TlxFactor f) {
  switch (f) {
    case TlxFactor::MD: return "MD";
    case TlxFactor::PD: return "PD";
    case TlxFactor::TD: return "TD";
    case TlxFactor::PE: return "PE";
    case TlxFactor::EF: return "EF";
    case TlxFactor::FR: return "FR";
  }
  return "?";
}

inline TlxFactor parse_tlx_factor(std::string_view s) {
  for (TlxFactor f : tlx_factors)
    if (to_string(f) == s) return f;
  throw Error(ErrorCode::InvalidArgument, "unknown TLX factor '" + std::string(s) + "'");
}

/// The 15 factor pairs in canonical order (i < j over MD, PD, TD, PE, EF, FR).
inline std::array<std::pair<TlxFactor, TlxFactor>, 15> tlx_pairs() {
  std::array<std::pair<TlxFactor, TlxFactor>, 15> out;
  std::size_t n = 0;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) out[n++] = {tlx_factors[i], tlx_factors[j]};
  return out;
}

struct TlxResponse {
  std::array<double, 6> ratings{};  ///< 0..100 per factor, MD PD TD PE EF FR
  std::array<int, 6> weights{};     ///< pairwise wins per factor, summing to 15

  friend bool operator==(const TlxResponse&, const TlxResponse&) = default;
};

/// Weights as win counts over the 15 pairwise choices; `winners[i]` must belong to pair i.
inline std::array<int, 6> tlx_weights_from_pairs(const std::array<TlxFactor, 15>& winners) {
  std::array<int, 6> w{};
  const auto pairs = tlx_pairs();
  for (std::size_t i = 0; i < 15; ++i) {
    if (winners[i] != pairs[i].first && winners[i] != pairs[i].second) {
      throw Error(ErrorCode::BadWeights, "pairwise answer " + std::to_string(i) + " is not one of its pair");
    }
    ++w[static_cast<std::size_t>(winners[i])];
  }
  return w;
}

/// Weighted workload Σ rating·weight / 15.
inline double tlx_total(const TlxResponse& resp) {
  int sum = 0;
  for (int w : resp.weights) {
    if (w < 0) throw Error(ErrorCode::BadWeights, "TLX weights must be >= 0");
    sum += w;
  }
  if (sum != 15) throw Error(ErrorCode::BadWeights, "TLX weights must sum to 15");
  double total = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    if (!(resp.ratings[i] >= 0.0 && resp.ratings[i] <= 100.0)) {
      throw Error(ErrorCode::InvalidArgument, "TLX ratings must lie in [0, 100]");
    }
    total += resp.ratings[i] * resp.weights[i];
  }
  return total / 15.0;
}

// Session summary ------------------------------------------------------------

struct ConditionSummary {
  double target_distance = 0.0;
  double target_width = 0.0;
  double id_bits = 0.0;
  int trials = 0;
  int successes = 0;
  int collisions = 0;
  std::optional<double> mean_movement_time;
  std::optional<double> mean_ip;
};

struct SessionSummary {
  std::string session_id;
  Mode mode = Mode::individual;
  std::optional<double> mean_ip;  ///< bits/s over successful trials
  int total = 0;
  int successes = 0;
  int collisions = 0;
  std::vector<ConditionSummary> per_condition;
  std::optional<TlxResponse> tlx;
  std::optional<double> tlx_total;
  bool no_successful_trials = false;

  /// Collision count in "n/total" form.
  std::string collisions_text() const { return std::to_string(collisions) + "/" + std::to_string(total); }
};

/// Summary of one session; IP and MT statistics use successful trials only.
inline SessionSummary summarize_session(const std::vector<TrialRecord>& records,
                                        const std::optional<TlxResponse>& tlx = std::nullopt) {
  if (records.empty()) throw Error(ErrorCode::EmptySession, "no trial records to summarize");
  SessionSummary s;
  s.session_id = records.front().session_id;
  s.mode = records.front().mode;

  std::map<std::tuple<double, double>, ConditionSummary> conditions;
  std::map<std::tuple<double, double>, std::pair<double, double>> sums;  // (Σ MT, Σ IP)
  double ip_sum = 0.0;
  for (const auto& r : records) {
    if (r.session_id != s.session_id) throw Error(ErrorCode::InvalidArgument, "records span more than one session");
    ++s.total;
    const auto key = std::make_tuple(r.spec.target_distance, r.spec.target_width);
    auto& c = conditions[key];
    c.target_distance = r.spec.target_distance;
    c.target_width = r.spec.target_width;
    c.id_bits = r.id_bits;
    ++c.trials;
    if (r.collided) {
      ++s.collisions;
      ++c.collisions;
    }
    if (r.success && r.movement_time) {
      const double ip = index_of_performance(r.id_bits, *r.movement_time);
      ++s.successes;
      ++c.successes;
      ip_sum += ip;
      sums[key].first += *r.movement_time;
      sums[key].second += ip;
    }
  }
  if (s.successes > 0) {
    s.mean_ip = ip_sum / s.successes;
  } else {
    s.no_successful_trials = true;
  }
  for (auto& [key, c] : conditions) {
    if (c.successes > 0) {
      c.mean_movement_time = sums[key].first / c.successes;
      c.mean_ip = sums[key].second / c.successes;
    }
    s.per_condition.push_back(c);
  }
  if (tlx) {
    s.tlx_total = tlx_total(*tlx);
    s.tlx = tlx;
  }
  return s;
}

// JSON ---------------------------------------------------------------------

inline nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json to_json(const TlxResponse& t) {
  nlohmann::json ratings = nlohmann::json::object(), weights = nlohmann::json::object();
  for (std::size_t i = 0; i < 6; ++i) {
    ratings[std::string(to_string(tlx_factors[i]))] = t.ratings[i];
    weights[std::string(to_string(tlx_factors[i]))] = t.weights[i];
  }
  return {{"ratings", ratings}, {"weights", weights}};
}

/// Accepts {"ratings": {...}, "weights": {...}} or {"ratings": {...}, "pairs": [15 factor codes]}.
inline TlxResponse tlx_from_json(const nlohmann::json& j) {
  try {
    TlxResponse t;
    const auto& r = j.at("ratings");
    for (std::size_t i = 0; i < 6; ++i) t.ratings[i] = r.at(std::string(to_string(tlx_factors[i]))).get<double>();
    if (j.contains("weights")) {
      const auto& w = j.at("weights");
      for (std::size_t i = 0; i < 6; ++i) t.weights[i] = w.at(std::string(to_string(tlx_factors[i]))).get<int>();
    } else {
      const auto& p = j.at("pairs");
      if (!p.is_array() || p.size() != 15) throw Error(ErrorCode::BadWeights, "exactly 15 pairwise answers required");
      std::array<TlxFactor, 15> winners{};
      for (std::size_t i = 0; i < 15; ++i) winners[i] = parse_tlx_factor(p[i].get<std::string>());
      t.weights = tlx_weights_from_pairs(winners);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed TLX response: ") + e.what());
  }
}

inline nlohmann::json to_json(const SessionSummary& s) {
  nlohmann::json j;
  j["kind"] = "session_summary";
  j["session_id"] = s.session_id;
  j["mode"] = std::string(to_string(s.mode));
  j["mean_ip"] = opt_json(s.mean_ip);
  j["total"] = s.total;
  j["successes"] = s.successes;
  j["collisions"] = s.collisions;
  j["collisions_text"] = s.collisions_text();
  j["no_successful_trials"] = s.no_successful_trials;
  j["per_condition"] = nlohmann::json::array();
  for (const auto& c : s.per_condition) {
    j["per_condition"].push_back({{"target_distance", c.target_distance},
                                  {"target_width", c.target_width},
                                  {"id_bits", c.id_bits},
                                  {"trials", c.trials},
                                  {"successes", c.successes},
                                  {"collisions", c.collisions},
                                  {"mean_movement_time", opt_json(c.mean_movement_time)},
                                  {"mean_ip", opt_json(c.mean_ip)}});
  }
  j["tlx"] = s.tlx ? to_json(*s.tlx) : nlohmann::json(nullptr);
  j["tlx_total"] = opt_json(s.tlx_total);
  return j;
}

/// Table-style collision overview: one row per session, "n/total" cells.
inline std::string collision_table(const std::vector<SessionSummary>& sessions) {
  std::string out = "experiment set | collisions\n";
  for (const auto& s : sessions) out += std::string(to_string(s.mode)) + " | " + s.collisions_text() + "\n";
  return out;
}

}  // namespace oacollab::metrics
