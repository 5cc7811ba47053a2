#ifndef SIXWHEEL_Q_TUNER_HPP_
#define SIXWHEEL_Q_TUNER_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sixwheel/errors.hpp"
#include "sixwheel/fuzzy_ctrl.hpp"
#include "sixwheel/geo_core.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

inline constexpr int kTunerActions = 9;
inline constexpr double kRewardDeadband = 1e-3;  // m
inline constexpr double kMinWidthX = 0.1;
inline constexpr double kMinWidthTheta = 0.01;

struct TunerConfig {
  double alpha = 0.3;
  double gamma = 0.9;
  double epsilon = 0.2;
  double epsilon_decay = 0.99;  // applied once per episode
  double delta_x = 0.5;
  double delta_theta = 0.05;
  double reward_gain = 1.0;
  int n_lat_bins = 5;
  int n_head_bins = 5;
  // State normalization; match the controller saturations.
  double x_sat = 1.0;
  double theta_sat = 30.0;
  // Widest the moderate set may grow on either side of L2.
  double max_width_x = 20.0;
  double max_width_theta = 2.0;
  // Sim ticks each chosen action is held for before its reward is scored.
  int decision_ticks = 1;

  int n_states() const { return n_lat_bins * n_head_bins; }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma", "must be in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon", "must be in [0, 1]");
    if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw ConfigError("epsilon_decay", "must be in (0, 1]");
    if (!(delta_x > 0.0)) throw ConfigError("delta_x", "must be > 0");
    if (!(delta_theta > 0.0)) throw ConfigError("delta_theta", "must be > 0");
    if (!(reward_gain >= 0.0)) throw ConfigError("reward_gain", "must be >= 0");
    if (n_lat_bins < 1) throw ConfigError("n_lat_bins", "must be >= 1");
    if (n_head_bins < 1) throw ConfigError("n_head_bins", "must be >= 1");
    if (!(x_sat > 0.0)) throw ConfigError("x_sat", "must be > 0");
    if (!(theta_sat > 0.0)) throw ConfigError("theta_sat", "must be > 0");
    if (!(max_width_x > kMinWidthX)) throw ConfigError("max_width_x", "must exceed the minimum width");
    if (decision_ticks < 1) throw ConfigError("decision_ticks", "must be >= 1");
    if (!(max_width_theta > kMinWidthTheta)) throw ConfigError("max_width_theta", "must exceed the minimum width");
  }
};

class QTable {
 public:
  QTable(int n_states, int n_actions)
      : n_states_(n_states), n_actions_(n_actions),
        values_(static_cast<std::size_t>(n_states) * static_cast<std::size_t>(n_actions), 0.0) {
    if (n_states < 1 || n_actions < 1) throw ConfigError("q", "table dimensions must be positive");
  }

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }

  double& operator()(int s, int a) { return values_[cell(s, a)]; }
  double operator()(int s, int a) const { return values_[cell(s, a)]; }

  std::span<const double> row(int s) const {
    return {values_.data() + cell(s, 0), static_cast<std::size_t>(n_actions_)};
  }

  double row_max(int s) const {
    const auto r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t cell(int s, int a) const {
    if (s < 0 || s >= n_states_ || a < 0 || a >= n_actions_) throw DimensionError("Q-table index out of range");
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) + static_cast<std::size_t>(a);
  }

  int n_states_;
  int n_actions_;
  std::vector<double> values_;
};

/// The two input partitions the tuner adjusts. Only L1 and L3 move.
struct InputParams {
  MembershipTriple x = lateral_universe_default();
  MembershipTriple theta = heading_universe_default();

  friend bool operator==(const InputParams&, const InputParams&) = default;
};

inline InputParams input_params_of(const ControllerConfig& c) { return {c.x_params, c.theta_params}; }

inline ControllerConfig with_input_params(ControllerConfig c, const InputParams& p) {
  c.x_params = p.x;
  c.theta_params = p.theta;
  return c;
}

inline int discretize_state(const OffsetPair& offsets, const TunerConfig& cfg) {
  auto bin = [](double normalized, int bins) {
    const double v = std::clamp(normalized, 0.0, 1.0);
    return std::min(static_cast<int>(std::floor(v * bins)), bins - 1);
  };
  const int lat = bin(std::abs(offsets.lateral) / cfg.x_sat, cfg.n_lat_bins);
  const int head = bin(std::abs(offsets.heading) / cfg.theta_sat, cfg.n_head_bins);
  return lat * cfg.n_head_bins + head;
}

/// Epsilon-greedy choice; greedy ties go to the lowest action index.
inline int select_action(int state, const QTable& q, double epsilon, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, q.n_actions() - 1);
    return pick(rng);
  }
  const auto r = q.row(state);
  return static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
}

/// Action 0 is a no-op; actions 1..8 step X_L1, X_L3, theta_L1, theta_L3
/// down then up by the configured delta. L2 never moves.
inline InputParams apply_action(int action, InputParams p, const TunerConfig& cfg) {
  if (action < 0 || action >= kTunerActions) throw DimensionError("action out of range");
  if (action == 0) return p;
  const int which = (action - 1) / 2;
  const double sign = (action - 1) % 2 == 0 ? -1.0 : 1.0;
  switch (which) {
    case 0: p.x.l1 += sign * cfg.delta_x; break;
    case 1: p.x.l3 += sign * cfg.delta_x; break;
    case 2: p.theta.l1 += sign * cfg.delta_theta; break;
    default: p.theta.l3 += sign * cfg.delta_theta; break;
  }
  auto clamp_triple = [](MembershipTriple& t, double min_width, double max_width) {
    t.l1 = std::clamp(t.l1, std::max(t.l0, t.l2 - max_width), t.l2 - min_width);
    t.l3 = std::clamp(t.l3, t.l2 + min_width, std::min(t.l4, t.l2 + max_width));
  };
  clamp_triple(p.x, kMinWidthX, cfg.max_width_x);
  clamp_triple(p.theta, kMinWidthTheta, cfg.max_width_theta);
  return p;
}

inline double reward(double prev_abs_err, double cur_abs_err, double gain) {
  if (cur_abs_err < prev_abs_err - kRewardDeadband) return gain;
  if (cur_abs_err > prev_abs_err + kRewardDeadband) return -gain;
  return 0.0;
}

inline void q_update(QTable& q, int s, int a, double r, int s_next, double alpha, double gamma) {
  const double target = r + gamma * q.row_max(s_next);
  q(s, a) += alpha * (target - q(s, a));
}

/// Learner state carried across episodes.
struct TunerState {
  InputParams params;
  double prev_abs_err = 0.0;
  QTable q;
  std::mt19937_64 rng;
  double epsilon = 0.2;

  TunerState(const InputParams& p, const TunerConfig& cfg, std::uint64_t seed)
      : params(p), q(cfg.n_states(), kTunerActions), rng(seed), epsilon(cfg.epsilon) {}
};

inline Json tuner_config_to_json(const TunerConfig& c) {
  return {{"alpha", c.alpha},         {"gamma", c.gamma},
          {"epsilon", c.epsilon},     {"epsilon_decay", c.epsilon_decay},
          {"delta_x", c.delta_x},     {"delta_theta", c.delta_theta},
          {"reward_gain", c.reward_gain}, {"n_lat_bins", c.n_lat_bins},
          {"n_head_bins", c.n_head_bins}, {"x_sat", c.x_sat},
          {"theta_sat", c.theta_sat}, {"max_width_x", c.max_width_x},
          {"max_width_theta", c.max_width_theta}, {"decision_ticks", c.decision_ticks}};
}

inline TunerConfig tuner_config_from_json(const Json& j, TunerConfig base = {}, const std::string& where = "tuner") {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  using namespace json_util;
  base.alpha = number_or(j, "alpha", base.alpha, where);
  base.gamma = number_or(j, "gamma", base.gamma, where);
  base.epsilon = number_or(j, "epsilon", base.epsilon, where);
  base.epsilon_decay = number_or(j, "epsilon_decay", base.epsilon_decay, where);
  base.delta_x = number_or(j, "delta_x", base.delta_x, where);
  base.delta_theta = number_or(j, "delta_theta", base.delta_theta, where);
  base.reward_gain = number_or(j, "reward_gain", base.reward_gain, where);
  base.n_lat_bins = static_cast<int>(integer_or(j, "n_lat_bins", base.n_lat_bins, where));
  base.n_head_bins = static_cast<int>(integer_or(j, "n_head_bins", base.n_head_bins, where));
  base.x_sat = number_or(j, "x_sat", base.x_sat, where);
  base.theta_sat = number_or(j, "theta_sat", base.theta_sat, where);
  base.max_width_x = number_or(j, "max_width_x", base.max_width_x, where);
  base.max_width_theta = number_or(j, "max_width_theta", base.max_width_theta, where);
  base.decision_ticks = static_cast<int>(integer_or(j, "decision_ticks", base.decision_ticks, where));
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join(where, e.field()), e.detail());
  }
  return base;
}

/// `{"params": {...}, "q": [[...]], "config": {...}}`
inline Json tuner_to_json(const TunerState& state, const TunerConfig& cfg) {
  Json q = Json::array();
  for (int s = 0; s < state.q.n_states(); ++s) {
    const auto r = state.q.row(s);
    q.push_back(Json(std::vector<double>(r.begin(), r.end())));
  }
  return {{"params",
           {{"x_l1", state.params.x.l1},
            {"x_l2", state.params.x.l2},
            {"x_l3", state.params.x.l3},
            {"theta_l1", state.params.theta.l1},
            {"theta_l2", state.params.theta.l2},
            {"theta_l3", state.params.theta.l3}}},
          {"q", q},
          {"config", tuner_config_to_json(cfg)}};
}

struct LoadedTuner {
  InputParams params;
  QTable q;
  TunerConfig config;
};

inline LoadedTuner tuner_from_json(const Json& j, InputParams base = {}) {
  using namespace json_util;
  const TunerConfig cfg = tuner_config_from_json(j.contains("config") ? j.at("config") : Json(), {}, "config");
  const Json& p = require(j, "params", "");
  base.x.l1 = number_or(p, "x_l1", base.x.l1, "params");
  base.x.l2 = number_or(p, "x_l2", base.x.l2, "params");
  base.x.l3 = number_or(p, "x_l3", base.x.l3, "params");
  base.theta.l1 = number_or(p, "theta_l1", base.theta.l1, "params");
  base.theta.l2 = number_or(p, "theta_l2", base.theta.l2, "params");
  base.theta.l3 = number_or(p, "theta_l3", base.theta.l3, "params");
  if (!base.x.valid()) throw ConfigError("params", "lateral breakpoints out of order");
  if (!base.theta.valid()) throw ConfigError("params", "heading breakpoints out of order");
  QTable q(cfg.n_states(), kTunerActions);
  if (j.contains("q")) {
    const Json& rows = array(j.at("q"), "q");
    if (static_cast<int>(rows.size()) != cfg.n_states()) throw ConfigError("q", "row count does not match the state count");
    for (int s = 0; s < cfg.n_states(); ++s) {
      const std::string rp = index("q", static_cast<std::size_t>(s));
      const Json& row = array(rows[static_cast<std::size_t>(s)], rp);
      if (static_cast<int>(row.size()) != kTunerActions) throw ConfigError(rp, "expected 9 action values");
      for (int a = 0; a < kTunerActions; ++a) q(s, a) = as_number(row[static_cast<std::size_t>(a)], index(rp, static_cast<std::size_t>(a)));
    }
  }
  return {base, q, cfg};
}

}  // namespace sixwheel

#endif  // SIXWHEEL_Q_TUNER_HPP_
