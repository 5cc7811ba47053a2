#ifndef SIXWHEEL_TRAINING_HPP_
#define SIXWHEEL_TRAINING_HPP_

#include <cmath>
#include <optional>

#include "sixwheel/q_tuner.hpp"
#include "sixwheel/sim_world.hpp"

namespace sixwheel {

struct EpisodeResult {
  double ise = 0.0;  // sum of observed lateral^2 * dt
  RunLog log;
};

namespace detail {

inline double abs_lateral(const std::optional<OffsetPair>& o) { return o ? std::abs(o->lateral) : 0.0; }

inline int state_of(const std::optional<OffsetPair>& o, const TunerConfig& cfg) {
  return discretize_state(o.value_or(OffsetPair{}), cfg);
}

}  // namespace detail

/// One learning episode over a fresh run of `scenario`. Every tick the
/// tuner picks an action from the observed state, applies it to the live
/// breakpoints, lets the simulator advance one tick and learns from the
/// change in |lateral| seen at the next observation. The learned
/// breakpoints carry over into the next episode.
inline EpisodeResult train_episode(const Scenario& scenario, TunerState& tuner, const TunerConfig& cfg,
                                   bool keep_log = false) {
  cfg.validate();
  Simulation sim(scenario, scenario.bundle);
  EpisodeResult out;
  std::optional<OffsetPair> obs = sim.observe();
  tuner.prev_abs_err = detail::abs_lateral(obs);
  while (!sim.done()) {
    const int s = detail::state_of(obs, cfg);
    const int a = select_action(s, tuner.q, tuner.epsilon, tuner.rng);
    tuner.params = apply_action(a, tuner.params, cfg);
    const ControllerConfig live = with_input_params(scenario.bundle.fuzzy, tuner.params);
    for (int k = 0; k < cfg.decision_ticks && !sim.done(); ++k) {
      if (k > 0) sim.observe();
      TickRecord rec = sim.advance(live);
      const double lat = detail::abs_lateral(rec.offsets);
      out.ise += lat * lat * scenario.dt;
      if (keep_log) out.log.rows.push_back(rec);
    }

    obs = sim.observe();
    const double cur = detail::abs_lateral(obs);
    q_update(tuner.q, s, a, reward(tuner.prev_abs_err, cur, cfg.reward_gain), detail::state_of(obs, cfg), cfg.alpha,
             cfg.gamma);
    tuner.prev_abs_err = cur;
  }
  tuner.epsilon *= cfg.epsilon_decay;
  return out;
}

/// Greedy rollout with a frozen table: no exploration, no learning. With an
/// all-zero table every tick picks the no-op and the run is the plain
/// fuzzy baseline.
inline EpisodeResult evaluate_policy(const Scenario& scenario, InputParams params, const QTable& q,
                                     const TunerConfig& cfg, bool keep_log = false) {
  cfg.validate();
  Simulation sim(scenario, scenario.bundle);
  std::mt19937_64 unused(0);
  EpisodeResult out;
  while (!sim.done()) {
    const int s = detail::state_of(sim.observe(), cfg);
    params = apply_action(select_action(s, q, 0.0, unused), params, cfg);
    const ControllerConfig live = with_input_params(scenario.bundle.fuzzy, params);
    for (int k = 0; k < cfg.decision_ticks && !sim.done(); ++k) {
      if (k > 0) sim.observe();
      TickRecord rec = sim.advance(live);
      const double lat = detail::abs_lateral(rec.offsets);
      out.ise += lat * lat * scenario.dt;
      if (keep_log) out.log.rows.push_back(rec);
    }
  }
  return out;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_TRAINING_HPP_
