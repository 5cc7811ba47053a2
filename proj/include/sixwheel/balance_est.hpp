#ifndef SIXWHEEL_BALANCE_EST_HPP_
#define SIXWHEEL_BALANCE_EST_HPP_

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sixwheel/errors.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

/// Linear state-space model x' = F x + G u + w, z = H x + v.
struct KalmanModel {
  Eigen::MatrixXd F;
  Eigen::MatrixXd G;
  Eigen::MatrixXd H;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

struct KalmanBelief {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace detail

inline KalmanBelief kf_predict(const KalmanBelief& b, const KalmanModel& m, const Eigen::VectorXd& u) {
  const auto n = b.x.size();
  detail::require_dims(b.P.rows() == n && b.P.cols() == n, "P must be n x n");
  detail::require_dims(m.F.rows() == n && m.F.cols() == n, "F must be n x n");
  detail::require_dims(m.Q.rows() == n && m.Q.cols() == n, "Q must be n x n");
  detail::require_dims(m.G.rows() == n && m.G.cols() == u.size(), "G must be n x len(u)");
  return {m.F * b.x + m.G * u, m.F * b.P * m.F.transpose() + m.Q};
}

inline KalmanBelief kf_correct(const KalmanBelief& b, const KalmanModel& m, const Eigen::VectorXd& z) {
  const auto n = b.x.size();
  const auto k = z.size();
  detail::require_dims(b.P.rows() == n && b.P.cols() == n, "P must be n x n");
  detail::require_dims(m.H.rows() == k && m.H.cols() == n, "H must be len(z) x n");
  detail::require_dims(m.R.rows() == k && m.R.cols() == k, "R must be len(z) x len(z)");

  const Eigen::MatrixXd S = m.H * b.P * m.H.transpose() + m.R;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
  if (!lu.isInvertible()) throw SingularError("innovation covariance is singular");
  const Eigen::MatrixXd K = b.P * m.H.transpose() * lu.inverse();
  const Eigen::VectorXd innovation = z - m.H * b.x;

  KalmanBelief out;
  out.x = b.x + K * innovation;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd P = (I - K * m.H) * b.P;
  out.P = 0.5 * (P + P.transpose());
  return out;
}

struct RockerState {
  double arm_angle = 0.0;   // deg
  double max_rate = 30.0;   // deg/s
  double gain = 1.0;
  double deadband = 0.5;    // deg
  double min_angle = -20.0;
  double max_angle = 20.0;
};

/// Pitch filter tuning: [pitch, pitch_rate] constant-rate model.
struct PitchFilterConfig {
  double q_pitch = 1e-4;  // deg^2
  double q_rate = 1e-3;   // deg^2/s^2
  double r = 0.25;        // deg^2
};

/// Constant-rate pitch model. The input is the arm motion commanded on the
/// previous tick, which shifts body pitch one-for-one.
inline KalmanModel pitch_model(double dt, const PitchFilterConfig& cfg = {}) {
  KalmanModel m;
  m.F = Eigen::MatrixXd{{1.0, dt}, {0.0, 1.0}};
  m.G = Eigen::MatrixXd{{1.0}, {0.0}};
  m.H = Eigen::MatrixXd{{1.0, 0.0}};
  m.Q = Eigen::MatrixXd{{cfg.q_pitch, 0.0}, {0.0, cfg.q_rate}};
  m.R = Eigen::MatrixXd{{cfg.r}};
  return m;
}

inline KalmanBelief pitch_belief(double pitch = 0.0, double variance = 1.0) {
  return {Eigen::Vector2d(pitch, 0.0), Eigen::Matrix2d::Identity() * variance};
}

struct BalanceResult {
  KalmanBelief belief;
  RockerState rocker;
  double command = 0.0;  // deg requested this tick
};

/// One rocker-loop tick: filter the IMU pitch, then step the arm toward
/// cancelling the estimated pitch within its rate and range limits.
/// `arm_input` is the arm motion applied since the previous tick.
inline BalanceResult balance_tick(double pitch_meas, const KalmanBelief& belief, const RockerState& rocker,
                                  double dt, const PitchFilterConfig& filter = {}, double arm_input = 0.0) {
  if (!(dt > 0.0)) throw ConfigError("dt", "must be > 0");
  const KalmanModel model = pitch_model(dt, filter);
  KalmanBelief b = kf_predict(belief, model, Eigen::VectorXd::Constant(1, arm_input));
  b = kf_correct(b, model, Eigen::VectorXd::Constant(1, pitch_meas));

  const double est = b.x(0);
  const double command = std::abs(est) > rocker.deadband ? -rocker.gain * est : 0.0;
  const double step = std::clamp(command, -rocker.max_rate * dt, rocker.max_rate * dt);
  RockerState next = rocker;
  next.arm_angle = std::clamp(rocker.arm_angle + step, rocker.min_angle, rocker.max_angle);
  return {b, next, command};
}

/// Scalar random-walk filter for wheel-speed commands.
struct CommandSmoother {
  double q = 0.05;
  double r = 0.01;
  double mean = 0.0;
  double variance = 1.0;

  double update(double raw) {
    variance += q;
    const double gain = variance / (variance + r);
    mean += gain * (raw - mean);
    variance *= (1.0 - gain);
    return mean;
  }
};

inline double smooth_command(double raw, CommandSmoother& filter) { return filter.update(raw); }

inline PitchFilterConfig pitch_filter_from_json(const Json& j, PitchFilterConfig base, const std::string& where) {
  if (j.is_null()) return base;
  base.q_pitch = json_util::number_or(j, "q_pitch", base.q_pitch, where);
  base.q_rate = json_util::number_or(j, "q_rate", base.q_rate, where);
  base.r = json_util::number_or(j, "r", base.r, where);
  if (!(base.q_pitch >= 0.0)) throw ConfigError(json_util::join(where, "q_pitch"), "must be >= 0");
  if (!(base.q_rate >= 0.0)) throw ConfigError(json_util::join(where, "q_rate"), "must be >= 0");
  if (!(base.r > 0.0)) throw ConfigError(json_util::join(where, "r"), "must be > 0");
  return base;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_BALANCE_EST_HPP_
