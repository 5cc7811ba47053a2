#ifndef SIXWHEEL_FUZZY_CTRL_HPP_
#define SIXWHEEL_FUZZY_CTRL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "sixwheel/errors.hpp"
#include "sixwheel/geo_core.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

/// Breakpoints of a three-set partition (left shoulder, triangle, right
/// shoulder). L0/L4 are the universe bounds and may be infinite.
struct MembershipTriple {
  double l0 = -std::numeric_limits<double>::infinity();
  double l1 = -1.0;
  double l2 = 0.0;
  double l3 = 1.0;
  double l4 = std::numeric_limits<double>::infinity();

  bool valid() const { return l0 <= l1 && l1 < l2 && l2 < l3 && l3 <= l4; }

  friend bool operator==(const MembershipTriple&, const MembershipTriple&) = default;
};

inline MembershipTriple lateral_universe_default() { return {-std::numeric_limits<double>::infinity(), -10.0, 0.0, 10.0, std::numeric_limits<double>::infinity()}; }
inline MembershipTriple heading_universe_default() { return {-std::numeric_limits<double>::infinity(), -1.0, 0.0, 1.0, std::numeric_limits<double>::infinity()}; }
inline MembershipTriple speed_universe_default() { return {-std::numeric_limits<double>::infinity(), 0.0, 50.0, 100.0, std::numeric_limits<double>::infinity()}; }

/// Degrees of membership in {Left/Low, Moderate/Mid, Right/High}.
struct MembershipDegrees {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;

  double operator[](int i) const { return i == 0 ? mu0 : (i == 1 ? mu1 : mu2); }
  double& operator[](int i) { return i == 0 ? mu0 : (i == 1 ? mu1 : mu2); }

  friend bool operator==(const MembershipDegrees&, const MembershipDegrees&) = default;
};

inline MembershipDegrees fuzzify(double value, const MembershipTriple& p) {
  if (value <= p.l1) return {1.0, 0.0, 0.0};
  if (value >= p.l3) return {0.0, 0.0, 1.0};
  if (value == p.l2) return {0.0, 1.0, 0.0};
  if (value < p.l2) {
    const double w = p.l2 - p.l1;
    return {(p.l2 - value) / w, (value - p.l1) / w, 0.0};
  }
  const double w = p.l3 - p.l2;
  return {0.0, (p.l3 - value) / w, (value - p.l2) / w};
}

enum SpeedSet : int { kLow = 0, kMid = 1, kHigh = 2 };

/// Output speed set per (heading set row, lateral set column).
using RuleTable = std::array<std::array<SpeedSet, 3>, 3>;

inline constexpr RuleTable kLeftWheelRules{{
    {kHigh, kHigh, kMid},
    {kHigh, kMid, kLow},
    {kMid, kLow, kLow},
}};

inline constexpr RuleTable kRightWheelRules{{
    {kLow, kLow, kMid},
    {kLow, kMid, kHigh},
    {kMid, kHigh, kHigh},
}};

/// Max-min composition over all nine rules.
inline MembershipDegrees infer(const MembershipDegrees& mu_lateral, const MembershipDegrees& mu_heading,
                               const RuleTable& table) {
  MembershipDegrees out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double strength = std::min(mu_heading[i], mu_lateral[j]);
      double& slot = out[table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]];
      slot = std::max(strength, slot);
    }
  }
  return out;
}

/// Area-weighted defuzzification: each output set contributes the area of
/// its triangle clipped at height mu, b/2 * (1 - (1 - mu)^2), placed at the
/// set's peak.
inline double defuzzify_area(const MembershipDegrees& mu, const MembershipTriple& v) {
  auto clip = [](double m) { return 1.0 - (1.0 - m) * (1.0 - m); };
  const double a1 = (v.l2 - v.l1) / 2.0 * clip(mu.mu0);
  const double b1 = (v.l3 - v.l1) / 2.0 * clip(mu.mu1);
  const double c1 = (v.l3 - v.l2) / 2.0 * clip(mu.mu2);
  const double area = a1 + b1 + c1;
  if (!(area > 0.0)) throw ZeroMembershipError("no output set is active");
  return (a1 * v.l1 + b1 * v.l2 + c1 * v.l3) / area;
}

struct ControllerConfig {
  MembershipTriple x_params = lateral_universe_default();
  MembershipTriple theta_params = heading_universe_default();
  MembershipTriple v_params = speed_universe_default();
  double x_sat = 1.0;       // m of lateral offset mapped to the universe edge
  double theta_sat = 30.0;  // deg of heading offset mapped to the universe edge
  double v_max = 1.6;       // m/s at crisp output 100

  void validate() const {
    if (!x_params.valid()) throw ConfigError("x_params", "breakpoints must satisfy L0 <= L1 < L2 < L3 <= L4");
    if (!theta_params.valid()) throw ConfigError("theta_params", "breakpoints must satisfy L0 <= L1 < L2 < L3 <= L4");
    if (!v_params.valid()) throw ConfigError("v_params", "breakpoints must satisfy L0 <= L1 < L2 < L3 <= L4");
    if (!(x_sat > 0.0)) throw ConfigError("x_sat", "must be > 0");
    if (!(theta_sat > 0.0)) throw ConfigError("theta_sat", "must be > 0");
    if (!(v_max > 0.0)) throw ConfigError("v_max", "must be > 0");
  }
};

/// Lateral universe span the normalized input is scaled onto.
inline constexpr double kLateralUniverseScale = 10.0;

struct WheelSpeeds {
  double left = 0.0;   // m/s
  double right = 0.0;  // m/s
};

inline WheelSpeeds control_step(const OffsetPair& offsets, const ControllerConfig& cfg) {
  const double x_n = std::clamp(offsets.lateral / cfg.x_sat, -1.0, 1.0) * kLateralUniverseScale;
  const double theta_n = std::clamp(offsets.heading / cfg.theta_sat, -1.0, 1.0);
  const MembershipDegrees mu_x = fuzzify(x_n, cfg.x_params);
  const MembershipDegrees mu_theta = fuzzify(theta_n, cfg.theta_params);
  const double left = defuzzify_area(infer(mu_x, mu_theta, kLeftWheelRules), cfg.v_params);
  const double right = defuzzify_area(infer(mu_x, mu_theta, kRightWheelRules), cfg.v_params);
  const double span = cfg.v_params.l3 - cfg.v_params.l1;
  // rescaling can land an ulp outside [0, v_max]
  auto to_speed = [&](double v) { return std::clamp((v - cfg.v_params.l1) / span * cfg.v_max, 0.0, cfg.v_max); };
  return {to_speed(left), to_speed(right)};
}

namespace detail {

inline Json triple_to_json(const MembershipTriple& t) {
  Json j{{"l1", t.l1}, {"l2", t.l2}, {"l3", t.l3}};
  if (std::isfinite(t.l0)) j["l0"] = t.l0;
  if (std::isfinite(t.l4)) j["l4"] = t.l4;
  return j;
}

inline MembershipTriple triple_from_json(const Json& j, MembershipTriple base, const std::string& where) {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  base.l0 = json_util::number_or(j, "l0", base.l0, where);
  base.l1 = json_util::number_or(j, "l1", base.l1, where);
  base.l2 = json_util::number_or(j, "l2", base.l2, where);
  base.l3 = json_util::number_or(j, "l3", base.l3, where);
  base.l4 = json_util::number_or(j, "l4", base.l4, where);
  if (!base.valid()) throw ConfigError(where, "breakpoints must satisfy L0 <= L1 < L2 < L3 <= L4");
  return base;
}

}  // namespace detail

inline Json controller_config_to_json(const ControllerConfig& c) {
  return {{"x_params", detail::triple_to_json(c.x_params)},
          {"theta_params", detail::triple_to_json(c.theta_params)},
          {"v_params", detail::triple_to_json(c.v_params)},
          {"x_sat", c.x_sat},
          {"theta_sat", c.theta_sat},
          {"v_max", c.v_max}};
}

inline ControllerConfig controller_config_from_json(const Json& j, ControllerConfig base = {},
                                                    const std::string& where = "controller") {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  using json_util::join;
  if (j.contains("x_params")) base.x_params = detail::triple_from_json(j.at("x_params"), base.x_params, join(where, "x_params"));
  if (j.contains("theta_params")) base.theta_params = detail::triple_from_json(j.at("theta_params"), base.theta_params, join(where, "theta_params"));
  if (j.contains("v_params")) base.v_params = detail::triple_from_json(j.at("v_params"), base.v_params, join(where, "v_params"));
  base.x_sat = json_util::number_or(j, "x_sat", base.x_sat, where);
  base.theta_sat = json_util::number_or(j, "theta_sat", base.theta_sat, where);
  base.v_max = json_util::number_or(j, "v_max", base.v_max, where);
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join(where, e.field()), e.detail());
  }
  return base;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_FUZZY_CTRL_HPP_
