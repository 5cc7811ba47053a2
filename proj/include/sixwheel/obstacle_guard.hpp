#ifndef SIXWHEEL_OBSTACLE_GUARD_HPP_
#define SIXWHEEL_OBSTACLE_GUARD_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixwheel/angles.hpp"
#include "sixwheel/errors.hpp"
#include "sixwheel/geo_core.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

struct LidarBeam {
  double bearing = 0.0;  // deg, scanner frame, 0 = straight ahead, CCW positive
  double range = 0.0;    // m
};

struct LidarScan {
  std::vector<LidarBeam> beams;
  double max_range = 0.0;
};

/// Cartesian returns in the scanner frame. Beams at max range carry no
/// return and are dropped.
inline std::vector<Vec2> scan_to_points(const LidarScan& scan) {
  std::vector<Vec2> pts;
  pts.reserve(scan.beams.size());
  for (const LidarBeam& b : scan.beams) {
    if (!(b.range < scan.max_range)) continue;
    const double a = deg_to_rad(b.bearing);
    pts.push_back({b.range * std::cos(a), b.range * std::sin(a)});
  }
  return pts;
}

inline constexpr int kNoise = -1;

/// DBSCAN labels, one per input point: cluster id (0-based, in discovery
/// order) or kNoise. Neighbourhoods are closed Euclidean balls that include
/// the point itself. Points are scanned in input order and a border point
/// stays with the first cluster that reaches it.
inline std::vector<int> dbscan_labels(std::span<const Vec2> pts, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
  if (min_pts < 2) throw ConfigError("min_pts", "must be >= 2");
  const std::size_t n = pts.size();
  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps) out.push_back(j);
    return out;
  };

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int cluster = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    const auto seeds = neighbours(i);
    if (seeds.size() < static_cast<std::size_t>(min_pts)) {
      label[i] = kNoise;
      continue;
    }
    label[i] = cluster;
    std::deque<std::size_t> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      if (label[q] == kNoise) label[q] = cluster;  // border point
      if (label[q] != kUnvisited) continue;
      label[q] = cluster;
      const auto reach = neighbours(q);
      if (reach.size() >= static_cast<std::size_t>(min_pts)) {
        frontier.insert(frontier.end(), reach.begin(), reach.end());
      }
    }
    ++cluster;
  }
  return label;
}

struct ClusterSet {
  std::vector<std::vector<Vec2>> clusters;
  std::vector<Vec2> noise;
};

inline ClusterSet dbscan(std::span<const Vec2> pts, double eps, int min_pts) {
  const auto labels = dbscan_labels(pts, eps, min_pts);
  ClusterSet out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (labels[i] == kNoise) {
      out.noise.push_back(pts[i]);
      continue;
    }
    const auto id = static_cast<std::size_t>(labels[i]);
    if (out.clusters.size() <= id) out.clusters.resize(id + 1);
    out.clusters[id].push_back(pts[i]);
  }
  return out;
}

/// Closest clustered return; noise is ignored.
inline std::optional<double> nearest_obstacle(const ClusterSet& set) {
  std::optional<double> best;
  for (const auto& c : set.clusters)
    for (const Vec2& p : c) {
      const double d = std::hypot(p.x, p.y);
      if (!best || d < *best) best = d;
    }
  return best;
}

struct GuardConfig {
  double eps = 0.5;      // m
  int min_pts = 3;
  double d_stop = 1.0;   // m
  double d_slow = 2.0;   // m
  double cruise = 0.8;   // m/s
  double accel = 0.5;    // m/s^2
  double decel = 1.0;    // m/s^2

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("eps", "must be > 0");
    if (min_pts < 2) throw ConfigError("min_pts", "must be >= 2");
    if (!(d_stop > 0.0)) throw ConfigError("d_stop", "must be > 0");
    if (!(d_slow > d_stop)) throw ConfigError("d_slow", "must exceed d_stop");
    if (!(cruise > 0.0)) throw ConfigError("cruise", "must be > 0");
    if (!(accel > 0.0)) throw ConfigError("accel", "must be > 0");
    if (!(decel > 0.0)) throw ConfigError("decel", "must be > 0");
  }
};

/// Forward-speed governor. Inside d_stop it stops at once; between d_stop
/// and d_slow the target ramps linearly; otherwise it is the cruise speed.
/// Moves toward the target at the accel/decel limits.
inline double govern_speed(std::optional<double> distance, double current, const GuardConfig& cfg, double dt) {
  if (distance && *distance <= cfg.d_stop) return 0.0;
  double target = cfg.cruise;
  if (distance && *distance < cfg.d_slow) {
    target = cfg.cruise * (*distance - cfg.d_stop) / (cfg.d_slow - cfg.d_stop);
  }
  current = std::clamp(current, 0.0, cfg.cruise);
  double next = target;
  if (target > current) {
    next = current + cfg.accel * dt;
    // Absorb rounding so the ramp lands on the target on the expected tick.
    if (next >= target - 1e-12 * cfg.cruise) next = target;
  } else if (target < current) {
    next = std::max(current - cfg.decel * dt, target);
  }
  return std::clamp(next, 0.0, cfg.cruise);
}

/// Scan fixtures: `[[bearing_deg, range_m], ...]`.
inline LidarScan scan_from_json(const Json& j, double max_range, const std::string& where = "scan") {
  LidarScan scan;
  scan.max_range = max_range;
  const Json& arr = json_util::array(j, where);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto [bearing, range] = json_util::pair(arr[i], json_util::index(where, i));
    if (!scan.beams.empty() && bearing <= scan.beams.back().bearing) {
      throw ConfigError(json_util::index(where, i), "bearings must be strictly increasing");
    }
    if (!(range > 0.0) || range > max_range) throw ConfigError(json_util::index(where, i), "range out of (0, max_range]");
    scan.beams.push_back({bearing, range});
  }
  return scan;
}

inline Json scan_to_json(const LidarScan& scan) {
  Json arr = Json::array();
  for (const auto& b : scan.beams) arr.push_back({b.bearing, b.range});
  return arr;
}

inline GuardConfig guard_config_from_json(const Json& j, GuardConfig base = {}, const std::string& where = "guard") {
  if (j.is_null()) return base;
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  using namespace json_util;
  base.eps = number_or(j, "eps", base.eps, where);
  base.min_pts = static_cast<int>(integer_or(j, "min_pts", base.min_pts, where));
  base.d_stop = number_or(j, "d_stop", base.d_stop, where);
  base.d_slow = number_or(j, "d_slow", base.d_slow, where);
  base.cruise = number_or(j, "cruise", base.cruise, where);
  base.accel = number_or(j, "accel", base.accel, where);
  base.decel = number_or(j, "decel", base.decel, where);
  try {
    base.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join(where, e.field()), e.detail());
  }
  return base;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_OBSTACLE_GUARD_HPP_
