#ifndef SIXWHEEL_GEO_CORE_HPP_
#define SIXWHEEL_GEO_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sixwheel/angles.hpp"
#include "sixwheel/errors.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

inline constexpr double kEarthRadiusM = 6371000.0;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Planar robot pose in the local east/north frame. Heading is in degrees,
/// counter-clockwise from +x, and always wrapped into (-180, 180].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_deg)
      : x(x_), y(y_), heading(wrap_deg(heading_deg)) {}
};

struct GeodeticFix {
  double lat = 0.0;
  double lon = 0.0;
  double heading = 0.0;
  bool valid = true;
};

struct PathPoint {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // direction of the outgoing segment, degrees
};

/// Waypoint polyline the robot tracks. Headings are always derived from the
/// geometry; the last point of an open path inherits its incoming heading.
class ReferencePath {
 public:
  static constexpr double kMinSeparation = 1e-9;

  static ReferencePath from_points(std::span<const Vec2> pts, bool closed) {
    if (pts.size() < 2) throw ConfigError("points", "a path needs at least 2 points");
    if (closed && pts.size() < 3) throw ConfigError("points", "a closed path needs at least 3 points");
    const std::size_t n = pts.size();
    const std::size_t segments = closed ? n : n - 1;
    for (std::size_t i = 0; i < segments; ++i) {
      const Vec2& a = pts[i];
      const Vec2& b = pts[(i + 1) % n];
      if (!std::isfinite(a.x) || !std::isfinite(a.y)) {
        throw ConfigError(json_util::index("points", i), "non-finite coordinate");
      }
      if (std::hypot(b.x - a.x, b.y - a.y) <= kMinSeparation) {
        throw ConfigError(json_util::index("points", (i + 1) % n), "coincides with previous point");
      }
    }
    ReferencePath path;
    path.closed_ = closed;
    path.points_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t from = i;
      std::size_t to = i + 1;
      if (to == n) {
        if (closed) {
          to = 0;
        } else {
          from = n - 2;
          to = n - 1;
        }
      }
      const double h = rad_to_deg(std::atan2(pts[to].y - pts[from].y, pts[to].x - pts[from].x));
      path.points_.push_back({pts[i].x, pts[i].y, wrap_deg(h)});
    }
    return path;
  }

  const std::vector<PathPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool closed() const { return closed_; }
  const PathPoint& operator[](std::size_t i) const { return points_[i]; }

  std::optional<std::size_t> successor(std::size_t i) const {
    if (i + 1 < points_.size()) return i + 1;
    if (closed_) return 0;
    return std::nullopt;
  }
  std::optional<std::size_t> predecessor(std::size_t i) const {
    if (i > 0) return i - 1;
    if (closed_) return points_.size() - 1;
    return std::nullopt;
  }

 private:
  ReferencePath() = default;

  std::vector<PathPoint> points_;
  bool closed_ = false;
};

enum class OffsetSource { kGps, kVision };

inline const char* to_string(OffsetSource s) { return s == OffsetSource::kGps ? "GPS" : "VISION"; }

/// Controller inputs. Both offsets are positive when the robot sits (or
/// points) to the right of the path's direction of travel.
struct OffsetPair {
  double lateral = 0.0;  // m
  double heading = 0.0;  // deg, (-180, 180]
  OffsetSource source = OffsetSource::kGps;
};

/// Equirectangular projection around `origin`; valid for campus-scale extents.
inline Pose2D latlon_to_local(const GeodeticFix& fix, const GeodeticFix& origin) {
  if (!origin.valid) throw InvalidFixError("origin fix is not valid");
  if (!fix.valid) throw InvalidFixError("fix is not valid");
  if (std::abs(fix.lat - origin.lat) >= 1.0) {
    throw InvalidFixError("fix is more than 1 degree of latitude from the origin");
  }
  const double dlat = fix.lat - origin.lat;
  const double dlon = fix.lon - origin.lon;
  const double x = kEarthRadiusM * dlon * std::cos(deg_to_rad(origin.lat)) * kPi / 180.0;
  const double y = kEarthRadiusM * dlat * kPi / 180.0;
  return {x, y, fix.heading};
}

inline GeodeticFix local_to_latlon(const Pose2D& pose, const GeodeticFix& origin) {
  const double dlat = pose.y * 180.0 / (kPi * kEarthRadiusM);
  const double dlon = pose.x * 180.0 / (kPi * kEarthRadiusM * std::cos(deg_to_rad(origin.lat)));
  return {origin.lat + dlat, origin.lon + dlon, pose.heading, true};
}

struct SegmentIndex {
  std::size_t a = 0;  // waypoint nearest to the pose
  std::size_t b = 0;  // neighbour of `a` whose segment is closer
};

namespace detail {

struct Foot {
  Vec2 point;
  double distance = 0.0;
  double cross = 0.0;  // cross(end - start, p - start)
};

inline Foot project_to_segment(Vec2 start, Vec2 end, Vec2 p) {
  const double dx = end.x - start.x;
  const double dy = end.y - start.y;
  const double px = p.x - start.x;
  const double py = p.y - start.y;
  const double t = std::clamp((px * dx + py * dy) / (dx * dx + dy * dy), 0.0, 1.0);
  const Vec2 foot{start.x + t * dx, start.y + t * dy};
  return {foot, std::hypot(p.x - foot.x, p.y - foot.y), dx * py - dy * px};
}

inline Vec2 xy(const PathPoint& p) { return {p.x, p.y}; }

}  // namespace detail

inline SegmentIndex nearest_segment(const ReferencePath& path, const Pose2D& pose) {
  const Vec2 p{pose.x, pose.y};
  std::size_t a = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = std::hypot(path[i].x - p.x, path[i].y - p.y);
    if (d < best) {
      best = d;
      a = i;
    }
  }
  const auto succ = path.successor(a);
  const auto pred = path.predecessor(a);
  if (!succ) return {a, *pred};
  if (!pred) return {a, *succ};
  const double d_succ = detail::project_to_segment(detail::xy(path[a]), detail::xy(path[*succ]), p).distance;
  const double d_pred = detail::project_to_segment(detail::xy(path[*pred]), detail::xy(path[a]), p).distance;
  return {a, d_pred < d_succ ? *pred : *succ};
}

/// Foot of the pose on its nearest segment, with the segment oriented in
/// path order.
struct PathProjection {
  SegmentIndex segment;
  std::size_t start = 0;
  std::size_t end = 0;
  Vec2 foot;
  double lateral = 0.0;          // signed, right of travel positive
  double segment_heading = 0.0;  // deg
};

inline PathProjection project_onto_path(const ReferencePath& path, const Pose2D& pose) {
  const SegmentIndex seg = nearest_segment(path, pose);
  const bool forward = path.successor(seg.a) == seg.b;
  const std::size_t start = forward ? seg.a : seg.b;
  const std::size_t end = forward ? seg.b : seg.a;
  const auto foot = detail::project_to_segment(detail::xy(path[start]), detail::xy(path[end]),
                                               {pose.x, pose.y});
  const double lateral = foot.cross > 0.0 ? -foot.distance : foot.distance;
  return {seg, start, end, foot.point, lateral, path[start].heading};
}

inline OffsetPair offsets_from_path(const ReferencePath& path, const Pose2D& pose) {
  const PathProjection proj = project_onto_path(path, pose);
  // Heading reference is the waypoint nearest the robot, not the foot point.
  const double heading = -wrap_deg(pose.heading - path[proj.segment.a].heading);
  return {proj.lateral, wrap_deg(heading), OffsetSource::kGps};
}

/// Chooses GPS-derived offsets when available and falls back to vision.
/// After a GPS dropout the GPS source must be present for `hysteresis`
/// consecutive ticks before it is trusted again.
class OffsetSourceSelector {
 public:
  explicit OffsetSourceSelector(int hysteresis = 3)
      : hysteresis_(std::max(hysteresis, 1)), gps_streak_(hysteresis_) {}

  OffsetPair select(const std::optional<OffsetPair>& gps, const std::optional<OffsetPair>& vision) {
    gps_streak_ = gps ? std::min(gps_streak_ + 1, hysteresis_) : 0;
    if (!gps && !vision) throw NoSourceError("neither GPS nor vision offsets are available");
    if (current_ == OffsetSource::kVision && gps && (gps_streak_ >= hysteresis_ || !vision)) {
      current_ = OffsetSource::kGps;
    } else if (current_ == OffsetSource::kGps && !gps) {
      current_ = OffsetSource::kVision;
    }
    OffsetPair out = current_ == OffsetSource::kGps ? *gps : *vision;
    out.source = current_;
    return out;
  }

  OffsetSource current() const { return current_; }

 private:
  int hysteresis_;
  int gps_streak_;
  OffsetSource current_ = OffsetSource::kGps;
};

/// Loads `{"closed": b, "points": [[x, y], ...]}` or the geodetic form
/// `{"origin": [lat, lon], "points_geodetic": [[lat, lon], ...]}`.
inline ReferencePath path_from_json(const Json& j, const std::string& where = "path") {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  const bool closed = json_util::boolean_or(j, "closed", false, where);
  std::vector<Vec2> pts;
  if (j.contains("points")) {
    const std::string key = json_util::join(where, "points");
    const Json& arr = json_util::array(j.at("points"), key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto [x, y] = json_util::pair(arr[i], json_util::index(key, i));
      pts.push_back({x, y});
    }
  } else if (j.contains("points_geodetic")) {
    const auto [olat, olon] = json_util::pair(json_util::require(j, "origin", where),
                                              json_util::join(where, "origin"));
    const GeodeticFix origin{olat, olon, 0.0, true};
    const std::string key = json_util::join(where, "points_geodetic");
    const Json& arr = json_util::array(j.at("points_geodetic"), key);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto [lat, lon] = json_util::pair(arr[i], json_util::index(key, i));
      try {
        const Pose2D local = latlon_to_local({lat, lon, 0.0, true}, origin);
        pts.push_back({local.x, local.y});
      } catch (const InvalidFixError& e) {
        throw ConfigError(json_util::index(key, i), e.what());
      }
    }
  } else {
    throw ConfigError(json_util::join(where, "points"), "missing required field");
  }
  try {
    return ReferencePath::from_points(pts, closed);
  } catch (const ConfigError& e) {
    throw ConfigError(json_util::join(where, e.field()), e.detail());
  }
}

inline Json path_to_json(const ReferencePath& path) {
  Json pts = Json::array();
  for (const auto& p : path.points()) pts.push_back({p.x, p.y});
  return {{"closed", path.closed()}, {"points", pts}};
}

}  // namespace sixwheel

#endif  // SIXWHEEL_GEO_CORE_HPP_
