#ifndef SIXWHEEL_SIM_WORLD_HPP_
#define SIXWHEEL_SIM_WORLD_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sixwheel/angles.hpp"
#include "sixwheel/balance_est.hpp"
#include "sixwheel/errors.hpp"
#include "sixwheel/fuzzy_ctrl.hpp"
#include "sixwheel/geo_core.hpp"
#include "sixwheel/gray_image.hpp"
#include "sixwheel/json_util.hpp"
#include "sixwheel/lane_vision.hpp"
#include "sixwheel/obstacle_guard.hpp"
#include "sixwheel/q_tuner.hpp"

namespace sixwheel {

inline constexpr double kMaxLoadKg = 8.0;

struct RobotParams {
  double track_width = 0.5;  // m between the middle drive wheels
  double v_max = 1.6;        // m/s per wheel
  double load_mass = 0.0;    // kg

  void validate() const {
    if (!(track_width > 0.0)) throw ConfigError("track_width", "must be > 0");
    if (!(v_max > 0.0)) throw ConfigError("v_max", "must be > 0");
    if (!(load_mass >= 0.0 && load_mass <= kMaxLoadKg)) throw ConfigError("load_mass", "must be within [0, 8] kg");
  }
};

/// Unicycle step driven by the middle wheel pair. Uses the exact circular
/// arc when turning, so constant commands trace closed circles.
inline Pose2D step_kinematics(const Pose2D& pose, double v_left, double v_right, const RobotParams& params,
                              double dt) {
  const double v = 0.5 * (v_left + v_right);
  const double omega = (v_right - v_left) / params.track_width;
  const double h = deg_to_rad(pose.heading);
  if (std::abs(omega) > 1e-9) {
    const double h1 = h + omega * dt;
    const double r = v / omega;
    return {pose.x + r * (std::sin(h1) - std::sin(h)), pose.y + r * (-std::cos(h1) + std::cos(h)),
            rad_to_deg(h1)};
  }
  return {pose.x + v * dt * std::cos(h), pose.y + v * dt * std::sin(h), pose.heading};
}

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
  // Present only during [start, end) when set.
  std::optional<std::pair<double, double>> active;

  bool present_at(double t) const { return !active || (t >= active->first && t < active->second); }
};

struct SlopePoint {
  double x = 0.0;      // m, world x
  double pitch = 0.0;  // deg
};

/// Piecewise-linear terrain pitch, held constant beyond the end points.
inline double terrain_pitch(std::span<const SlopePoint> profile, double x) {
  if (profile.empty()) return 0.0;
  if (x <= profile.front().x) return profile.front().pitch;
  if (x >= profile.back().x) return profile.back().pitch;
  const auto it = std::upper_bound(profile.begin(), profile.end(), x,
                                   [](double v, const SlopePoint& p) { return v < p.x; });
  const SlopePoint& b = *it;
  const SlopePoint& a = *(it - 1);
  return a.pitch + (b.pitch - a.pitch) * (x - a.x) / (b.x - a.x);
}

struct CameraConfig {
  double focal_px = 260.0;
  int img_w = 320;
  int img_h = 240;
  double cam_height_m = 1.2;
  double lane_width_m = 3.0;
  int every = 5;  // render on every n-th tick
  double pixel_noise = 5.0;

  double cx() const { return img_w / 2.0; }
  double cy() const { return img_h / 2.0; }
  /// Ground metres per pixel along the bottom image row.
  double meters_per_px_bottom() const { return cam_height_m / ((img_h - 1) - cy()); }

  void validate() const {
    if (!(focal_px > 0.0)) throw ConfigError("focal_px", "must be > 0");
    if (img_w < 16 || img_h < 16) throw ConfigError("img_w", "image must be at least 16x16");
    if (!(cam_height_m > 0.0)) throw ConfigError("cam_height_m", "must be > 0");
    if (!(lane_width_m > 0.0)) throw ConfigError("lane_width_m", "must be > 0");
    if (every < 1) throw ConfigError("every", "must be >= 1");
    if (!(pixel_noise >= 0.0)) throw ConfigError("pixel_noise", "must be >= 0");
  }
};

struct LidarConfig {
  int n_beams = 181;
  double fov = 180.0;        // deg, centred on the heading
  double max_range = 10.0;   // m

  void validate() const {
    if (n_beams < 2) throw ConfigError("n_beams", "must be >= 2");
    if (!(fov > 0.0 && fov <= 360.0)) throw ConfigError("fov", "must be in (0, 360]");
    if (!(max_range > 0.0)) throw ConfigError("max_range", "must be > 0");
  }
};

struct SmootherConfig {
  double q = 0.05;
  double r = 0.01;
};

/// Everything a run needs beyond the world itself.
struct ControllerBundle {
  ControllerConfig fuzzy;
  GuardConfig guard;
  RockerState rocker;
  bool rocker_frozen = false;
  PitchFilterConfig pitch_filter;
  SmootherConfig smoother;
  LaneDetectorConfig vision;
  TunerConfig tuner;
};

struct Scenario {
  std::string name;
  ReferencePath path = ReferencePath::from_points(std::vector<Vec2>{{0.0, 0.0}, {1.0, 0.0}}, false);
  std::optional<Pose2D> start;
  std::vector<Obstacle> obstacles;
  std::vector<SlopePoint> slope_profile;
  std::vector<std::pair<double, double>> gps_dropouts;
  double sigma_gps = 0.01;         // m per axis
  double sigma_gps_heading = 0.5;  // deg
  double sigma_imu = 0.5;          // deg
  double dt = 0.05;
  double duration = 10.0;
  std::optional<CameraConfig> camera;
  LidarConfig lidar;
  RobotParams robot;
  std::uint64_t seed = 1;
  ControllerBundle bundle;

  std::size_t ticks() const { return static_cast<std::size_t>(std::llround(duration / dt)); }
};

inline Pose2D start_pose(const Scenario& s) {
  if (s.start) return *s.start;
  return {s.path[0].x, s.path[0].y, s.path[0].heading};
}

inline bool in_dropout(const Scenario& s, double t) {
  return std::any_of(s.gps_dropouts.begin(), s.gps_dropouts.end(),
                     [&](const auto& w) { return t >= w.first && t < w.second; });
}

/// Noisy local GPS fix, or nothing inside a dropout window.
inline std::optional<Pose2D> sense_gps(const Pose2D& pose, double t, const Scenario& s, std::mt19937_64& rng) {
  if (in_dropout(s, t)) return std::nullopt;
  std::normal_distribution<double> unit(0.0, 1.0);
  const double nx = unit(rng) * s.sigma_gps;
  const double ny = unit(rng) * s.sigma_gps;
  const double nh = unit(rng) * s.sigma_gps_heading;
  return Pose2D{pose.x + nx, pose.y + ny, pose.heading + nh};
}

/// Range from `origin` along unit direction `dir` to the nearest circle
/// surface ahead of it, if any.
inline std::optional<double> ray_circle(Vec2 origin, Vec2 dir, const Obstacle& ob) {
  const double ox = origin.x - ob.center.x;
  const double oy = origin.y - ob.center.y;
  const double b = ox * dir.x + oy * dir.y;
  const double c = ox * ox + oy * oy - ob.radius * ob.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  const double t1 = -b - root;
  const double t2 = -b + root;
  if (t1 > 0.0) return t1;
  if (t2 > 0.0) return t2;
  return std::nullopt;
}

inline LidarScan sense_lidar(const Pose2D& pose, double t, std::span<const Obstacle> obstacles, int n_beams,
                             double fov, double max_range) {
  LidarConfig{n_beams, fov, max_range}.validate();
  LidarScan scan;
  scan.max_range = max_range;
  scan.beams.reserve(static_cast<std::size_t>(n_beams));
  const double step = fov / (n_beams - 1);
  for (int i = 0; i < n_beams; ++i) {
    const double bearing = -fov / 2.0 + i * step;
    const double a = deg_to_rad(pose.heading + bearing);
    const Vec2 dir{std::cos(a), std::sin(a)};
    double range = max_range;
    for (const Obstacle& ob : obstacles) {
      if (!ob.present_at(t)) continue;
      if (const auto r = ray_circle({pose.x, pose.y}, dir, ob)) range = std::min(range, *r);
    }
    scan.beams.push_back({bearing, range});
  }
  return scan;
}

/// Pinhole view of the two lane boundaries around the nearest path segment,
/// treated as straight. Image column u and row v are pixel indices with the
/// principal point at (img_w/2, img_h/2) and the optical axis level.
inline GrayImage render_lane_camera(const Pose2D& pose, const ReferencePath& path, const CameraConfig& cam,
                                    std::mt19937_64& rng) {
  constexpr double kGround = 30.0;
  constexpr double kSky = 60.0;
  constexpr double kPaint = 255.0;

  GrayImage img(cam.img_w, cam.img_h, kGround);
  const PathProjection proj = project_onto_path(path, pose);
  const double phi = deg_to_rad(proj.segment_heading);
  const double h = deg_to_rad(pose.heading);
  const Vec2 fwd{std::cos(h), std::sin(h)};
  const Vec2 left{-std::sin(h), std::cos(h)};
  const Vec2 normal{-std::sin(phi), std::cos(phi)};
  const double d_fwd = std::cos(phi - h);
  const double d_left = std::sin(phi - h);

  for (int v = 0; v < cam.img_h; ++v) {
    if (v <= cam.cy()) {
      for (int u = 0; u < cam.img_w; ++u) img.at(u, v) = kSky;
      continue;
    }
    const double z = cam.focal_px * cam.cam_height_m / (v - cam.cy());
    for (double side : {1.0, -1.0}) {
      const Vec2 p{proj.foot.x + side * 0.5 * cam.lane_width_m * normal.x - pose.x,
                   proj.foot.y + side * 0.5 * cam.lane_width_m * normal.y - pose.y};
      const double p_fwd = p.x * fwd.x + p.y * fwd.y;
      const double p_left = p.x * left.x + p.y * left.y;
      if (std::abs(d_fwd) < 1e-9) continue;
      const double s = (z - p_fwd) / d_fwd;
      const double x_right = -(p_left + s * d_left);
      const double u = cam.cx() + cam.focal_px * x_right / z;
      const int first = static_cast<int>(std::ceil(u - 1.0));
      for (int c = first; c < u + 1.0; ++c)
        if (c >= 0 && c < cam.img_w) img.at(c, v) = kPaint;
    }
  }
  if (cam.pixel_noise > 0.0) {
    std::normal_distribution<double> noise(0.0, cam.pixel_noise);
    for (int v = 0; v < cam.img_h; ++v)
      for (int u = 0; u < cam.img_w; ++u) img.at(u, v) = std::clamp(img.at(u, v) + noise(rng), 0.0, 255.0);
  }
  return img;
}

/// Where the lane's vanishing point should appear for `pose`.
inline Vec2 analytic_vanishing_point(const Pose2D& pose, const ReferencePath& path, const CameraConfig& cam) {
  const PathProjection proj = project_onto_path(path, pose);
  const double rel = deg_to_rad(proj.segment_heading - pose.heading);
  return {cam.cx() - cam.focal_px * std::tan(rel), cam.cy()};
}

struct TickRecord {
  double t = 0.0;
  Pose2D pose;
  std::optional<OffsetPair> offsets;  // empty when no source was available
  double v_left = 0.0;
  double v_right = 0.0;
  double governed = 0.0;
  std::optional<double> obstacle;
  double pitch = 0.0;
  double pitch_est = 0.0;
  double arm = 0.0;
  double true_lateral = 0.0;
};

inline constexpr const char* kRunLogHeader = "t,x,y,heading,lat_off,head_off,src,vl,vr,gov,obst,pitch,pitch_est,arm";

struct RunLog {
  std::vector<TickRecord> rows;

  std::string to_csv() const {
    std::string out = std::string(kRunLogHeader) + "\n";
    char buf[512];
    for (const TickRecord& r : rows) {
      const double lat = r.offsets ? r.offsets->lateral : 0.0;
      const double head = r.offsets ? r.offsets->heading : 0.0;
      const char* src = r.offsets ? to_string(r.offsets->source) : "NONE";
      char obst[64] = "";
      if (r.obstacle) std::snprintf(obst, sizeof obst, "%.6f", *r.obstacle);
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.6f,%s,%.6f,%.6f,%.6f\n", r.t,
                    r.pose.x, r.pose.y, r.pose.heading, lat, head, src, r.v_left, r.v_right, r.governed, obst,
                    r.pitch, r.pitch_est, r.arm);
      out += buf;
    }
    return out;
  }
};

struct RunSummary {
  double max_abs_lateral = 0.0;
  double final_abs_lateral = 0.0;
  std::optional<double> min_obstacle;
  double max_abs_pitch = 0.0;
  double ise = 0.0;  // sum of lateral^2 * dt
};

inline RunSummary summarize(const RunLog& log, double dt) {
  RunSummary s;
  for (const TickRecord& r : log.rows) {
    const double lat = r.offsets ? std::abs(r.offsets->lateral) : 0.0;
    s.max_abs_lateral = std::max(s.max_abs_lateral, lat);
    s.final_abs_lateral = lat;
    s.ise += lat * lat * dt;
    if (r.obstacle && (!s.min_obstacle || *r.obstacle < *s.min_obstacle)) s.min_obstacle = r.obstacle;
    s.max_abs_pitch = std::max(s.max_abs_pitch, std::abs(r.pitch));
  }
  return s;
}

/// Closed-loop world. Each tick is split in two so a learner can act
/// between sensing and control: `observe()` senses and picks the offset
/// source, `advance()` runs the controllers and integrates one step.
class Simulation {
 public:
  Simulation(const Scenario& scenario, const ControllerBundle& bundle)
      : scenario_(scenario),
        bundle_(bundle),
        pose_(start_pose(scenario)),
        sensor_rng_(scenario.seed),
        camera_rng_(scenario.seed ^ 0x9e3779b97f4a7c15ULL),
        imu_rng_(scenario.seed ^ 0xc2b2ae3d27d4eb4fULL),
        governed_(bundle.guard.cruise),
        rocker_(bundle.rocker),
        belief_(pitch_belief()) {
    bundle_.fuzzy.validate();
    bundle_.guard.validate();
    for (CommandSmoother* s : {&smooth_left_, &smooth_right_}) {
      s->q = bundle_.smoother.q;
      s->r = bundle_.smoother.r;
      s->mean = bundle_.guard.cruise;
      s->variance = bundle_.smoother.r;
    }
    if (scenario_.camera) {
      bundle_.vision.focal_px = scenario_.camera->focal_px;
      bundle_.vision.meters_per_px_bottom = scenario_.camera->meters_per_px_bottom();
    }
  }

  bool done() const { return tick_ >= scenario_.ticks(); }
  std::size_t tick_index() const { return tick_; }
  double time() const { return static_cast<double>(tick_) * scenario_.dt; }
  const Pose2D& pose() const { return pose_; }
  const Scenario& scenario() const { return scenario_; }

  /// Senses and selects this tick's offsets. Empty when neither GPS nor
  /// vision is usable; the controller then holds its last input.
  const std::optional<OffsetPair>& observe() {
    const double t = time();
    std::optional<OffsetPair> gps;
    if (const auto fix = sense_gps(pose_, t, scenario_, sensor_rng_)) gps = offsets_from_path(scenario_.path, *fix);

    std::optional<OffsetPair> vision;
    if (scenario_.camera && (!gps || selector_.current() == OffsetSource::kVision)) vision = vision_offsets();

    try {
      observed_ = selector_.select(gps, vision);
      last_offsets_ = observed_;
    } catch (const NoSourceError&) {
      observed_.reset();
    }
    observed_tick_ = tick_;
    return observed_;
  }

  TickRecord advance(const ControllerConfig& fuzzy) {
    if (observed_tick_ != tick_) observe();
    const double t = time();
    const double dt = scenario_.dt;
    TickRecord rec;
    rec.t = t;
    rec.pose = pose_;
    rec.offsets = observed_;
    rec.true_lateral = project_onto_path(scenario_.path, pose_).lateral;

    WheelSpeeds cmd = control_step(last_offsets_.value_or(OffsetPair{}), fuzzy);

    const LidarScan scan = sense_lidar(pose_, t, scenario_.obstacles, scenario_.lidar.n_beams, scenario_.lidar.fov,
                                       scenario_.lidar.max_range);
    const auto points = scan_to_points(scan);
    rec.obstacle = nearest_obstacle(dbscan(points, bundle_.guard.eps, bundle_.guard.min_pts));
    governed_ = govern_speed(rec.obstacle, governed_, bundle_.guard, dt);
    rec.governed = governed_;
    const double scale = governed_ / bundle_.guard.cruise;
    cmd.left *= scale;
    cmd.right *= scale;

    rec.v_left = std::clamp(smooth_command(cmd.left, smooth_left_), 0.0, scenario_.robot.v_max);
    rec.v_right = std::clamp(smooth_command(cmd.right, smooth_right_), 0.0, scenario_.robot.v_max);
    if (governed_ == 0.0 && rec.obstacle && *rec.obstacle <= bundle_.guard.d_stop) {
      // Inside the safety range the wheels stop outright.
      rec.v_left = rec.v_right = 0.0;
      smooth_left_.mean = smooth_right_.mean = 0.0;
    }

    const double body_pitch = terrain_pitch(scenario_.slope_profile, pose_.x) + rocker_.arm_angle;
    std::normal_distribution<double> imu_noise(0.0, scenario_.sigma_imu);
    const double measured = body_pitch + imu_noise(imu_rng_);
    const BalanceResult bal = balance_tick(measured, belief_, rocker_, dt, bundle_.pitch_filter, arm_input_);
    belief_ = bal.belief;
    const double arm_before = rocker_.arm_angle;
    if (!bundle_.rocker_frozen) rocker_ = bal.rocker;
    arm_input_ = rocker_.arm_angle - arm_before;
    rec.pitch = body_pitch;
    rec.pitch_est = belief_.x(0);
    rec.arm = arm_before;

    pose_ = step_kinematics(pose_, rec.v_left, rec.v_right, scenario_.robot, dt);
    ++tick_;
    return rec;
  }

  TickRecord tick() {
    observe();
    return advance(bundle_.fuzzy);
  }

 private:
  std::optional<OffsetPair> vision_offsets() {
    const CameraConfig& cam = *scenario_.camera;
    const bool stale = !vision_tick_ || tick_ - *vision_tick_ >= static_cast<std::size_t>(cam.every);
    if (stale) {
      const GrayImage img = render_lane_camera(pose_, scenario_.path, cam, camera_rng_);
      const auto det = detect_lane(img, bundle_.vision);
      vision_cache_ = det ? std::optional<OffsetPair>(det->result.offsets) : std::nullopt;
      vision_tick_ = tick_;
    }
    return vision_cache_;
  }

  Scenario scenario_;
  ControllerBundle bundle_;
  Pose2D pose_;
  std::mt19937_64 sensor_rng_;
  std::mt19937_64 camera_rng_;
  std::mt19937_64 imu_rng_;
  OffsetSourceSelector selector_;
  std::optional<OffsetPair> observed_;
  std::optional<OffsetPair> last_offsets_;
  std::size_t observed_tick_ = std::numeric_limits<std::size_t>::max();
  std::optional<OffsetPair> vision_cache_;
  std::optional<std::size_t> vision_tick_;
  double governed_;
  CommandSmoother smooth_left_;
  CommandSmoother smooth_right_;
  RockerState rocker_;
  KalmanBelief belief_;
  double arm_input_ = 0.0;
  std::size_t tick_ = 0;
};

inline RunLog run_scenario(const Scenario& scenario, const ControllerBundle& bundle) {
  Simulation sim(scenario, bundle);
  RunLog log;
  log.rows.reserve(scenario.ticks());
  while (!sim.done()) log.rows.push_back(sim.tick());
  return log;
}

inline RunLog run_scenario(const Scenario& scenario) { return run_scenario(scenario, scenario.bundle); }

namespace detail {

inline RockerState rocker_from_json(const Json& j, RockerState base, const std::string& where) {
  using namespace json_util;
  base.arm_angle = number_or(j, "arm_angle", base.arm_angle, where);
  base.max_rate = number_or(j, "max_rate", base.max_rate, where);
  base.gain = number_or(j, "gain", base.gain, where);
  base.deadband = number_or(j, "deadband", base.deadband, where);
  if (j.contains("limits")) {
    const auto [lo, hi] = pair(j.at("limits"), join(where, "limits"));
    base.min_angle = lo;
    base.max_angle = hi;
  }
  if (!(base.max_rate > 0.0)) throw ConfigError(join(where, "max_rate"), "must be > 0");
  if (!(base.deadband >= 0.0)) throw ConfigError(join(where, "deadband"), "must be >= 0");
  if (!(base.min_angle < base.max_angle)) throw ConfigError(join(where, "limits"), "min must be below max");
  if (base.arm_angle < base.min_angle || base.arm_angle > base.max_angle) {
    throw ConfigError(join(where, "arm_angle"), "outside limits");
  }
  return base;
}

inline CameraConfig camera_from_json(const Json& j, const std::string& where) {
  using namespace json_util;
  CameraConfig c;
  c.focal_px = number_or(j, "focal_px", c.focal_px, where);
  c.img_w = static_cast<int>(integer_or(j, "img_w", c.img_w, where));
  c.img_h = static_cast<int>(integer_or(j, "img_h", c.img_h, where));
  c.cam_height_m = number_or(j, "cam_height_m", c.cam_height_m, where);
  c.lane_width_m = number_or(j, "lane_width_m", c.lane_width_m, where);
  c.every = static_cast<int>(integer_or(j, "every", c.every, where));
  c.pixel_noise = number_or(j, "pixel_noise", c.pixel_noise, where);
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join(where, e.field()), e.detail());
  }
  return c;
}

inline std::vector<std::pair<double, double>> windows_from_json(const Json& j, const std::string& where) {
  std::vector<std::pair<double, double>> out;
  const Json& arr = json_util::array(j, where);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto w = json_util::pair(arr[i], json_util::index(where, i));
    if (!(w.first <= w.second)) throw ConfigError(json_util::index(where, i), "window start after end");
    out.push_back(w);
  }
  return out;
}

}  // namespace detail

/// Parses a scenario document; errors name the offending field path.
inline Scenario scenario_from_json(const Json& j) {
  using namespace json_util;
  if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
  Scenario s;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) throw ConfigError("name", "expected a string");
    s.name = j.at("name").get<std::string>();
  }
  s.path = path_from_json(require(j, "path", ""), "path");
  if (j.contains("start")) {
    const Json& st = j.at("start");
    s.start = Pose2D{number(st, "x", "start"), number(st, "y", "start"), number_or(st, "heading", 0.0, "start")};
  }
  if (j.contains("obstacles")) {
    const Json& arr = array(j.at("obstacles"), "obstacles");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = index("obstacles", i);
      Obstacle ob;
      const auto [cx, cy] = pair(require(arr[i], "center", p), join(p, "center"));
      ob.center = {cx, cy};
      ob.radius = number(arr[i], "radius", p);
      if (!(ob.radius > 0.0)) throw ConfigError(join(p, "radius"), "must be > 0");
      if (arr[i].contains("active")) {
        ob.active = pair(arr[i].at("active"), join(p, "active"));
        if (!(ob.active->first < ob.active->second)) throw ConfigError(join(p, "active"), "start must precede end");
      }
      s.obstacles.push_back(ob);
    }
  }
  if (j.contains("slope_profile")) {
    const Json& arr = array(j.at("slope_profile"), "slope_profile");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto [x, pitch] = pair(arr[i], index("slope_profile", i));
      if (!s.slope_profile.empty() && !(x > s.slope_profile.back().x)) {
        throw ConfigError(index("slope_profile", i), "x must be strictly increasing");
      }
      s.slope_profile.push_back({x, pitch});
    }
  }
  if (j.contains("gps_dropouts")) s.gps_dropouts = detail::windows_from_json(j.at("gps_dropouts"), "gps_dropouts");
  s.sigma_gps = number_or(j, "sigma_gps", s.sigma_gps, "");
  s.sigma_gps_heading = number_or(j, "sigma_gps_heading", s.sigma_gps_heading, "");
  s.sigma_imu = number_or(j, "sigma_imu", s.sigma_imu, "");
  if (s.sigma_gps < 0.0) throw ConfigError("sigma_gps", "must be >= 0");
  if (s.sigma_gps_heading < 0.0) throw ConfigError("sigma_gps_heading", "must be >= 0");
  if (s.sigma_imu < 0.0) throw ConfigError("sigma_imu", "must be >= 0");
  s.dt = number_or(j, "dt", s.dt, "");
  if (!(s.dt > 0.0 && s.dt <= 0.2)) throw ConfigError("dt", "must be in (0, 0.2]");
  s.duration = number(j, "duration", "");
  if (!(s.duration > 0.0)) throw ConfigError("duration", "must be > 0");
  if (j.contains("camera")) s.camera = detail::camera_from_json(j.at("camera"), "camera");
  if (j.contains("lidar")) {
    const Json& l = j.at("lidar");
    s.lidar.n_beams = static_cast<int>(integer_or(l, "n_beams", s.lidar.n_beams, "lidar"));
    s.lidar.fov = number_or(l, "fov", s.lidar.fov, "lidar");
    s.lidar.max_range = number_or(l, "max_range", s.lidar.max_range, "lidar");
    try {
      s.lidar.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(join("lidar", e.field()), e.detail());
    }
  }
  if (j.contains("robot")) {
    const Json& r = j.at("robot");
    s.robot.track_width = number_or(r, "track_width", s.robot.track_width, "robot");
    s.robot.v_max = number_or(r, "v_max", s.robot.v_max, "robot");
    s.robot.load_mass = number_or(r, "load_mass", s.robot.load_mass, "robot");
    try {
      s.robot.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(join("robot", e.field()), e.detail());
    }
  }
  const long long seed = integer_or(j, "seed", 1, "");
  if (seed < 0) throw ConfigError("seed", "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);

  ControllerBundle& b = s.bundle;
  if (j.contains("controller")) b.fuzzy = controller_config_from_json(j.at("controller"), b.fuzzy, "controller");
  if (j.contains("guard")) b.guard = guard_config_from_json(j.at("guard"), b.guard, "guard");
  if (j.contains("balance")) {
    const Json& bal = j.at("balance");
    if (!bal.is_object()) throw ConfigError("balance", "expected an object");
    b.rocker_frozen = boolean_or(bal, "frozen", b.rocker_frozen, "balance");
    b.rocker = detail::rocker_from_json(bal, b.rocker, "balance");
    if (bal.contains("filter")) b.pitch_filter = pitch_filter_from_json(bal.at("filter"), b.pitch_filter, "balance.filter");
  }
  if (j.contains("smoother")) {
    const Json& sm = j.at("smoother");
    b.smoother.q = number_or(sm, "q", b.smoother.q, "smoother");
    b.smoother.r = number_or(sm, "r", b.smoother.r, "smoother");
    if (!(b.smoother.q > 0.0)) throw ConfigError("smoother.q", "must be > 0");
    if (!(b.smoother.r > 0.0)) throw ConfigError("smoother.r", "must be > 0");
  }
  if (j.contains("vision")) b.vision = lane_config_from_json(j.at("vision"), "vision");
  b.tuner.x_sat = b.fuzzy.x_sat;
  b.tuner.theta_sat = b.fuzzy.theta_sat;
  if (j.contains("tuner")) b.tuner = tuner_config_from_json(j.at("tuner"), b.tuner, "tuner");
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& file) { return scenario_from_json(json_util::read_json(file)); }

}  // namespace sixwheel

#endif  // SIXWHEEL_SIM_WORLD_HPP_
