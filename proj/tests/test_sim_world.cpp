#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sixwheel/sim_world.hpp"

using namespace sixwheel;

namespace {

const std::string kScenarios = SIXWHEEL_SCENARIO_DIR;

Scenario quiet_straight(double y0 = 0.0) {
  Scenario s;
  s.path = ReferencePath::from_points(std::vector<Vec2>{{0, 0}, {100, 0}}, false);
  s.start = Pose2D{0.0, y0, 0.0};
  s.sigma_gps = s.sigma_gps_heading = s.sigma_imu = 0.0;
  s.duration = 20.0;
  return s;
}

// Painted column centres on one image row, one per stripe.
std::vector<double> stripe_centres(const GrayImage& img, int row) {
  std::vector<double> out;
  int x = 0;
  while (x < img.width()) {
    if (img.at(x, row) < 200.0) {
      ++x;
      continue;
    }
    const int start = x;
    while (x < img.width() && img.at(x, row) >= 200.0) ++x;
    out.push_back(0.5 * (start + x - 1));
  }
  return out;
}

}  // namespace

TEST(StepKinematics, StraightLine) {
  const Pose2D p = step_kinematics({0, 0, 0}, 1.0, 1.0, {}, 1.0);
  EXPECT_DOUBLE_EQ(p.x, 1.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  EXPECT_DOUBLE_EQ(p.heading, 0.0);
}

TEST(StepKinematics, PivotArcMatchesFineIntegration) {
  RobotParams rp;
  rp.track_width = 0.5;
  const double dt = 0.3;
  const Pose2D exact = step_kinematics({1.0, 2.0, 20.0}, 0.0, 1.0, rp, dt);
  // fine forward-Euler reference
  double x = 1.0, y = 2.0, h = deg_to_rad(20.0);
  const double v = 0.5, w = 2.0, step = 1e-5;
  for (int i = 0; i < static_cast<int>(std::lround(dt / step)); ++i) {
    x += v * std::cos(h) * step;
    y += v * std::sin(h) * step;
    h += w * step;
  }
  EXPECT_NEAR(exact.x, x, 1e-5);
  EXPECT_NEAR(exact.y, y, 1e-5);
  EXPECT_NEAR(exact.heading, wrap_deg(rad_to_deg(h)), 1e-6);
  // turning left about the stopped left wheel, which sits 0.25 m to the left
  const Vec2 wheel{1.0 - 0.25 * std::sin(deg_to_rad(20.0)), 2.0 + 0.25 * std::cos(deg_to_rad(20.0))};
  EXPECT_NEAR(std::hypot(exact.x - wheel.x, exact.y - wheel.y), 0.25, 1e-12);
}

TEST(StepKinematics, CircleClosure) {
  RobotParams rp;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.0, 1.6), h(-180.0, 180.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double vl = v(rng), vr = v(rng);
    const double omega = (vr - vl) / rp.track_width;
    if (std::abs(omega) < 0.05) continue;
    const int n = 1 + trial % 50;
    const double dt = 2.0 * kPi / std::abs(omega) / n;
    const Pose2D start{3.0, -1.0, h(rng)};
    Pose2D p = start;
    for (int i = 0; i < n; ++i) p = step_kinematics(p, vl, vr, rp, dt);
    EXPECT_NEAR(p.x, start.x, 1e-9);
    EXPECT_NEAR(p.y, start.y, 1e-9);
  }
}

// The exact arc covers v*dt of path per tick; the straight displacement is
// the chord of that arc and never exceeds v_max*dt.
TEST(StepKinematics, ArcLengthAndChord) {
  RobotParams rp;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0.0, 1.6), h(-180.0, 180.0), t(0.01, 0.2);
  for (int i = 0; i < 2000; ++i) {
    const double vl = v(rng), vr = v(rng), dt = t(rng);
    const Pose2D a{0.0, 0.0, h(rng)};
    const Pose2D b = step_kinematics(a, vl, vr, rp, dt);
    const double vm = 0.5 * (vl + vr);
    const double omega = (vr - vl) / rp.track_width;
    const double chord = std::abs(omega) > 1e-9 ? 2.0 * std::abs(vm / omega) * std::abs(std::sin(omega * dt / 2.0)) : vm * dt;
    const double moved = std::hypot(b.x - a.x, b.y - a.y);
    EXPECT_NEAR(moved, chord, 1e-9);
    EXPECT_LE(moved, vm * dt + 1e-12);
    EXPECT_LE(moved, rp.v_max * dt + 1e-12);
    // sum of many sub-steps converges to the arc length v*dt
    Pose2D p = a;
    double path_len = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Pose2D q = step_kinematics(p, vl, vr, rp, dt / 1000.0);
      path_len += std::hypot(q.x - p.x, q.y - p.y);
      p = q;
    }
    // each sub-chord falls short of its arc by L * angle^2 / 24
    const double sub_angle = std::abs(omega) * dt / 1000.0;
    EXPECT_LE(path_len, vm * dt + 1e-10);
    EXPECT_NEAR(path_len, vm * dt, vm * dt * sub_angle * sub_angle / 24.0 * 1.01 + 1e-10);  // plus summation round-off
    EXPECT_NEAR(p.x, b.x, 1e-9);
    EXPECT_NEAR(p.y, b.y, 1e-9);
  }
}

TEST(RobotParams, LoadLimit) {
  RobotParams rp;
  rp.load_mass = 8.0;
  EXPECT_NO_THROW(rp.validate());
  rp.load_mass = 8.5;
  EXPECT_THROW(rp.validate(), ConfigError);
}

TEST(SenseGps, NoiselessAndDropout) {
  Scenario s = quiet_straight();
  s.gps_dropouts = {{2.0, 3.0}};
  std::mt19937_64 rng(1);
  const Pose2D pose{4.0, 0.5, 12.0};
  const auto fix = sense_gps(pose, 1.0, s, rng);
  ASSERT_TRUE(fix);
  EXPECT_EQ(fix->x, 4.0);
  EXPECT_EQ(fix->y, 0.5);
  EXPECT_EQ(fix->heading, 12.0);
  EXPECT_FALSE(sense_gps(pose, 2.5, s, rng));
  EXPECT_TRUE(sense_gps(pose, 3.0, s, rng));
}

TEST(SenseGps, SampleStandardDeviation) {
  Scenario s = quiet_straight();
  s.sigma_gps = 0.01;
  std::mt19937_64 rng(99);
  double sx = 0.0, sxx = 0.0, sy = 0.0, syy = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto f = sense_gps({1.0, 2.0, 0.0}, 0.0, s, rng);
    sx += f->x - 1.0;
    sxx += (f->x - 1.0) * (f->x - 1.0);
    sy += f->y - 2.0;
    syy += (f->y - 2.0) * (f->y - 2.0);
  }
  const double stdx = std::sqrt(sxx / n - (sx / n) * (sx / n));
  const double stdy = std::sqrt(syy / n - (sy / n) * (sy / n));
  EXPECT_GE(stdx, 0.009);
  EXPECT_LE(stdx, 0.011);
  EXPECT_GE(stdy, 0.009);
  EXPECT_LE(stdy, 0.011);
}

TEST(SenseLidar, EmptyWorld) {
  const LidarScan scan = sense_lidar({0, 0, 30}, 0.0, {}, 181, 180.0, 10.0);
  ASSERT_EQ(scan.beams.size(), 181u);
  for (const auto& b : scan.beams) EXPECT_EQ(b.range, 10.0);
  EXPECT_DOUBLE_EQ(scan.beams.front().bearing, -90.0);
  EXPECT_DOUBLE_EQ(scan.beams[90].bearing, 0.0);
}

TEST(SenseLidar, CircleDeadAhead) {
  const std::vector<Obstacle> obs{{{5.0, 0.0}, 0.5, std::nullopt}};
  const LidarScan scan = sense_lidar({0, 0, 0}, 0.0, obs, 181, 180.0, 10.0);
  EXPECT_NEAR(scan.beams[90].range, 4.5, 1e-12);
}

TEST(SenseLidar, TangentBeam) {
  // beam along +x at y = 0.5 grazes a unit-half circle centred at (5, 0)
  const Obstacle ob{{5.0, 0.0}, 0.5, std::nullopt};
  const auto r = ray_circle({0.0, 0.5}, {1.0, 0.0}, ob);
  ASSERT_TRUE(r);
  EXPECT_NEAR(*r, 5.0, 1e-6);
}

TEST(SenseLidar, InactiveObstacleIgnored) {
  const std::vector<Obstacle> obs{{{5.0, 0.0}, 0.5, std::make_pair(0.0, 1.0)}};
  EXPECT_LT(sense_lidar({0, 0, 0}, 0.5, obs, 3, 90.0, 10.0).beams[1].range, 10.0);
  EXPECT_EQ(sense_lidar({0, 0, 0}, 1.0, obs, 3, 90.0, 10.0).beams[1].range, 10.0);
}

TEST(SenseLidar, MatchesRayMarchOracle) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> pos(-8.0, 8.0), rad(0.1, 1.5), h(-180.0, 180.0);
  std::uniform_int_distribution<int> count(1, 4);
  const double max_range = 10.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Obstacle> obs;
    for (int k = count(rng); k > 0; --k) obs.push_back({{pos(rng), pos(rng)}, rad(rng), std::nullopt});
    const Pose2D pose{0.0, 0.0, h(rng)};
    bool inside = false;
    for (const auto& o : obs) inside |= std::hypot(o.center.x, o.center.y) <= o.radius;
    if (inside) continue;
    const LidarScan scan = sense_lidar(pose, 0.0, obs, 7, 180.0, max_range);
    for (const auto& beam : scan.beams) {
      const double a = deg_to_rad(pose.heading + beam.bearing);
      auto hit = [&](double s) {
        for (const auto& o : obs)
          if (std::hypot(s * std::cos(a) - o.center.x, s * std::sin(a) - o.center.y) <= o.radius) return true;
        return false;
      };
      // coarse march, then 1e-4 steps across the last coarse interval
      double s = 0.0, found = max_range;
      while (s < max_range && !hit(s)) s += 1e-2;
      if (s < max_range) {
        double f = std::max(0.0, s - 1e-2);
        while (f <= s && !hit(f)) f += 1e-4;
        found = std::min(f, max_range);
      }
      ASSERT_NEAR(beam.range, found, 1e-3) << "trial " << trial;
    }
  }
}

TEST(RenderLaneCamera, CentredViewIsSymmetric) {
  const Scenario s = quiet_straight();
  CameraConfig cam;
  cam.pixel_noise = 0.0;
  std::mt19937_64 rng(1);
  const GrayImage img = render_lane_camera({10.0, 0.0, 0.0}, s.path, cam, rng);
  // Pixel index is the coordinate, so the stripes sit symmetric about
  // cx = w/2; the half-open paint span can tip one pixel on exact ties.
  for (int y = static_cast<int>(cam.cy()) + 2; y < img.height(); ++y) {
    const auto c = stripe_centres(img, y);
    ASSERT_EQ(c.size(), 2u) << y;
    EXPECT_NEAR(0.5 * (c[0] + c[1]), cam.cx(), 0.5) << y;
    // stripe spacing matches the lane width at this row's depth
    EXPECT_NEAR(c[1] - c[0], cam.lane_width_m * (y - cam.cy()) / cam.cam_height_m, 1.0) << y;
  }
  for (int x = 0; x < img.width(); ++x) EXPECT_EQ(img.at(x, 0), img.at(x, static_cast<int>(cam.cy())));
  const Vec2 vp = analytic_vanishing_point({10.0, 0.0, 0.0}, s.path, cam);
  EXPECT_DOUBLE_EQ(vp.x, cam.cx());
  EXPECT_DOUBLE_EQ(vp.y, cam.cy());
}

TEST(RenderLaneCamera, HeadingShiftsVanishingPoint) {
  const Scenario s = quiet_straight();
  CameraConfig cam;
  cam.pixel_noise = 0.0;
  const Pose2D pose{10.0, 0.0, 5.0};
  const Vec2 vp = analytic_vanishing_point(pose, s.path, cam);
  EXPECT_NEAR(vp.x - cam.cx(), cam.focal_px * std::tan(deg_to_rad(5.0)), 1e-9);
  // stripes on two rows extrapolate to the same point
  std::mt19937_64 rng(1);
  const GrayImage img = render_lane_camera(pose, s.path, cam, rng);
  const int r1 = cam.img_h - 50, r2 = cam.img_h - 90;
  const auto a = stripe_centres(img, r1), b = stripe_centres(img, r2);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    const double slope = (a[k] - b[k]) / (r1 - r2);
    const double u_at_horizon = a[k] + slope * (vp.y - r1);
    EXPECT_NEAR(u_at_horizon, vp.x, 2.0);
  }
}

TEST(RenderLaneCamera, LateralOffsetShiftsLaneCentre) {
  const Scenario s = quiet_straight();
  CameraConfig cam;
  cam.pixel_noise = 0.0;
  std::mt19937_64 rng(1);
  for (double offset : {-0.4, -0.1, 0.25}) {
    // robot moved left of the lane centre by `offset` (y up is left of +x travel)
    const GrayImage img = render_lane_camera({10.0, offset, 0.0}, s.path, cam, rng);
    for (int row : {cam.img_h - 1, cam.img_h - 40, cam.img_h - 80}) {
      const auto c = stripe_centres(img, row);
      if (row == cam.img_h - 1 && c.size() < 2) continue;  // a stripe may leave the frame up close
      ASSERT_EQ(c.size(), 2u) << row;
      // ground metres per pixel on this row is h / (v - cy)
      const double m_per_px = cam.cam_height_m / (row - cam.cy());
      EXPECT_NEAR(0.5 * (c[0] + c[1]) - cam.cx(), offset / m_per_px, 1.0) << row;
    }
  }
}

TEST(RunScenario, OnPathStaysOnPath) {
  const Scenario s = quiet_straight(0.0);
  const RunLog log = run_scenario(s);
  ASSERT_EQ(log.rows.size(), s.ticks());
  for (const TickRecord& r : log.rows) {
    ASSERT_TRUE(r.offsets);
    EXPECT_LT(std::abs(r.offsets->lateral), 1e-6);
    EXPECT_LT(std::abs(r.true_lateral), 1e-6);
  }
}

TEST(RunScenario, TimeAdvancesByDtAndMotionIsBounded) {
  Scenario s = quiet_straight(0.4);
  s.sigma_gps = 0.02;
  const RunLog log = run_scenario(s);
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    EXPECT_NEAR(log.rows[i].t, i * s.dt, 1e-9);
    EXPECT_GE(log.rows[i].v_left, 0.0);
    EXPECT_LE(log.rows[i].v_right, s.robot.v_max);
    if (i > 0) {
      const Pose2D& a = log.rows[i - 1].pose;
      const Pose2D& b = log.rows[i].pose;
      EXPECT_LE(std::hypot(b.x - a.x, b.y - a.y), s.robot.v_max * s.dt + 1e-12);
    }
  }
}

TEST(RunScenario, SameSeedSameCsv) {
  Scenario s = load_scenario(kScenarios + "/gps_dropout.json");
  s.duration = 12.0;
  EXPECT_EQ(run_scenario(s).to_csv(), run_scenario(s).to_csv());
  Scenario t = s;
  t.seed = s.seed + 1;
  EXPECT_NE(run_scenario(s).to_csv(), run_scenario(t).to_csv());
}

TEST(RunScenario, CsvHeaderAndEmptyObstacleCell) {
  const RunLog log = run_scenario(quiet_straight());
  const std::string csv = log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kRunLogHeader);
  const std::string first = csv.substr(csv.find('\n') + 1, csv.find('\n', csv.find('\n') + 1) - csv.find('\n') - 1);
  EXPECT_NE(first.find(",GPS,"), std::string::npos);
  EXPECT_NE(first.find(",,"), std::string::npos);  // no obstacle in view
}

TEST(RunScenario, VisionTakesOverDuringDropout) {
  const Scenario s = load_scenario(kScenarios + "/gps_dropout.json");
  const RunLog log = run_scenario(s);
  int vision = 0;
  for (const TickRecord& r : log.rows) {
    ASSERT_TRUE(r.offsets);
    const bool dropped = in_dropout(s, r.t);
    if (dropped) {
      EXPECT_EQ(r.offsets->source, OffsetSource::kVision);
    }
    vision += r.offsets->source == OffsetSource::kVision ? 1 : 0;
    EXPECT_LT(std::abs(r.true_lateral), 0.5);
  }
  // 10 s of dropout plus the 2-tick switch-back latency
  EXPECT_EQ(vision, 200 + 2);
}

TEST(RunScenario, CampusLoopConverges) {
  const Scenario s = load_scenario(kScenarios + "/campus_loop.json");
  ASSERT_TRUE(s.path.closed());
  const RunLog log = run_scenario(s);
  const RunSummary sum = summarize(log, s.dt);
  double max_true = 0.0;
  for (const TickRecord& r : log.rows) max_true = std::max(max_true, std::abs(r.true_lateral));
  EXPECT_LT(sum.max_abs_lateral, 0.5);
  EXPECT_LT(max_true, 0.5);
  EXPECT_LT(sum.final_abs_lateral, 0.05);
  // it actually went around: the trace reaches the far side of the loop
  double max_y = 0.0;
  for (const TickRecord& r : log.rows) max_y = std::max(max_y, r.pose.y);
  EXPECT_GT(max_y, 19.0);
}

TEST(TerrainPitch, PiecewiseLinearAndHeld) {
  const std::vector<SlopePoint> prof{{0.0, 0.0}, {10.0, 8.0}, {20.0, 8.0}};
  EXPECT_DOUBLE_EQ(terrain_pitch(prof, -5.0), 0.0);
  EXPECT_DOUBLE_EQ(terrain_pitch(prof, 5.0), 4.0);
  EXPECT_DOUBLE_EQ(terrain_pitch(prof, 15.0), 8.0);
  EXPECT_DOUBLE_EQ(terrain_pitch(prof, 50.0), 8.0);
  EXPECT_DOUBLE_EQ(terrain_pitch({}, 3.0), 0.0);
}

TEST(ScenarioJson, ErrorsNameTheField) {
  auto field_of = [](const char* text) {
    try {
      scenario_from_json(Json::parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"duration": 5})"), "path");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "dt": 0.5})"), "dt");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "obstacles": [{"center": [1, 1], "radius": -1}]})"),
            "obstacles[0].radius");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "camera": {"focal_px": 0}})"), "camera.focal_px");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "robot": {"load_mass": 9}})"), "robot.load_mass");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "guard": {"min_pts": 1}})"), "guard.min_pts");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "tuner": {"alpha": 2}})"), "tuner.alpha");
  EXPECT_EQ(field_of(R"({"path": {"points": [[0,0],[1,0]]}, "duration": 5, "slope_profile": [[0, 0], [0, 1]]})"),
            "slope_profile[1]");
}

TEST(ScenarioJson, ShippedScenariosLoad) {
  for (const char* name : {"straight", "s_curve", "obstacle", "slope", "campus_loop", "gps_dropout"}) {
    EXPECT_NO_THROW(load_scenario(kScenarios + "/" + name + ".json")) << name;
  }
}
