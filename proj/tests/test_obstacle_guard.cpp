#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "sixwheel/obstacle_guard.hpp"

using namespace sixwheel;

namespace {

// Density-reachability from first principles: core flags from pairwise
// counts, core components by flood fill over core-core links, clusters
// numbered by their lowest-index core, borders to the lowest-numbered
// adjacent cluster.
std::vector<int> oracle_labels(const std::vector<Vec2>& pts, double eps, int min_pts) {
  const std::size_t n = pts.size();
  auto close = [&](std::size_t i, std::size_t j) { return std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= eps; };
  std::vector<bool> core(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    int c = 0;
    for (std::size_t j = 0; j < n; ++j) c += close(i, j) ? 1 : 0;
    core[i] = c >= min_pts;
  }
  std::vector<int> comp(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || comp[i] >= 0) continue;
    std::vector<std::size_t> stack{i};
    comp[i] = next;
    while (!stack.empty()) {
      const std::size_t a = stack.back();
      stack.pop_back();
      for (std::size_t b = 0; b < n; ++b)
        if (core[b] && comp[b] < 0 && close(a, b)) {
          comp[b] = next;
          stack.push_back(b);
        }
    }
    ++next;
  }
  std::vector<int> label(n, kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      label[i] = comp[i];
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (core[j] && close(i, j) && (label[i] == kNoise || comp[j] < label[i])) label[i] = comp[j];
  }
  return label;
}

}  // namespace

TEST(ScanToPoints, AxisCasesAndNoReturn) {
  LidarScan scan{{{0.0, 5.0}, {90.0, 2.0}, {120.0, 10.0}}, 10.0};
  const auto pts = scan_to_points(scan);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[0].x, 5.0);
  EXPECT_DOUBLE_EQ(pts[0].y, 0.0);
  EXPECT_NEAR(pts[1].x, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(pts[1].y, 2.0);
  LidarScan empty{{{-10.0, 8.0}, {10.0, 8.0}}, 8.0};
  EXPECT_TRUE(scan_to_points(empty).empty());
}

TEST(Dbscan, EmptyAndIsolated) {
  const std::vector<Vec2> none;
  const ClusterSet a = dbscan(none, 0.5, 3);
  EXPECT_TRUE(a.clusters.empty());
  EXPECT_TRUE(a.noise.empty());
  const std::vector<Vec2> one{{1.0, 1.0}};
  const ClusterSet b = dbscan(one, 0.5, 3);
  EXPECT_TRUE(b.clusters.empty());
  EXPECT_EQ(b.noise.size(), 1u);
}

TEST(Dbscan, TwoSeparatedBlobs) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({0.1 * i, 0.0});
  for (int i = 0; i < 10; ++i) pts.push_back({5.9 + 0.1 * i, 0.0});
  const ClusterSet c = dbscan(pts, 0.3, 3);
  ASSERT_EQ(c.clusters.size(), 2u);
  EXPECT_EQ(c.clusters[0].size(), 10u);
  EXPECT_EQ(c.clusters[1].size(), 10u);
  EXPECT_TRUE(c.noise.empty());
  EXPECT_EQ(dbscan_labels(pts, 0.3, 3), oracle_labels(pts, 0.3, 3));
}

TEST(Dbscan, MatchesDensityReachabilityOracle) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> count(0, 200), mp(2, 6), blobs(1, 6);
  std::uniform_real_distribution<double> u(0.0, 10.0), e(0.2, 1.2), spread(0.1, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = count(rng);
    std::vector<Vec2> centres;
    for (int b = blobs(rng); b > 0; --b) centres.push_back({u(rng), u(rng)});
    std::vector<Vec2> pts;
    const double sd = spread(rng);
    for (int i = 0; i < n; ++i) {
      if (i % 4 == 0) {
        pts.push_back({u(rng), u(rng)});
      } else {
        std::normal_distribution<double> g(0.0, sd);
        const Vec2 c = centres[static_cast<std::size_t>(i) % centres.size()];
        pts.push_back({c.x + g(rng), c.y + g(rng)});
      }
    }
    const double eps = e(rng);
    const int min_pts = mp(rng);
    const auto got = dbscan_labels(pts, eps, min_pts);
    ASSERT_EQ(got, oracle_labels(pts, eps, min_pts)) << "trial " << trial;

    // partition: nothing lost or duplicated
    const ClusterSet set = dbscan(pts, eps, min_pts);
    std::size_t total = set.noise.size();
    for (const auto& c : set.clusters) total += c.size();
    EXPECT_EQ(total, pts.size());

    // Border points shared with an earlier cluster stay there, so a cluster
    // can end up below min_pts; it always owns at least one core point.
    std::vector<bool> has_core(set.clusters.size(), false);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (got[i] == kNoise) continue;
      int c = 0;
      for (const Vec2& q : pts) c += std::hypot(q.x - pts[i].x, q.y - pts[i].y) <= eps ? 1 : 0;
      if (c >= min_pts) has_core[static_cast<std::size_t>(got[i])] = true;
    }
    for (bool h : has_core) EXPECT_TRUE(h);
  }
}

TEST(Dbscan, CoreMembershipIgnoresInputOrder) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 120; ++i) pts.push_back({u(rng), u(rng)});
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec2> shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    const auto a = dbscan_labels(pts, 0.6, 4);
    const auto b = dbscan_labels(shuffled, 0.6, 4);
    // same-cluster relation on core points must agree
    std::vector<std::size_t> cores;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int c = 0;
      for (const Vec2& q : pts) c += std::hypot(q.x - pts[i].x, q.y - pts[i].y) <= 0.6 ? 1 : 0;
      if (c >= 4) cores.push_back(i);
    }
    std::vector<std::size_t> inv(pts.size());
    for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
    for (std::size_t i : cores)
      for (std::size_t j : cores) ASSERT_EQ(a[i] == a[j], b[inv[i]] == b[inv[j]]);
  }
}

TEST(NearestObstacle, Examples) {
  EXPECT_FALSE(nearest_obstacle(ClusterSet{}).has_value());
  ClusterSet one;
  one.clusters.push_back({{3.0, 4.0}, {6.0, 8.0}});
  EXPECT_DOUBLE_EQ(*nearest_obstacle(one), 5.0);
  ClusterSet with_noise;
  with_noise.clusters.push_back({{6.0, 0.0}});
  with_noise.noise.push_back({1.0, 0.0});
  EXPECT_DOUBLE_EQ(*nearest_obstacle(with_noise), 6.0);
}

TEST(GovernSpeed, Examples) {
  GuardConfig cfg;
  EXPECT_EQ(govern_speed(0.5, 0.8, cfg, 0.05), 0.0);
  EXPECT_EQ(govern_speed(0.5, 0.0, cfg, 0.05), 0.0);
  EXPECT_EQ(govern_speed(std::nullopt, cfg.cruise, cfg, 0.05), cfg.cruise);
  GuardConfig c2{0.5, 3, 1.0, 2.0, 1.0, 0.5, 5.0};
  EXPECT_DOUBLE_EQ(govern_speed(1.5, 1.0, c2, 0.05), 0.75);
  // decel limit binds when it is small
  GuardConfig c3{0.5, 3, 1.0, 2.0, 1.0, 0.5, 1.0};
  EXPECT_DOUBLE_EQ(govern_speed(1.5, 1.0, c3, 0.05), 0.95);
}

TEST(GovernSpeed, BoundedAndStopsInsideRange) {
  const GuardConfig cfg;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(0.0, 4.0), v(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double dist = d(rng);
    const double out = govern_speed(dist, v(rng), cfg, 0.05);
    EXPECT_GE(out, 0.0);
    EXPECT_LE(out, cfg.cruise);
    if (dist <= cfg.d_stop) {
      EXPECT_EQ(out, 0.0);
    }
  }
}

TEST(GovernSpeed, ResumesWithinRampBound) {
  const GuardConfig cfg;
  const double dt = 0.05;
  const int bound = static_cast<int>(std::ceil(cfg.cruise / (cfg.accel * dt)));
  double v = govern_speed(0.5, cfg.cruise, cfg, dt);
  ASSERT_EQ(v, 0.0);
  int ticks = 0;
  while (v < cfg.cruise && ticks < 1000) {
    v = govern_speed(std::nullopt, v, cfg, dt);
    ++ticks;
  }
  EXPECT_EQ(v, cfg.cruise);
  EXPECT_LE(ticks, bound);
  EXPECT_EQ(ticks, 32);
}

TEST(ScanJson, RoundTripAndValidation) {
  const LidarScan scan{{{-5.0, 1.0}, {0.0, 2.5}, {5.0, 10.0}}, 10.0};
  const LidarScan back = scan_from_json(scan_to_json(scan), 10.0);
  ASSERT_EQ(back.beams.size(), 3u);
  EXPECT_DOUBLE_EQ(back.beams[1].range, 2.5);
  EXPECT_THROW(scan_from_json(Json::parse("[[0, 1], [0, 2]]"), 10.0), ConfigError);
  EXPECT_THROW(scan_from_json(Json::parse("[[0, 11]]"), 10.0), ConfigError);
}

TEST(GuardJson, FieldPath) {
  try {
    guard_config_from_json(Json::parse(R"({"d_stop": 3.0})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "guard.d_slow");
  }
}
