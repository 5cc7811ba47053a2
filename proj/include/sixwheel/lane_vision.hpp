#ifndef SIXWHEEL_LANE_VISION_HPP_
#define SIXWHEEL_LANE_VISION_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sixwheel/angles.hpp"
#include "sixwheel/errors.hpp"
#include "sixwheel/geo_core.hpp"
#include "sixwheel/gray_image.hpp"
#include "sixwheel/json_util.hpp"

namespace sixwheel {

struct CannyParams {
  double sigma = 1.0;
  int kernel_size = 5;
  double low_threshold = 20.0;
  double high_threshold = 60.0;

  void validate() const {
    if (!(sigma > 0.0)) throw ConfigError("canny.sigma", "must be > 0");
    if (kernel_size < 3 || kernel_size % 2 == 0) throw ConfigError("canny.kernel_size", "must be odd and >= 3");
    if (!(low_threshold > 0.0)) throw ConfigError("canny.low_threshold", "must be > 0");
    if (!(low_threshold < high_threshold)) throw ConfigError("canny.high_threshold", "must exceed low_threshold");
  }
};

/// Sampled 2-D Gaussian, renormalized to sum to exactly 1. Row-major,
/// `size * size` entries centred on the middle element.
inline std::vector<double> gaussian_kernel(double sigma, int size) {
  const int half = size / 2;
  std::vector<double> k(static_cast<std::size_t>(size) * static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int dy = -half; dy <= half; ++dy) {
    for (int dx = -half; dx <= half; ++dx) {
      const double v = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma)) / (2.0 * kPi * sigma);
      k[static_cast<std::size_t>((dy + half) * size + (dx + half))] = v;
      sum += v;
    }
  }
  for (double& v : k) v /= sum;
  return k;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma, int kernel_size) {
  CannyParams{sigma, kernel_size, 1.0, 2.0}.validate();
  if (kernel_size > img.width() || kernel_size > img.height()) {
    throw DimensionError("blur kernel of size " + std::to_string(kernel_size) + " exceeds the image");
  }
  const auto kernel = gaussian_kernel(sigma, kernel_size);
  const int half = kernel_size / 2;
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      std::size_t i = 0;
      for (int dy = -half; dy <= half; ++dy)
        for (int dx = -half; dx <= half; ++dx) acc += kernel[i++] * img.clamped(x + dx, y + dy);
      out.at(x, y) = std::clamp(acc, 0.0, 255.0);
    }
  }
  return out;
}

/// Per-pixel Sobel gradient. `angle` is atan2(Gy, Gx) in degrees, with y
/// pointing down the image rows; zero where the magnitude is zero.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<double> gx;
  std::vector<double> gy;
  std::vector<double> magnitude;
  std::vector<double> angle;

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  double mag_clamped(int x, int y) const {
    return magnitude[index(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1))];
  }
};

inline GradientField gradient_field(const GrayImage& img) {
  static constexpr int kSobelX[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr int kSobelY[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  GradientField g;
  g.width = img.width();
  g.height = img.height();
  const std::size_t n = img.data().size();
  g.gx.assign(n, 0.0);
  g.gy.assign(n, 0.0);
  g.magnitude.assign(n, 0.0);
  g.angle.assign(n, 0.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      double sx = 0.0;
      double sy = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const double v = img.clamped(x + dx, y + dy);
          sx += kSobelX[dy + 1][dx + 1] * v;
          sy += kSobelY[dy + 1][dx + 1] * v;
        }
      }
      const std::size_t i = g.index(x, y);
      g.gx[i] = sx;
      g.gy[i] = sy;
      g.magnitude[i] = std::hypot(sx, sy);
      g.angle[i] = g.magnitude[i] > 0.0 ? wrap_deg(rad_to_deg(std::atan2(sy, sx))) : 0.0;
    }
  }
  return g;
}

/// Step towards the neighbour along the gradient, quantized to 0/45/90/135.
inline std::pair<int, int> quantized_direction(double angle_deg) {
  double a = std::fmod(angle_deg, 180.0);
  if (a < 0.0) a += 180.0;
  if (a < 22.5 || a >= 157.5) return {1, 0};
  if (a < 67.5) return {1, 1};
  if (a < 112.5) return {0, 1};
  return {-1, 1};
}

/// Thinned magnitude map: a pixel survives when it is strictly larger than
/// its backward neighbour and not smaller than its forward neighbour along
/// the quantized gradient direction. The asymmetric tie rule keeps plateaus
/// one pixel wide.
inline std::vector<double> non_max_suppression(const GradientField& g) {
  std::vector<double> out(g.magnitude.size(), 0.0);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i = g.index(x, y);
      const double m = g.magnitude[i];
      if (m <= 0.0) continue;
      const auto [dx, dy] = quantized_direction(g.angle[i]);
      const bool backward_ok = m > g.mag_clamped(x - dx, y - dy) ||
                               !(x - dx >= 0 && x - dx < g.width && y - dy >= 0 && y - dy < g.height);
      const bool forward_ok = m >= g.mag_clamped(x + dx, y + dy);
      if (backward_ok && forward_ok) out[i] = m;
    }
  }
  return out;
}

inline GrayImage canny_edges(const GrayImage& img, const CannyParams& params) {
  params.validate();
  const GradientField g = gradient_field(gaussian_blur(img, params.sigma, params.kernel_size));
  const std::vector<double> thin = non_max_suppression(g);

  GrayImage edges(img.width(), img.height());
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (thin[g.index(x, y)] >= params.high_threshold) {
        edges.at(x, y) = 255.0;
        stack.emplace_back(x, y);
      }
    }
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (!edges.contains(nx, ny) || edges.at(nx, ny) != 0.0) continue;
        if (thin[g.index(nx, ny)] >= params.low_threshold) {
          edges.at(nx, ny) = 255.0;
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return edges;
}

/// Line in normal form: rho = x*cos(theta) + y*sin(theta), theta in [0, 180).
struct LineRT {
  double rho = 0.0;    // px
  double theta = 0.0;  // deg
  int votes = 0;
};

/// Dense (theta, rho) vote grid. Theta bin k is k*theta_res degrees; rho bin
/// j is (j - rho_offset)*rho_res pixels.
class HoughAccumulator {
 public:
  HoughAccumulator(int width, int height, double rho_res, double theta_res)
      : rho_res_(rho_res), theta_res_(theta_res) {
    if (!(rho_res > 0.0) || !(theta_res > 0.0)) throw ConfigError("hough", "resolutions must be > 0");
    n_theta_ = static_cast<int>(std::ceil(180.0 / theta_res - 1e-9));
    rho_offset_ = static_cast<int>(std::ceil(std::hypot(width, height) / rho_res));
    n_rho_ = 2 * rho_offset_ + 1;
    votes_.assign(static_cast<std::size_t>(n_theta_) * static_cast<std::size_t>(n_rho_), 0);
    cos_.resize(static_cast<std::size_t>(n_theta_));
    sin_.resize(static_cast<std::size_t>(n_theta_));
    for (int t = 0; t < n_theta_; ++t) {
      cos_[static_cast<std::size_t>(t)] = std::cos(deg_to_rad(theta_of(t)));
      sin_[static_cast<std::size_t>(t)] = std::sin(deg_to_rad(theta_of(t)));
    }
  }

  int n_theta() const { return n_theta_; }
  int n_rho() const { return n_rho_; }
  double theta_of(int t) const { return t * theta_res_; }
  double rho_of(int r) const { return (r - rho_offset_) * rho_res_; }

  int rho_bin(double rho) const { return static_cast<int>(std::lround(rho / rho_res_)) + rho_offset_; }

  int votes(int t, int r) const { return votes_[cell(t, r)]; }

  void vote(int x, int y) {
    for (int t = 0; t < n_theta_; ++t) {
      const double rho = x * cos_[static_cast<std::size_t>(t)] + y * sin_[static_cast<std::size_t>(t)];
      ++votes_[cell(t, rho_bin(rho))];
    }
  }

  /// Local maxima over the 8-neighbourhood (no wrap in theta). Equal
  /// neighbours earlier in (theta, rho) order win the tie.
  std::vector<LineRT> peaks(int vote_threshold) const {
    std::vector<LineRT> out;
    for (int t = 0; t < n_theta_; ++t) {
      for (int r = 0; r < n_rho_; ++r) {
        const int v = votes(t, r);
        if (v < vote_threshold || v == 0) continue;
        bool peak = true;
        for (int dt = -1; dt <= 1 && peak; ++dt) {
          for (int dr = -1; dr <= 1; ++dr) {
            if (dt == 0 && dr == 0) continue;
            const int nt = t + dt;
            const int nr = r + dr;
            if (nt < 0 || nt >= n_theta_ || nr < 0 || nr >= n_rho_) continue;
            const int nv = votes(nt, nr);
            const bool earlier = dt < 0 || (dt == 0 && dr < 0);
            if (nv > v || (earlier && nv == v)) {
              peak = false;
              break;
            }
          }
        }
        if (peak) out.push_back({rho_of(r), theta_of(t), v});
      }
    }
    std::stable_sort(out.begin(), out.end(), [](const LineRT& a, const LineRT& b) {
      if (a.votes != b.votes) return a.votes > b.votes;
      if (a.theta != b.theta) return a.theta < b.theta;
      return a.rho < b.rho;
    });
    return out;
  }

 private:
  std::size_t cell(int t, int r) const {
    return static_cast<std::size_t>(t) * static_cast<std::size_t>(n_rho_) + static_cast<std::size_t>(r);
  }

  double rho_res_;
  double theta_res_;
  int n_theta_ = 0;
  int n_rho_ = 0;
  int rho_offset_ = 0;
  std::vector<int> votes_;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

inline HoughAccumulator hough_accumulate(const GrayImage& edges, double rho_res, double theta_res) {
  HoughAccumulator acc(edges.width(), edges.height(), rho_res, theta_res);
  for (int y = 0; y < edges.height(); ++y)
    for (int x = 0; x < edges.width(); ++x)
      if (edges.at(x, y) > 0.0) acc.vote(x, y);
  return acc;
}

inline std::vector<LineRT> hough_lines(const GrayImage& edges, double rho_res, double theta_res,
                                       int vote_threshold) {
  if (vote_threshold < 1) throw ConfigError("hough.vote_threshold", "must be >= 1");
  return hough_accumulate(edges, rho_res, theta_res).peaks(vote_threshold);
}

/// Column where the line crosses image row `y`.
inline double column_at_row(const LineRT& line, double y) {
  const double t = deg_to_rad(line.theta);
  return (line.rho - y * std::sin(t)) / std::cos(t);
}

/// Accepted theta ranges (inclusive, degrees) for road boundary candidates.
struct BoundaryWindow {
  std::vector<std::pair<double, double>> ranges{{15.0, 75.0}, {105.0, 165.0}};

  bool accepts(double theta) const {
    return std::any_of(ranges.begin(), ranges.end(),
                       [&](const auto& r) { return theta >= r.first && theta <= r.second; });
  }
};

struct LanePair {
  LineRT left;
  LineRT right;
};

inline LanePair select_boundaries(std::span<const LineRT> lines, const BoundaryWindow& window, int img_w,
                                  int img_h) {
  if (lines.size() < 2) throw NotFoundError("fewer than two candidate lines");
  const double bottom = img_h - 1.0;
  const double center = img_w / 2.0;
  const LineRT* left = nullptr;
  const LineRT* right = nullptr;
  for (const LineRT& line : lines) {
    if (!window.accepts(line.theta)) continue;
    const LineRT*& side = column_at_row(line, bottom) < center ? left : right;
    if (side == nullptr || line.votes > side->votes) side = &line;
  }
  if (left == nullptr) throw NotFoundError("no left boundary candidate");
  if (right == nullptr) throw NotFoundError("no right boundary candidate");
  return {*left, *right};
}

inline Vec2 intersect(const LineRT& a, const LineRT& b) {
  const double ta = deg_to_rad(a.theta);
  const double tb = deg_to_rad(b.theta);
  const double det = std::cos(ta) * std::sin(tb) - std::sin(ta) * std::cos(tb);
  if (std::abs(det) < 1e-12) throw ParallelLinesError("lines do not intersect");
  return {(a.rho * std::sin(tb) - b.rho * std::sin(ta)) / det,
          (std::cos(ta) * b.rho - std::cos(tb) * a.rho) / det};
}

/// Least-squares refit of a Hough line to the edge pixels lying within
/// `band_px` of it. A painted stripe gives two parallel edges and the peak
/// sits on one of them; the fit lands between them and drops the bin
/// quantization. Returns the input line when fewer than two pixels qualify.
inline LineRT refine_line(const GrayImage& edges, const LineRT& line, double band_px, int passes = 2) {
  LineRT cur = line;
  for (int pass = 0; pass < passes; ++pass) {
    const double t = deg_to_rad(cur.theta);
    const double c = std::cos(t);
    const double s = std::sin(t);
    double n = 0.0, mx = 0.0, my = 0.0;
    std::vector<Vec2> pts;
    for (int y = 0; y < edges.height(); ++y)
      for (int x = 0; x < edges.width(); ++x)
        if (edges.at(x, y) > 0.0 && std::abs(x * c + y * s - cur.rho) <= band_px) pts.push_back({double(x), double(y)});
    if (pts.size() < 2) return cur;
    for (const Vec2& p : pts) {
      mx += p.x;
      my += p.y;
      n += 1.0;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const Vec2& p : pts) {
      sxx += (p.x - mx) * (p.x - mx);
      syy += (p.y - my) * (p.y - my);
      sxy += (p.x - mx) * (p.y - my);
    }
    // Normal of the total-least-squares line is the minor principal axis.
    double normal = 0.5 * std::atan2(2.0 * sxy, sxx - syy) + kPi / 2.0;
    double deg = rad_to_deg(normal);
    deg = std::fmod(deg, 180.0);
    if (deg < 0.0) deg += 180.0;
    const double nt = deg_to_rad(deg);
    cur.theta = deg;
    cur.rho = mx * std::cos(nt) + my * std::sin(nt);
  }
  return cur;
}

struct VisionOffsets {
  Vec2 vanishing_point;
  double lateral_px = 0.0;  // right-of-lane positive, bottom row
  OffsetPair offsets;
};

/// Image-based offsets in the same right-positive convention as the GPS
/// route: a vanishing point right of centre means the robot points left of
/// the road, and a lane centre right of centre means the robot sits left.
inline VisionOffsets vanishing_and_offsets(const LineRT& left, const LineRT& right, int img_w, int img_h,
                                           double focal_px, double meters_per_px_bottom) {
  double gap = std::abs(left.theta - right.theta);
  gap = std::min(gap, 180.0 - gap);
  if (gap <= 0.5) throw ParallelLinesError("boundary lines are parallel within 0.5 degrees");
  if (!(focal_px > 0.0)) throw ConfigError("focal_px", "must be > 0");
  const Vec2 vp = intersect(left, right);
  const double cx = img_w / 2.0;
  const double bottom = img_h - 1.0;
  const double lane_center = 0.5 * (column_at_row(left, bottom) + column_at_row(right, bottom));
  const double lateral_px = -(lane_center - cx);
  const double heading = -rad_to_deg(std::atan((vp.x - cx) / focal_px));
  return {vp, lateral_px, {lateral_px * meters_per_px_bottom, heading, OffsetSource::kVision}};
}

struct HoughParams {
  double rho_res = 1.0;
  double theta_res = 1.0;
  int vote_threshold = 0;  // 0 selects 0.3 * image height

  int threshold_for(int img_h) const {
    return vote_threshold > 0 ? vote_threshold : std::max(1, static_cast<int>(std::lround(0.3 * img_h)));
  }
};

struct LaneDetectorConfig {
  CannyParams canny;
  HoughParams hough;
  BoundaryWindow window;
  double refine_band_px = 3.0;  // 0 keeps the raw Hough lines
  double focal_px = 260.0;
  double meters_per_px_bottom = 0.01;
};

struct LaneDetection {
  LanePair lines;
  VisionOffsets result;
};

/// Full pipeline: edges, lines, boundary choice and offsets. Returns nothing
/// when no usable boundary pair is found.
inline std::optional<LaneDetection> detect_lane(const GrayImage& img, const LaneDetectorConfig& cfg) {
  const GrayImage edges = canny_edges(img, cfg.canny);
  const auto lines = hough_lines(edges, cfg.hough.rho_res, cfg.hough.theta_res, cfg.hough.threshold_for(img.height()));
  try {
    LanePair pair = select_boundaries(lines, cfg.window, img.width(), img.height());
    if (cfg.refine_band_px > 0.0) {
      pair.left = refine_line(edges, pair.left, cfg.refine_band_px);
      pair.right = refine_line(edges, pair.right, cfg.refine_band_px);
    }
    return LaneDetection{pair, vanishing_and_offsets(pair.left, pair.right, img.width(), img.height(),
                                                     cfg.focal_px, cfg.meters_per_px_bottom)};
  } catch (const NotFoundError&) {
    return std::nullopt;
  } catch (const ParallelLinesError&) {
    return std::nullopt;
  }
}

inline LaneDetectorConfig lane_config_from_json(const Json& j, const std::string& where = "vision") {
  LaneDetectorConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  using namespace json_util;
  if (j.contains("canny")) {
    const Json& c = j.at("canny");
    const std::string p = join(where, "canny");
    cfg.canny.sigma = number_or(c, "sigma", cfg.canny.sigma, p);
    cfg.canny.kernel_size = static_cast<int>(integer_or(c, "kernel_size", cfg.canny.kernel_size, p));
    cfg.canny.low_threshold = number_or(c, "low_threshold", cfg.canny.low_threshold, p);
    cfg.canny.high_threshold = number_or(c, "high_threshold", cfg.canny.high_threshold, p);
  }
  try {
    cfg.canny.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(join(where, e.field()), e.detail());
  }
  if (j.contains("hough")) {
    const Json& h = j.at("hough");
    const std::string p = join(where, "hough");
    cfg.hough.rho_res = number_or(h, "rho_res", cfg.hough.rho_res, p);
    cfg.hough.theta_res = number_or(h, "theta_res", cfg.hough.theta_res, p);
    cfg.hough.vote_threshold = static_cast<int>(integer_or(h, "vote_threshold", cfg.hough.vote_threshold, p));
    if (!(cfg.hough.rho_res > 0.0)) throw ConfigError(join(p, "rho_res"), "must be > 0");
    if (!(cfg.hough.theta_res > 0.0)) throw ConfigError(join(p, "theta_res"), "must be > 0");
    if (cfg.hough.vote_threshold < 0) throw ConfigError(join(p, "vote_threshold"), "must be >= 0");
  }
  if (j.contains("window")) {
    const std::string p = join(where, "window");
    const Json& w = array(j.at("window"), p);
    cfg.window.ranges.clear();
    for (std::size_t i = 0; i < w.size(); ++i) cfg.window.ranges.push_back(pair(w[i], index(p, i)));
  }
  cfg.refine_band_px = number_or(j, "refine_band_px", cfg.refine_band_px, where);
  if (!(cfg.refine_band_px >= 0.0)) throw ConfigError(join(where, "refine_band_px"), "must be >= 0");
  cfg.focal_px = number_or(j, "focal_px", cfg.focal_px, where);
  cfg.meters_per_px_bottom = number_or(j, "meters_per_px_bottom", cfg.meters_per_px_bottom, where);
  if (!(cfg.focal_px > 0.0)) throw ConfigError(join(where, "focal_px"), "must be > 0");
  return cfg;
}

}  // namespace sixwheel

#endif  // SIXWHEEL_LANE_VISION_HPP_
