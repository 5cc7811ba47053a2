#ifndef SIXWHEEL_CLI_HPP_
#define SIXWHEEL_CLI_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <spdlog/spdlog.h>

#include "sixwheel/errors.hpp"
#include "sixwheel/gray_image.hpp"
#include "sixwheel/json_util.hpp"
#include "sixwheel/lane_vision.hpp"
#include "sixwheel/sim_world.hpp"
#include "sixwheel/svg_plot.hpp"
#include "sixwheel/training.hpp"

namespace sixwheel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitIo = 2;

namespace detail {

/// Runs `body`, mapping the error hierarchy onto exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

inline std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline Scenario load_with_seed(const std::filesystem::path& file, std::optional<std::uint64_t> seed) {
  Scenario s = load_scenario(file);
  if (seed) s.seed = *seed;
  spdlog::info("scenario '{}': {} ticks at dt={}", s.name, s.ticks(), s.dt);
  return s;
}

}  // namespace detail

inline int cmd_simulate(const std::filesystem::path& scenario_path, const std::filesystem::path& out_csv,
                        std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const Scenario s = detail::load_with_seed(scenario_path, seed);
    const RunLog log = run_scenario(s);
    json_util::atomic_write(out_csv, log.to_csv());
    const RunSummary sum = summarize(log, s.dt);
    out << "ticks=" << log.rows.size() << "\n";
    out << "max_abs_lateral=" << detail::fmt_double(sum.max_abs_lateral) << "\n";
    out << "final_abs_lateral=" << detail::fmt_double(sum.final_abs_lateral) << "\n";
    out << "min_obstacle=" << (sum.min_obstacle ? detail::fmt_double(*sum.min_obstacle) : "none") << "\n";
    out << "max_abs_pitch=" << detail::fmt_double(sum.max_abs_pitch) << "\n";
    out << "ise=" << detail::fmt_double(sum.ise) << "\n";
    spdlog::debug("wrote {}", out_csv.string());
    return kExitOk;
  });
}

/// Trains from the scenario's tuner settings, or from a previously saved
/// tuner file when `initial` is given (its params, table and settings).
inline int cmd_train(const std::filesystem::path& scenario_path, int episodes, const std::filesystem::path& out_json,
                     std::optional<std::uint64_t> seed, const std::optional<std::filesystem::path>& initial,
                     std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    if (episodes < 1) throw ConfigError("episodes", "must be >= 1");
    const Scenario s = detail::load_with_seed(scenario_path, seed);
    TunerConfig cfg = s.bundle.tuner;
    InputParams params = input_params_of(s.bundle.fuzzy);
    std::optional<QTable> q;
    if (initial) {
      LoadedTuner loaded = tuner_from_json(json_util::read_json(*initial), params);
      cfg = loaded.config;
      params = loaded.params;
      q = loaded.q;
    }
    TunerState state(params, cfg, s.seed);
    if (q) state.q = *q;
    out << "episode,ise\n";
    for (int e = 1; e <= episodes; ++e) {
      const EpisodeResult r = train_episode(s, state, cfg);
      out << e << "," << detail::fmt_double(r.ise) << "\n";
      spdlog::debug("episode {} epsilon {:.4f}", e, state.epsilon);
    }
    json_util::atomic_write(out_json, tuner_to_json(state, cfg).dump(2) + "\n");
    return kExitOk;
  });
}

/// Burns the detected lines (255) and a 3x3 vanishing-point block into a
/// copy of the image.
inline GrayImage annotate_lanes(GrayImage img, const LaneDetection& det) {
  for (const LineRT& line : {det.lines.left, det.lines.right}) {
    const double t = deg_to_rad(line.theta);
    const double c = std::cos(t);
    const double s = std::sin(t);
    if (std::abs(c) >= std::abs(s)) {
      for (int y = 0; y < img.height(); ++y) {
        const int x = static_cast<int>(std::lround((line.rho - y * s) / c));
        if (img.contains(x, y)) img.at(x, y) = 255.0;
      }
    } else {
      for (int x = 0; x < img.width(); ++x) {
        const int y = static_cast<int>(std::lround((line.rho - x * c) / s));
        if (img.contains(x, y)) img.at(x, y) = 255.0;
      }
    }
  }
  const int u = static_cast<int>(std::lround(det.result.vanishing_point.x));
  const int v = static_cast<int>(std::lround(det.result.vanishing_point.y));
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if (img.contains(u + dx, v + dy)) img.at(u + dx, v + dy) = 255.0;
  return img;
}

inline int cmd_lane_detect(const std::filesystem::path& image_pgm, const std::optional<std::filesystem::path>& params_json,
                           const std::optional<std::filesystem::path>& out_pgm, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const LaneDetectorConfig cfg =
        params_json ? lane_config_from_json(json_util::read_json(*params_json)) : LaneDetectorConfig{};
    const GrayImage img = read_pgm(image_pgm);
    const auto det = detect_lane(img, cfg);
    if (!det) {
      out << "NO_BOUNDARY\n";
      if (out_pgm) write_pgm(*out_pgm, img);
      return kExitOk;
    }
    const VisionOffsets& r = det->result;
    out << detail::fmt_double(r.lateral_px) << "," << detail::fmt_double(r.offsets.heading) << ","
        << detail::fmt_double(r.vanishing_point.x) << "," << detail::fmt_double(r.vanishing_point.y) << "\n";
    spdlog::debug("left rho={} theta={} votes={}; right rho={} theta={} votes={}", det->lines.left.rho,
                  det->lines.left.theta, det->lines.left.votes, det->lines.right.rho, det->lines.right.theta,
                  det->lines.right.votes);
    if (out_pgm) write_pgm(*out_pgm, annotate_lanes(img, *det));
    return kExitOk;
  });
}

inline int cmd_plot(const std::filesystem::path& csv_path, const std::filesystem::path& out_svg, const std::string& kind,
                    const std::optional<std::filesystem::path>& scenario_path, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto& kinds = plot_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      throw ConfigError("kind", "unknown plot kind '" + kind + "'");
    }
    std::optional<Scenario> s;
    if (scenario_path) s = load_scenario(*scenario_path);
    const CsvTable table = parse_run_csv(json_util::read_file(csv_path));
    json_util::atomic_write(out_svg, plot_run(table, kind, s ? &s->path : nullptr));
    return kExitOk;
  });
}

}  // namespace sixwheel::cli

#endif  // SIXWHEEL_CLI_HPP_
