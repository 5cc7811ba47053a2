#ifndef SIXWHEEL_SVG_PLOT_HPP_
#define SIXWHEEL_SVG_PLOT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sixwheel/errors.hpp"
#include "sixwheel/sim_world.hpp"

namespace sixwheel {

/// Numeric view of a run-log CSV. Text columns (src) are kept as strings,
/// empty numeric cells become NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(std::string(name), "unknown column");
    return static_cast<int>(it - header.begin());
  }

  std::vector<double> numbers(std::string_view name) const {
    const int c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string& cell = rows[i][static_cast<std::size_t>(c)];
      if (cell.empty()) {
        out.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      try {
        std::size_t used = 0;
        out.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::logic_error&) {
        throw ConfigError(std::string(name), "row " + std::to_string(i + 1) + ": not a number: '" + cell + "'");
      }
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Parses a run log; the header must match the run-log layout exactly.
inline CsvTable parse_run_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw ConfigError("csv", "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunLogHeader) throw ConfigError("csv", "unexpected header: " + line);
  t.header = detail::split_csv_line(line);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != t.header.size()) {
      throw ConfigError("csv", "line " + std::to_string(n) + ": expected " + std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.rows.empty()) throw ConfigError("csv", "no data rows");
  return t;
}

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained line chart. Each series is one polyline; NaN samples
/// split nothing and are simply skipped.
inline std::string render_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series, bool equal_axes = false) {
  constexpr double kW = 640.0, kH = 420.0, kLeft = 60.0, kRight = 20.0, kTop = 36.0, kBottom = 48.0;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const Series& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  if (!std::isfinite(x0)) throw ConfigError("csv", "nothing to plot");
  if (x1 - x0 < 1e-9) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-9) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  double sx = pw / (x1 - x0);
  double sy = ph / (y1 - y0);
  if (equal_axes) sx = sy = std::min(sx, sy);
  auto px = [&](double x) { return kLeft + (x - x0) * sx; };
  auto py = [&](double y) { return kTop + ph - (y - y0) * sy; };

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kW, kH, kW, kH);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\">%s</text>\n", kLeft,
                title.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#888\"/>\n", kLeft,
                kTop, pw, ph);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                kLeft + pw / 2.0, kH - 12.0, x_label.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"14\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 14 %.1f)\">%s</text>\n",
                kTop + ph / 2.0, kTop + ph / 2.0, y_label.c_str());
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                kLeft - 4.0, py(y0), y0, kLeft - 4.0, py(y1) + 10.0, y1);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\">%.3g</text>\n"
                "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">%.3g</text>\n",
                kLeft, kTop + ph + 14.0, x0, kLeft + pw, kTop + ph + 14.0, x1);
  out += buf;

  double legend_y = kTop + 14.0;
  for (const Series& s : series) {
    out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(s.x[i]), py(s.y[i]));
      out += buf;
      first = false;
    }
    out += "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" fill=\"%s\" "
                  "text-anchor=\"end\">%s</text>\n",
                  kLeft + pw - 6.0, legend_y, s.color.c_str(), s.label.c_str());
    out += buf;
    legend_y += 14.0;
  }
  out += "</svg>\n";
  return out;
}

inline const std::vector<std::string>& plot_kinds() {
  static const std::vector<std::string> kinds{"trajectory", "speed", "pitch", "error"};
  return kinds;
}

/// Builds the SVG for one plot kind. The trajectory plot takes the
/// reference path separately since the log holds only the robot trace.
inline std::string plot_run(const CsvTable& t, const std::string& kind, const ReferencePath* path = nullptr) {
  const auto time = t.numbers("t");
  if (kind == "trajectory") {
    std::vector<Series> s;
    if (path != nullptr) {
      Series ref{"path", "#999999", {}, {}};
      for (std::size_t i = 0; i < path->size(); ++i) {
        ref.x.push_back((*path)[i].x);
        ref.y.push_back((*path)[i].y);
      }
      if (path->closed()) {
        ref.x.push_back((*path)[0].x);
        ref.y.push_back((*path)[0].y);
      }
      s.push_back(std::move(ref));
    }
    s.push_back({"robot", "#1f77b4", t.numbers("x"), t.numbers("y")});
    return render_svg("trajectory", "x (m)", "y (m)", s, true);
  }
  if (kind == "speed") return render_svg("governed speed", "t (s)", "m/s", {{"gov", "#d62728", time, t.numbers("gov")}});
  if (kind == "pitch") {
    return render_svg("body pitch", "t (s)", "deg",
                      {{"true", "#1f77b4", time, t.numbers("pitch")}, {"estimated", "#ff7f0e", time, t.numbers("pitch_est")}});
  }
  if (kind == "error") {
    auto lat = t.numbers("lat_off");
    for (double& v : lat) v = std::abs(v);
    return render_svg("lateral error", "t (s)", "|lateral| (m)", {{"|lat|", "#2ca02c", time, lat}});
  }
  throw ConfigError("kind", "unknown plot kind '" + kind + "'");
}

}  // namespace sixwheel

#endif  // SIXWHEEL_SVG_PLOT_HPP_
