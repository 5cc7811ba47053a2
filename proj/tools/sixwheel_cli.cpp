// Command-line front end: simulate, train, lane-detect, plot.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "sixwheel/cli.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("sixwheel");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::err);
  if (const char* env = std::getenv("SIXWHEEL_LOG")) {
    const std::string level = env;
    if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level != "error") spdlog::warn("SIXWHEEL_LOG='{}' not one of error, info, debug", level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  namespace cli = sixwheel::cli;

  CLI::App app{"Six-wheeled delivery robot simulator and controller tools"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand help for every subcommand");

  std::string scenario, out, params, image, csv, kind = "trajectory";
  std::optional<std::uint64_t> seed;
  int episodes = 200;

  auto* sim = app.add_subcommand("simulate", "Run a scenario and write its per-tick CSV log");
  sim->add_option("--scenario", scenario, "Scenario JSON file")->required();
  sim->add_option("--out", out, "Output CSV path")->required();
  sim->add_option("--seed", seed, "Override the scenario seed");

  auto* train = app.add_subcommand("train", "Train the membership tuner on a scenario");
  train->add_option("--scenario", scenario, "Scenario JSON file")->required();
  train->add_option("--out", out, "Output tuner JSON (params, Q-table, settings)")->required();
  train->add_option("--episodes", episodes, "Number of training episodes")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", seed, "Override the scenario seed (also seeds exploration)");
  train->add_option("--params", params, "Start from a saved tuner JSON instead of the scenario settings");

  auto* lane = app.add_subcommand("lane-detect", "Find lane boundaries in a PGM image");
  lane->add_option("image", image, "Input binary PGM (P5)")->required();
  lane->add_option("--params", params, "Detector settings JSON");
  lane->add_option("--out", out, "Write an annotated PGM here");

  auto* plot = app.add_subcommand("plot", "Render an SVG chart from a simulate CSV");
  plot->add_option("csv", csv, "Run log CSV")->required();
  plot->add_option("--out", out, "Output SVG path")->required();
  plot->add_option("--kind", kind, "trajectory, speed, pitch or error")->capture_default_str();
  plot->add_option("--scenario", scenario, "Scenario JSON, to draw the reference path on trajectory plots");

  for (auto* sub : {sim, train, lane, plot}) sub->get_formatter()->column_width(34);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  auto opt_path = [](const std::string& p) {
    return p.empty() ? std::nullopt : std::optional<std::filesystem::path>(p);
  };
  if (*sim) return cli::cmd_simulate(scenario, out, seed, std::cout, std::cerr);
  if (*train) return cli::cmd_train(scenario, episodes, out, seed, opt_path(params), std::cout, std::cerr);
  if (*lane) return cli::cmd_lane_detect(image, opt_path(params), opt_path(out), std::cout, std::cerr);
  return cli::cmd_plot(csv, out, kind, opt_path(scenario), std::cerr);
}
