#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prototrack/cli.hpp"

namespace {

using prototrack::SelectionStrategy;

void add_common_flags(CLI::App* cmd, prototrack::cli::RunConfig& config, std::string& strategy,
                      std::uint64_t& seed, bool& seed_given) {
  cmd->add_option("--alpha", config.track.alpha, "Anchor score blend, 0 = feature only")
      ->capture_default_str();
  cmd->add_option("--m", config.track.window, "Candidate window size")->capture_default_str();
  cmd->add_option("--beta", config.track.beta, "Cycle-consistency acceptance threshold")
      ->capture_default_str();
  cmd->add_option("--strategy", strategy,
                  "samite | sam2_default | feature_only | position_only | recent_only")
      ->capture_default_str();
  cmd->add_option_function<std::uint64_t>(
         "--seed", [&seed, &seed_given](std::uint64_t v) { seed = v; seed_given = true; },
         "Scenario seed");
  cmd->add_option("--out", config.out_dir, "Output root (default: $PROTO_TRACK_OUT or results/)");
  cmd->add_option("--seg-threshold", config.track.seg_threshold, "Decoder activation threshold")
      ->capture_default_str();
  cmd->add_option("--binarize-threshold", config.track.binarize_threshold,
                  "Reverse-prompt binarization threshold")
      ->capture_default_str();
}

bool apply_strategy(const std::string& name, prototrack::cli::RunConfig& config) {
  const auto strategy = prototrack::strategy_from_string(name);
  if (!strategy) {
    std::cerr << "unknown strategy '" << name << "'\n";
    return false;
  }
  config.track.strategy = *strategy;
  return true;
}

std::vector<double> default_sweep_values(const std::string& param) {
  if (param == "alpha") return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0};
  if (param == "m") return {20, 30, 40, 50, 60};
  if (param == "beta") return {0.5, 0.6, 0.7, 0.8, 0.9};
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prototrack: prototype-memory tracking engine over synthetic scenarios"};
  app.require_subcommand(1);

  prototrack::cli::RunConfig config;
  std::string strategy = "samite";
  std::uint64_t seed = 1;
  bool seed_given = false;

  CLI::App* track = app.add_subcommand("track", "Track one scenario or annotated sequence");
  add_common_flags(track, config, strategy, seed, seed_given);
  track->add_option("--scenario", config.scenario, "Suite scenario name or scenario config file");
  track->add_option("--sequence-dir", config.sequence_dir,
                    "Directory with groundtruth.txt and optional flag files");

  CLI::App* compare = app.add_subcommand("compare", "Compare strategies over the standard suite");
  add_common_flags(compare, config, strategy, seed, seed_given);
  std::vector<std::string> strategy_names = {"samite", "sam2_default", "feature_only",
                                             "position_only"};
  compare->add_option("--strategies", strategy_names, "Comma-separated strategies")
      ->delimiter(',')
      ->capture_default_str();

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one hyperparameter over the suite");
  add_common_flags(sweep, config, strategy, seed, seed_given);
  std::string param = "alpha";
  std::vector<double> values;
  sweep->add_option("--param", param, "alpha | m | beta")->capture_default_str();
  sweep->add_option("--values", values, "Comma-separated values (default: the standard grid)")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  if (seed_given) config.seed = seed;
  if (!apply_strategy(strategy, config)) return 1;

  if (track->parsed()) return prototrack::cli::cmd_track(config);

  if (compare->parsed()) {
    std::vector<SelectionStrategy> strategies;
    for (const std::string& name : strategy_names) {
      const auto s = prototrack::strategy_from_string(name);
      if (!s) {
        std::cerr << "unknown strategy '" << name << "'\n";
        return 1;
      }
      strategies.push_back(*s);
    }
    return prototrack::cli::cmd_compare(config, strategies);
  }

  if (sweep->parsed()) {
    if (values.empty()) values = default_sweep_values(param);
    return prototrack::cli::cmd_sweep(config, param, values);
  }
  return 1;
}
