#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "steinrec/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_override;
  std::string mode_override;
  std::int64_t seed_override = -1;
  int workers = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "experiment config (json)")
      ->required();
  cmd->add_option("--out", flags.out_override, "output directory override");
  cmd->add_option("--seed", flags.seed_override, "seed override");
  cmd->add_option("--mode", flags.mode_override,
                  "estimation mode override: sampled, expected, closed_form");
  cmd->add_option("--workers", flags.workers, "worker thread count");
}

steinrec::ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  steinrec::ExperimentConfig config = steinrec::load_config(flags.config_path);
  if (!flags.out_override.empty()) config.output_dir = flags.out_override;
  if (flags.seed_override >= 0)
    config.network.seed = static_cast<std::uint64_t>(flags.seed_override);
  if (!flags.mode_override.empty())
    config.estimation.mode =
        steinrec::estimation_mode_from_string(flags.mode_override);
  if (flags.workers >= 0) config.workers = flags.workers;
  return config;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const steinrec::ConfigError*>(&e)) return 2;
  if (dynamic_cast<const steinrec::IoError*>(&e)) return 4;
  if (dynamic_cast<const steinrec::NumericError*>(&e)) return 3;
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moment-based recovery of sparse first-layer network weights"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string axis = "n";
  std::vector<double> sweep_values;
  int sweep_seeds = 1;

  CLI::App* generate = app.add_subcommand(
      "generate", "draw the network and write ground-truth weights");
  add_common(generate, flags);

  CLI::App* moment = app.add_subcommand(
      "moment", "estimate the label-score cross-moment matrix");
  add_common(moment, flags);

  CLI::App* recover = app.add_subcommand(
      "recover", "recover the first layer from the moment matrix");
  add_common(recover, flags);

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "match the recovered rows against ground truth");
  add_common(evaluate, flags);

  CLI::App* pipeline = app.add_subcommand(
      "pipeline", "run generate, moment, recover, evaluate end to end");
  add_common(pipeline, flags);

  CLI::App* sweep =
      app.add_subcommand("sweep", "pipeline over a grid of one axis");
  add_common(sweep, flags);
  sweep->add_option("--axis", axis, "sweep axis: n, theta, n_x");
  sweep->add_option("--values", sweep_values, "axis values")->required();
  sweep->add_option("--seeds", sweep_seeds, "seeds per value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      const auto warnings =
          steinrec::run_generate(load_with_overrides(flags));
      for (const std::string& w : warnings)
        std::cerr << "warning: " << w << "\n";
      std::cout << "network written\n";
    } else if (moment->parsed()) {
      const auto m = steinrec::run_moment(load_with_overrides(flags));
      std::cout << "moment " << m.values.rows() << "x" << m.values.cols()
                << " from " << m.sample_count << " samples ("
                << steinrec::to_string(m.source) << ")\n";
    } else if (recover->parsed()) {
      const auto result = steinrec::run_recover(load_with_overrides(flags));
      std::cout << "recovered " << result.first_layer.rows() << " rows\n";
    } else if (evaluate->parsed()) {
      const auto report = steinrec::run_evaluate(load_with_overrides(flags));
      std::cout << "mean cosine error "
                << report.at("mean_cosine_error").get<double>() << ", success "
                << (report.at("success").get<bool>() ? "true" : "false")
                << "\n";
    } else if (pipeline->parsed()) {
      const auto summary = steinrec::run_pipeline(load_with_overrides(flags));
      std::cout << "success "
                << (summary.at("success").get<bool>() ? "true" : "false")
                << ", mean cosine error "
                << summary.at("mean_cosine_error").get<double>() << "\n";
    } else if (sweep->parsed()) {
      const auto summary = steinrec::run_sweep(
          load_with_overrides(flags), steinrec::sweep_axis_from_string(axis),
          sweep_values, sweep_seeds);
      std::cout << "sweep finished: " << summary.at("rows").size()
                << " cells\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
