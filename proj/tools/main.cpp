#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bvpdisc_app/commands.hpp"
#include "bvpdisc_app/config.hpp"

namespace app = bvpdisc::app;

namespace {

struct CommonOptions {
  std::string config;
  std::string data;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "INI experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--data", o.data, "dataset CSV (its .json sidecar must sit next to it)");
  cmd->add_option("--out", o.out, "output directory (overrides experiment.output)");
  cmd->add_option("--seed", o.seed, "seed (overrides experiment.seed)");
}

app::ExperimentConfig resolve(const CommonOptions& o, std::optional<app::Pipeline> implied) {
  app::ExperimentConfig config = o.config.empty() ? app::parse_config("") : app::load_config(o.config);
  if (!o.out.empty()) config.output_dir = o.out;
  if (o.seed) config.seed = *o.seed;
  if (implied) {
    if (config.pipeline_explicit && config.pipeline != *implied) {
      throw bvpdisc::InvalidArgument("config sets pipeline = " + app::to_string(config.pipeline) +
                                     " but the subcommand runs " + app::to_string(*implied));
    }
    config.pipeline = *implied;
  }
  return config;
}

std::filesystem::path require_data(const CommonOptions& o) {
  if (o.data.empty()) throw bvpdisc::InvalidArgument("--data is required");
  return o.data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Operator discovery for forced boundary value problems"};
  cli.require_subcommand(1);

  CommonOptions gen_opts, disc_opts, est_opts, sweep_opts, order_opts;
  auto* gen = cli.add_subcommand("generate", "solve the model for a set of forcings and save the trials");
  auto* disc = cli.add_subcommand("discover", "identify the operator and its coefficients");
  auto* est = cli.add_subcommand("estimate", "fit the coefficients of the known operator");
  auto* sweep = cli.add_subcommand("sweep", "repeat discover or estimate over noise levels or trial counts");
  auto* order = cli.add_subcommand("order", "choose the differential order by held-out forcing error");
  add_common(gen, gen_opts);
  add_common(disc, disc_opts);
  add_common(est, est_opts);
  add_common(sweep, sweep_opts);
  add_common(order, order_opts);

  CLI11_PARSE(cli, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  try {
    if (gen->parsed()) {
      const auto config = resolve(gen_opts, std::nullopt);
      const std::filesystem::path path =
          gen_opts.data.empty() ? config.output_dir / "dataset.csv" : std::filesystem::path(gen_opts.data);
      app::cmd_generate(config, path);
      std::cerr << "wrote " << path.string() << '\n';
    } else if (disc->parsed()) {
      const auto config = resolve(disc_opts, app::Pipeline::IdentifyOperator);
      app::cmd_discover(config, require_data(disc_opts));
      std::cerr << "wrote " << (config.output_dir / "report.json").string() << '\n';
    } else if (est->parsed()) {
      const auto config = resolve(est_opts, app::Pipeline::EstimateParameters);
      app::cmd_estimate(config, require_data(est_opts));
      std::cerr << "wrote " << (config.output_dir / "report.json").string() << '\n';
    } else if (sweep->parsed()) {
      const auto config = resolve(sweep_opts, std::nullopt);
      app::cmd_sweep(config, require_data(sweep_opts));
      std::cerr << "wrote " << (config.output_dir / "sweep_summary.csv").string() << '\n';
    } else if (order->parsed()) {
      const auto config = resolve(order_opts, app::Pipeline::SelectOrder);
      app::cmd_order(config, require_data(order_opts));
      std::cerr << "wrote " << (config.output_dir / "order_report.json").string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "elapsed " << seconds << " s\n";
  return 0;
}
