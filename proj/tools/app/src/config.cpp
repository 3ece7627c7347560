#include "bvpdisc_app/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bvpdisc::app {

namespace pt = boost::property_tree;

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::IdentifyOperator: return "identify";
    case Pipeline::EstimateParameters: return "estimate";
    case Pipeline::SelectOrder: return "order";
    case Pipeline::NoiseSweep: return "noise-sweep";
    case Pipeline::TrialSweep: return "trial-sweep";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& name) {
  for (auto p : {Pipeline::IdentifyOperator, Pipeline::EstimateParameters, Pipeline::SelectOrder,
                 Pipeline::NoiseSweep, Pipeline::TrialSweep}) {
    if (to_string(p) == name) return p;
  }
  throw InvalidArgument("unknown pipeline '" + name +
                        "' (expected identify, estimate, order, noise-sweep or trial-sweep)");
}

namespace {

std::string method_name(DifferentiationMethod m) {
  return m == DifferentiationMethod::PolyInterp ? "poly" : "fd";
}

std::string count_name(SparsityCount c) {
  return c == SparsityCount::ActiveGroups ? "groups" : "per-trial";
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::string normalized = text;
  for (char& ch : normalized) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(normalized);
  std::vector<T> out;
  std::string token;
  while (in >> token) {
    std::istringstream tok(token);
    T value{};
    if (!(tok >> value) || !tok.eof()) {
      throw InvalidArgument("config key '" + key + "': cannot parse '" + token + "'");
    }
    out.push_back(value);
  }
  return out;
}

template <class T>
void read(const pt::ptree& tree, const std::string& key, T& target) {
  auto node = tree.get_optional<std::string>(key);
  if (!node) return;
  auto value = tree.get_optional<T>(key);
  if (!value) throw InvalidArgument("config key '" + key + "': cannot parse '" + *node + "'");
  target = *value;
}

template <class T>
void read_list(const pt::ptree& tree, const std::string& key, std::vector<T>& target) {
  if (auto node = tree.get_optional<std::string>(key)) target = parse_list<T>(key, *node);
}

template <class T>
void read_optional(const pt::ptree& tree, const std::string& key, std::optional<T>& target) {
  if (!tree.get_optional<std::string>(key)) return;
  T value{};
  read(tree, key, value);
  target = value;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment.model", "experiment.pipeline", "experiment.seed", "experiment.output",
      "experiment.trials", "experiment.noise", "experiment.trim",
      "grid.a", "grid.b", "grid.n",
      "forcing.amplitudes", "forcing.frequencies", "forcing.offsets",
      "generate.trials", "generate.tolerance",
      "differentiation.method", "differentiation.window", "differentiation.degree",
      "differentiation.smooth_sigma", "differentiation.adaptive",
      "regression.lambda", "regression.final_lambda", "regression.beta", "regression.num_eps",
      "regression.iters", "regression.sparsity",
      "sweep.noise_levels", "sweep.trial_counts", "sweep.seeds", "sweep.target",
      "order.orders", "order.test_fraction"};
  return keys;
}

ExperimentConfig from_tree(const pt::ptree& tree) {
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw InvalidArgument("config key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, value] : body) {
      if (!known_keys().contains(section + "." + key)) {
        throw InvalidArgument("unknown config key '" + section + "." + key + "'");
      }
    }
  }

  ExperimentConfig c;
  read(tree, "experiment.model", c.model);
  if (auto p = tree.get_optional<std::string>("experiment.pipeline")) {
    c.pipeline = parse_pipeline(*p);
    c.pipeline_explicit = true;
  }
  read(tree, "experiment.seed", c.seed);
  if (auto out = tree.get_optional<std::string>("experiment.output")) c.output_dir = *out;
  read(tree, "experiment.trials", c.trials);
  read(tree, "experiment.noise", c.noise);
  read(tree, "experiment.trim", c.trim_fraction);

  read(tree, "grid.a", c.grid_a);
  read(tree, "grid.b", c.grid_b);
  read(tree, "grid.n", c.grid_n);

  read_list(tree, "forcing.amplitudes", c.amplitudes);
  read_list(tree, "forcing.frequencies", c.frequencies);
  read_list(tree, "forcing.offsets", c.offsets);

  read(tree, "generate.trials", c.dataset_trials);
  read(tree, "generate.tolerance", c.shooting_tol);

  if (auto m = tree.get_optional<std::string>("differentiation.method")) {
    if (*m == "poly") {
      c.diff.method = DifferentiationMethod::PolyInterp;
    } else if (*m == "fd") {
      c.diff.method = DifferentiationMethod::FiniteDifference;
    } else if (*m != "auto") {
      throw InvalidArgument("differentiation.method must be auto, poly or fd, got '" + *m + "'");
    }
  }
  read_optional(tree, "differentiation.window", c.diff.window);
  read_optional(tree, "differentiation.degree", c.diff.degree);
  read_optional(tree, "differentiation.smooth_sigma", c.diff.smooth_sigma);
  read_optional(tree, "differentiation.adaptive", c.diff.adaptive);

  read(tree, "regression.lambda", c.regression.lambda);
  read(tree, "regression.final_lambda", c.regression.final_lambda);
  read_optional(tree, "regression.beta", c.beta);
  read(tree, "regression.num_eps", c.regression.num_eps);
  read(tree, "regression.iters", c.regression.iters);
  if (auto s = tree.get_optional<std::string>("regression.sparsity")) {
    if (*s == "groups") {
      c.regression.count = SparsityCount::ActiveGroups;
    } else if (*s == "per-trial") {
      c.regression.count = SparsityCount::NonzerosPerTrial;
    } else {
      throw InvalidArgument("regression.sparsity must be groups or per-trial, got '" + *s + "'");
    }
  }

  read_list(tree, "sweep.noise_levels", c.noise_levels);
  read_list(tree, "sweep.trial_counts", c.trial_counts);
  read(tree, "sweep.seeds", c.seeds_per_point);
  if (auto t = tree.get_optional<std::string>("sweep.target")) {
    if (*t == "identify") {
      c.sweep_target = SweepTarget::Identify;
    } else if (*t == "estimate") {
      c.sweep_target = SweepTarget::Estimate;
    } else {
      throw InvalidArgument("sweep.target must be identify or estimate, got '" + *t + "'");
    }
  }

  read_list(tree, "order.orders", c.orders);
  read(tree, "order.test_fraction", c.test_fraction);

  c.validate();
  return c;
}

}  // namespace

ModelSpec ExperimentConfig::model_spec() const {
  ModelSpec spec = model_by_name(model);
  if (!amplitudes.empty()) spec.forcing_grid.amplitudes = amplitudes;
  if (!frequencies.empty()) spec.forcing_grid.frequencies = frequencies;
  if (!offsets.empty()) spec.forcing_grid.offsets = offsets;
  return spec;
}

Grid ExperimentConfig::grid() const { return Grid(grid_a, grid_b, grid_n); }

ShootingOptions ExperimentConfig::shooting() const {
  ShootingOptions o;
  o.tol = shooting_tol;
  return o;
}

DifferentiationConfig ExperimentConfig::differentiation(double level, bool identify) const {
  DifferentiationConfig d;
  d.method = DifferentiationMethod::PolyInterp;
  if (level == 0.0) {
    // A short high-degree window is accurate to ~1e-7 on clean solutions;
    // adaptive placement keeps it off kinks such as the beam's EI jumps.
    d.window = 7;
    d.degree = 6;
    d.smooth_sigma = 0.0;
    d.adaptive = true;
  } else if (identify) {
    d.window = 61;
    d.degree = 4;
    d.smooth_sigma = 5.0;
  } else {
    d.window = 61;
    d.degree = 4;
    d.smooth_sigma = 0.0;
  }
  if (diff.method) d.method = *diff.method;
  if (diff.window) d.window = *diff.window;
  if (diff.degree) d.degree = *diff.degree;
  if (diff.smooth_sigma) d.smooth_sigma = *diff.smooth_sigma;
  if (diff.adaptive) d.adaptive = *diff.adaptive;
  return d;
}

RegressionParams ExperimentConfig::regression_params(double level) const {
  RegressionParams r = regression;
  // The loss floor stands in for the derivative error; with noisy data it
  // has to sit near the noise-driven residual or every group pays its way.
  if (level > 0.0) r.beta = kNoisyBeta;
  if (beta) r.beta = *beta;
  return r;
}

void ExperimentConfig::validate() const {
  const ModelSpec spec = model_spec();
  const std::size_t available = spec.forcing_grid.size();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument("invalid config: " + what);
  };
  require(std::isfinite(grid_a) && std::isfinite(grid_b) && grid_a < grid_b,
          "grid.a must be below grid.b");
  require(grid_n >= Grid::kMinPoints, "grid.n must be at least 5");
  for (const auto* axis : {&spec.forcing_grid.amplitudes, &spec.forcing_grid.frequencies,
                           &spec.forcing_grid.offsets}) {
    for (double v : *axis) require(std::isfinite(v), "forcing values must be finite");
  }
  require(available > 0, "the forcing grid is empty");
  require(dataset_trials <= available,
          "generate.trials = " + std::to_string(dataset_trials) + " exceeds the " +
              std::to_string(available) + " forcings of the grid");
  require(shooting_tol > 0.0, "generate.tolerance must be positive");
  require(trials >= 1 && trials <= available,
          "experiment.trials must be between 1 and " + std::to_string(available));
  require(noise >= 0.0 && std::isfinite(noise), "experiment.noise must be non-negative");
  require(trim_fraction >= 0.0 && trim_fraction < 0.5, "experiment.trim must be in [0, 0.5)");
  for (double level : noise_levels) {
    require(level >= 0.0 && std::isfinite(level), "noise levels must be non-negative");
  }
  for (std::size_t m : trial_counts) {
    if (pipeline != Pipeline::TrialSweep) break;
    require(m >= 1 && m <= available, "sweep trial counts must be between 1 and " +
                                          std::to_string(available));
  }
  require(seeds_per_point >= 1, "sweep.seeds must be at least 1");
  require(!orders.empty(), "order.orders must not be empty");
  for (int a : orders) require(a >= 1 && a <= 4, "orders must be between 1 and 4");
  require(test_fraction > 0.0 && test_fraction < 1.0, "order.test_fraction must be in (0, 1)");
  require(regression.lambda >= 0.0, "regression.lambda must be non-negative");
  require(regression.final_lambda >= 0.0, "regression.final_lambda must be non-negative");
  require(regression_params(0.0).beta > 0.0 && regression_params(1.0).beta > 0.0,
          "regression.beta must be positive");
  require(regression.num_eps >= 2, "regression.num_eps must be at least 2");
  require(regression.iters >= 1, "regression.iters must be at least 1");
  if (diff.smooth_sigma) require(*diff.smooth_sigma >= 0.0, "smooth_sigma must be non-negative");
  // Window/degree consistency is checked against the grid for every level
  // the config can run at.
  for (bool identify : {false, true}) {
    for (double level : {0.0, 1.0}) differentiation(level, identify).validate(grid_n);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  std::istringstream in(text);
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  using nlohmann::ordered_json;
  const ModelSpec spec = c.model_spec();
  auto diff_json = [](const DifferentiationConfig& d) {
    return ordered_json{{"method", method_name(d.method)},
                        {"window", d.window},
                        {"degree", d.degree},
                        {"smooth_sigma", d.smooth_sigma},
                        {"adaptive", d.adaptive}};
  };
  ordered_json j;
  j["experiment"] = {{"model", c.model},
                     {"pipeline", to_string(c.pipeline)},
                     {"seed", c.seed},
                     {"output", c.output_dir.string()},
                     {"trials", c.trials},
                     {"noise", c.noise},
                     {"trim", c.trim_fraction}};
  j["grid"] = {{"a", c.grid_a}, {"b", c.grid_b}, {"n", c.grid_n}};
  j["forcing"] = {{"amplitudes", spec.forcing_grid.amplitudes},
                  {"frequencies", spec.forcing_grid.frequencies},
                  {"offsets", spec.forcing_grid.offsets}};
  j["generate"] = {{"trials", c.dataset_trials == 0 ? spec.forcing_grid.size() : c.dataset_trials},
                   {"tolerance", c.shooting_tol}};
  j["differentiation"] = {{"clean", diff_json(c.differentiation(0.0, false))},
                          {"noisy_identify", diff_json(c.differentiation(1.0, true))},
                          {"noisy_estimate", diff_json(c.differentiation(1.0, false))}};
  j["regression"] = {{"lambda", c.regression.lambda},
                     {"final_lambda", c.regression.final_lambda},
                     {"beta_clean", c.regression_params(0.0).beta},
                     {"beta_noisy", c.regression_params(1.0).beta},
                     {"num_eps", c.regression.num_eps},
                     {"iters", c.regression.iters},
                     {"sparsity", count_name(c.regression.count)}};
  j["sweep"] = {{"noise_levels", c.noise_levels},
                {"trial_counts", c.trial_counts},
                {"seeds", c.seeds_per_point},
                {"target", c.sweep_target == SweepTarget::Identify ? "identify" : "estimate"}};
  j["order"] = {{"orders", c.orders}, {"test_fraction", c.test_fraction}};
  return j;
}

}  // namespace bvpdisc::app
