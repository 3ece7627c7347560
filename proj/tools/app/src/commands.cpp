#include "bvpdisc_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "bvpdisc_app/dataset.hpp"
#include "bvpdisc_app/format.hpp"

namespace bvpdisc::app {

using nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Noise realizations get their own stream so that changing the noise level
// does not change which trials are drawn.
std::uint64_t noise_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 0x632BE5ABULL; }

std::string method_name(DifferentiationMethod m) {
  return m == DifferentiationMethod::PolyInterp ? "poly" : "fd";
}

// JSON has no infinity; failed or missing values are written as null.
ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ModelSpec model_for(const ExperimentConfig& config, const TrialSet& dataset) {
  if (dataset.model() != config.model) {
    throw InvalidArgument("dataset holds model '" + dataset.model() + "' but the config asks for '" +
                          config.model + "'");
  }
  if (!(dataset.grid() == config.grid())) {
    throw InvalidArgument("dataset grid differs from the config's [grid] section");
  }
  return config.model_spec();
}

RunResult run(const ExperimentConfig& config, const TrialSet& dataset, std::size_t trials,
              double noise, std::uint64_t seed, bool identify) {
  const ModelSpec spec = model_for(config, dataset);
  if (trials > dataset.size()) {
    throw InvalidArgument("requested " + std::to_string(trials) + " trials but the dataset has " +
                          std::to_string(dataset.size()));
  }
  RunResult r;
  r.model = spec.name;
  r.trials = trials;
  r.noise = noise;
  r.seed = seed;
  r.identify = identify;
  r.diff = config.differentiation(noise, identify);
  r.regression = config.regression_params(noise);
  r.grid = dataset.grid();
  r.trial_indices = choose_trials(dataset.size(), trials, seed);

  TrialSet data = dataset.subset(r.trial_indices);
  if (noise > 0.0) data = add_noise(data, noise, noise_seed(seed));

  const CandidateLibrary lib = normalize(assemble_system(data, spec.order, r.diff));
  if (identify) {
    r.sweep = tolerance_sweep(lib, r.regression);
    r.selected = select_model(r.sweep);
  } else {
    r.selected = known_operator_fit(lib, spec.true_terms, r.regression);
  }
  r.spurious = spurious_term_count(r.selected, spec.true_terms);
  r.missing = missing_term_count(r.selected, spec.true_terms);

  r.truth = true_parameters(spec, r.grid);
  try {
    r.op = infer_operator(r.selected);
    r.learned = extract_parameters(*r.op, spec);
    double total = 0.0;
    for (const auto& t : data.trials()) {
      total += forcing_residual(predict_forcing(*r.op, t, r.grid, r.diff), t.f, r.grid,
                                config.trim_fraction);
    }
    r.residual = total / static_cast<double>(data.size());
  } catch (const InvalidModelError& e) {
    r.failure = e.what();
    r.residual = kInf;
  }
  for (const auto& [name, truth] : r.truth) {
    auto it = r.learned.find(name);
    r.errors[name] = it == r.learned.end()
                         ? kInf
                         : coefficient_error(it->second, truth, r.grid, config.trim_fraction);
  }
  return r;
}

ordered_json model_json(const SparseSpatialModel& m) {
  ordered_json j;
  j["lhs_order"] = m.lhs_order;
  j["epsilon"] = m.epsilon;
  j["loss"] = number(m.loss);
  j["active_terms"] = m.active_labels();
  ordered_json coefficients = ordered_json::object();
  for (const auto& label : m.active_labels()) {
    const Eigen::VectorXd field = m.field(label);
    coefficients[label] = std::vector<double>(field.data(), field.data() + field.size());
  }
  j["coefficients"] = std::move(coefficients);
  return j;
}

ordered_json run_json(const RunResult& r) {
  ordered_json j;
  j["model"] = r.model;
  j["pipeline"] = r.identify ? "identify" : "estimate";
  j["trials"] = r.trials;
  j["noise"] = r.noise;
  j["seed"] = r.seed;
  j["differentiation"] = {{"method", method_name(r.diff.method)},
                          {"window", r.diff.window},
                          {"degree", r.diff.degree},
                          {"smooth_sigma", r.diff.smooth_sigma},
                          {"adaptive", r.diff.adaptive}};
  j["beta"] = r.regression.beta;
  j["trial_indices"] = r.trial_indices;
  j["active_terms"] = r.selected.active_labels();
  j["spurious_terms"] = r.spurious;
  j["missing_terms"] = r.missing;
  j["exact_support"] = r.exact_support();
  ordered_json errors = ordered_json::object();
  for (const auto& [name, e] : r.errors) errors[name] = number(e);
  j["parameter_errors"] = std::move(errors);
  j["forcing_residual"] = number(r.residual);
  j["failure"] = r.failure;
  j["model_fit"] = model_json(r.selected);
  return j;
}

void write_run(const ExperimentConfig& config, const std::filesystem::path& dataset_path,
               const RunResult& r) {
  const auto& out = config.output_dir;
  ordered_json report;
  report["config"] = to_json(config);
  report["dataset"] = dataset_path.string();
  report["result"] = run_json(r);
  if (r.identify) {
    ordered_json sweep = ordered_json::array();
    for (const auto& m : r.sweep) {
      sweep.push_back({{"epsilon", m.epsilon},
                       {"loss", number(m.loss)},
                       {"active_terms", m.active_labels()}});
    }
    report["sweep"] = std::move(sweep);
  }
  write_text(out / "report.json", report.dump(2) + '\n');

  const auto x = r.grid.points();
  std::vector<std::string> names{"x"};
  std::vector<std::vector<double>> columns{{x.begin(), x.end()}};
  for (const auto& label : r.selected.active_labels()) {
    const Eigen::VectorXd field = r.selected.field(label);
    names.push_back(label);
    columns.emplace_back(field.data(), field.data() + field.size());
  }
  write_columns(out / "coefficients.csv", names, columns);

  names = {"x"};
  columns = {{x.begin(), x.end()}};
  for (const auto& [name, truth] : r.truth) {
    names.push_back(name + "_true");
    columns.push_back(truth);
    auto it = r.learned.find(name);
    names.push_back(name + "_learned");
    columns.push_back(it == r.learned.end()
                          ? std::vector<double>(x.size(), std::numeric_limits<double>::quiet_NaN())
                          : it->second);
  }
  write_columns(out / "parameters.csv", names, columns);

  if (r.identify) {
    std::vector<double> eps, loss, active;
    for (const auto& m : r.sweep) {
      eps.push_back(m.epsilon);
      loss.push_back(m.loss);
      active.push_back(static_cast<double>(m.active_count()));
    }
    write_columns(out / "sweep.csv", {"epsilon", "loss", "active_terms"}, {eps, loss, active});
  }
}

}  // namespace

double RunResult::primary_error() const {
  for (const char* name : {"p", "EI"}) {
    auto it = errors.find(name);
    if (it != errors.end()) return it->second;
  }
  return kInf;
}

std::vector<std::size_t> choose_trials(std::size_t available, std::size_t count,
                                       std::uint64_t seed) {
  if (count == 0 || count > available) {
    throw InvalidArgument("cannot choose " + std::to_string(count) + " of " +
                          std::to_string(available) + " trials");
  }
  std::vector<std::size_t> idx(available);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (available - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

RunResult run_identify(const ExperimentConfig& config, const TrialSet& dataset,
                       std::size_t trials, double noise, std::uint64_t seed) {
  return run(config, dataset, trials, noise, seed, true);
}

RunResult run_estimate(const ExperimentConfig& config, const TrialSet& dataset,
                       std::size_t trials, double noise, std::uint64_t seed) {
  return run(config, dataset, trials, noise, seed, false);
}

TrialSet generate_dataset(const ExperimentConfig& config) {
  const ModelSpec spec = config.model_spec();
  const std::size_t count = config.dataset_trials == 0 ? spec.forcing_grid.size()
                                                       : config.dataset_trials;
  const auto forcings = forcing_set(spec, count, config.seed);
  return generate_trials(spec, forcings, config.grid(), config.shooting());
}

SweepResult run_sweep(const ExperimentConfig& config, const TrialSet& dataset) {
  if (config.pipeline != Pipeline::NoiseSweep && config.pipeline != Pipeline::TrialSweep) {
    throw InvalidArgument("sweep needs pipeline = noise-sweep or trial-sweep");
  }
  const bool identify = config.sweep_target == SweepTarget::Identify;
  SweepResult result;
  std::vector<double> axis;
  if (config.pipeline == Pipeline::NoiseSweep) {
    result.axis = "noise";
    axis = config.noise_levels;
  } else {
    result.axis = "trials";
    for (auto m : config.trial_counts) axis.push_back(static_cast<double>(m));
  }
  for (double v : axis) {
    SweepPoint point;
    point.axis_value = v;
    for (std::size_t s = 0; s < config.seeds_per_point; ++s) {
      const std::uint64_t seed = config.seed + s;
      const std::size_t trials =
          result.axis == "noise" ? config.trials : static_cast<std::size_t>(v);
      const double noise = result.axis == "noise" ? v : config.noise;
      point.runs.push_back(run(config, dataset, trials, noise, seed, identify));
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

OrderResult run_order(const ExperimentConfig& config, const TrialSet& dataset) {
  model_for(config, dataset);
  if (config.trials > dataset.size()) {
    throw InvalidArgument("requested " + std::to_string(config.trials) +
                          " trials but the dataset has " + std::to_string(dataset.size()));
  }
  if (config.trials < 2) throw InvalidArgument("order selection needs at least 2 trials");
  const auto chosen = choose_trials(dataset.size(), config.trials, config.seed);
  const auto test_count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(chosen.size()))),
      1, chosen.size() - 1);
  const auto test_pos = choose_trials(chosen.size(), test_count, noise_seed(config.seed));

  OrderResult result;
  std::size_t next = 0;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    if (next < test_pos.size() && test_pos[next] == i) {
      result.test_indices.push_back(chosen[i]);
      ++next;
    } else {
      result.train_indices.push_back(chosen[i]);
    }
  }
  for (auto t : result.test_indices) {
    for (auto u : result.train_indices) {
      if (dataset[t].forcing == dataset[u].forcing) {
        throw InvalidArgument("train and test sets share a forcing; the dataset has duplicates");
      }
    }
  }

  TrialSet data = dataset;
  if (config.noise > 0.0) data = add_noise(dataset, config.noise, noise_seed(config.seed + 1));
  const DifferentiationConfig diff = config.differentiation(config.noise, true);
  result.selection = select_order(data.subset(result.train_indices), data.subset(result.test_indices),
                                  config.orders, diff, config.regression_params(config.noise),
                                  config.trim_fraction);
  return result;
}

void cmd_generate(const ExperimentConfig& config, const std::filesystem::path& dataset_path) {
  write_dataset(generate_dataset(config), dataset_path, config.seed);
}

void cmd_discover(const ExperimentConfig& config, const std::filesystem::path& dataset_path) {
  if (config.pipeline != Pipeline::IdentifyOperator) {
    throw InvalidArgument("discover needs pipeline = identify");
  }
  const TrialSet data = read_dataset(dataset_path);
  write_run(config, dataset_path, run_identify(config, data, config.trials, config.noise, config.seed));
}

void cmd_estimate(const ExperimentConfig& config, const std::filesystem::path& dataset_path) {
  if (config.pipeline != Pipeline::EstimateParameters) {
    throw InvalidArgument("estimate needs pipeline = estimate");
  }
  const TrialSet data = read_dataset(dataset_path);
  write_run(config, dataset_path, run_estimate(config, data, config.trials, config.noise, config.seed));
}

void cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& dataset_path) {
  const TrialSet data = read_dataset(dataset_path);
  const SweepResult sweep = run_sweep(config, data);

  std::vector<std::string> param_names;
  for (const auto& [name, e] : sweep.points.front().runs.front().errors) param_names.push_back(name);

  std::vector<std::string> names{sweep.axis, "seed", "loss", "residual", "spurious", "missing",
                                 "exact_support"};
  for (const auto& p : param_names) names.push_back("error_" + p);
  std::vector<std::vector<double>> runs(names.size());
  for (const auto& point : sweep.points) {
    for (const auto& r : point.runs) {
      std::vector<double> row{point.axis_value, static_cast<double>(r.seed), r.selected.loss,
                              r.residual, static_cast<double>(r.spurious),
                              static_cast<double>(r.missing), r.exact_support() ? 1.0 : 0.0};
      for (const auto& p : param_names) row.push_back(r.errors.at(p));
      for (std::size_t i = 0; i < row.size(); ++i) runs[i].push_back(row[i]);
    }
  }
  write_columns(config.output_dir / "sweep_runs.csv", names, runs);

  // Mean, min and max over seeds of every per-run metric.
  std::vector<std::string> summary_names{sweep.axis, "exact_support_fraction"};
  for (const auto& metric : std::vector<std::string>{"loss", "residual"}) {
    for (const char* stat : {"_mean", "_min", "_max"}) summary_names.push_back(metric + stat);
  }
  for (const auto& p : param_names) {
    for (const char* stat : {"_mean", "_min", "_max"}) summary_names.push_back("error_" + p + stat);
  }
  std::vector<std::vector<double>> summary(summary_names.size());
  for (const auto& point : sweep.points) {
    std::vector<double> row{point.axis_value};
    double exact = 0.0;
    for (const auto& r : point.runs) exact += r.exact_support() ? 1.0 : 0.0;
    row.push_back(exact / static_cast<double>(point.runs.size()));
    auto stats = [&](auto metric) {
      double sum = 0.0, lo = kInf, hi = -kInf;
      for (const auto& r : point.runs) {
        const double v = metric(r);
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      row.push_back(sum / static_cast<double>(point.runs.size()));
      row.push_back(lo);
      row.push_back(hi);
    };
    stats([](const RunResult& r) { return r.selected.loss; });
    stats([](const RunResult& r) { return r.residual; });
    for (const auto& p : param_names) stats([&](const RunResult& r) { return r.errors.at(p); });
    for (std::size_t i = 0; i < row.size(); ++i) summary[i].push_back(row[i]);
  }
  write_columns(config.output_dir / "sweep_summary.csv", summary_names, summary);

  ordered_json report;
  report["config"] = to_json(config);
  report["dataset"] = dataset_path.string();
  report["axis"] = sweep.axis;
  ordered_json points = ordered_json::array();
  for (const auto& point : sweep.points) {
    ordered_json runs_json = ordered_json::array();
    for (const auto& r : point.runs) {
      ordered_json j = run_json(r);
      j.erase("model_fit");
      j.erase("trial_indices");
      runs_json.push_back(std::move(j));
    }
    points.push_back({{"value", point.axis_value}, {"runs", std::move(runs_json)}});
  }
  report["points"] = std::move(points);
  write_text(config.output_dir / "sweep_report.json", report.dump(2) + '\n');
}

void cmd_order(const ExperimentConfig& config, const std::filesystem::path& dataset_path) {
  if (config.pipeline != Pipeline::SelectOrder) throw InvalidArgument("order needs pipeline = order");
  const TrialSet data = read_dataset(dataset_path);
  const OrderResult result = run_order(config, data);

  std::vector<double> order, error, active;
  ordered_json scores = ordered_json::array();
  for (const auto& s : result.selection.scores) {
    order.push_back(s.order);
    error.push_back(s.error);
    active.push_back(static_cast<double>(s.active_terms.size()));
    scores.push_back({{"order", s.order},
                      {"error", number(s.error)},
                      {"active_terms", s.active_terms},
                      {"failure", s.failure}});
  }
  write_columns(config.output_dir / "order.csv", {"order", "error", "active_terms"},
                {order, error, active});

  ordered_json report;
  report["config"] = to_json(config);
  report["dataset"] = dataset_path.string();
  report["best_order"] = result.selection.best_order;
  report["train_indices"] = result.train_indices;
  report["test_indices"] = result.test_indices;
  report["scores"] = std::move(scores);
  write_text(config.output_dir / "order_report.json", report.dump(2) + '\n');
}

}  // namespace bvpdisc::app
