#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bvpdisc/bvpdisc.hpp"
#include "bvpdisc_app/config.hpp"

namespace bvpdisc::app {

// One discover or estimate run on a subsample of a dataset.
struct RunResult {
  std::string model;
  std::size_t trials = 0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  bool identify = false;
  DifferentiationConfig diff;
  RegressionParams regression;

  std::vector<std::size_t> trial_indices;
  std::vector<SparseSpatialModel> sweep;  // identify only
  SparseSpatialModel selected;
  std::optional<DiscoveredOperator> op;
  // Set when the selected model could not be turned into an operator.
  std::string failure;

  Grid grid{0.0, 1.0, Grid::kMinPoints};
  FieldMap learned;
  FieldMap truth;
  // Relative interior error per parameter; +inf for a parameter the model
  // has but the run did not recover.
  std::map<std::string, double> errors;
  std::size_t spurious = 0;
  std::size_t missing = 0;
  // Mean forcing residual of the discovered operator over the used trials.
  double residual = 0.0;

  bool exact_support() const { return failure.empty() && spurious == 0 && missing == 0; }
  // Error of the leading coefficient (p, or EI for the beam).
  double primary_error() const;
};

// Seeded choice of `count` distinct trials, returned in ascending order.
std::vector<std::size_t> choose_trials(std::size_t available, std::size_t count,
                                       std::uint64_t seed);

RunResult run_identify(const ExperimentConfig& config, const TrialSet& dataset,
                       std::size_t trials, double noise, std::uint64_t seed);
RunResult run_estimate(const ExperimentConfig& config, const TrialSet& dataset,
                       std::size_t trials, double noise, std::uint64_t seed);

TrialSet generate_dataset(const ExperimentConfig& config);

struct SweepPoint {
  double axis_value = 0.0;
  std::vector<RunResult> runs;  // one per seed
};

struct SweepResult {
  std::string axis;  // "noise" or "trials"
  std::vector<SweepPoint> points;
};

SweepResult run_sweep(const ExperimentConfig& config, const TrialSet& dataset);

struct OrderResult {
  OrderSelection selection;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

OrderResult run_order(const ExperimentConfig& config, const TrialSet& dataset);

// File-producing commands.  Each is a pure function of its inputs, so reruns
// give byte-identical files.
void cmd_generate(const ExperimentConfig& config, const std::filesystem::path& dataset_path);
void cmd_discover(const ExperimentConfig& config, const std::filesystem::path& dataset_path);
void cmd_estimate(const ExperimentConfig& config, const std::filesystem::path& dataset_path);
void cmd_sweep(const ExperimentConfig& config, const std::filesystem::path& dataset_path);
void cmd_order(const ExperimentConfig& config, const std::filesystem::path& dataset_path);

}  // namespace bvpdisc::app
