#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bvpdisc/bvpdisc.hpp"

namespace bvpdisc::app {

enum class Pipeline { IdentifyOperator, EstimateParameters, SelectOrder, NoiseSweep, TrialSweep };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& name);

// What a sweep repeats at every axis point.
enum class SweepTarget { Identify, Estimate };

// Differentiation is resolved per run: "auto" picks a calibrated setup from
// the noise level and the pipeline, explicit keys override it field by field.
struct DifferentiationOverrides {
  std::optional<DifferentiationMethod> method;
  std::optional<std::size_t> window;
  std::optional<int> degree;
  std::optional<double> smooth_sigma;
  std::optional<bool> adaptive;
};

struct ExperimentConfig {
  std::string model = "linear-sl";
  Pipeline pipeline = Pipeline::IdentifyOperator;
  // False when the file left the pipeline to the subcommand.
  bool pipeline_explicit = false;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";

  double grid_a = 0.0;
  double grid_b = 10.0;
  std::size_t grid_n = 500;

  // Empty vectors keep the model's own forcing grid.
  std::vector<double> amplitudes;
  std::vector<double> frequencies;
  std::vector<double> offsets;

  // Trials written by generate (0 = the whole forcing grid).
  std::size_t dataset_trials = 0;
  double shooting_tol = 1e-3;

  // Single-run settings for discover / estimate.
  std::size_t trials = 10;
  double noise = 0.0;

  std::vector<double> noise_levels{0.0, 0.01, 0.025, 0.05};
  std::vector<std::size_t> trial_counts{10, 15, 25, 50, 100, 200};
  std::size_t seeds_per_point = 5;
  SweepTarget sweep_target = SweepTarget::Estimate;

  std::vector<int> orders{1, 2, 3, 4};
  double test_fraction = 0.2;

  DifferentiationOverrides diff;
  // regression.beta is the clean-data default; noisy runs use kNoisyBeta
  // unless the file sets regression.beta explicitly.
  RegressionParams regression;
  std::optional<double> beta;
  static constexpr double kNoisyBeta = 3e-2;
  double trim_fraction = 0.01;

  ModelSpec model_spec() const;
  Grid grid() const;
  ShootingOptions shooting() const;

  // Differentiation used for a run at `noise`; `identify` selects the
  // smoothed variant for operator identification.
  DifferentiationConfig differentiation(double noise, bool identify) const;
  RegressionParams regression_params(double noise) const;

  // Throws InvalidArgument on unknown models, out-of-range numbers or trial
  // counts exceeding the forcing grid.
  void validate() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

// Full resolved configuration, defaults included.
nlohmann::ordered_json to_json(const ExperimentConfig& config);

}  // namespace bvpdisc::app
