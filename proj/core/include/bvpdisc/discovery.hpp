#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bvpdisc/features.hpp"
#include "bvpdisc/models.hpp"
#include "bvpdisc/regression.hpp"
#include "bvpdisc/signal.hpp"
#include "bvpdisc/solver.hpp"

namespace bvpdisc {

using Field = std::vector<double>;
using FieldMap = std::map<std::string, Field>;

// L[u] = phi u^(A) + sum_t c_t theta_t, recovered from a learned expansion
// u^(A) = sum_t xi_t theta_t + xi_f f as phi = 1/xi_f and c_t = -xi_t/xi_f.
struct DiscoveredOperator {
  int lhs_order = 2;
  Field phi;
  FieldMap operator_terms;
  SparseSpatialModel source;
};

DiscoveredOperator infer_operator(const SparseSpatialModel& model);

// Inverse of infer_operator: the u^(A) coefficient fields (including "f").
FieldMap expand_operator(const DiscoveredOperator& op);

// Physical coefficient fields read off a discovered operator: "p" (and "q",
// "alpha_q" where present) for the second-order models, "EI" for the beam.
// Fields whose operator term was not discovered are omitted.
FieldMap extract_parameters(const DiscoveredOperator& op, const ModelSpec& model);

// Ground-truth values of the fields extract_parameters reports.
FieldMap true_parameters(const ModelSpec& model, const Grid& grid);

// Relative l2 error over the grid points with
// a + trim (b - a) <= x <= b - trim (b - a).
double coefficient_error(std::span<const double> learned, std::span<const double> truth,
                         const Grid& grid, double trim_fraction = 0.01);

std::size_t spurious_term_count(const SparseSpatialModel& model,
                                std::span<const std::string> true_terms);
std::size_t missing_term_count(const SparseSpatialModel& model,
                               std::span<const std::string> true_terms);

// Applies the discovered operator to a trial's response.
Field predict_forcing(const DiscoveredOperator& op, const Trial& trial, const Grid& grid,
                      const DifferentiationConfig& diff);

// l2 norm of (predicted - actual) forcing over the trimmed interior.
double forcing_residual(std::span<const double> predicted, std::span<const double> actual,
                        const Grid& grid, double trim_fraction = 0.01);

struct OrderScore {
  int order = 0;
  // Mean held-out forcing residual; +inf when the pipeline failed.
  double error = 0.0;
  std::string failure;
  std::vector<std::string> active_terms;
};

struct OrderSelection {
  int best_order = 0;
  std::vector<OrderScore> scores;  // ascending order
};

OrderSelection select_order(const TrialSet& train, const TrialSet& test, std::span<const int> orders,
                            const DifferentiationConfig& diff, const RegressionParams& params = {},
                            double trim_fraction = 0.01);

}  // namespace bvpdisc
