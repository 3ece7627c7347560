#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace bvpdisc {

enum class ModelKind {
  LinearSturmLiouville,
  NonlinearSturmLiouville,
  SecondOrderPoisson,
  EulerBernoulli,
};

// A named spatial coefficient with its closed-form derivative.  Piecewise
// constant coefficients report a zero derivative away from their jumps.
struct CoefficientFunction {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

// Dirichlet values at both ends.  The slopes are only imposed on
// fourth-order (clamped) models.
struct BoundaryConditions {
  double left = 0.0;
  double right = 0.0;
  double left_slope = 0.0;
  double right_slope = 0.0;
};

// f(x) = amplitude * sin(frequency * x) + offset.
struct ForcingSpec {
  double amplitude = 0.0;
  double frequency = 0.0;
  double offset = 0.0;

  double operator()(double x) const;
  auto operator<=>(const ForcingSpec&) const = default;
};

// Cartesian-product parameter grid the forcing family is drawn from.
struct ForcingGrid {
  std::vector<double> amplitudes;
  std::vector<double> frequencies;
  std::vector<double> offsets;

  std::size_t size() const {
    return amplitudes.size() * frequencies.size() * offsets.size();
  }
  // All triples, amplitude-major.
  std::vector<ForcingSpec> enumerate() const;
};

// A benchmark boundary value problem L[u] = f.  Second-order kinds share the
// form L[u] = -(p u_x)_x + q u + alpha q u^2 (q and alpha absent where the
// model has none); EulerBernoulli is L[u] = -(EI u_xx)_xx.
struct ModelSpec {
  ModelKind kind = ModelKind::LinearSturmLiouville;
  std::string name;
  int order = 2;
  double domain_a = 0.0;
  double domain_b = 10.0;
  std::vector<CoefficientFunction> coefficients;
  BoundaryConditions bc;
  double alpha = 0.0;
  std::vector<std::string> true_terms;
  // Interior points where a coefficient is discontinuous.
  std::vector<double> breakpoints;
  ForcingGrid forcing_grid;

  bool has_coefficient(std::string_view coefficient) const;
  const CoefficientFunction& coefficient(std::string_view coefficient) const;

  // Copy of this model with one coefficient replaced (matched by name).
  // Replacing a piecewise coefficient with a smooth one clears breakpoints.
  ModelSpec with_coefficient(CoefficientFunction replacement,
                             bool clear_breakpoints = true) const;
};

ModelSpec make_model(ModelKind kind);

// Catalog lookup by "linear-sl", "nonlinear-sl", "poisson2" or
// "euler-bernoulli".
ModelSpec model_by_name(std::string_view name);
std::vector<std::string> model_names();

// A spatially constant coefficient, handy for closed-form checks.
CoefficientFunction constant_coefficient(std::string name, double value);

double eval_coefficient(const ModelSpec& model, std::string_view name, double x);
double eval_coefficient_derivative(const ModelSpec& model, std::string_view name,
                                   double x);

// Volume fractions of the two-phase composite in the Poisson model.
namespace poisson {
inline constexpr double kPropertyA = 12.0;
inline constexpr double kPropertyB = 3.0;
double volume_fraction_b(double x);
double volume_fraction_a(double x);
}  // namespace poisson

// Ground-truth model rewritten as u^(order) = sum_t c_t(x) theta_t + c_f(x) f.
struct LhsExpansion {
  std::map<std::string, double> terms;  // label -> c_t(x)
  double forcing = 0.0;                 // c_f(x)

  double term(std::string_view label) const;
};

LhsExpansion eval_true_lhs_expansion(const ModelSpec& model, double x);

// `count` distinct forcings drawn from the model's forcing grid by a seeded
// shuffle.  Deterministic for a given (model, count, seed).
std::vector<ForcingSpec> forcing_set(const ModelSpec& model, std::size_t count,
                                     std::uint64_t seed);

}  // namespace bvpdisc
