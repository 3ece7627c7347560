#include "bvpdisc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

double ForcingSpec::operator()(double x) const {
  return amplitude * std::sin(frequency * x) + offset;
}

std::vector<ForcingSpec> ForcingGrid::enumerate() const {
  std::vector<ForcingSpec> out;
  out.reserve(size());
  for (double a : amplitudes)
    for (double b : frequencies)
      for (double c : offsets) out.push_back({a, b, c});
  return out;
}

bool ModelSpec::has_coefficient(std::string_view coefficient) const {
  return std::any_of(coefficients.begin(), coefficients.end(),
                     [&](const auto& c) { return c.name == coefficient; });
}

const CoefficientFunction& ModelSpec::coefficient(std::string_view coefficient) const {
  for (const auto& c : coefficients) {
    if (c.name == coefficient) return c;
  }
  throw InvalidArgument("model '" + name + "' has no coefficient named '" +
                        std::string(coefficient) + "'");
}

ModelSpec ModelSpec::with_coefficient(CoefficientFunction replacement,
                                      bool clear_breakpoints) const {
  ModelSpec copy = *this;
  auto it = std::find_if(copy.coefficients.begin(), copy.coefficients.end(),
                         [&](const auto& c) { return c.name == replacement.name; });
  if (it == copy.coefficients.end()) {
    throw InvalidArgument("model '" + name + "' has no coefficient named '" +
                          replacement.name + "' to override");
  }
  *it = std::move(replacement);
  if (clear_breakpoints) copy.breakpoints.clear();
  return copy;
}

CoefficientFunction constant_coefficient(std::string name, double value) {
  return {std::move(name), [value](double) { return value; },
          [](double) { return 0.0; }};
}

namespace {

ForcingGrid default_forcing_grid() {
  return {{1.0, 2.0, 3.0, 4.0, 5.0},
          {0.5, 1.0, 1.5, 2.0, 2.5, 3.0},
          {0.0, 1.0, 2.0, 3.0}};
}

// The zero offset leaves small-amplitude, high-frequency solutions below 0.1.
ForcingGrid sturm_liouville_forcing_grid() {
  return {{1.0, 2.0, 3.0, 4.0, 5.0},
          {0.5, 1.0, 1.5, 2.0, 2.5, 3.0},
          {0.5, 1.0, 2.0, 3.0}};
}

// Strongly negative forcing folds the solution branch away, so offsets stay
// at or above 1.  The wider frequency axis gives 220 trials for noise studies
// and keeps u from tracking f / q too closely.
ForcingGrid nonlinear_forcing_grid() {
  return {{1.0, 2.0, 3.0, 4.0, 5.0},
          {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5},
          {1.0, 2.0, 3.0, 4.0}};
}

// Halved amplitudes and small offsets keep the clamped-beam deflection O(1).
ForcingGrid beam_forcing_grid() {
  return {{0.5, 1.0, 1.5, 2.0, 2.5},
          {0.5, 1.0, 1.5, 2.0, 2.5, 3.0},
          {0.25, 0.5, 0.75, 1.0}};
}

ModelSpec linear_sturm_liouville() {
  ModelSpec m;
  m.kind = ModelKind::LinearSturmLiouville;
  m.name = "linear-sl";
  m.order = 2;
  m.coefficients = {
      {"p",
       [](double x) {
         return 0.5 * std::sin(x) + 0.1 * std::sin(12 * x) + 0.25 * std::cos(4 * x) + 2;
       },
       [](double x) {
         return 0.5 * std::cos(x) + 1.2 * std::cos(12 * x) - std::sin(4 * x);
       }},
      {"q", [](double x) { return 0.4 * std::sin(3 * x) + 0.15 * std::cos(8 * x) + 1; },
       [](double x) { return 1.2 * std::cos(3 * x) - 1.2 * std::sin(8 * x); }},
  };
  m.bc = {0.0, 0.0};
  m.true_terms = {"u_x", "u", "f"};
  m.forcing_grid = sturm_liouville_forcing_grid();
  return m;
}

ModelSpec nonlinear_sturm_liouville() {
  ModelSpec m;
  m.kind = ModelKind::NonlinearSturmLiouville;
  m.name = "nonlinear-sl";
  m.order = 2;
  m.alpha = 0.4;
  m.coefficients = {
      {"p",
       [](double x) {
         return 0.5 * std::sin(x) + 0.1 * std::sin(11 * x) + 0.25 * std::cos(4 * x) + 3;
       },
       [](double x) {
         return 0.5 * std::cos(x) + 1.1 * std::cos(11 * x) - std::sin(4 * x);
       }},
      {"q",
       [](double x) {
         return 0.6 * std::sin(x + 1) + 0.3 * std::sin(2.5 * x) + 0.2 * std::cos(5 * x) +
                1.5;
       },
       [](double x) {
         return 0.6 * std::cos(x + 1) + 0.75 * std::cos(2.5 * x) - std::sin(5 * x);
       }},
  };
  m.bc = {0.0, 0.0};
  m.true_terms = {"u_x", "u", "u^2", "f"};
  m.forcing_grid = nonlinear_forcing_grid();
  return m;
}

ModelSpec second_order_poisson() {
  ModelSpec m;
  m.kind = ModelKind::SecondOrderPoisson;
  m.name = "poisson2";
  m.order = 2;
  m.coefficients = {
      {"p",
       [](double x) {
         return poisson::volume_fraction_a(x) * poisson::kPropertyA +
                poisson::volume_fraction_b(x) * poisson::kPropertyB;
       },
       [](double x) {
         // p = pA - (pA - pB) v_b,  v_b' = -0.4 * 0.7 exp(-0.4 x)
         return (poisson::kPropertyA - poisson::kPropertyB) * 0.28 * std::exp(-0.4 * x);
       }},
  };
  m.bc = {0.8, 0.0};
  m.true_terms = {"u_x", "f"};
  m.forcing_grid = default_forcing_grid();
  return m;
}

double flexural_rigidity(double x) {
  if (x < 2.0) return 10.0;
  if (x < 4.0) return 2.5;
  if (x < 6.0) return 10.0;
  if (x < 8.0) return 5.0;
  return 2.5;
}

ModelSpec euler_bernoulli() {
  ModelSpec m;
  m.kind = ModelKind::EulerBernoulli;
  m.name = "euler-bernoulli";
  m.order = 4;
  m.coefficients = {{"EI", flexural_rigidity, [](double) { return 0.0; }}};
  m.bc = {0.0, 0.0, 0.0, 0.0};
  m.true_terms = {"u_xxx", "f"};
  m.breakpoints = {2.0, 4.0, 6.0, 8.0};
  m.forcing_grid = beam_forcing_grid();
  return m;
}

}  // namespace

namespace poisson {
double volume_fraction_b(double x) { return 0.70 * std::exp(-0.4 * x) + 0.10; }
double volume_fraction_a(double x) { return 1.0 - volume_fraction_b(x); }
}  // namespace poisson

ModelSpec make_model(ModelKind kind) {
  switch (kind) {
    case ModelKind::LinearSturmLiouville: return linear_sturm_liouville();
    case ModelKind::NonlinearSturmLiouville: return nonlinear_sturm_liouville();
    case ModelKind::SecondOrderPoisson: return second_order_poisson();
    case ModelKind::EulerBernoulli: return euler_bernoulli();
  }
  throw InvalidArgument("unknown model kind");
}

std::vector<std::string> model_names() {
  return {"linear-sl", "nonlinear-sl", "poisson2", "euler-bernoulli"};
}

ModelSpec model_by_name(std::string_view name) {
  if (name == "linear-sl") return make_model(ModelKind::LinearSturmLiouville);
  if (name == "nonlinear-sl") return make_model(ModelKind::NonlinearSturmLiouville);
  if (name == "poisson2") return make_model(ModelKind::SecondOrderPoisson);
  if (name == "euler-bernoulli") return make_model(ModelKind::EulerBernoulli);
  throw InvalidArgument("unknown model '" + std::string(name) +
                        "' (expected linear-sl, nonlinear-sl, poisson2 or euler-bernoulli)");
}

double eval_coefficient(const ModelSpec& model, std::string_view name, double x) {
  return model.coefficient(name).value(x);
}

double eval_coefficient_derivative(const ModelSpec& model, std::string_view name,
                                   double x) {
  return model.coefficient(name).derivative(x);
}

double LhsExpansion::term(std::string_view label) const {
  auto it = terms.find(std::string(label));
  return it == terms.end() ? 0.0 : it->second;
}

LhsExpansion eval_true_lhs_expansion(const ModelSpec& model, double x) {
  LhsExpansion e;
  if (model.kind == ModelKind::EulerBernoulli) {
    // -(EI u_xx)_xx = f  =>  u_xxxx = -2 EI_x/EI u_xxx - EI_xx/EI u_xx - f/EI,
    // with EI_xx = 0 for the piecewise-constant rigidity.
    const double ei = eval_coefficient(model, "EI", x);
    const double ei_x = eval_coefficient_derivative(model, "EI", x);
    e.terms["u_xxx"] = -2.0 * ei_x / ei;
    e.forcing = -1.0 / ei;
    return e;
  }
  // -(p u_x)_x + q u + alpha q u^2 = f
  //   =>  u_xx = -p_x/p u_x + q/p u + alpha q/p u^2 - f/p
  const double p = eval_coefficient(model, "p", x);
  const double p_x = eval_coefficient_derivative(model, "p", x);
  e.terms["u_x"] = -p_x / p;
  if (model.has_coefficient("q")) {
    const double q = eval_coefficient(model, "q", x);
    e.terms["u"] = q / p;
    if (model.alpha != 0.0) e.terms["u^2"] = model.alpha * q / p;
  }
  e.forcing = -1.0 / p;
  return e;
}

std::vector<ForcingSpec> forcing_set(const ModelSpec& model, std::size_t count,
                                     std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("forcing_set: count must be at least 1");
  auto all = model.forcing_grid.enumerate();
  if (count > all.size()) {
    throw InvalidArgument("forcing_set: requested " + std::to_string(count) +
                          " forcings but the grid for '" + model.name + "' has only " +
                          std::to_string(all.size()));
  }
  // Fisher-Yates with an explicit engine so the order does not depend on the
  // standard library's shuffle implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = all.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

}  // namespace bvpdisc
