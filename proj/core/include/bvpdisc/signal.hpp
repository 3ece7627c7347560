#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bvpdisc/grid.hpp"
#include "bvpdisc/solver.hpp"

namespace bvpdisc {

enum class DifferentiationMethod { FiniteDifference, PolyInterp };

struct DifferentiationConfig {
  DifferentiationMethod method = DifferentiationMethod::FiniteDifference;
  // PolyInterp only: samples per local fit (odd) and the fit degree.
  std::size_t window = 15;
  int degree = 4;
  // Gaussian pre-filter width in grid spacings; 0 disables it.
  double smooth_sigma = 0.0;
  // PolyInterp only: each sample uses whichever window containing it has the
  // smallest top-degree coefficient, if that beats the centred window by
  // kAdaptiveMargin.  Keeps windows off kinks in piecewise-smooth data; meant
  // for clean signals, since on noise the choice follows the noise.
  bool adaptive = false;
  static constexpr double kAdaptiveMargin = 1e3;

  // Throws InvalidArgument unless degree < window <= n and window is odd.
  void validate(std::size_t n) const;
};

// Weights w such that sum_i w_i g(xs[i]) approximates g^(order)(x0)
// (Fornberg's recursion).
std::vector<double> fornberg_weights(double x0, std::span<const double> xs, int order);

// Second-order accurate derivative of order 1..4: central stencils in the
// interior, one-sided stencils near the ends.
std::vector<double> finite_difference(std::span<const double> u, const Grid& grid, int order);

// Least-squares Chebyshev fit of `config.degree` over a `config.window`-point
// window around each sample, differentiated `order` times at that sample.
// Windows are shifted, not shrunk, near the boundaries.
std::vector<double> poly_interp_derivative(std::span<const double> u, const Grid& grid,
                                           int order, const DifferentiationConfig& config);

// Convolution with a +-4 sigma truncated, renormalized Gaussian using
// half-sample symmetric reflection at the ends.
std::vector<double> gaussian_smooth(std::span<const double> u, double sigma);

// Smoothing (if configured) followed by derivatives of order 1..max_order.
// Element 0 is the (smoothed) signal itself.
std::vector<std::vector<double>> derivative_stack(std::span<const double> u, const Grid& grid,
                                                  int max_order,
                                                  const DifferentiationConfig& config);

// Adds i.i.d. N(0, (level * std(u_j))^2) noise to each response; forcings are
// untouched.
TrialSet add_noise(const TrialSet& trials, double level, std::uint64_t seed);

double sample_std(std::span<const double> v);

}  // namespace bvpdisc
