#include "bvpdisc/signal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

void DifferentiationConfig::validate(std::size_t n) const {
  if (smooth_sigma < 0.0 || !std::isfinite(smooth_sigma)) {
    throw InvalidArgument("smooth_sigma must be a finite non-negative number");
  }
  if (method != DifferentiationMethod::PolyInterp) return;
  if (window % 2 == 0) {
    throw InvalidArgument("polynomial window must be odd, got " + std::to_string(window));
  }
  if (degree < 1 || static_cast<std::size_t>(degree) >= window) {
    throw InvalidArgument("polynomial degree must satisfy 1 <= degree < window (degree " +
                          std::to_string(degree) + ", window " + std::to_string(window) + ")");
  }
  if (window > n) {
    throw InvalidArgument("polynomial window " + std::to_string(window) +
                          " exceeds the number of samples " + std::to_string(n));
  }
}

std::vector<double> fornberg_weights(double x0, std::span<const double> xs, int order) {
  const std::size_t n = xs.size();
  if (order < 0 || n == 0 || static_cast<std::size_t>(order) >= n) {
    throw InvalidArgument("fornberg_weights needs more points than the derivative order");
  }
  const auto m = static_cast<std::size_t>(order);
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

namespace {

// Stencil weights on integer offsets (unit spacing).
std::vector<double> unit_stencil(int first, int count, int at, int order) {
  std::vector<double> xs(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) xs[static_cast<std::size_t>(i)] = first + i;
  return fornberg_weights(static_cast<double>(at), xs, order);
}

}  // namespace

std::vector<double> finite_difference(std::span<const double> u, const Grid& grid, int order) {
  if (order < 1 || order > 4) {
    throw InvalidArgument("finite_difference order must be in 1..4, got " +
                          std::to_string(order));
  }
  const int n = static_cast<int>(u.size());
  if (u.size() != grid.size()) {
    throw InvalidArgument("finite_difference: signal length does not match the grid");
  }
  const int half = (order + 1) / 2;
  const int one_sided = order + 2;
  if (n < std::max(one_sided, 2 * half + 1)) {
    throw InvalidArgument("finite_difference: " + std::to_string(n) +
                          " samples are too few for an order-" + std::to_string(order) +
                          " stencil");
  }
  const double scale = 1.0 / std::pow(grid.spacing(), order);
  const auto central = unit_stencil(-half, 2 * half + 1, 0, order);

  std::vector<double> du(u.size());
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    if (k < half) {
      const auto w = unit_stencil(0, one_sided, k, order);
      for (int i = 0; i < one_sided; ++i) acc += w[i] * u[i];
    } else if (k >= n - half) {
      const int first = n - one_sided;
      const auto w = unit_stencil(first, one_sided, k, order);
      for (int i = 0; i < one_sided; ++i) acc += w[i] * u[first + i];
    } else {
      for (int i = 0; i <= 2 * half; ++i) acc += central[i] * u[k - half + i];
    }
    du[k] = acc * scale;
  }
  return du;
}

std::vector<double> poly_interp_derivative(std::span<const double> u, const Grid& grid,
                                           int order, const DifferentiationConfig& config) {
  if (u.size() != grid.size()) {
    throw InvalidArgument("poly_interp_derivative: signal length does not match the grid");
  }
  DifferentiationConfig cfg = config;
  cfg.method = DifferentiationMethod::PolyInterp;
  cfg.validate(u.size());
  if (order < 0 || order > cfg.degree) {
    throw InvalidArgument("derivative order " + std::to_string(order) +
                          " exceeds the fit degree " + std::to_string(cfg.degree));
  }

  const auto window = static_cast<Eigen::Index>(cfg.window);
  const auto terms = static_cast<Eigen::Index>(cfg.degree + 1);
  const double half = 0.5 * static_cast<double>(window - 1);

  // Chebyshev values and derivatives T_j^(d)(t) via the differentiated
  // three-term recurrence.
  auto chebyshev = [&](double t) {
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(terms, order + 1);
    table(0, 0) = 1.0;
    if (terms > 1) {
      table(1, 0) = t;
      if (order >= 1) table(1, 1) = 1.0;
    }
    for (Eigen::Index j = 1; j + 1 < terms; ++j) {
      for (int d = 0; d <= order; ++d) {
        double v = 2.0 * t * table(j, d) - table(j - 1, d);
        if (d > 0) v += 2.0 * d * table(j, d - 1);
        table(j + 1, d) = v;
      }
    }
    return table;
  };

  Eigen::MatrixXd vandermonde(window, terms);
  for (Eigen::Index i = 0; i < window; ++i) {
    vandermonde.row(i) = chebyshev((static_cast<double>(i) - half) / half).col(0).transpose();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  if (qr.rank() < terms) {
    throw InvalidArgument("rank-deficient local polynomial fit (window " +
                          std::to_string(cfg.window) + ", degree " +
                          std::to_string(cfg.degree) + ")");
  }
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(window, window));

  // weights(o, :) maps the window samples to the derivative at window slot o.
  const double chain = std::pow(1.0 / (half * grid.spacing()), order);
  Eigen::MatrixXd weights(window, window);
  for (Eigen::Index o = 0; o < window; ++o) {
    const Eigen::VectorXd d = chebyshev((static_cast<double>(o) - half) / half).col(order);
    weights.row(o) = chain * (pinv.transpose() * d).transpose();
  }

  const auto n = static_cast<Eigen::Index>(u.size());
  const auto centre = static_cast<Eigen::Index>(half);

  // Smoothness indicator of the window starting at lo.
  std::vector<double> indicator;
  if (cfg.adaptive) {
    indicator.resize(static_cast<std::size_t>(n - window + 1));
    const Eigen::VectorXd top = pinv.row(terms - 1).transpose();
    for (Eigen::Index lo = 0; lo + window <= n; ++lo) {
      double c = 0.0;
      for (Eigen::Index i = 0; i < window; ++i) c += top[i] * u[lo + i];
      indicator[static_cast<std::size_t>(lo)] = std::abs(c);
    }
  }
  auto pick_window = [&](Eigen::Index k) {
    const Eigen::Index centred = std::clamp<Eigen::Index>(k - centre, 0, n - window);
    if (!cfg.adaptive) return centred;
    Eigen::Index best = centred;
    // Scan outward from the centred window so ties keep the most central one.
    for (Eigen::Index off = 1; off < window; ++off) {
      for (Eigen::Index lo : {centred - off, centred + off}) {
        if (lo < 0 || lo + window > n || lo > k || lo + window <= k) continue;
        if (indicator[static_cast<std::size_t>(lo)] < indicator[static_cast<std::size_t>(best)]) {
          best = lo;
        }
      }
    }
    const double gain = indicator[static_cast<std::size_t>(best)] *
                        DifferentiationConfig::kAdaptiveMargin;
    return gain < indicator[static_cast<std::size_t>(centred)] ? best : centred;
  };

  std::vector<double> du(u.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index lo = pick_window(k);
    const Eigen::Index slot = k - lo;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < window; ++i) acc += weights(slot, i) * u[lo + i];
    du[k] = acc;
  }
  return du;
}

std::vector<double> gaussian_smooth(std::span<const double> u, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw InvalidArgument("gaussian_smooth: sigma must be finite and non-negative");
  }
  std::vector<double> out(u.begin(), u.end());
  if (sigma == 0.0 || u.empty()) return out;

  const auto radius = static_cast<long>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  for (long i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] =
        std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
  }
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& w : kernel) w /= total;

  const auto n = static_cast<long>(u.size());
  auto reflect = [n](long i) {
    const long period = 2 * n;
    long r = i % period;
    if (r < 0) r += period;
    return r < n ? r : period - 1 - r;
  };
  for (long k = 0; k < n; ++k) {
    double acc = 0.0;
    for (long i = -radius; i <= radius; ++i) {
      acc += kernel[static_cast<std::size_t>(i + radius)] * u[static_cast<std::size_t>(reflect(k + i))];
    }
    out[static_cast<std::size_t>(k)] = acc;
  }
  return out;
}

std::vector<std::vector<double>> derivative_stack(std::span<const double> u, const Grid& grid,
                                                  int max_order,
                                                  const DifferentiationConfig& config) {
  config.validate(u.size());
  std::vector<std::vector<double>> stack;
  stack.reserve(static_cast<std::size_t>(max_order) + 1);
  stack.push_back(gaussian_smooth(u, config.smooth_sigma));
  for (int order = 1; order <= max_order; ++order) {
    if (config.method == DifferentiationMethod::FiniteDifference) {
      stack.push_back(finite_difference(stack.front(), grid, order));
    } else {
      stack.push_back(poly_interp_derivative(stack.front(), grid, order, config));
    }
  }
  return stack;
}

double sample_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

TrialSet add_noise(const TrialSet& trials, double level, std::uint64_t seed) {
  if (level < 0.0 || !std::isfinite(level)) {
    throw InvalidArgument("add_noise: noise level must be finite and non-negative");
  }
  std::vector<Trial> noisy = trials.trials();
  if (level == 0.0) return trials.with_trials(std::move(noisy));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& t : noisy) {
    const double sd = level * sample_std(t.u);
    for (double& v : t.u) v += sd * normal(rng);
  }
  return trials.with_trials(std::move(noisy));
}

}  // namespace bvpdisc
