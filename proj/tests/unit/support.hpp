#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bvpdisc/bvpdisc.hpp"

namespace testing {

inline bvpdisc::Grid default_grid() { return {0.0, 10.0, 500}; }

// First `count` forcings of the model's seeded draw, solved on the default grid.
inline bvpdisc::TrialSet model_trials(const std::string& name, std::size_t count,
                                      std::uint64_t seed = 1) {
  const auto model = bvpdisc::model_by_name(name);
  const auto forcings = bvpdisc::forcing_set(model, count, seed);
  return bvpdisc::generate_trials(model, forcings, default_grid());
}

inline bvpdisc::DifferentiationConfig clean_poly() {
  bvpdisc::DifferentiationConfig d;
  d.method = bvpdisc::DifferentiationMethod::PolyInterp;
  d.window = 7;
  d.degree = 6;
  return d;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b,
                           std::size_t skip = 0) {
  double m = 0.0;
  for (std::size_t i = skip; i + skip < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class F>
std::vector<double> sample(const bvpdisc::Grid& g, F&& f) {
  std::vector<double> out;
  for (double x : g.points()) out.push_back(f(x));
  return out;
}

}  // namespace testing
