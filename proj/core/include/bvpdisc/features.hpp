#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bvpdisc/grid.hpp"
#include "bvpdisc/signal.hpp"
#include "bvpdisc/solver.hpp"

namespace bvpdisc {

enum class TermKind { Constant, UPower, XPower, Derivative, UPowerTimesDerivative, Forcing };

inline constexpr int kMaxPower = 5;

// One candidate function.  `power` is the exponent of u or x; `derivative`
// is the order of the u-derivative factor.
struct TermDescriptor {
  TermKind kind = TermKind::Constant;
  int power = 0;
  int derivative = 0;
  std::string label;

  bool operator==(const TermDescriptor& other) const { return label == other.label; }
};

// "u_x", "u_xx", ...; order 0 is "u".
std::string derivative_label(int order);

// Canonical label: "1", "u", "u^3", "x", "x^2", "u_xx", "u^2*u_x", "f".
std::string term_label(TermKind kind, int power = 0, int derivative = 0);

// Parses a canonical label back into a descriptor; throws on anything else.
TermDescriptor parse_term(std::string_view label);

// Library for the outcome d^A u / dx^A in canonical order: 1; u..u^5;
// x..x^5; u_x..(A-1 derivatives); u^d * u^(a) for d = 1..5, a = 1..A-1; f.
std::vector<TermDescriptor> build_term_list(int lhs_order);

// Value of a term at one sample; derivs[0] = u, derivs[a] = a-th derivative.
double evaluate_term(const TermDescriptor& term, double x, double f,
                     std::span<const double> derivs);

// The block-diagonal regression system.  Only the n dense m x p blocks are
// stored; the outcome is stacked position-major (all trials at x_1, then x_2, ...).
struct CandidateLibrary {
  std::vector<TermDescriptor> terms;
  int lhs_order = 2;
  Grid grid{0.0, 1.0, Grid::kMinPoints};
  std::size_t trial_count = 0;
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd outcome;
  // One scale per term, shared by all n positions of its group.
  std::vector<double> column_scales;
  double outcome_scale = 1.0;
  bool normalized = false;

  std::size_t num_terms() const noexcept { return terms.size(); }
  std::size_t num_positions() const noexcept { return blocks.size(); }
  std::size_t num_trials() const noexcept { return trial_count; }

  auto outcome_block(std::size_t k) const {
    return outcome.segment(static_cast<Eigen::Index>(k * trial_count),
                           static_cast<Eigen::Index>(trial_count));
  }

  std::optional<std::size_t> term_index(std::string_view label) const;

  // Group l holds the flat coefficient slots l + p * k, k = 0..n-1.
  std::vector<std::vector<std::size_t>> group_indices() const;

  // The (m n) x p matrix with the blocks stacked vertically.
  Eigen::MatrixXd stacked() const;
};

// Differentiates every trial, evaluates every term at every position and
// stacks the outcome u^(A).  No normalization.
CandidateLibrary assemble_system(const TrialSet& trials, int lhs_order,
                                 const DifferentiationConfig& diff);

// Scales each stacked term column to unit norm and the outcome to norm sqrt(m).
CandidateLibrary normalize(CandidateLibrary lib);

// xi_physical(l, k) = xi_normalized(l, k) * outcome_scale / column_scale(l).
Eigen::MatrixXd denormalize_coefficients(const CandidateLibrary& lib,
                                         const Eigen::MatrixXd& xi_normalized);
Eigen::MatrixXd normalize_coefficients(const CandidateLibrary& lib,
                                       const Eigen::MatrixXd& xi_physical);

}  // namespace bvpdisc
