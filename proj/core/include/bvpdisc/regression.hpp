#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bvpdisc/features.hpp"

namespace bvpdisc {

struct RidgeResult {
  Eigen::VectorXd coefficients;
  // Set when A is identically zero; the coefficients are then all zero.
  bool degenerate = false;
};

// argmin_w ||y - A w||^2 + lambda ||w||^2.  lambda > 0 goes through a QR
// factorization of [A; sqrt(lambda) I]; lambda = 0 returns the minimum-norm
// least-squares solution.
RidgeResult ridge_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda);

// How the complexity term k of the information-criterion loss is counted.
enum class SparsityCount {
  ActiveGroups,      // number of active terms
  NonzerosPerTrial,  // ||Xi||_0 / m, read literally
};

struct RegressionParams {
  double lambda = 1e-5;
  // Regularization of the final refit on the surviving terms.  Zero gives an
  // ordinary least-squares refit, which removes the ridge bias from the
  // reported coefficients; set it equal to lambda for a pure ridge pipeline.
  double final_lambda = 0.0;
  double beta = 1e-6;
  int num_eps = 50;
  int iters = 10;
  SparsityCount count = SparsityCount::ActiveGroups;
};

// Group-sparse spatial coefficient field: xi(l, k) is the coefficient of term l
// at grid point k in physical units.  Inactive rows are exactly zero.
struct SparseSpatialModel {
  std::vector<TermDescriptor> terms;
  Eigen::MatrixXd xi;
  std::vector<bool> active;
  double loss = 0.0;
  double epsilon = 0.0;
  int lhs_order = 2;

  std::size_t active_count() const;
  std::vector<std::string> active_labels() const;
  bool is_active(std::string_view label) const;
  std::optional<std::size_t> index_of(std::string_view label) const;
  // Coefficient field of a term (zeros if the term is absent or inactive).
  Eigen::VectorXd field(std::string_view label) const;
};

// Called after the initial fit (pass 0) and after every thresholding pass
// with the normalized coefficients and the active mask.
using SgtrObserver =
    std::function<void(int pass, const Eigen::MatrixXd& xi_normalized, const std::vector<bool>& active)>;

// Sequential grouped threshold ridge regression on a normalized library.
// Groups whose coefficient-field norm is <= epsilon are dropped each pass;
// the loop stops early once a pass drops nothing.
SparseSpatialModel sgtr(const CandidateLibrary& lib, double epsilon,
                        const RegressionParams& params = {}, const SgtrObserver& observer = {});
SparseSpatialModel sgtr(const CandidateLibrary& lib, double lambda, double epsilon, int iters);

struct EpsilonRange {
  double min = 0.0;
  double max = 0.0;
};

// Smallest and largest group norms of the full ridge solution.
EpsilonRange compute_epsilon_range(const CandidateLibrary& lib, double lambda);

// m n ln(||Theta Xi - y||^2 / (m n) + beta) + 2 k, in the normalized frame.
double loss(const CandidateLibrary& lib, const SparseSpatialModel& model, double beta = 1e-6,
            SparsityCount count = SparsityCount::ActiveGroups);

// sgtr at params.num_eps log-spaced thresholds covering the epsilon range,
// ascending in epsilon.
std::vector<SparseSpatialModel> tolerance_sweep(const CandidateLibrary& lib,
                                                const RegressionParams& params = {});

// Minimum loss; ties go to fewer active terms, then to the larger epsilon.
SparseSpatialModel select_model(std::span<const SparseSpatialModel> sweep);

// Ordinary least squares per position restricted to `fixed_terms`.
SparseSpatialModel known_operator_fit(const CandidateLibrary& lib,
                                      std::span<const std::string> fixed_terms,
                                      const RegressionParams& params = {});

}  // namespace bvpdisc
