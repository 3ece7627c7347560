#include "bvpdisc/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

namespace {

// Pivots of the rank-revealing QR below this fraction of the largest are
// treated as zero.  At the end points u ~ 0 and the blocks are numerically
// singular; the default cutoff (machine epsilon) lets rounding decide the rank
// there, so the solution then depended on the order of the trials.
constexpr double kRankTolerance = 1e-8;

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kRankTolerance);
  cod.compute(a);
  return cod.solve(y);
}

}  // namespace

RidgeResult ridge_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double lambda) {
  if (a.cols() < 1) throw InvalidArgument("ridge_solve: A has no columns");
  if (a.rows() != y.size()) throw InvalidArgument("ridge_solve: A and y disagree in length");
  if (lambda < 0.0) throw InvalidArgument("ridge_solve: lambda must be non-negative");

  RidgeResult result;
  if (a.isZero(0.0)) {
    result.coefficients = Eigen::VectorXd::Zero(a.cols());
    result.degenerate = true;
    return result;
  }
  if (lambda == 0.0) {
    result.coefficients = min_norm_solve(a, y);
    return result;
  }
  const Eigen::Index rows = a.rows();
  const Eigen::Index cols = a.cols();
  Eigen::MatrixXd augmented(rows + cols, cols);
  augmented.topRows(rows) = a;
  augmented.bottomRows(cols) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(cols, cols);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows + cols);
  rhs.head(rows) = y;
  result.coefficients = augmented.colPivHouseholderQr().solve(rhs);
  return result;
}

std::size_t SparseSpatialModel::active_count() const {
  return static_cast<std::size_t>(std::count(active.begin(), active.end(), true));
}

std::vector<std::string> SparseSpatialModel::active_labels() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < terms.size(); ++l)
    if (active[l]) out.push_back(terms[l].label);
  return out;
}

std::optional<std::size_t> SparseSpatialModel::index_of(std::string_view label) const {
  for (std::size_t l = 0; l < terms.size(); ++l)
    if (terms[l].label == label) return l;
  return std::nullopt;
}

bool SparseSpatialModel::is_active(std::string_view label) const {
  const auto l = index_of(label);
  return l && active[*l];
}

Eigen::VectorXd SparseSpatialModel::field(std::string_view label) const {
  const auto l = index_of(label);
  if (!l || !active[*l]) return Eigen::VectorXd::Zero(xi.cols());
  return xi.row(static_cast<Eigen::Index>(*l)).transpose();
}

namespace {

// Per-position normal equations of the block-diagonal system.
struct BlockNormalEquations {
  std::vector<Eigen::MatrixXd> gram;  // X_k^T X_k
  std::vector<Eigen::VectorXd> rhs;   // X_k^T y_k

  explicit BlockNormalEquations(const CandidateLibrary& lib) {
    gram.reserve(lib.num_positions());
    rhs.reserve(lib.num_positions());
    for (std::size_t k = 0; k < lib.num_positions(); ++k) {
      const auto& x = lib.blocks[k];
      gram.push_back(x.transpose() * x);
      rhs.push_back(x.transpose() * lib.outcome_block(k));
    }
  }
};

std::vector<Eigen::Index> active_columns(const std::vector<bool>& active) {
  std::vector<Eigen::Index> cols;
  for (std::size_t l = 0; l < active.size(); ++l)
    if (active[l]) cols.push_back(static_cast<Eigen::Index>(l));
  return cols;
}

// Ridge solve of every block restricted to the active columns via the
// regularized normal system.  Returns the p x n normalized coefficients.
Eigen::MatrixXd block_ridge(const BlockNormalEquations& eqs, const std::vector<bool>& active,
                            double lambda) {
  const auto p = static_cast<Eigen::Index>(active.size());
  const auto n = static_cast<Eigen::Index>(eqs.gram.size());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, n);
  const auto cols = active_columns(active);
  if (cols.empty()) return w;
  const auto s = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd g(s, s);
  Eigen::VectorXd b(s);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& gram = eqs.gram[static_cast<std::size_t>(k)];
    const auto& rhs = eqs.rhs[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < s; ++i) {
      b[i] = rhs[cols[i]];
      for (Eigen::Index j = 0; j < s; ++j) g(i, j) = gram(cols[i], cols[j]);
    }
    g.diagonal().array() += lambda;
    Eigen::VectorXd sol;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (lambda > 0.0 && ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      sol = ldlt.solve(b);
    } else {
      sol = g.completeOrthogonalDecomposition().solve(b);
    }
    for (Eigen::Index i = 0; i < s; ++i) w(cols[i], k) = sol[i];
  }
  return w;
}

// Unregularized per-block least squares on the active columns, solved on the
// block itself rather than its Gram matrix to avoid squaring the condition
// number.
Eigen::MatrixXd block_least_squares(const CandidateLibrary& lib, const std::vector<bool>& active) {
  const auto p = static_cast<Eigen::Index>(active.size());
  const auto n = static_cast<Eigen::Index>(lib.num_positions());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(p, n);
  const auto cols = active_columns(active);
  if (cols.empty()) return w;
  const auto rows = static_cast<Eigen::Index>(lib.num_trials());
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(cols.size()));
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& block = lib.blocks[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < x.cols(); ++i) x.col(i) = block.col(cols[i]);
    const Eigen::VectorXd sol =
        ridge_solve(x, lib.outcome_block(static_cast<std::size_t>(k)), 0.0).coefficients;
    for (Eigen::Index i = 0; i < x.cols(); ++i) w(cols[i], k) = sol[i];
  }
  return w;
}

// One function for both the threshold test and the epsilon range, so the
// range endpoints compare exactly (rowwise().norm() can differ in the last bit).
double group_norm(const Eigen::MatrixXd& w, std::size_t l) {
  return w.row(static_cast<Eigen::Index>(l)).norm();
}

// lambda = 0 skips the Gram matrices, whose condition number is the square of
// the block's.
Eigen::MatrixXd block_fit(const CandidateLibrary& lib, const BlockNormalEquations& eqs,
                          const std::vector<bool>& active, double lambda) {
  return lambda == 0.0 ? block_least_squares(lib, active) : block_ridge(eqs, active, lambda);
}

double residual_sq(const CandidateLibrary& lib, const Eigen::MatrixXd& xi_normalized) {
  double total = 0.0;
  for (std::size_t k = 0; k < lib.num_positions(); ++k) {
    total += (lib.blocks[k] * xi_normalized.col(static_cast<Eigen::Index>(k)) -
              lib.outcome_block(k))
                 .squaredNorm();
  }
  return total;
}

double information_loss(const CandidateLibrary& lib, const Eigen::MatrixXd& xi_normalized,
                        const std::vector<bool>& active, double beta, SparsityCount count) {
  const double rows = static_cast<double>(lib.num_trials() * lib.num_positions());
  double k = 0.0;
  if (count == SparsityCount::ActiveGroups) {
    k = static_cast<double>(std::count(active.begin(), active.end(), true));
  } else {
    k = static_cast<double>((xi_normalized.array() != 0.0).count()) /
        static_cast<double>(lib.num_trials());
  }
  return rows * std::log(residual_sq(lib, xi_normalized) / rows + beta) + 2.0 * k;
}

void require_normalized(const CandidateLibrary& lib, const char* who) {
  if (!lib.normalized) {
    throw InvalidArgument(std::string(who) + " requires a normalized candidate library");
  }
}

SparseSpatialModel finish_model(const CandidateLibrary& lib, const Eigen::MatrixXd& w,
                                std::vector<bool> active, double epsilon,
                                const RegressionParams& params) {
  SparseSpatialModel model;
  model.terms = lib.terms;
  model.lhs_order = lib.lhs_order;
  model.epsilon = epsilon;
  model.xi = denormalize_coefficients(lib, w);
  model.loss = information_loss(lib, w, active, params.beta, params.count);
  model.active = std::move(active);
  return model;
}

SparseSpatialModel run_sgtr(const CandidateLibrary& lib, const BlockNormalEquations& eqs,
                            double epsilon, const RegressionParams& params,
                            const SgtrObserver& observer) {
  const std::size_t p = lib.num_terms();
  std::vector<bool> active(p, true);
  // The starting fit is the same ridge solution the threshold range is
  // computed from, so the range endpoints behave as advertised on pass 1.
  Eigen::MatrixXd w = block_fit(lib, eqs, active, params.lambda);
  if (observer) observer(0, w, active);

  for (int pass = 1; pass <= params.iters; ++pass) {
    bool dropped = false;
    for (std::size_t l = 0; l < p; ++l) {
      if (active[l] && group_norm(w, l) <= epsilon) {
        active[l] = false;
        dropped = true;
      }
    }
    if (!dropped) break;
    for (std::size_t l = 0; l < p; ++l)
      if (!active[l]) w.row(static_cast<Eigen::Index>(l)).setZero();
    if (std::none_of(active.begin(), active.end(), [](bool a) { return a; })) {
      if (observer) observer(pass, w, active);
      break;
    }
    w = block_fit(lib, eqs, active, params.lambda);
    if (observer) observer(pass, w, active);
  }
  if (params.final_lambda != params.lambda) {
    w = block_fit(lib, eqs, active, params.final_lambda);
  }
  return finish_model(lib, w, std::move(active), epsilon, params);
}

}  // namespace

SparseSpatialModel sgtr(const CandidateLibrary& lib, double epsilon, const RegressionParams& params,
                        const SgtrObserver& observer) {
  require_normalized(lib, "sgtr");
  const BlockNormalEquations eqs(lib);
  return run_sgtr(lib, eqs, epsilon, params, observer);
}

SparseSpatialModel sgtr(const CandidateLibrary& lib, double lambda, double epsilon, int iters) {
  RegressionParams params;
  params.lambda = lambda;
  params.iters = iters;
  return sgtr(lib, epsilon, params);
}

namespace {

EpsilonRange epsilon_range(const CandidateLibrary& lib, const BlockNormalEquations& eqs,
                           double lambda) {
  const Eigen::MatrixXd w = block_fit(lib, eqs, std::vector<bool>(lib.num_terms(), true), lambda);
  EpsilonRange range{INFINITY, 0.0};
  for (std::size_t l = 0; l < lib.num_terms(); ++l) {
    range.min = std::min(range.min, group_norm(w, l));
    range.max = std::max(range.max, group_norm(w, l));
  }
  return range;
}

}  // namespace

EpsilonRange compute_epsilon_range(const CandidateLibrary& lib, double lambda) {
  require_normalized(lib, "compute_epsilon_range");
  return epsilon_range(lib, BlockNormalEquations(lib), lambda);
}

double loss(const CandidateLibrary& lib, const SparseSpatialModel& model, double beta,
            SparsityCount count) {
  const Eigen::MatrixXd w = normalize_coefficients(lib, model.xi);
  return information_loss(lib, w, model.active, beta, count);
}

std::vector<SparseSpatialModel> tolerance_sweep(const CandidateLibrary& lib,
                                                const RegressionParams& params) {
  require_normalized(lib, "tolerance_sweep");
  if (params.num_eps < 2) throw InvalidArgument("tolerance_sweep needs num_eps >= 2");
  const BlockNormalEquations eqs(lib);
  const EpsilonRange range = epsilon_range(lib, eqs, params.lambda);

  // The bottom of the sweep sits just under the weakest group so it reproduces
  // the unthresholded fit; the top is the strongest group, which empties it.
  const double hi = range.max;
  double lo = range.min * (1.0 - 1e-9);
  if (!(lo > 0.0)) lo = std::max(hi * 1e-12, std::numeric_limits<double>::min());
  std::vector<SparseSpatialModel> out;
  out.reserve(static_cast<std::size_t>(params.num_eps));
  const double log_lo = std::log(lo);
  const double log_hi = std::log(std::max(hi, lo));
  for (int i = 0; i < params.num_eps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(params.num_eps - 1);
    double eps = std::exp(log_lo + t * (log_hi - log_lo));
    if (i == 0) eps = lo;
    if (i == params.num_eps - 1) eps = std::max(hi, lo);
    out.push_back(run_sgtr(lib, eqs, eps, params, {}));
  }
  return out;
}

SparseSpatialModel select_model(std::span<const SparseSpatialModel> sweep) {
  if (sweep.empty()) throw InvalidArgument("select_model: empty sweep");
  const SparseSpatialModel* best = &sweep.front();
  for (const auto& candidate : sweep.subspan(1)) {
    const double scale = std::max(1.0, std::abs(best->loss));
    if (candidate.loss < best->loss - 1e-12 * scale) {
      best = &candidate;
    } else if (std::abs(candidate.loss - best->loss) <= 1e-12 * scale) {
      const auto ca = candidate.active_count();
      const auto ba = best->active_count();
      if (ca < ba || (ca == ba && candidate.epsilon > best->epsilon)) best = &candidate;
    }
  }
  return *best;
}

SparseSpatialModel known_operator_fit(const CandidateLibrary& lib,
                                      std::span<const std::string> fixed_terms,
                                      const RegressionParams& params) {
  const std::size_t p = lib.num_terms();
  std::vector<bool> active(p, false);
  for (const auto& label : fixed_terms) {
    const auto l = lib.term_index(label);
    if (!l) {
      throw InvalidArgument("known_operator_fit: term '" + label +
                            "' is not in the candidate library");
    }
    active[*l] = true;
  }
  const auto cols = active_columns(active);
  const auto n = static_cast<Eigen::Index>(lib.num_positions());
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), n);
  if (!cols.empty()) {
    const auto m = static_cast<Eigen::Index>(lib.num_trials());
    Eigen::MatrixXd x(m, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& block = lib.blocks[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < cols.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = block.col(cols[i]);
      const Eigen::VectorXd sol = min_norm_solve(x, lib.outcome_block(static_cast<std::size_t>(k)));
      for (std::size_t i = 0; i < cols.size(); ++i) w(cols[i], k) = sol[static_cast<Eigen::Index>(i)];
    }
  }
  return finish_model(lib, w, std::move(active), 0.0, params);
}

}  // namespace bvpdisc
