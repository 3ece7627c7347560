#include "bvpdisc/features.hpp"

#include <cmath>
#include <string>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

std::string derivative_label(int order) {
  if (order == 0) return "u";
  return "u_" + std::string(static_cast<std::size_t>(order), 'x');
}

namespace {

std::string power_label(char base, int power) {
  std::string s(1, base);
  if (power != 1) s += "^" + std::to_string(power);
  return s;
}

}  // namespace

std::string term_label(TermKind kind, int power, int derivative) {
  switch (kind) {
    case TermKind::Constant: return "1";
    case TermKind::UPower: return power_label('u', power);
    case TermKind::XPower: return power_label('x', power);
    case TermKind::Derivative: return derivative_label(derivative);
    case TermKind::UPowerTimesDerivative:
      return power_label('u', power) + "*" + derivative_label(derivative);
    case TermKind::Forcing: return "f";
  }
  return "?";
}

TermDescriptor parse_term(std::string_view label) {
  auto fail = [&]() -> TermDescriptor {
    throw InvalidArgument("unrecognized term label '" + std::string(label) + "'");
  };
  auto parse_power = [&](std::string_view s, char base) -> int {
    if (s.empty() || s[0] != base) return 0;
    if (s.size() == 1) return 1;
    if (s.size() == 3 && s[1] == '^' && s[2] >= '2' && s[2] <= '0' + kMaxPower) return s[2] - '0';
    return 0;
  };
  auto parse_derivative = [&](std::string_view s) -> int {
    if (s.size() < 3 || s.substr(0, 2) != "u_") return 0;
    for (char c : s.substr(2))
      if (c != 'x') return 0;
    return static_cast<int>(s.size() - 2);
  };

  TermDescriptor t;
  if (label == "1") {
    t.kind = TermKind::Constant;
  } else if (label == "f") {
    t.kind = TermKind::Forcing;
  } else if (auto star = label.find('*'); star != std::string_view::npos) {
    t.kind = TermKind::UPowerTimesDerivative;
    t.power = parse_power(label.substr(0, star), 'u');
    t.derivative = parse_derivative(label.substr(star + 1));
    if (t.power == 0 || t.derivative == 0) return fail();
  } else if (int d = parse_derivative(label); d > 0) {
    t.kind = TermKind::Derivative;
    t.derivative = d;
  } else if (int pu = parse_power(label, 'u'); pu > 0) {
    t.kind = TermKind::UPower;
    t.power = pu;
  } else if (int px = parse_power(label, 'x'); px > 0) {
    t.kind = TermKind::XPower;
    t.power = px;
  } else {
    return fail();
  }
  t.label = term_label(t.kind, t.power, t.derivative);
  if (t.label != label) return fail();
  return t;
}

std::vector<TermDescriptor> build_term_list(int lhs_order) {
  if (lhs_order < 1 || lhs_order > 4) {
    throw InvalidArgument("left-hand-side order must be in 1..4, got " +
                          std::to_string(lhs_order));
  }
  std::vector<TermDescriptor> terms;
  auto add = [&](TermKind kind, int power, int derivative) {
    terms.push_back({kind, power, derivative, term_label(kind, power, derivative)});
  };
  add(TermKind::Constant, 0, 0);
  for (int d = 1; d <= kMaxPower; ++d) add(TermKind::UPower, d, 0);
  for (int d = 1; d <= kMaxPower; ++d) add(TermKind::XPower, d, 0);
  for (int a = 1; a < lhs_order; ++a) add(TermKind::Derivative, 0, a);
  for (int d = 1; d <= kMaxPower; ++d)
    for (int a = 1; a < lhs_order; ++a) add(TermKind::UPowerTimesDerivative, d, a);
  add(TermKind::Forcing, 0, 0);
  return terms;
}

double evaluate_term(const TermDescriptor& term, double x, double f,
                     std::span<const double> derivs) {
  switch (term.kind) {
    case TermKind::Constant: return 1.0;
    case TermKind::UPower: return std::pow(derivs[0], term.power);
    case TermKind::XPower: return std::pow(x, term.power);
    case TermKind::Derivative: return derivs[static_cast<std::size_t>(term.derivative)];
    case TermKind::UPowerTimesDerivative:
      return std::pow(derivs[0], term.power) * derivs[static_cast<std::size_t>(term.derivative)];
    case TermKind::Forcing: return f;
  }
  return 0.0;
}

std::optional<std::size_t> CandidateLibrary::term_index(std::string_view label) const {
  for (std::size_t l = 0; l < terms.size(); ++l)
    if (terms[l].label == label) return l;
  return std::nullopt;
}

std::vector<std::vector<std::size_t>> CandidateLibrary::group_indices() const {
  const std::size_t p = num_terms();
  std::vector<std::vector<std::size_t>> groups(p);
  for (std::size_t l = 0; l < p; ++l) {
    groups[l].reserve(num_positions());
    for (std::size_t k = 0; k < num_positions(); ++k) groups[l].push_back(l + p * k);
  }
  return groups;
}

Eigen::MatrixXd CandidateLibrary::stacked() const {
  const auto m = static_cast<Eigen::Index>(trial_count);
  Eigen::MatrixXd out(m * static_cast<Eigen::Index>(blocks.size()),
                      static_cast<Eigen::Index>(num_terms()));
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    out.middleRows(static_cast<Eigen::Index>(k) * m, m) = blocks[k];
  }
  return out;
}

CandidateLibrary assemble_system(const TrialSet& trials, int lhs_order,
                                 const DifferentiationConfig& diff) {
  if (trials.size() == 0) throw InvalidArgument("assemble_system: no trials");
  CandidateLibrary lib;
  lib.terms = build_term_list(lhs_order);
  lib.lhs_order = lhs_order;
  lib.grid = trials.grid();
  lib.trial_count = trials.size();
  const Grid& grid = trials.grid();
  const std::size_t n = grid.size();
  const std::size_t m = trials.size();
  const std::size_t p = lib.terms.size();

  std::vector<std::vector<std::vector<double>>> derivs;
  derivs.reserve(m);
  for (const auto& t : trials.trials()) derivs.push_back(derivative_stack(t.u, grid, lhs_order, diff));

  lib.blocks.assign(n, Eigen::MatrixXd(m, p));
  lib.outcome.resize(static_cast<Eigen::Index>(m * n));
  std::vector<double> local(static_cast<std::size_t>(lhs_order) + 1);
  for (std::size_t k = 0; k < n; ++k) {
    auto& block = lib.blocks[k];
    for (std::size_t j = 0; j < m; ++j) {
      for (int a = 0; a <= lhs_order; ++a) local[a] = derivs[j][a][k];
      for (std::size_t l = 0; l < p; ++l) {
        block(j, l) = evaluate_term(lib.terms[l], grid[k], trials[j].f[k], local);
      }
      lib.outcome[static_cast<Eigen::Index>(k * m + j)] = local[lhs_order];
    }
  }
  lib.column_scales.assign(p, 1.0);
  lib.outcome_scale = 1.0;
  lib.normalized = false;
  return lib;
}

CandidateLibrary normalize(CandidateLibrary lib) {
  if (lib.normalized) return lib;
  const std::size_t p = lib.num_terms();
  for (std::size_t l = 0; l < p; ++l) {
    double ss = 0.0;
    for (const auto& block : lib.blocks) ss += block.col(static_cast<Eigen::Index>(l)).squaredNorm();
    const double norm = std::sqrt(ss);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw InvalidArgument("candidate term '" + lib.terms[l].label +
                            "' has a zero (or non-finite) column and cannot be normalized");
    }
    for (auto& block : lib.blocks) block.col(static_cast<Eigen::Index>(l)) /= norm;
    lib.column_scales[l] = norm;
  }
  const double y_norm = lib.outcome.norm();
  if (!(y_norm > 0.0) || !std::isfinite(y_norm)) {
    throw InvalidArgument("outcome " + derivative_label(lib.lhs_order) +
                          " is identically zero (or non-finite)");
  }
  lib.outcome_scale = y_norm / std::sqrt(static_cast<double>(lib.trial_count));
  lib.outcome /= lib.outcome_scale;
  lib.normalized = true;
  return lib;
}

Eigen::MatrixXd denormalize_coefficients(const CandidateLibrary& lib,
                                         const Eigen::MatrixXd& xi_normalized) {
  Eigen::MatrixXd out = xi_normalized;
  for (Eigen::Index l = 0; l < out.rows(); ++l) {
    out.row(l) *= lib.outcome_scale / lib.column_scales[static_cast<std::size_t>(l)];
  }
  return out;
}

Eigen::MatrixXd normalize_coefficients(const CandidateLibrary& lib,
                                       const Eigen::MatrixXd& xi_physical) {
  Eigen::MatrixXd out = xi_physical;
  for (Eigen::Index l = 0; l < out.rows(); ++l) {
    out.row(l) *= lib.column_scales[static_cast<std::size_t>(l)] / lib.outcome_scale;
  }
  return out;
}

}  // namespace bvpdisc
