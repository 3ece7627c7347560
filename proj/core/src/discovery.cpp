#include "bvpdisc/discovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "bvpdisc/error.hpp"

namespace bvpdisc {

DiscoveredOperator infer_operator(const SparseSpatialModel& model) {
  const auto f_index = model.index_of("f");
  if (!f_index || !model.active[*f_index]) {
    throw InvalidModelError("the learned model has no active forcing term f, so no operator "
                            "can be inferred");
  }
  const auto n = static_cast<std::size_t>(model.xi.cols());
  const auto fi = static_cast<Eigen::Index>(*f_index);
  DiscoveredOperator op;
  op.lhs_order = model.lhs_order;
  op.source = model;
  op.phi.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double cf = model.xi(fi, static_cast<Eigen::Index>(k));
    if (!(std::abs(cf) >= 1e-10)) {
      std::ostringstream os;
      os << "forcing coefficient vanishes at grid index " << k << " (value " << cf << ")";
      throw InvalidModelError(os.str());
    }
    op.phi[k] = 1.0 / cf;
  }
  for (std::size_t l = 0; l < model.terms.size(); ++l) {
    if (!model.active[l] || l == *f_index) continue;
    Field c(n);
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = -model.xi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)) * op.phi[k];
    }
    op.operator_terms.emplace(model.terms[l].label, std::move(c));
  }
  return op;
}

FieldMap expand_operator(const DiscoveredOperator& op) {
  FieldMap out;
  Field cf(op.phi.size());
  for (std::size_t k = 0; k < cf.size(); ++k) cf[k] = 1.0 / op.phi[k];
  for (const auto& [label, c] : op.operator_terms) {
    Field xi(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) xi[k] = -c[k] * cf[k];
    out.emplace(label, std::move(xi));
  }
  out.emplace("f", std::move(cf));
  return out;
}

namespace {

Field negated(const Field& v) {
  Field out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

}  // namespace

FieldMap extract_parameters(const DiscoveredOperator& op, const ModelSpec& model) {
  FieldMap out;
  switch (model.kind) {
    case ModelKind::EulerBernoulli:
      // L[u] = -EI u_xxxx + ...
      out.emplace("EI", negated(op.phi));
      break;
    case ModelKind::LinearSturmLiouville:
    case ModelKind::NonlinearSturmLiouville:
    case ModelKind::SecondOrderPoisson: {
      // L[u] = -p u_xx - p_x u_x + q u + alpha q u^2
      out.emplace("p", negated(op.phi));
      if (model.has_coefficient("q")) {
        if (auto it = op.operator_terms.find("u"); it != op.operator_terms.end()) {
          out.emplace("q", it->second);
        }
      }
      if (model.alpha != 0.0) {
        if (auto it = op.operator_terms.find("u^2"); it != op.operator_terms.end()) {
          out.emplace("alpha_q", it->second);
        }
      }
      break;
    }
  }
  return out;
}

FieldMap true_parameters(const ModelSpec& model, const Grid& grid) {
  FieldMap out;
  auto sample = [&](auto&& fn) {
    Field v(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) v[k] = fn(grid[k]);
    return v;
  };
  if (model.kind == ModelKind::EulerBernoulli) {
    out.emplace("EI", sample([&](double x) { return eval_coefficient(model, "EI", x); }));
    return out;
  }
  out.emplace("p", sample([&](double x) { return eval_coefficient(model, "p", x); }));
  if (model.has_coefficient("q")) {
    out.emplace("q", sample([&](double x) { return eval_coefficient(model, "q", x); }));
    if (model.alpha != 0.0) {
      out.emplace("alpha_q",
                  sample([&](double x) { return model.alpha * eval_coefficient(model, "q", x); }));
    }
  }
  return out;
}

namespace {

bool in_interior(const Grid& grid, std::size_t k, double trim_fraction) {
  const double lo = grid.a() + trim_fraction * grid.length();
  const double hi = grid.b() - trim_fraction * grid.length();
  return grid[k] >= lo && grid[k] <= hi;
}

void check_trim(double trim_fraction) {
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw InvalidArgument("trim fraction must lie in [0, 0.5)");
  }
}

}  // namespace

double coefficient_error(std::span<const double> learned, std::span<const double> truth,
                         const Grid& grid, double trim_fraction) {
  check_trim(trim_fraction);
  if (learned.size() != grid.size() || truth.size() != grid.size()) {
    throw InvalidArgument("coefficient_error: fields do not match the grid");
  }
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!in_interior(grid, k, trim_fraction)) continue;
    diff += (learned[k] - truth[k]) * (learned[k] - truth[k]);
    ref += truth[k] * truth[k];
  }
  if (ref == 0.0) {
    throw InvalidArgument("coefficient_error: true field is identically zero on the interior");
  }
  return std::sqrt(diff / ref);
}

std::size_t spurious_term_count(const SparseSpatialModel& model,
                                std::span<const std::string> true_terms) {
  const std::set<std::string> truth(true_terms.begin(), true_terms.end());
  std::size_t count = 0;
  for (const auto& label : model.active_labels())
    if (!truth.contains(label)) ++count;
  return count;
}

std::size_t missing_term_count(const SparseSpatialModel& model,
                               std::span<const std::string> true_terms) {
  std::size_t count = 0;
  for (const auto& label : true_terms)
    if (!model.is_active(label)) ++count;
  return count;
}

Field predict_forcing(const DiscoveredOperator& op, const Trial& trial, const Grid& grid,
                      const DifferentiationConfig& diff) {
  if (trial.u.size() != grid.size() || op.phi.size() != grid.size()) {
    throw InvalidArgument("predict_forcing: trial and operator must share the grid");
  }
  const auto derivs = derivative_stack(trial.u, grid, op.lhs_order, diff);
  std::vector<std::pair<TermDescriptor, const Field*>> terms;
  for (const auto& [label, field] : op.operator_terms) terms.emplace_back(parse_term(label), &field);

  Field out(grid.size());
  std::vector<double> local(static_cast<std::size_t>(op.lhs_order) + 1);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (std::size_t a = 0; a < local.size(); ++a) local[a] = derivs[a][k];
    double acc = op.phi[k] * local.back();
    for (const auto& [term, field] : terms) {
      acc += (*field)[k] * evaluate_term(term, grid[k], trial.f[k], local);
    }
    out[k] = acc;
  }
  return out;
}

double forcing_residual(std::span<const double> predicted, std::span<const double> actual,
                        const Grid& grid, double trim_fraction) {
  check_trim(trim_fraction);
  double ss = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!in_interior(grid, k, trim_fraction)) continue;
    ss += (predicted[k] - actual[k]) * (predicted[k] - actual[k]);
  }
  return std::sqrt(ss);
}

OrderSelection select_order(const TrialSet& train, const TrialSet& test, std::span<const int> orders,
                            const DifferentiationConfig& diff, const RegressionParams& params,
                            double trim_fraction) {
  if (orders.empty()) throw InvalidArgument("select_order: no orders given");
  if (test.size() == 0) throw InvalidArgument("select_order: empty test set");
  std::vector<int> sorted(orders.begin(), orders.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  OrderSelection result;
  double best = std::numeric_limits<double>::infinity();
  for (int order : sorted) {
    if (order < 1 || order > 4) throw InvalidArgument("select_order: orders must be in 1..4");
    OrderScore score;
    score.order = order;
    try {
      const CandidateLibrary lib = normalize(assemble_system(train, order, diff));
      const auto sweep = tolerance_sweep(lib, params);
      const SparseSpatialModel chosen = select_model(sweep);
      score.active_terms = chosen.active_labels();
      const DiscoveredOperator op = infer_operator(chosen);
      double total = 0.0;
      for (const auto& trial : test.trials()) {
        total += forcing_residual(predict_forcing(op, trial, test.grid(), diff), trial.f,
                                  test.grid(), trim_fraction);
      }
      score.error = total / static_cast<double>(test.size());
    } catch (const Error& e) {
      score.error = std::numeric_limits<double>::infinity();
      score.failure = e.what();
    }
    if (result.best_order == 0 || score.error < best) {
      best = score.error;
      result.best_order = order;
    }
    result.scores.push_back(std::move(score));
  }
  return result;
}

}  // namespace bvpdisc
