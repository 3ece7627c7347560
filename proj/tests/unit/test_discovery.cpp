#include <doctest.h>

#include <cmath>
#include <limits>

#include "support.hpp"

using namespace bvpdisc;

namespace {

// Model over the order-2 library with constant coefficient fields.
SparseSpatialModel hand_model(std::size_t n, const std::map<std::string, double>& values) {
  SparseSpatialModel m;
  m.terms = build_term_list(2);
  m.xi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.terms.size()), static_cast<Eigen::Index>(n));
  m.active.assign(m.terms.size(), false);
  for (const auto& [label, v] : values) {
    const auto l = *m.index_of(label);
    m.active[l] = true;
    m.xi.row(static_cast<Eigen::Index>(l)).setConstant(v);
  }
  return m;
}

// Exact operator of a second-order model with the true coefficients.
DiscoveredOperator analytic_operator(const ModelSpec& model, const Grid& grid) {
  DiscoveredOperator op;
  const std::size_t n = grid.size();
  op.phi.resize(n);
  Field ux(n), u(n), u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double x = grid[k];
    op.phi[k] = -eval_coefficient(model, "p", x);
    ux[k] = -eval_coefficient_derivative(model, "p", x);
    if (model.has_coefficient("q")) {
      u[k] = eval_coefficient(model, "q", x);
      u2[k] = model.alpha * u[k];
    }
  }
  op.operator_terms["u_x"] = ux;
  if (model.has_coefficient("q")) op.operator_terms["u"] = u;
  if (model.alpha != 0.0) op.operator_terms["u^2"] = u2;
  return op;
}

double relative_residual(const Field& predicted, const Trial& trial, const Grid& grid) {
  const Field zero(grid.size(), 0.0);
  return forcing_residual(predicted, trial.f, grid) / forcing_residual(zero, trial.f, grid);
}

}  // namespace

TEST_CASE("infer_operator on a hand-built expansion") {
  // u_xx = 0.5 u_x - 0.5 f  ->  phi = -2, c_{u_x} = 1.
  const auto m = hand_model(10, {{"u_x", 0.5}, {"f", -0.5}});
  const auto op = infer_operator(m);
  for (double v : op.phi) CHECK(v == doctest::Approx(-2.0));
  REQUIRE(op.operator_terms.size() == 1);
  for (double v : op.operator_terms.at("u_x")) CHECK(v == doctest::Approx(1.0));

  const auto back = expand_operator(op);
  CHECK(back.size() == 2);
  for (double v : back.at("u_x")) CHECK(std::abs(v - 0.5) < 1e-12);
  for (double v : back.at("f")) CHECK(std::abs(v + 0.5) < 1e-12);
}

TEST_CASE("infer_operator rejects a missing or vanishing forcing term") {
  CHECK_THROWS_AS(infer_operator(hand_model(10, {{"u", 1.0}})), InvalidModelError);
  auto m = hand_model(10, {{"u", 1.0}, {"f", 2.0}});
  m.xi(static_cast<Eigen::Index>(*m.index_of("f")), 4) = 1e-14;
  CHECK_THROWS_AS(infer_operator(m), InvalidModelError);
}

TEST_CASE("extract_parameters per model") {
  const Grid g = testing::default_grid();
  const auto poisson = make_model(ModelKind::SecondOrderPoisson);
  const auto pp = extract_parameters(analytic_operator(poisson, g), poisson);
  CHECK(pp.count("p") == 1);
  CHECK(pp.count("q") == 0);

  const auto nl = make_model(ModelKind::NonlinearSturmLiouville);
  const auto np = extract_parameters(analytic_operator(nl, g), nl);
  REQUIRE(np.count("alpha_q") == 1);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(np.at("alpha_q")[k] / np.at("q")[k] == doctest::Approx(0.4));
  }

  const auto lin = make_model(ModelKind::LinearSturmLiouville);
  const auto lp = extract_parameters(analytic_operator(lin, g), lin);
  const auto truth = true_parameters(lin, g);
  CHECK(lp.at("p")[5] == doctest::Approx(truth.at("p")[5]));
  CHECK(coefficient_error(lp.at("p"), truth.at("p"), g) < 1e-14);
  CHECK(coefficient_error(lp.at("q"), truth.at("q"), g) < 1e-14);
}

TEST_CASE("coefficient error examples") {
  const Grid g{0.0, 1.0, 101};
  const Field ones(101, 1.0);
  Field scaled(101, 1.1);
  CHECK(coefficient_error(scaled, ones, g) == doctest::Approx(0.1));
  CHECK(coefficient_error(ones, ones, g) == 0.0);

  // A spike at the end point is trimmed away.
  Field spiked = ones;
  spiked[0] = 100.0;
  CHECK(coefficient_error(spiked, ones, g, 0.01) == 0.0);
  CHECK(coefficient_error(spiked, ones, g, 0.0) > 1.0);
  CHECK_THROWS_AS(coefficient_error(ones, ones, g, 0.5), InvalidArgument);
  CHECK_THROWS_AS(coefficient_error(Field(5, 1.0), ones, g), InvalidArgument);
}

TEST_CASE("spurious and missing term counts") {
  const auto m = hand_model(4, {{"u", 1.0}, {"u^3", 1.0}, {"f", 1.0}});
  const std::vector<std::string> truth{"u_x", "u", "f"};
  CHECK(spurious_term_count(m, truth) == 1);
  CHECK(missing_term_count(m, truth) == 1);
  const std::vector<std::string> same{"u", "u^3", "f"};
  CHECK(spurious_term_count(m, same) == 0);
  CHECK(missing_term_count(m, same) == 0);
}

TEST_CASE("predict_forcing with the analytic operator") {
  const auto set = testing::model_trials("linear-sl", 3);
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const auto op = analytic_operator(model, set.grid());
  for (const auto& t : set.trials()) {
    CHECK(relative_residual(predict_forcing(op, t, set.grid(), testing::clean_poly()), t,
                            set.grid()) < 1e-2);
  }
  DiscoveredOperator zero = op;
  zero.phi.assign(set.grid().size(), 0.0);
  zero.operator_terms.clear();
  const auto pred = predict_forcing(zero, set[0], set.grid(), testing::clean_poly());
  CHECK(testing::max_abs_diff(pred, Field(pred.size(), 0.0)) == 0.0);
}

TEST_CASE("Euler-Bernoulli operator predicts a held-out forcing") {
  const auto model = make_model(ModelKind::EulerBernoulli);
  const auto forcings = forcing_set(model, 5, 3);
  const auto set = generate_trials(model, forcings, testing::default_grid());
  const std::vector<std::size_t> train{0, 1, 2, 3};
  auto diff = testing::clean_poly();
  diff.adaptive = true;
  const auto lib = normalize(assemble_system(set.subset(train), 4, diff));
  const auto op = infer_operator(known_operator_fit(lib, model.true_terms));
  const auto ei = extract_parameters(op, model).at("EI");
  CHECK(coefficient_error(ei, true_parameters(model, set.grid()).at("EI"), set.grid()) < 0.07);
  CHECK(relative_residual(predict_forcing(op, set[4], set.grid(), diff), set[4], set.grid()) <
        0.05);
}

TEST_CASE("select_order") {
  const auto set = testing::model_trials("linear-sl", 12);
  const std::vector<std::size_t> train{0, 1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<std::size_t> test{9, 10, 11};
  const auto a = set.subset(train);
  const auto b = set.subset(test);

  const std::vector<int> one{2};
  const auto single = select_order(a, b, one, testing::clean_poly());
  CHECK(single.best_order == 2);
  REQUIRE(single.scores.size() == 1);
  CHECK(std::isfinite(single.scores[0].error));

  const std::vector<int> two{1, 2};
  const auto sel = select_order(a, b, two, testing::clean_poly());
  CHECK(sel.best_order == 2);
  REQUIRE(sel.scores.size() == 2);
  CHECK(sel.scores[0].order == 1);
  CHECK(sel.scores[1].error < sel.scores[0].error);
}

TEST_CASE("joint scaling of u and f leaves the estimate unchanged") {
  const auto set = testing::model_trials("linear-sl", 6);
  std::vector<Trial> scaled = set.trials();
  for (auto& t : scaled) {
    for (auto& v : t.u) v *= 7.5;
    for (auto& v : t.f) v *= 7.5;
  }
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  auto estimate = [&](const TrialSet& s) {
    const auto lib = normalize(assemble_system(s, 2, testing::clean_poly()));
    return extract_parameters(infer_operator(known_operator_fit(lib, model.true_terms)), model);
  };
  const auto a = estimate(set);
  const auto b = estimate(set.with_trials(scaled));
  CHECK(coefficient_error(b.at("p"), a.at("p"), set.grid(), 0.0) < 1e-8);
  CHECK(coefficient_error(b.at("q"), a.at("q"), set.grid(), 0.0) < 1e-8);
}
