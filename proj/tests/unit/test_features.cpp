#include <doctest.h>

#include <cmath>
#include <set>

#include "support.hpp"

using namespace bvpdisc;

TEST_CASE("term list sizes and order") {
  CHECK(build_term_list(1).size() == 12);
  CHECK(build_term_list(2).size() == 18);
  CHECK(build_term_list(4).size() == 30);
  CHECK_THROWS_AS(build_term_list(0), InvalidArgument);
  CHECK_THROWS_AS(build_term_list(5), InvalidArgument);

  const auto t4 = build_term_list(4);
  CHECK(t4.front().label == "1");
  CHECK(t4[1].label == "u");
  CHECK(t4[6].label == "x");
  CHECK(t4[11].label == "u_x");
  CHECK(t4[13].label == "u_xxx");
  CHECK(t4[14].label == "u*u_x");
  CHECK(t4.back().label == "f");
  std::set<std::string> labels;
  for (const auto& t : t4) labels.insert(t.label);
  CHECK(labels.size() == t4.size());
  for (int a = 1; a <= 4; ++a) CHECK(build_term_list(a).back().kind == TermKind::Forcing);
}

TEST_CASE("labels round-trip through the parser") {
  for (const auto& t : build_term_list(4)) {
    const auto p = parse_term(t.label);
    CHECK(p.kind == t.kind);
    CHECK(p.power == t.power);
    CHECK(p.derivative == t.derivative);
  }
  CHECK(term_label(TermKind::UPowerTimesDerivative, 2, 1) == "u^2*u_x");
  CHECK(term_label(TermKind::XPower, 3) == "x^3");
  CHECK(derivative_label(4) == "u_xxxx");
  CHECK_THROWS_AS(parse_term("u^6"), InvalidArgument);
  CHECK_THROWS_AS(parse_term("sin(u)"), InvalidArgument);
}

TEST_CASE("term evaluation") {
  const std::vector<double> d{2.0, 3.0, 5.0};
  CHECK(evaluate_term(parse_term("1"), 0.5, 7.0, d) == 1.0);
  CHECK(evaluate_term(parse_term("u^3"), 0.5, 7.0, d) == 8.0);
  CHECK(evaluate_term(parse_term("x^2"), 0.5, 7.0, d) == 0.25);
  CHECK(evaluate_term(parse_term("u_xx"), 0.5, 7.0, d) == 5.0);
  CHECK(evaluate_term(parse_term("u^2*u_x"), 0.5, 7.0, d) == 12.0);
  CHECK(evaluate_term(parse_term("f"), 0.5, 7.0, d) == 7.0);
}

TEST_CASE("assembled blocks match direct evaluation") {
  const auto set = testing::model_trials("linear-sl", 4);
  const auto diff = testing::clean_poly();
  const auto lib = assemble_system(set, 2, diff);
  const Grid& g = set.grid();
  REQUIRE(lib.num_positions() == g.size());
  REQUIRE(lib.num_trials() == 4);
  REQUIRE(lib.num_terms() == 18);
  CHECK(lib.outcome.size() == static_cast<Eigen::Index>(4 * g.size()));
  CHECK(lib.stacked().rows() == static_cast<Eigen::Index>(4 * g.size()));

  std::vector<std::vector<std::vector<double>>> stacks;
  for (const auto& t : set.trials()) stacks.push_back(derivative_stack(t.u, g, 2, diff));
  for (std::size_t k : {0UL, 1UL, 137UL, 498UL, 499UL}) {
    for (std::size_t j = 0; j < 4; ++j) {
      const std::vector<double> d{stacks[j][0][k], stacks[j][1][k]};
      for (std::size_t l = 0; l < lib.num_terms(); ++l) {
        CHECK(lib.blocks[k](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) ==
              evaluate_term(lib.terms[l], g[k], set[j].f[k], d));
      }
      CHECK(lib.outcome_block(k)[static_cast<Eigen::Index>(j)] == stacks[j][2][k]);
    }
  }
  const auto x2 = *lib.term_index("x^2");
  CHECK(lib.blocks[10](0, static_cast<Eigen::Index>(x2)) == doctest::Approx(g[10] * g[10]));
  CHECK(lib.blocks[10](3, static_cast<Eigen::Index>(x2)) == lib.blocks[10](0, static_cast<Eigen::Index>(x2)));

  const auto groups = lib.group_indices();
  CHECK(groups.size() == 18);
  std::set<std::size_t> slots;
  for (const auto& grp : groups) {
    CHECK(grp.size() == g.size());
    slots.insert(grp.begin(), grp.end());
  }
  CHECK(slots.size() == 18 * g.size());
}

TEST_CASE("clean outcome matches the analytic expansion") {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const auto set = testing::model_trials("linear-sl", 3);
  const auto lib = assemble_system(set, 2, testing::clean_poly());
  const auto iu = static_cast<Eigen::Index>(*lib.term_index("u"));
  const auto iux = static_cast<Eigen::Index>(*lib.term_index("u_x"));
  const auto iff = static_cast<Eigen::Index>(*lib.term_index("f"));
  double worst = 0.0;
  for (std::size_t k = 5; k + 5 < lib.num_positions(); ++k) {
    const auto e = eval_true_lhs_expansion(model, set.grid()[k]);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const auto& b = lib.blocks[k];
      const double rhs = e.term("u") * b(j, iu) + e.term("u_x") * b(j, iux) + e.forcing * b(j, iff);
      worst = std::max(worst, std::abs(lib.outcome_block(k)[j] - rhs));
    }
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("normalization") {
  const auto set = testing::model_trials("nonlinear-sl", 5);
  const auto lib = normalize(assemble_system(set, 2, testing::clean_poly()));
  const Eigen::MatrixXd s = lib.stacked();
  for (Eigen::Index c = 0; c < s.cols(); ++c) CHECK(s.col(c).norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lib.outcome.norm() == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(lib.normalized);

  const Eigen::MatrixXd xi = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(lib.num_terms()), static_cast<Eigen::Index>(lib.num_positions()));
  const Eigen::MatrixXd back = normalize_coefficients(lib, denormalize_coefficients(lib, xi));
  CHECK((back - xi).cwiseAbs().maxCoeff() < 1e-12 * xi.cwiseAbs().maxCoeff() * 1e3);

  // Doubling a column scale halves that term's physical coefficient.
  auto doubled = lib;
  doubled.column_scales[3] *= 2.0;
  const Eigen::MatrixXd a = denormalize_coefficients(lib, xi);
  const Eigen::MatrixXd b = denormalize_coefficients(doubled, xi);
  CHECK((b.row(3) - 0.5 * a.row(3)).cwiseAbs().maxCoeff() < 1e-12 * a.row(3).cwiseAbs().maxCoeff());

  auto unit = lib;
  std::fill(unit.column_scales.begin(), unit.column_scales.end(), 1.0);
  unit.outcome_scale = 1.0;
  CHECK(denormalize_coefficients(unit, xi) == xi);
}

TEST_CASE("normalize rejects a zero column") {
  auto set = testing::model_trials("poisson2", 2);
  std::vector<Trial> flat = set.trials();
  for (auto& t : flat) std::fill(t.u.begin(), t.u.end(), 0.0);
  const auto zero = set.with_trials(flat);
  CHECK_THROWS_AS(normalize(assemble_system(zero, 2, testing::clean_poly())), InvalidArgument);
}

TEST_CASE("one-term regression recovers the coefficient after denormalization") {
  auto set = testing::model_trials("linear-sl", 6);
  // Overwrite the outcome so that u_xx = 3 u holds exactly in physical units.
  const auto lib = normalize(assemble_system(set, 2, testing::clean_poly()));
  const auto iu = *lib.term_index("u");
  auto synthetic = lib;
  for (std::size_t k = 0; k < lib.num_positions(); ++k) {
    synthetic.outcome.segment(static_cast<Eigen::Index>(k * 6), 6) =
        3.0 * lib.blocks[k].col(static_cast<Eigen::Index>(iu)) * lib.column_scales[iu] /
        lib.outcome_scale;
  }
  const std::vector<std::string> only_u{"u"};
  const auto fit = known_operator_fit(synthetic, only_u);
  // u vanishes at both ends, where the coefficient is undetermined.
  for (Eigen::Index k = 1; k + 1 < fit.xi.cols(); ++k) {
    CHECK(fit.xi(static_cast<Eigen::Index>(iu), k) == doctest::Approx(3.0).epsilon(1e-9));
  }
}
