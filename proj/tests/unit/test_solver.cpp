#include <doctest.h>

#include <cmath>
#include <numbers>

#include "support.hpp"

using namespace bvpdisc;

TEST_CASE("rk4 on known IVPs") {
  SUBCASE("constant") {
    const Grid g(0.0, 1.0, 11);
    Eigen::VectorXd y0(1);
    y0 << 3.0;
    const auto traj = integrate_ivp([](double, const Eigen::VectorXd& y) {
      return Eigen::VectorXd::Zero(y.size()).eval();
    }, y0, g);
    CHECK(traj.rows() == 11);
    for (Eigen::Index k = 0; k < traj.rows(); ++k) CHECK(traj(k, 0) == 3.0);
  }
  SUBCASE("exponential") {
    const Grid g(0.0, 1.0, 101);
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    const auto traj = integrate_ivp([](double, const Eigen::VectorXd& y) { return y; }, y0, g);
    CHECK(std::abs(traj(100, 0) - std::exp(1.0)) < 1e-6);
  }
  SUBCASE("sine") {
    const Grid g(0.0, std::numbers::pi, 101);
    Eigen::VectorXd y0(2);
    y0 << 0.0, 1.0;
    const auto traj = integrate_ivp(
        [](double, const Eigen::VectorXd& y) {
          Eigen::VectorXd d(2);
          d << y[1], -y[0];
          return d;
        },
        y0, g);
    CHECK(traj(0, 0) == 0.0);
    CHECK(std::abs(traj(100, 0)) < 1e-5);
  }
  SUBCASE("divergence names the step") {
    const Grid g(0.0, 1.0, 11);
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    CHECK_THROWS_AS(integrate_ivp([](double, const Eigen::VectorXd& y) {
      return (1e308 * y.array().square()).matrix().eval();
    }, y0, g), DivergenceError);
  }
}

TEST_CASE("rk4 converges at fourth order") {
  auto err = [](std::size_t n) {
    const Grid g(0.0, 2.0, n);
    Eigen::VectorXd y0(2);
    y0 << 0.0, 1.0;
    const auto traj = integrate_ivp(
        [](double x, const Eigen::VectorXd& y) {
          Eigen::VectorXd d(2);
          d << y[1], -y[0] + std::cos(x);
          return d;
        },
        y0, g);
    // y'' + y = cos x, y(0) = 0, y'(0) = 1  =>  y = sin x + x sin x / 2
    return std::abs(traj(static_cast<Eigen::Index>(n - 1), 0) - (std::sin(2.0) + std::sin(2.0)));
  };
  const double observed_order = std::log2(err(21) / err(41));
  CHECK(observed_order > 3.8);
  CHECK(observed_order < 4.3);
}

TEST_CASE("linear Poisson profile with constant p and no forcing") {
  const auto model =
      make_model(ModelKind::SecondOrderPoisson).with_coefficient(constant_coefficient("p", 4.0));
  const Grid g = testing::default_grid();
  const Trial t = shoot(model, {0.0, 1.0, 0.0}, g);
  const auto exact = testing::sample(g, [](double x) { return 0.8 * (1 - x / 10); });
  CHECK(testing::max_abs_diff(t.u, exact) < 1e-4);
  CHECK(t.u.front() == 0.8);
}

TEST_CASE("clamped uniform-load beam matches the quartic") {
  const auto model =
      make_model(ModelKind::EulerBernoulli).with_coefficient(constant_coefficient("EI", 10.0));
  const Grid g = testing::default_grid();
  const Trial t = shoot(model, {0.0, 1.0, -1.0}, g);
  // -(EI u'')'' = -1  =>  u = x^2 (10 - x)^2 / (24 EI)
  const auto exact = testing::sample(g, [](double x) { return x * x * (10 - x) * (10 - x) / 240.0; });
  CHECK(testing::max_abs_diff(t.u, exact) < 1e-3);
}

TEST_CASE("homogeneous beam stays at rest") {
  const auto model = make_model(ModelKind::EulerBernoulli);
  const Trial t = shoot(model, {0.0, 1.0, 0.0}, testing::default_grid());
  for (double v : t.u) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("right boundary tolerance and exact left value for every model") {
  for (const auto& name : model_names()) {
    const auto model = model_by_name(name);
    const auto set = testing::model_trials(name, 8, 11);
    const Grid& g = set.grid();
    for (const auto& t : set.trials()) {
      CHECK(t.u.front() == model.bc.left);
      CHECK(std::abs(t.u.back() - model.bc.right) <= 1e-3);
      if (model.order == 4) {
        const double slope = (3 * t.u[g.size() - 1] - 4 * t.u[g.size() - 2] + t.u[g.size() - 3]) /
                             (2 * g.spacing());
        CHECK(std::abs(slope) <= 1e-3);
      }
    }
  }
}

TEST_CASE("full linear SL grid meets the boundary tolerance") {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const auto all = model.forcing_grid.enumerate();
  const auto set = generate_trials(model, all, testing::default_grid());
  CHECK(set.size() == all.size());
  for (const auto& t : set.trials()) CHECK(std::abs(t.u.back()) <= 1e-3);
}

TEST_CASE("nonlinear SL solutions satisfy the ODE") {
  const auto model = make_model(ModelKind::NonlinearSturmLiouville);
  const Grid g = testing::default_grid();
  const auto set = testing::model_trials("nonlinear-sl", 3, 4);
  for (const auto& t : set.trials()) {
    const auto d = derivative_stack(t.u, g, 2, testing::clean_poly());
    double worst = 0.0;
    for (std::size_t k = 10; k + 10 < g.size(); ++k) {
      const double x = g[k];
      const double p = eval_coefficient(model, "p", x);
      const double px = eval_coefficient_derivative(model, "p", x);
      const double q = eval_coefficient(model, "q", x);
      const double u = t.u[k];
      const double lhs = -(px * d[1][k] + p * d[2][k]) + q * u + 0.4 * q * u * u;
      worst = std::max(worst, std::abs(lhs - t.f[k]));
    }
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("generated trials keep input order and are deterministic") {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const std::vector<ForcingSpec> forcings{{1, 1, 1}, {2, 0.5, 0.5}, {1, 1, 1}};
  const auto set = generate_trials(model, forcings, testing::default_grid());
  REQUIRE(set.size() == 3);
  CHECK(set[1].forcing == forcings[1]);
  CHECK(set[0].u == set[2].u);
  CHECK_THROWS_AS(generate_trials(model, {}, testing::default_grid()), InvalidArgument);
}

TEST_CASE("superposition for the homogeneous linear model") {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const Grid g = testing::default_grid();
  const Trial a = shoot(model, {2.0, 1.5, 0.0}, g);
  const Trial b = shoot(model, {0.0, 1.0, 1.0}, g);
  const Trial ab = shoot(model, {2.0, 1.5, 1.0}, g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(std::abs(ab.u[k] - a.u[k] - b.u[k]) < 1e-2);
}

TEST_CASE("grid refinement changes interior values at fourth order") {
  const auto model = make_model(ModelKind::LinearSturmLiouville);
  const ForcingSpec f{3.0, 2.0, 1.0};
  ShootingOptions coarse;
  coarse.refinement = 1;
  coarse.tol = 1e-10;
  auto at5 = [&](std::size_t n) {
    const Grid g(0.0, 10.0, n);
    const Trial t = shoot(model, f, g, coarse);
    return t.u[(n - 1) / 2];
  };
  const double d1 = std::abs(at5(101) - at5(201));
  const double d2 = std::abs(at5(201) - at5(401));
  CHECK(d1 / d2 > 12.0);
}
