#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bvpdisc/error.hpp"
#include "bvpdisc/grid.hpp"
#include "bvpdisc/models.hpp"

namespace bvpdisc {

// One forcing/response pair sampled on a TrialSet's grid.
struct Trial {
  std::vector<double> f;
  std::vector<double> u;
  ForcingSpec forcing;
  std::string model;
  // Initial-value unknowns found by the shoot: u_x(a) for second-order
  // models, (u_xx(a), u_xxx(a)) for fourth-order ones.
  std::vector<double> shooting_parameters;
};

// m trials of one model on one grid with one set of boundary conditions.
class TrialSet {
 public:
  TrialSet(Grid grid, std::string model, BoundaryConditions bc, std::vector<Trial> trials);

  const Grid& grid() const noexcept { return grid_; }
  const std::string& model() const noexcept { return model_; }
  const BoundaryConditions& bc() const noexcept { return bc_; }
  const std::vector<Trial>& trials() const noexcept { return trials_; }
  std::size_t size() const noexcept { return trials_.size(); }
  const Trial& operator[](std::size_t j) const { return trials_[j]; }

  // m x n matrices with one trial per row.
  Eigen::MatrixXd response_matrix() const;
  Eigen::MatrixXd forcing_matrix() const;

  TrialSet subset(std::span<const std::size_t> indices) const;
  TrialSet with_trials(std::vector<Trial> trials) const;

 private:
  Grid grid_;
  std::string model_;
  BoundaryConditions bc_;
  std::vector<Trial> trials_;
};

// Classical fourth-order Runge-Kutta over an increasing node sequence; the
// step size may vary between nodes.  Returns the state at every node.
template <class State, class Rhs>
std::vector<State> rk4_integrate(Rhs&& rhs, const State& y0, std::span<const double> nodes) {
  std::vector<State> out;
  out.reserve(nodes.size());
  out.push_back(y0);
  State y = y0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double x = nodes[i];
    const double h = nodes[i + 1] - x;
    const State k1 = rhs(x, y);
    const State k2 = rhs(x + 0.5 * h, State(y + 0.5 * h * k1));
    const State k3 = rhs(x + 0.5 * h, State(y + 0.5 * h * k2));
    const State k4 = rhs(x + h, State(y + h * k3));
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite()) {
      throw DivergenceError("IVP integration produced a non-finite state at step " +
                            std::to_string(i + 1) + " (x = " + std::to_string(nodes[i + 1]) +
                            ")");
    }
    out.push_back(y);
  }
  return out;
}

using StateDerivative = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

// RK4 on the grid spacing; row k of the result is the state at grid[k].
Eigen::MatrixXd integrate_ivp(const StateDerivative& rhs, const Eigen::VectorXd& y0,
                              const Grid& grid);

struct ShootingOptions {
  // Allowed mismatch at the right boundary.
  double tol = 1e-3;
  // Internal integration grid is `refinement` times finer than the output.
  std::size_t refinement = 4;
  int max_iterations = 200;
};

Trial shoot_second_order(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
                         const ShootingOptions& options = {});

Trial shoot_fourth_order(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
                         const ShootingOptions& options = {});

// Dispatches on model.order.
Trial shoot(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
            const ShootingOptions& options = {});

// One trial per forcing, in input order.
TrialSet generate_trials(const ModelSpec& model, std::span<const ForcingSpec> forcings,
                         const Grid& grid, const ShootingOptions& options = {});

}  // namespace bvpdisc
