#include "bvpdisc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace bvpdisc {

TrialSet::TrialSet(Grid grid, std::string model, BoundaryConditions bc, std::vector<Trial> trials)
    : grid_(std::move(grid)), model_(std::move(model)), bc_(bc), trials_(std::move(trials)) {
  for (std::size_t j = 0; j < trials_.size(); ++j) {
    const auto& t = trials_[j];
    if (t.u.size() != grid_.size() || t.f.size() != grid_.size()) {
      throw InvalidArgument("trial " + std::to_string(j) + " does not match the grid size " +
                            std::to_string(grid_.size()));
    }
    if (!t.model.empty() && t.model != model_) {
      throw InvalidArgument("trial " + std::to_string(j) + " belongs to model '" + t.model +
                            "', expected '" + model_ + "'");
    }
  }
}

Eigen::MatrixXd TrialSet::response_matrix() const {
  Eigen::MatrixXd out(trials_.size(), grid_.size());
  for (std::size_t j = 0; j < trials_.size(); ++j)
    for (std::size_t k = 0; k < grid_.size(); ++k) out(j, k) = trials_[j].u[k];
  return out;
}

Eigen::MatrixXd TrialSet::forcing_matrix() const {
  Eigen::MatrixXd out(trials_.size(), grid_.size());
  for (std::size_t j = 0; j < trials_.size(); ++j)
    for (std::size_t k = 0; k < grid_.size(); ++k) out(j, k) = trials_[j].f[k];
  return out;
}

TrialSet TrialSet::subset(std::span<const std::size_t> indices) const {
  std::vector<Trial> picked;
  picked.reserve(indices.size());
  for (std::size_t j : indices) {
    if (j >= trials_.size()) {
      throw InvalidArgument("trial index " + std::to_string(j) + " out of range");
    }
    picked.push_back(trials_[j]);
  }
  return with_trials(std::move(picked));
}

TrialSet TrialSet::with_trials(std::vector<Trial> trials) const {
  return TrialSet(grid_, model_, bc_, std::move(trials));
}

Eigen::MatrixXd integrate_ivp(const StateDerivative& rhs, const Eigen::VectorXd& y0,
                              const Grid& grid) {
  const auto states = rk4_integrate<Eigen::VectorXd>(rhs, y0, grid.points());
  Eigen::MatrixXd out(states.size(), y0.size());
  for (std::size_t k = 0; k < states.size(); ++k) out.row(k) = states[k].transpose();
  return out;
}

namespace {

// Fine integration nodes: the output grid refined `refinement` times, with the
// model's coefficient jumps inserted so no RK4 step straddles a jump.
struct IntegrationMesh {
  std::vector<double> nodes;
  std::vector<std::size_t> sample_index;  // node index of each output grid point
  // [first, last] node index and the open interval used for coefficient lookup
  struct Segment {
    std::size_t first;
    std::size_t last;
    double lo;
    double hi;
  };
  std::vector<Segment> segments;
};

IntegrationMesh build_mesh(const ModelSpec& model, const Grid& grid, std::size_t refinement) {
  const Grid fine = grid.refined(std::max<std::size_t>(refinement, 1));
  const double merge_tol = 1e-12 * grid.length();
  std::vector<double> jumps;
  for (double bp : model.breakpoints) {
    if (bp > grid.a() + merge_tol && bp < grid.b() - merge_tol) jumps.push_back(bp);
  }
  std::sort(jumps.begin(), jumps.end());

  IntegrationMesh mesh;
  std::vector<std::size_t> jump_nodes;
  std::size_t next_jump = 0;
  const std::size_t stride = std::max<std::size_t>(refinement, 1);
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double x = fine[i];
    while (next_jump < jumps.size() && jumps[next_jump] < x - merge_tol) {
      jump_nodes.push_back(mesh.nodes.size());
      mesh.nodes.push_back(jumps[next_jump++]);
    }
    if (next_jump < jumps.size() && std::abs(jumps[next_jump] - x) <= merge_tol) {
      jump_nodes.push_back(mesh.nodes.size());
      ++next_jump;
    }
    if (i % stride == 0) mesh.sample_index.push_back(mesh.nodes.size());
    mesh.nodes.push_back(x);
  }

  // Coefficient lookups are nudged inside the open segment so a step ending on
  // a jump still sees the coefficient of the piece it integrates over.
  const double nudge = 1e-9 * grid.length();
  std::size_t first = 0;
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t jn : jump_nodes) {
    mesh.segments.push_back({first, jn, lo, mesh.nodes[jn] - nudge});
    first = jn;
    lo = mesh.nodes[jn] + nudge;
  }
  mesh.segments.push_back(
      {first, mesh.nodes.size() - 1, lo, std::numeric_limits<double>::infinity()});
  return mesh;
}

template <class State, class MakeRhs>
std::vector<State> integrate_mesh(const IntegrationMesh& mesh, const State& y0,
                                  MakeRhs&& make_rhs) {
  std::vector<State> all;
  all.reserve(mesh.nodes.size());
  State y = y0;
  for (const auto& seg : mesh.segments) {
    std::span<const double> nodes(mesh.nodes.data() + seg.first, seg.last - seg.first + 1);
    auto part = rk4_integrate<State>(make_rhs(seg.lo, seg.hi), y, nodes);
    if (all.empty()) all.push_back(part.front());
    all.insert(all.end(), part.begin() + 1, part.end());
    y = part.back();
  }
  return all;
}

std::string describe(const ForcingSpec& f) {
  std::ostringstream os;
  os << "forcing(a=" << f.amplitude << ", b=" << f.frequency << ", c=" << f.offset << ")";
  return os.str();
}

std::vector<double> sample_forcing(const ForcingSpec& forcing, const Grid& grid) {
  std::vector<double> f(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) f[k] = forcing(grid[k]);
  return f;
}

constexpr double kTightResidual = 1e-12;

// Expands outward from a zero slope until the residual changes sign, then
// refines with Illinois-modified false position.  When a probe diverges, the
// gap back to the last finite probe is bisected, since a root often sits just
// before the blow-up.
template <class TryResidual>
double bracketed_slope(TryResidual&& try_residual, const ModelSpec& model,
                       const ForcingSpec& forcing, const ShootingOptions& options,
                       double& r_out) {
  const auto r_zero = try_residual(0.0);
  if (!r_zero) {
    throw ConvergenceError("shooting diverges from a zero initial slope for " + model.name +
                               " " + describe(forcing),
                           std::numeric_limits<double>::infinity());
  }

  double s_lo = 0.0;
  double r_lo = *r_zero;
  double s_hi = 0.0;
  double r_hi = r_lo;
  bool bracketed = std::abs(r_lo) <= kTightResidual;
  double best_r = r_lo;
  struct Probe {
    double s;
    double r;
    bool dead;
  };
  Probe probes[2] = {{0.0, r_lo, false}, {0.0, r_lo, false}};
  auto accept = [&](Probe& last, double s, double r) {
    if (std::abs(r) < std::abs(best_r)) best_r = r;
    if ((r > 0) != (last.r > 0) || r == 0.0) {
      s_lo = last.s;
      r_lo = last.r;
      s_hi = s;
      r_hi = r;
      return true;
    }
    last = {s, r, false};
    return false;
  };
  for (int k = -6; k <= 40 && !bracketed; ++k) {
    for (int dir = 0; dir < 2 && !bracketed; ++dir) {
      Probe& last = probes[dir];
      if (last.dead) continue;
      const double s = (dir == 0 ? 1.0 : -1.0) * std::ldexp(1.0, k);
      if (const auto r = try_residual(s)) {
        bracketed = accept(last, s, *r);
        continue;
      }
      double lo = last.s;
      double hi = s;
      for (int it = 0; it < 60 && !bracketed; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (const auto r = try_residual(mid)) {
          bracketed = accept(last, mid, *r);
          lo = mid;
        } else {
          hi = mid;
        }
      }
      last.dead = true;
    }
    if (probes[0].dead && probes[1].dead) break;
  }
  if (!bracketed) {
    throw ConvergenceError("shooting could not bracket the right boundary value for " +
                               model.name + " " + describe(forcing),
                           best_r);
  }

  double s = s_lo;
  double r = r_lo;
  if (std::abs(r_lo) > kTightResidual) {
    int side = 0;
    for (int it = 0; it < options.max_iterations; ++it) {
      s = (s_lo * r_hi - s_hi * r_lo) / (r_hi - r_lo);
      if (!std::isfinite(s) || s <= std::min(s_lo, s_hi) || s >= std::max(s_lo, s_hi)) {
        s = 0.5 * (s_lo + s_hi);
      }
      if (const auto trial_r = try_residual(s)) {
        r = *trial_r;
      } else {
        // Diverged inside the bracket: fall back to halving toward s_lo.
        s_hi = s;
        r_hi = std::copysign(std::numeric_limits<double>::max(), r_hi);
        side = 0;
        continue;
      }
      if (std::abs(r) <= kTightResidual) break;
      if ((r > 0) == (r_hi > 0)) {
        s_hi = s;
        r_hi = r;
        if (side == 1) r_lo *= 0.5;
        side = 1;
      } else {
        s_lo = s;
        r_lo = r;
        if (side == -1) r_hi *= 0.5;
        side = -1;
      }
      if (std::abs(s_hi - s_lo) <= 4 * std::numeric_limits<double>::epsilon() *
                                       std::max(1.0, std::abs(s))) {
        break;
      }
    }
  }
  r_out = r;
  return s;
}

// Nonlinear second-order problems: follow the solution branch of the linear
// problem by scaling the quadratic coefficient with t in [0, 1], solving each
// step with Newton on the slope.  The slope sensitivity comes from the
// variational equations, integrated alongside the state.
double continue_nonlinear_slope(const ModelSpec& model, const ForcingSpec& forcing,
                                const IntegrationMesh& mesh, double p_left,
                                const ShootingOptions& options) {
  using State = Eigen::Vector4d;
  const CoefficientFunction& p = model.coefficient("p");
  const CoefficientFunction& q = model.coefficient("q");

  auto solve_at = [&](double t, double s) -> std::optional<double> {
    const double alpha = t * model.alpha;
    auto make_rhs = [&](double lo, double hi) {
      return [&, lo, hi](double x, const State& y) -> State {
        const double xe = std::clamp(x, lo, hi);
        const double pe = p.value(xe);
        const double qe = q.value(xe);
        return State(y[1] / pe, qe * (y[0] + alpha * y[0] * y[0]) - forcing(x), y[3] / pe,
                     qe * (1.0 + 2.0 * alpha * y[0]) * y[2]);
      };
    };
    const double target = model.bc.right;
    double best = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 30; ++it) {
      State end;
      try {
        end = integrate_mesh<State>(mesh, State(model.bc.left, p_left * s, 0.0, p_left),
                                    make_rhs)
                  .back();
      } catch (const DivergenceError&) {
        return std::nullopt;
      }
      const double r = end[0] - target;
      if (!std::isfinite(r) || !std::isfinite(end[2]) || end[2] == 0.0) return std::nullopt;
      if (std::abs(r) <= kTightResidual * std::max(1.0, std::abs(target))) return s;
      const double step = r / end[2];
      s -= step;
      // The slope sensitivity can be huge, so a vanishing step is as good as
      // a vanishing residual once the residual is small.
      if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(s)) && std::abs(r) <= options.tol)
        return s;
      best = std::min(best, std::abs(r));
    }
    if (best <= 1e-3 * options.tol) return s;
    return std::nullopt;
  };

  const auto linear = solve_at(0.0, 0.0);
  if (!linear) {
    throw ConvergenceError("linearized shooting failed for " + model.name + " " +
                               describe(forcing),
                           std::numeric_limits<double>::infinity());
  }
  double t = 0.0;
  double s = *linear;
  double s_prev = s;
  double t_prev = 0.0;
  double dt = 0.125;
  int steps = 0;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    // Secant predictor from the last two accepted points.
    const double guess = t > 0.0 ? s + (s - s_prev) * (t_next - t) / (t - t_prev) : s;
    if (const auto solved = solve_at(t_next, guess)) {
      s_prev = s;
      t_prev = t;
      s = *solved;
      t = t_next;
      dt = std::min(0.25, dt * 1.5);
    } else {
      dt *= 0.5;
      if (dt < 1e-6) {
        throw ConvergenceError("continuation stalled at t=" + std::to_string(t) + " for " +
                                   model.name + " " + describe(forcing),
                               std::numeric_limits<double>::infinity());
      }
    }
    if (++steps > 20 * options.max_iterations) {
      throw ConvergenceError("continuation did not reach the full nonlinearity for " + model.name + " " +
                                 describe(forcing),
                             std::numeric_limits<double>::infinity());
    }
  }
  return s;
}

}  // namespace

Trial shoot_second_order(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
                         const ShootingOptions& options) {
  if (model.order != 2) {
    throw InvalidArgument("shoot_second_order called on order-" + std::to_string(model.order) +
                          " model '" + model.name + "'");
  }
  using State = Eigen::Vector2d;
  const IntegrationMesh mesh = build_mesh(model, grid, options.refinement);
  const CoefficientFunction& p = model.coefficient("p");
  const CoefficientFunction* q = model.has_coefficient("q") ? &model.coefficient("q") : nullptr;
  const double alpha = model.alpha;

  // State (u, w) with w = p u_x:  u' = w / p,  w' = q (u + alpha u^2) - f.
  auto make_rhs = [&](double lo, double hi) {
    return [&, lo, hi](double x, const State& y) -> State {
      const double xe = std::clamp(x, lo, hi);
      const double reaction = q ? q->value(xe) * (y[0] + alpha * y[0] * y[0]) : 0.0;
      return State(y[1] / p.value(xe), reaction - forcing(x));
    };
  };
  const double p_left = p.value(std::clamp(grid.a(), mesh.segments.front().lo,
                                           mesh.segments.front().hi));
  auto run = [&](double slope) {
    return integrate_mesh<State>(mesh, State(model.bc.left, p_left * slope), make_rhs);
  };
  auto residual = [&](double slope) { return run(slope).back()[0] - model.bc.right; };

  auto try_residual = [&](double slope) -> std::optional<double> {
    try {
      const double r = residual(slope);
      if (std::isfinite(r)) return r;
    } catch (const DivergenceError&) {
    }
    return std::nullopt;
  };

  double s = 0.0;
  double r = 0.0;
  if (alpha != 0.0 && q) {
    s = continue_nonlinear_slope(model, forcing, mesh, p_left, options);
    const auto r_final = try_residual(s);
    if (!r_final) {
      throw ConvergenceError("shooting diverges at the continued slope for " + model.name + " " +
                                 describe(forcing),
                             std::numeric_limits<double>::infinity());
    }
    r = *r_final;
  } else {
    s = bracketed_slope(try_residual, model, forcing, options, r);
  }
  if (!(std::abs(r) <= options.tol)) {
    throw ConvergenceError("shooting did not converge for " + model.name + " " +
                               describe(forcing) + " (residual " + std::to_string(r) + ")",
                           r);
  }

  const auto states = run(s);
  Trial trial;
  trial.model = model.name;
  trial.forcing = forcing;
  trial.f = sample_forcing(forcing, grid);
  trial.u.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) trial.u[k] = states[mesh.sample_index[k]][0];
  trial.u.front() = model.bc.left;
  trial.shooting_parameters = {s};
  return trial;
}

Trial shoot_fourth_order(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
                         const ShootingOptions& options) {
  if (model.order != 4) {
    throw InvalidArgument("shoot_fourth_order called on order-" + std::to_string(model.order) +
                          " model '" + model.name + "'");
  }
  using State = Eigen::Vector4d;
  const IntegrationMesh mesh = build_mesh(model, grid, options.refinement);
  const CoefficientFunction& ei = model.coefficient("EI");

  // State (u, u_x, M, M_x) with the bending moment M = EI u_xx, which stays
  // smooth across rigidity jumps:  u_xx = M / EI,  M_xx = -f.
  auto make_rhs = [&](double lo, double hi) {
    return [&, lo, hi](double x, const State& y) -> State {
      const double xe = std::clamp(x, lo, hi);
      return State(y[1], y[2] / ei.value(xe), y[3], -forcing(x));
    };
  };
  const double xa = std::clamp(grid.a(), mesh.segments.front().lo, mesh.segments.front().hi);
  const double ei_a = ei.value(xa);
  const double ei_x_a = ei.derivative(xa);
  auto run = [&](const Eigen::Vector2d& s) {
    const State y0(model.bc.left, model.bc.left_slope, ei_a * s[0], ei_x_a * s[0] + ei_a * s[1]);
    return integrate_mesh<State>(mesh, y0, make_rhs);
  };
  auto residual = [&](const Eigen::Vector2d& s) {
    const State end = run(s).back();
    return Eigen::Vector2d(end[0] - model.bc.right, end[1] - model.bc.right_slope);
  };

  // Damped Newton with a forward-difference Jacobian.
  Eigen::Vector2d s = Eigen::Vector2d::Zero();
  Eigen::Vector2d r = residual(s);
  for (int it = 0; it < options.max_iterations && r.lpNorm<Eigen::Infinity>() > kTightResidual;
       ++it) {
    Eigen::Matrix2d jac;
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d sp = s;
      const double step = 1e-3 * std::max(1.0, std::abs(s[i]));
      sp[i] += step;
      jac.col(i) = (residual(sp) - r) / step;
    }
    Eigen::FullPivLU<Eigen::Matrix2d> lu(jac);
    if (!lu.isInvertible() || std::abs(jac.determinant()) < 1e-300) {
      throw ConvergenceError("singular shooting Jacobian for " + model.name + " " +
                                 describe(forcing),
                             r.lpNorm<Eigen::Infinity>());
    }
    const Eigen::Vector2d delta = -lu.solve(r);
    double t = 1.0;
    Eigen::Vector2d s_next = s + delta;
    Eigen::Vector2d r_next = residual(s_next);
    while (r_next.norm() > r.norm() && t > 1e-6) {
      t *= 0.5;
      s_next = s + t * delta;
      r_next = residual(s_next);
    }
    if (r_next.norm() >= r.norm()) break;
    s = s_next;
    r = r_next;
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= options.tol)) {
    throw ConvergenceError("two-parameter shooting did not converge for " + model.name + " " +
                               describe(forcing),
                           r.lpNorm<Eigen::Infinity>());
  }

  const auto states = run(s);
  Trial trial;
  trial.model = model.name;
  trial.forcing = forcing;
  trial.f = sample_forcing(forcing, grid);
  trial.u.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) trial.u[k] = states[mesh.sample_index[k]][0];
  trial.u.front() = model.bc.left;
  trial.shooting_parameters = {s[0], s[1]};
  return trial;
}

Trial shoot(const ModelSpec& model, const ForcingSpec& forcing, const Grid& grid,
            const ShootingOptions& options) {
  if (model.order == 2) return shoot_second_order(model, forcing, grid, options);
  if (model.order == 4) return shoot_fourth_order(model, forcing, grid, options);
  throw InvalidArgument("no shooting solver for order " + std::to_string(model.order));
}

TrialSet generate_trials(const ModelSpec& model, std::span<const ForcingSpec> forcings,
                         const Grid& grid, const ShootingOptions& options) {
  if (forcings.empty()) throw InvalidArgument("generate_trials: no forcings given");
  std::vector<Trial> trials;
  trials.reserve(forcings.size());
  for (std::size_t j = 0; j < forcings.size(); ++j) {
    try {
      trials.push_back(shoot(model, forcings[j], grid, options));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("trial " + std::to_string(j) + " " + describe(forcings[j]) + ": " +
                                 e.what(),
                             e.residual());
    } catch (const DivergenceError& e) {
      throw DivergenceError("trial " + std::to_string(j) + " " + describe(forcings[j]) + ": " +
                            e.what());
    }
  }
  return TrialSet(grid, model.name, model.bc, std::move(trials));
}

}  // namespace bvpdisc
