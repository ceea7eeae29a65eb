#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "slbvp/detail/dense.hpp"
#include "slbvp/linear.hpp"
#include "slbvp/problem.hpp"

namespace slbvp {

/// Independent brute-force validator: 3-point finite differences for the
/// interior equations, the two nonlocal rows assembled directly, solved by
/// damped Newton with a residual-halving line search. Shares no machinery
/// with the quadrature-based solvers it cross-checks.
namespace oracle {

struct FdOptions {
  double tol = 1e-11;   // sup-norm residual tolerance of the discrete system
  int max_iter = 60;
  int max_halvings = 30;
};

namespace fd_detail {

struct System {
  const ProblemSpec& p;
  Grid grid;
  GridFunction h_nodes;
  Expr f2;

  System(const ProblemSpec& p_, int n_panels)
      : p(p_), grid(n_panels), h_nodes(sample(p_.h, grid)), f2(diff(p_.f, Var::v)) {}

  Eigen::VectorXd residual(const GridFunction& u) const {
    const int n = grid.panels();
    const double dt2 = grid.spacing() * grid.spacing();
    Eigen::VectorXd r(n + 1);
    r[0] = u[0] - p.h1 - p.epsilon * eval_functional(p.eta1, u);
    r[n] = u[n] - p.h2 - p.epsilon * eval_functional(p.eta2, u);
    EvalEnv env;
    for (int i = 1; i < n; ++i) {
      env.x = grid.node(i);
      env.v = u[i];
      r[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / dt2 + p.lambda * u[i] -
             h_nodes[i] - p.epsilon * eval(p.f, env);
    }
    return r;
  }

  Eigen::MatrixXd jacobian(const GridFunction& u) const {
    const int n = grid.panels();
    const double dt2 = grid.spacing() * grid.spacing();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 1, n + 1);
    EvalEnv env;
    for (int i = 1; i < n; ++i) {
      env.x = grid.node(i);
      env.v = u[i];
      jac(i, i - 1) = 1.0 / dt2;
      jac(i, i) = -2.0 / dt2 + p.lambda - p.epsilon * eval(f2, env);
      jac(i, i + 1) = 1.0 / dt2;
    }
    jac(0, 0) += 1.0;
    jac(n, n) += 1.0;
    add_nonlocal_row(jac, 0, p.eta1, u);
    add_nonlocal_row(jac, n, p.eta2, u);
    return jac;
  }

  // d/du_j of -eps * sum_k g_k(u(t_k)): entries at the two nodes bracketing t_k
  void add_nonlocal_row(Eigen::MatrixXd& jac, int row, const NonlocalFunctional& eta,
                        const GridFunction& u) const {
    EvalEnv env;
    for (const auto& term : eta.terms) {
      env.v = u.value_at(term.point);
      double slope = -p.epsilon * eval(diff(term.g, Var::v), env);
      double s = std::clamp(term.point, 0.0, kPi) / grid.spacing();
      int i = std::min(static_cast<int>(s), grid.panels() - 1);
      double w = s - i;
      jac(row, i) += slope * (1.0 - w);
      jac(row, i + 1) += slope * w;
    }
  }
};

}  // namespace fd_detail

/// Damped Newton on the finite-difference system. The initial guess is
/// resampled onto the oracle grid by linear interpolation.
inline GridFunction fd_solve(const ProblemSpec& p, int n_panels, const GridFunction& initial,
                             const FdOptions& opts = {}) {
  if (p.epsilon == 0.0 && is_resonant(p.lambda))
    throw SingularJacobian(
        "at eps = 0 and lambda = n^2 the interior difference block is singular; "
        "supply eps != 0 or an augmented seed");
  fd_detail::System sys(p, n_panels);
  GridFunction u = resample(initial, sys.grid);

  Eigen::VectorXd r = sys.residual(u);
  double rnorm = r.norm();
  for (int it = 1; it <= opts.max_iter; ++it) {
    if (r.lpNorm<Eigen::Infinity>() <= opts.tol) return u;
    detail::GuardedLU glu(sys.jacobian(u));
    Eigen::VectorXd step = glu.lu.solve(r);

    double alpha = 1.0;
    GridFunction trial(sys.grid);
    Eigen::VectorXd rt;
    double tnorm = 0.0;
    bool improved = false;
    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
      for (int i = 0; i < u.size(); ++i) trial[i] = u[i] - alpha * step[i];
      rt = sys.residual(trial);
      tnorm = rt.norm();
      if (std::isfinite(tnorm) && tnorm < rnorm) {
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) throw NoConvergence(it, rnorm);
    u = trial;
    r = rt;
    rnorm = tnorm;
  }
  if (r.lpNorm<Eigen::Infinity>() <= opts.tol) return u;
  throw NoConvergence(opts.max_iter, r.lpNorm<Eigen::Infinity>());
}

/// Richardson pairing of fd_solve at n_panels and n_panels/2, reported on the
/// coarse grid where the two meshes share nodes. Cancels the leading O(N^-2)
/// discretization error; still built entirely from oracle solves.
inline GridFunction fd_solve_richardson(const ProblemSpec& p, int n_panels,
                                        const GridFunction& initial,
                                        const FdOptions& opts = {}) {
  if (n_panels % 2 != 0) throw Error("richardson pairing needs an even panel count");
  GridFunction fine = fd_solve(p, n_panels, initial, opts);
  GridFunction coarse = fd_solve(p, n_panels / 2, initial, opts);
  GridFunction out(coarse.grid());
  for (int i = 0; i < out.size(); ++i)
    out[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

struct RefineRow {
  int n_panels;
  double diff_to_finest;
};

/// Sup-norm differences of fd_solve at each mesh against the finest one,
/// evaluated at the coarse nodes.
inline std::vector<RefineRow> fd_refine_study(const ProblemSpec& p, std::vector<int> n_list,
                                              const GridFunction& initial,
                                              const FdOptions& opts = {}) {
  std::sort(n_list.begin(), n_list.end());
  n_list.erase(std::unique(n_list.begin(), n_list.end()), n_list.end());
  std::vector<RefineRow> table;
  if (n_list.size() < 2) return table;

  GridFunction finest = fd_solve(p, n_list.back(), initial, opts);
  for (std::size_t k = 0; k + 1 < n_list.size(); ++k) {
    GridFunction u = fd_solve(p, n_list[k], initial, opts);
    double diff = 0.0;
    for (int i = 0; i < u.size(); ++i)
      diff = std::max(diff, std::fabs(u[i] - finest.value_at(u.grid().node(i))));
    table.push_back({n_list[k], diff});
  }
  return table;
}

}  // namespace oracle
}  // namespace slbvp
