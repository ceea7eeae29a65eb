#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "slbvp/detail/dense.hpp"
#include "slbvp/linear.hpp"
#include "slbvp/problem.hpp"
#include "slbvp/resonance.hpp"

namespace slbvp {

enum class Method { picard, newton, resonant };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::picard: return "picard";
    case Method::newton: return "newton";
    case Method::resonant: return "resonant";
  }
  return "?";
}

struct SolverOptions {
  double tol = 1e-12;                  // sup-norm tolerance on the iteration step
  int max_iter = 50;
  double residual_tol = 1e-8;          // post-hoc residual gate, scaled by the data
  double transversality_floor = 1e-8;
  double eps_ceiling = 0.1;            // one-shot resonant solves refuse larger |eps|
  double resonance_tol = kResonanceTol;
};

struct SolveReport {
  GridFunction solution;
  int iterations = 0;
  double ode_residual = 0.0;                   // 9-point high-order stencil, sup over nodes
  std::pair<double, double> bc_residual{0, 0}; // |v(0)-h1-eps*eta1(v)|, |v(pi)-h2-eps*eta2(v)|
  Method method = Method::newton;
  std::vector<double> step_norms;
  double lambda = 0.0;
  double epsilon = 0.0;
  // picard diagnostics
  bool contraction_warning = false;
  double contraction_product = 0.0;            // |eps| * ||L^-1|| * alpha_hat
  double empirical_ratio = 0.0;
  // resonant diagnostics
  double c_bar = std::numeric_limits<double>::quiet_NaN();
  double transversality = std::numeric_limits<double>::quiet_NaN();
};

struct BifurcationRoot {
  double c_bar = 0.0;
  double defect = 0.0;          // B(c_bar)
  double transversality = 0.0;  // T(c_bar)
  bool degenerate = false;
};

namespace detail {

/// Residual verification independent of how the solution was produced:
/// high-order finite differences for the ODE, direct evaluation for the
/// nonlocal boundary conditions. Throws NoConvergence past the gate.
inline void verify_report(SolveReport& rep, const ProblemSpec& p,
                          const BoundaryTriple& hvec, const SolverOptions& opts) {
  const GridFunction& u = rep.solution;
  GridFunction d2 = second_derivative_highorder(u);
  GridFunction fu = sample_along(p.f, u);
  double res = 0.0;
  for (int i = 0; i < u.size(); ++i)
    res = std::max(res, std::fabs(d2[i] + p.lambda * u[i] - hvec.h[i] - p.epsilon * fu[i]));
  rep.ode_residual = res;
  rep.bc_residual = {
      std::fabs(u[0] - p.h1 - p.epsilon * eval_functional(p.eta1, u)),
      std::fabs(u[u.size() - 1] - p.h2 - p.epsilon * eval_functional(p.eta2, u))};
  rep.lambda = p.lambda;
  rep.epsilon = p.epsilon;

  double scale = 1.0 + sup_norm(u) + combined_norm(hvec);
  double gate = opts.residual_tol * scale;
  if (!(res <= gate) || !(rep.bc_residual.first <= gate) || !(rep.bc_residual.second <= gate))
    throw NoConvergence(rep.iterations,
                        std::max(res, std::max(rep.bc_residual.first, rep.bc_residual.second)));
}

/// Sampled sup-norm Lipschitz estimate of F near v0.
inline double lipschitz_estimate(const ProblemSpec& p, const GridFunction& v0) {
  const Grid& g = v0.grid();
  double delta = 1e-3 * (1.0 + sup_norm(v0));
  FTriple f0 = apply_F(p, v0);
  double alpha = 0.0;
  auto probe = [&](const GridFunction& dir) {
    GridFunction vd = axpy(delta, dir, v0);
    alpha = std::max(alpha, combined_norm(apply_F(p, vd) - f0) / delta);
  };
  GridFunction ones(g, 1.0);
  probe(ones);
  probe(-1.0 * ones);
  for (int k = 1; k <= 3; ++k)
    probe(sample_fn([k](double t) { return std::sin(k * t); }, g));
  probe(sample_fn([](double t) { return std::cos(t); }, g));
  return alpha;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// invertible case

/// Fixed-point iteration v <- L^-1(h + eps F(v)) from v0 = L^-1 h
/// (contraction mapping route). Reports the Theorem-style contraction
/// product |eps| ||L^-1|| alpha_hat and warns when it reaches 1.
inline SolveReport picard_solve(const ProblemSpec& p, const Grid& grid,
                                const SolverOptions& opts = {}) {
  LinearOperator op(p.lambda, grid, opts.resonance_tol);
  BoundaryTriple hvec = forcing_triple(p, grid);
  GridFunction v = op.solve(hvec);

  SolveReport rep;
  rep.method = Method::picard;
  rep.contraction_product =
      std::fabs(p.epsilon) * inverse_norm_estimate(p.lambda, grid) *
      detail::lipschitz_estimate(p, v);
  rep.contraction_warning = rep.contraction_product >= 1.0;

  bool converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    FTriple fv = apply_F(p, v);
    GridFunction w = op.solve(hvec + p.epsilon * fv);
    double step = sup_distance(w, v);
    rep.step_norms.push_back(step);
    v = w;
    rep.iterations = it;
    if (!std::isfinite(step)) throw NoConvergence(it, step);
    if (step <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (rep.step_norms.size() >= 2) {
    double prev = rep.step_norms[rep.step_norms.size() - 2];
    rep.empirical_ratio = prev > 0 ? rep.step_norms.back() / prev : 0.0;
  }
  if (!converged) throw NoConvergence(opts.max_iter, rep.empirical_ratio);

  rep.solution = std::move(v);
  detail::verify_report(rep, p, hvec, opts);
  return rep;
}

/// Newton iteration on G(v) = v - L^-1 h - eps L^-1 F(v), dense Jacobian
/// assembled column by column from the derivative map.
inline SolveReport newton_solve(const ProblemSpec& p, const GridFunction& initial,
                                const SolverOptions& opts = {}) {
  const Grid& grid = initial.grid();
  LinearOperator op(p.lambda, grid, opts.resonance_tol);
  BoundaryTriple hvec = forcing_triple(p, grid);
  const int m = grid.nodes();

  SolveReport rep;
  rep.method = Method::newton;
  GridFunction v = initial;

  bool converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    FTriple fv = apply_F(p, v);
    GridFunction gv = v - op.solve(hvec + p.epsilon * fv);
    if (!gv.all_finite()) throw NoConvergence(it, sup_norm(gv));

    GridFunction delta(grid);
    if (p.epsilon == 0.0) {
      delta = gv;
    } else {
      DFContext ctx(p, v);
      Eigen::MatrixXd jac(m, m);
      GridFunction ej(grid);
      for (int j = 0; j < m; ++j) {
        ej[j] = 1.0;
        FTriple dfe = ctx.apply(ej);
        GridFunction col = ej - p.epsilon * op.solve(dfe);
        for (int i = 0; i < m; ++i) jac(i, j) = col[i];
        ej[j] = 0.0;
      }
      detail::GuardedLU glu(jac);
      Eigen::VectorXd d = glu.lu.solve(detail::to_vec(gv));
      for (int i = 0; i < m; ++i) delta[i] = d[i];
    }

    double step = sup_norm(delta);
    rep.step_norms.push_back(step);
    v = v - delta;
    rep.iterations = it;
    if (!std::isfinite(step)) throw NoConvergence(it, step);
    if (step <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence(opts.max_iter, rep.step_norms.back());

  rep.solution = std::move(v);
  detail::verify_report(rep, p, hvec, opts);
  return rep;
}

// ---------------------------------------------------------------------------
// resonant case

namespace detail {

/// The one-parameter family u_c = ubar0 + c sin(n.) of solutions of the
/// linear problem at resonance; exists only when the forcing is in the image.
struct ReducedFamily {
  ResonanceBasis basis;
  BoundaryTriple hvec;
  GridFunction ubar0;

  ReducedFamily(const ProblemSpec& p, const ResonanceBasis& b)
      : basis(b), hvec(forcing_triple(p, b.psi.grid())),
        ubar0(generalized_inverse(b, hvec)) {}

  GridFunction at(double c) const { return axpy(c, basis.sin_n, ubar0); }
};

inline double bifurcation_value(const ProblemSpec& p, const ReducedFamily& fam, double c) {
  return solvability_defect(fam.basis, apply_F(p, fam.at(c)));
}

inline double transversality_value(const ProblemSpec& p, const ReducedFamily& fam, double c) {
  GridFunction uc = fam.at(c);
  return solvability_defect(fam.basis, apply_DF(p, uc, fam.basis.sin_n));
}

/// Newton iteration on the reduced map
///   G_n(eps, u) = [ (I-P)u - M h - eps M (I-Q) F(u) ; <F(u), psi_vec> ],
/// with the scalar row folded along the kernel direction psi so the system
/// is square on the grid vector.
inline SolveReport resonant_newton(const ProblemSpec& p, const ReducedFamily& fam,
                                   const GridFunction& initial, double transversality,
                                   const SolverOptions& opts) {
  const ResonanceBasis& b = fam.basis;
  const Grid& grid = b.psi.grid();
  const int m = grid.nodes();

  auto reduced_residual = [&](const GridFunction& u) {
    FTriple fu = apply_F(p, u);
    GridFunction r = u - project_kernel(b, u) - fam.ubar0;
    if (p.epsilon != 0.0) {
      BoundaryTriple body = fu - project_coimage(b, fu);
      r = r - p.epsilon * generalized_inverse(b, body);
    }
    return axpy(inner_weighted(fu, b.psi_vec, b.n), b.psi, r);
  };

  SolveReport rep;
  rep.method = Method::resonant;
  GridFunction u = initial;

  bool converged = false;
  for (int it = 0; it <= opts.max_iter; ++it) {
    GridFunction res = reduced_residual(u);
    if (!res.all_finite()) throw NoConvergence(it, sup_norm(res));
    if (sup_norm(res) <= opts.tol * (1.0 + sup_norm(u))) {
      rep.iterations = it;
      converged = true;
      break;
    }
    if (it == opts.max_iter) break;
    if (std::fabs(transversality) <= opts.transversality_floor)
      throw DegenerateRoot(std::fabs(transversality));

    DFContext ctx(p, u);
    Eigen::MatrixXd jac(m, m);
    GridFunction ej(grid);
    for (int j = 0; j < m; ++j) {
      ej[j] = 1.0;
      FTriple dfe = ctx.apply(ej);
      GridFunction col = ej - project_kernel(b, ej);
      if (p.epsilon != 0.0) {
        BoundaryTriple body = dfe - project_coimage(b, dfe);
        col = col - p.epsilon * generalized_inverse(b, body);
      }
      col = axpy(inner_weighted(dfe, b.psi_vec, b.n), b.psi, col);
      for (int i = 0; i < m; ++i) jac(i, j) = col[i];
      ej[j] = 0.0;
    }
    GuardedLU glu(jac);
    Eigen::VectorXd d = glu.lu.solve(to_vec(res));
    GridFunction delta(grid);
    for (int i = 0; i < m; ++i) delta[i] = d[i];
    double step = sup_norm(delta);
    rep.step_norms.push_back(step);
    u = u - delta;
    rep.iterations = it + 1;
    if (!std::isfinite(step)) throw NoConvergence(it + 1, step);
  }
  if (!converged)
    throw NoConvergence(opts.max_iter,
                        rep.step_norms.empty() ? 0.0 : rep.step_norms.back());

  rep.solution = std::move(u);
  verify_report(rep, p, fam.hvec, opts);
  return rep;
}

}  // namespace detail

/// B(c): kernel-direction defect of h + eps-free nonlinearity data along the
/// family u_c of linear solutions. Roots are bifurcation candidates.
inline double bifurcation_function(const ProblemSpec& p, const ResonanceBasis& basis, double c) {
  detail::ReducedFamily fam(p, basis);
  return detail::bifurcation_value(p, fam, c);
}

/// T(c): the transversality value whose nonvanishing makes the reduced
/// Jacobian invertible at a root of B.
inline double transversality(const ProblemSpec& p, const ResonanceBasis& basis, double c) {
  detail::ReducedFamily fam(p, basis);
  return detail::transversality_value(p, fam, c);
}

/// Scan B on [c_min, c_max], bracket every sign change, refine each bracket
/// by bisection to |dc| <= 1e-12, and attach T. Roots with |T| at or below
/// the floor are flagged degenerate. Tangential (non-crossing) roots are not
/// detected by a sign-change scan.
inline std::vector<BifurcationRoot> find_bifurcation_roots(
    const ProblemSpec& p, const ResonanceBasis& basis, double c_min, double c_max,
    int scan_points, const SolverOptions& opts = {}) {
  if (scan_points < 2) throw Error("bifurcation scan needs at least 2 points");
  if (!(c_min < c_max)) throw Error("empty bifurcation scan interval");
  detail::ReducedFamily fam(p, basis);

  auto B = [&](double c) { return detail::bifurcation_value(p, fam, c); };

  std::vector<double> cs(scan_points), bs(scan_points);
  for (int k = 0; k < scan_points; ++k) {
    cs[k] = c_min + (c_max - c_min) * k / (scan_points - 1);
    bs[k] = B(cs[k]);
  }

  std::vector<BifurcationRoot> roots;
  auto push_root = [&](double c) {
    BifurcationRoot r;
    r.c_bar = c;
    r.defect = B(c);
    r.transversality = detail::transversality_value(p, fam, c);
    r.degenerate = std::fabs(r.transversality) <= opts.transversality_floor;
    roots.push_back(r);
  };

  for (int k = 0; k + 1 < scan_points; ++k) {
    if (bs[k] == 0.0) {
      if (roots.empty() || std::fabs(roots.back().c_bar - cs[k]) > 1e-12) push_root(cs[k]);
      continue;
    }
    if (bs[k] * bs[k + 1] < 0.0) {
      double lo = cs[k], hi = cs[k + 1], flo = bs[k];
      while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        double fmid = B(mid);
        if (fmid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((flo < 0) == (fmid < 0)) {
          lo = mid;
          flo = fmid;
        } else {
          hi = mid;
        }
      }
      push_root(0.5 * (lo + hi));
    }
  }
  if (scan_points >= 1 && bs[scan_points - 1] == 0.0) {
    if (roots.empty() || std::fabs(roots.back().c_bar - cs[scan_points - 1]) > 1e-12)
      push_root(cs[scan_points - 1]);
  }
  return roots;
}

/// Lyapunov-Schmidt solve at lambda = n^2, seeded at the family member
/// u_{c_bar} of the located bifurcation root.
inline SolveReport resonant_solve(const ProblemSpec& p, const Grid& grid,
                                  const BifurcationRoot& root,
                                  const SolverOptions& opts = {}) {
  auto n = is_resonant(p.lambda, opts.resonance_tol);
  if (!n) throw Error("resonant_solve requires lambda at a resonance n^2");
  if (std::fabs(p.epsilon) > opts.eps_ceiling)
    throw Error("|epsilon| exceeds the resonant solve ceiling; use continue_in_epsilon");
  ResonanceBasis basis = make_basis(*n, grid);
  detail::ReducedFamily fam(p, basis);
  SolveReport rep =
      detail::resonant_newton(p, fam, fam.at(root.c_bar), root.transversality, opts);
  rep.c_bar = root.c_bar;
  rep.transversality = root.transversality;
  return rep;
}

// ---------------------------------------------------------------------------
// continuation

struct ContinuationResult {
  std::vector<SolveReport> reports;           // one per completed step
  std::optional<double> failed_epsilon;       // first epsilon that failed, if any
  std::string failure_reason;
};

/// Solve at eps_k = k * eps_target / steps, warm-starting each solve from the
/// previous solution; resonant or invertible route chosen by is_resonant.
/// Stops at the first failure and returns the partial curve.
inline ContinuationResult continue_in_epsilon(const ProblemSpec& p, const Grid& grid,
                                              const std::optional<BifurcationRoot>& root,
                                              double eps_target, int steps,
                                              const SolverOptions& opts = {}) {
  if (steps < 1) throw Error("continuation needs at least 1 step");
  ContinuationResult result;
  auto n = is_resonant(p.lambda, opts.resonance_tol);
  if (n && !root) throw Error("continuation at resonance needs a bifurcation root");

  if (n) {
    ResonanceBasis basis = make_basis(*n, grid);
    detail::ReducedFamily fam(p, basis);
    GridFunction u = fam.at(root->c_bar);
    if (eps_target == 0.0) {
      ProblemSpec p0 = p;
      p0.epsilon = 0.0;
      SolveReport rep = detail::resonant_newton(p0, fam, u, root->transversality, opts);
      rep.c_bar = root->c_bar;
      rep.transversality = root->transversality;
      result.reports.push_back(std::move(rep));
      return result;
    }
    for (int k = 1; k <= steps; ++k) {
      ProblemSpec pk = p;
      pk.epsilon = eps_target * k / steps;
      try {
        SolveReport rep = detail::resonant_newton(pk, fam, u, root->transversality, opts);
        rep.c_bar = root->c_bar;
        rep.transversality = root->transversality;
        u = rep.solution;
        result.reports.push_back(std::move(rep));
      } catch (const Error& e) {
        result.failed_epsilon = pk.epsilon;
        result.failure_reason = e.what();
        break;
      }
    }
    return result;
  }

  LinearOperator op(p.lambda, grid, opts.resonance_tol);
  GridFunction v = op.solve(forcing_triple(p, grid));
  if (eps_target == 0.0) {
    ProblemSpec p0 = p;
    p0.epsilon = 0.0;
    result.reports.push_back(newton_solve(p0, v, opts));
    return result;
  }
  for (int k = 1; k <= steps; ++k) {
    ProblemSpec pk = p;
    pk.epsilon = eps_target * k / steps;
    try {
      SolveReport rep = newton_solve(pk, v, opts);
      v = rep.solution;
      result.reports.push_back(std::move(rep));
    } catch (const Error& e) {
      result.failed_epsilon = pk.epsilon;
      result.failure_reason = e.what();
      break;
    }
  }
  return result;
}

}  // namespace slbvp
