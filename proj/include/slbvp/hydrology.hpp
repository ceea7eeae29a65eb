#pragma once

#include <cmath>

#include "slbvp/problem.hpp"

namespace slbvp {

/// Constant-coefficient unconfined-aquifer model on [0, L]:
/// u_t - alpha u_xx = beta with boundary heads h1, h2.
struct AquiferParams {
  double alpha = 1.0;  // diffusivity, > 0
  double beta = 0.0;   // constant recharge
  double L = kPi;      // domain length, > 0
  double h1 = 0.0;
  double h2 = 0.0;
};

inline void validate(const AquiferParams& a) {
  if (!(a.alpha > 0.0)) throw Error("aquifer alpha must be positive");
  if (!(a.L > 0.0)) throw Error("aquifer length L must be positive");
}

/// Steady-state head profile under constant recharge and constant-head
/// boundaries: the quadratic v(x) = c2 x^2 + c1 x + c0.
struct SteadyStateHead {
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double L = kPi;
  double at(double x) const { return (c2 * x + c1) * x + c0; }
};

inline SteadyStateHead steady_state_head(const AquiferParams& a) {
  validate(a);
  SteadyStateHead s;
  s.c2 = -a.beta / (2.0 * a.alpha);
  s.c1 = (a.h2 - a.h1) / a.L + a.beta * a.L / (2.0 * a.alpha);
  s.c0 = a.h1;
  s.L = a.L;
  return s;
}

/// Head values sampled at the physical points x_i = L t_i / pi.
inline GridFunction sample_head(const SteadyStateHead& s, const Grid& g) {
  GridFunction out(g);
  for (int i = 0; i < g.nodes(); ++i) out[i] = s.at(s.L * g.node(i) / kPi);
  return out;
}

/// Problem built from an aquifer scenario with recharge
/// beta(x, v) = lambda v - h - eps f(x, v), mapped onto [0, pi].
struct ScaledProblem {
  ProblemSpec problem;
  double sigma = 1.0;  // L^2 / (alpha pi^2): factor absorbed into h, f, lambda
  double L = kPi;
};

/// Rescale x <- pi x / L and absorb alpha: with sigma = L^2/(alpha pi^2) the
/// transformed problem is u'' + (sigma lambda) u = sigma h(Lx/pi) +
/// eps sigma f(Lx/pi, u), with functional points mapped to pi t_k / L and
/// boundary data unchanged. The constant forcing is h = -beta, which makes
/// the lambda = 0, f = 0, eps = 0 case reproduce the steady-state parabola.
inline ScaledProblem build_problem(const AquiferParams& a, double lambda, Expr f,
                                   NonlocalFunctional eta1, NonlocalFunctional eta2,
                                   double epsilon) {
  validate(a);
  ScaledProblem out;
  out.L = a.L;
  out.sigma = a.L * a.L / (a.alpha * kPi * kPi);
  ProblemSpec& p = out.problem;
  p.epsilon = epsilon;
  p.h1 = a.h1;
  p.h2 = a.h2;

  const bool identity = (a.alpha == 1.0 && a.L == kPi);
  if (identity) {
    p.lambda = lambda;
    p.h = Expr::constant(-a.beta);
    p.f = std::move(f);
    p.eta1 = std::move(eta1);
    p.eta2 = std::move(eta2);
    return out;
  }

  p.lambda = out.sigma * lambda;
  p.h = Expr::constant(-out.sigma * a.beta);
  Expr x_phys = Expr::binary(BinaryOp::mul, Expr::constant(a.L / kPi), Expr::variable(Var::x));
  p.f = Expr::binary(BinaryOp::mul, Expr::constant(out.sigma),
                     substitute(f, Var::x, x_phys));
  auto map_points = [&](NonlocalFunctional eta) {
    NonlocalFunctional mapped;
    for (auto& term : eta.terms)
      mapped.add_term(std::move(term.g), kPi * term.point / a.L);
    return mapped;
  };
  p.eta1 = map_points(std::move(eta1));
  p.eta2 = map_points(std::move(eta2));
  return out;
}

}  // namespace slbvp
