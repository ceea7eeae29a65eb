#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "slbvp/expr.hpp"
#include "slbvp/grid.hpp"

namespace slbvp {

/// One term g(v(t)) of a multi-point boundary functional.
struct FunctionalTerm {
  Expr g;          // expression in v only
  double point;    // evaluation point in [0, pi]
};

/// eta(v) = sum_k g_k(v(t_k)).
struct NonlocalFunctional {
  std::vector<FunctionalTerm> terms;

  void add_term(Expr g, double point) {
    if (!(point >= 0.0 && point <= kPi))
      throw Error("functional point must lie in [0, pi]");
    terms.push_back({std::move(g), point});
  }
  bool empty() const { return terms.empty(); }
};

/// Full description of the boundary value problem
///   v'' + lambda v = h(x) + eps f(x, v),
///   v(0) = h1 + eps eta1(v),  v(pi) = h2 + eps eta2(v).
struct ProblemSpec {
  double lambda = 0.0;
  Expr h = Expr::constant(0.0);  // forcing, expression in x
  double h1 = 0.0;
  double h2 = 0.0;
  Expr f = Expr::constant(0.0);  // nonlinearity, expression in (x, v)
  NonlocalFunctional eta1;
  NonlocalFunctional eta2;
  double epsilon = 0.0;
};

/// Triple (f(.,v), eta1(v), eta2(v)) -- the value of the substitution
/// operator F at v.
using FTriple = BoundaryTriple;

inline double eval_functional(const NonlocalFunctional& eta, const GridFunction& v) {
  double sum = 0.0;
  EvalEnv env;
  for (const auto& term : eta.terms) {
    env.v = v.value_at(term.point);
    sum += eval(term.g, env);
  }
  return sum;
}

/// eta'(v)(w) = sum_k g_k'(v(t_k)) w(t_k), with g' from symbolic diff.
inline double eval_functional_derivative(const NonlocalFunctional& eta,
                                         const GridFunction& v, const GridFunction& w) {
  require_same_grid(v, w);
  double sum = 0.0;
  EvalEnv env;
  for (const auto& term : eta.terms) {
    env.v = v.value_at(term.point);
    sum += eval(diff(term.g, Var::v), env) * w.value_at(term.point);
  }
  return sum;
}

/// Sample an expression in (x, v) along a grid function.
inline GridFunction sample_along(const Expr& e, const GridFunction& v) {
  GridFunction out(v.grid());
  EvalEnv env;
  for (int i = 0; i < v.size(); ++i) {
    env.x = v.grid().node(i);
    env.v = v[i];
    out[i] = eval(e, env);
  }
  return out;
}

/// The forcing data (h, h1, h2) sampled on a grid.
inline BoundaryTriple forcing_triple(const ProblemSpec& p, const Grid& g) {
  return {sample(p.h, g), p.h1, p.h2};
}

inline FTriple apply_F(const ProblemSpec& p, const GridFunction& v) {
  return {sample_along(p.f, v), eval_functional(p.eta1, v), eval_functional(p.eta2, v)};
}

/// Precomputed derivative data of F at a fixed state v, so that directional
/// derivatives (Jacobian columns) cost O(N) each.
class DFContext {
 public:
  DFContext(const ProblemSpec& p, const GridFunction& v)
      : f2_(sample_along(diff(p.f, Var::v), v)) {
    init_terms(p.eta1, v, eta1_);
    init_terms(p.eta2, v, eta2_);
  }

  FTriple apply(const GridFunction& w) const {
    require_same_grid(f2_, w);
    return {f2_ * w, direction_sum(eta1_, w), direction_sum(eta2_, w)};
  }

 private:
  struct TermSlope {
    double gprime;  // g'(v(t_k))
    double point;
  };
  static void init_terms(const NonlocalFunctional& eta, const GridFunction& v,
                         std::vector<TermSlope>& out) {
    EvalEnv env;
    for (const auto& term : eta.terms) {
      env.v = v.value_at(term.point);
      out.push_back({eval(diff(term.g, Var::v), env), term.point});
    }
  }
  static double direction_sum(const std::vector<TermSlope>& slopes, const GridFunction& w) {
    double sum = 0.0;
    for (const auto& s : slopes) sum += s.gprime * w.value_at(s.point);
    return sum;
  }

  GridFunction f2_;
  std::vector<TermSlope> eta1_, eta2_;
};

/// Derivative of F at v applied to the direction w:
/// (f_2(x, v(x)) w(x), eta1'(v)(w), eta2'(v)(w)).
inline FTriple apply_DF(const ProblemSpec& p, const GridFunction& v, const GridFunction& w) {
  return DFContext(p, v).apply(w);
}

}  // namespace slbvp
