#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "slbvp/hydrology.hpp"
#include "slbvp/linear.hpp"

using namespace slbvp;
using Catch::Approx;

TEST_CASE("no recharge gives the straight line between the boundary heads") {
  AquiferParams a{1.0, 0.0, 10.0, 3.0, 7.0};
  SteadyStateHead s = steady_state_head(a);
  REQUIRE(s.c2 == 0.0);
  REQUIRE(s.at(a.L / 2) == Approx((a.h1 + a.h2) / 2).epsilon(1e-15));
}

TEST_CASE("reference parabola") {
  // alpha=1, beta=2, L=pi, h1=h2=0: v = -x^2 + pi x, peak pi^2/4 at pi/2
  AquiferParams a{1.0, 2.0, kPi, 0.0, 0.0};
  SteadyStateHead s = steady_state_head(a);
  REQUIRE(s.c2 == Approx(-1.0).epsilon(1e-15));
  REQUIRE(s.c1 == Approx(kPi).epsilon(1e-15));
  REQUIRE(s.c0 == 0.0);
  REQUIRE(s.at(kPi / 2) == Approx(kPi * kPi / 4).epsilon(1e-14));
}

TEST_CASE("boundary interpolation for random parameters") {
  std::mt19937 rng(71);
  std::uniform_real_distribution<double> pos(0.2, 8.0), val(-5.0, 5.0);
  for (int k = 0; k < 20; ++k) {
    AquiferParams a{pos(rng), val(rng), pos(rng), val(rng), val(rng)};
    SteadyStateHead s = steady_state_head(a);
    REQUIRE(s.at(0.0) == Approx(a.h1).margin(1e-12));
    REQUIRE(s.at(a.L) == Approx(a.h2).margin(1e-10 * (1 + std::fabs(a.h2))));
  }
}

TEST_CASE("sampled head satisfies the discrete flow balance") {
  AquiferParams a{1.7, -2.3, 4.0, 1.0, -0.5};
  SteadyStateHead s = steady_state_head(a);
  Grid g(256);
  GridFunction head = sample_head(s, g);
  double dx = a.L / g.panels();
  for (int i = 1; i < g.panels(); ++i) {
    double d2 = (head[i - 1] - 2 * head[i] + head[i + 1]) / (dx * dx);
    REQUIRE(d2 + a.beta / a.alpha == Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("invalid parameters are rejected") {
  REQUIRE_THROWS_AS(steady_state_head({0.0, 1.0, 1.0, 0.0, 0.0}), Error);
  REQUIRE_THROWS_AS(steady_state_head({1.0, 1.0, -2.0, 0.0, 0.0}), Error);
}

TEST_CASE("identity scaling copies the fields verbatim") {
  AquiferParams a{1.0, 0.7, kPi, 0.3, -0.4};
  Expr f = parse("v^2", VarSet::xv());
  NonlocalFunctional eta1;
  eta1.add_term(parse("v^3", VarSet::v_only()), 1.0);
  ScaledProblem sp = build_problem(a, 2.5, f, eta1, {}, 0.01);
  REQUIRE(sp.sigma == 1.0);
  REQUIRE(sp.problem.lambda == 2.5);
  REQUIRE(sp.problem.epsilon == 0.01);
  REQUIRE(sp.problem.h1 == 0.3);
  REQUIRE(sp.problem.h2 == -0.4);
  REQUIRE(&sp.problem.f.node() == &f.node());  // shared, untransformed tree
  REQUIRE(sp.problem.eta1.terms[0].point == 1.0);
  EvalEnv env;
  env.x = 0.0;
  REQUIRE(eval(sp.problem.h, env) == -0.7);
}

TEST_CASE("rescaled linear problem reproduces the steady-state head") {
  AquiferParams a{2.0, 1.5, 2.0, 1.0, -0.5};
  ScaledProblem sp = build_problem(a, 0.0, Expr::constant(0.0), {}, {}, 0.0);
  Grid g(256);
  LinearSolve sol = solve_linear(sp.problem.lambda, forcing_triple(sp.problem, g));
  SteadyStateHead s = steady_state_head(a);
  for (int i = 0; i <= g.panels(); ++i) {
    double x = a.L * g.node(i) / kPi;
    REQUIRE(sol.solution[i] == Approx(s.at(x)).margin(1e-10));
  }
}

TEST_CASE("rescaled nonlinear data keeps its meaning") {
  // f(x, v) = x on [0, L]: after rescaling the sampled value at node t must
  // be sigma * (L t / pi)
  AquiferParams a{0.5, 0.0, 1.0, 0.0, 0.0};
  ScaledProblem sp = build_problem(a, 1.0, parse("x", VarSet::xv()), {}, {}, 0.1);
  double sigma = 1.0 / (0.5 * kPi * kPi);
  REQUIRE(sp.sigma == Approx(sigma).epsilon(1e-15));
  REQUIRE(sp.problem.lambda == Approx(sigma).epsilon(1e-15));
  EvalEnv env;
  env.x = kPi / 2;
  env.v = 0.0;
  REQUIRE(eval(sp.problem.f, env) == Approx(sigma * 0.5).epsilon(1e-14));

  // functional points move from [0, L] to [0, pi]
  NonlocalFunctional eta;
  eta.add_term(parse("v", VarSet::v_only()), 0.25);
  ScaledProblem sp2 = build_problem(a, 1.0, Expr::constant(0.0), eta, {}, 0.1);
  REQUIRE(sp2.problem.eta1.terms[0].point == Approx(kPi / 4).epsilon(1e-15));
}

TEST_CASE("nonresonant scaled problem has a unique linear head profile") {
  AquiferParams a{1.3, 0.2, 3.0, 0.5, 0.25};
  ScaledProblem sp = build_problem(a, 0.7, Expr::constant(0.0), {}, {}, 0.0);
  REQUIRE_FALSE(is_resonant(sp.problem.lambda).has_value());
  Grid g(128);
  LinearSolve sol = solve_linear(sp.problem.lambda, forcing_triple(sp.problem, g));
  REQUIRE(sol.bc_defect.first <= 1e-12);
  REQUIRE(sol.bc_defect.second <= 1e-12);
}
