#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slbvp/linear.hpp"

using namespace slbvp;
using Catch::Approx;

namespace {

// Plain 3-point finite-difference solve of the linear problem on sampled
// data, Richardson-paired across a mesh doubling. Independent of the
// variation-of-parameters path under test.
GridFunction fd_linear_once(double lambda, const BoundaryTriple& rhs, int n_panels) {
  Grid gn(n_panels);
  GridFunction h_n = resample(rhs.h, gn);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(gn.nodes(), gn.nodes());
  Eigen::VectorXd b(gn.nodes());
  double dt2 = gn.spacing() * gn.spacing();
  a(0, 0) = 1.0;
  b[0] = rhs.h1;
  a(gn.panels(), gn.panels()) = 1.0;
  b[gn.panels()] = rhs.h2;
  for (int i = 1; i < gn.panels(); ++i) {
    a(i, i - 1) = 1.0 / dt2;
    a(i, i) = -2.0 / dt2 + lambda;
    a(i, i + 1) = 1.0 / dt2;
    b[i] = h_n[i];
  }
  Eigen::VectorXd u = a.partialPivLu().solve(b);
  GridFunction out(gn);
  for (int i = 0; i < gn.nodes(); ++i) out[i] = u[i];
  return out;
}

GridFunction fd_linear_richardson(double lambda, const BoundaryTriple& rhs) {
  int n = rhs.grid().panels();
  GridFunction fine = fd_linear_once(lambda, rhs, 2 * n);
  GridFunction coarse = fd_linear_once(lambda, rhs, n);
  GridFunction out(rhs.grid());
  for (int i = 0; i < out.size(); ++i) out[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

}  // namespace

TEST_CASE("resonance detection") {
  REQUIRE(is_resonant(4.0, 1e-9).value() == 2);
  REQUIRE_FALSE(is_resonant(0.5, 1e-9).has_value());
  REQUIRE(is_resonant(9.0 + 1e-12, 1e-9).value() == 3);
  REQUIRE_FALSE(is_resonant(-1.0).has_value());
  REQUIRE_FALSE(is_resonant(0.0).has_value());
  REQUIRE_FALSE(is_resonant(1.0 + 1e-8).has_value());
  REQUIRE(is_resonant(25.0).value() == 5);
  REQUIRE_THROWS_AS(is_resonant(1.0, 0.0), Error);
}

TEST_CASE("linear solve: lambda = 0 straight line is exact") {
  Grid g(256);
  LinearSolve sol = solve_linear(0.0, {GridFunction(g), 0.0, kPi});
  for (int i = 0; i <= g.panels(); ++i)
    REQUIRE(sol.solution[i] == Approx(g.node(i)).margin(1e-12));
  REQUIRE(sol.bc_defect.first <= 1e-12);
  REQUIRE(sol.bc_defect.second <= 1e-12);
}

TEST_CASE("linear solve: lambda = 1/4 homogeneous forcing") {
  Grid g(256);
  LinearSolve sol = solve_linear(0.25, {GridFunction(g), 0.0, 1.0});
  for (int i = 0; i <= g.panels(); ++i)
    REQUIRE(sol.solution[i] == Approx(std::sin(g.node(i) / 2)).margin(1e-10));
}

TEST_CASE("linear solve: sin forcing at lambda = 2 returns sin") {
  // substitution oracle: (sin)'' + 2 sin = sin
  Grid g(256);
  GridFunction h = sample_fn([](double t) { return std::sin(t); }, g);
  LinearSolve sol = solve_linear(2.0, {h, 0.0, 0.0});
  for (int i = 0; i <= g.panels(); ++i)
    REQUIRE(sol.solution[i] == Approx(std::sin(g.node(i))).margin(1e-8));
  REQUIRE(sol.residual_ode <= 1e-6);
}

TEST_CASE("linear solve: negative lambda") {
  Grid g(256);
  GridFunction h = sample_fn([](double t) { return std::cos(3 * t); }, g);
  LinearSolve sol = solve_linear(-1.0, {h, 1.0, -2.0});
  REQUIRE(sol.solution[0] == Approx(1.0).margin(1e-12));
  REQUIRE(sol.solution[g.panels()] == Approx(-2.0).margin(1e-12));
  GridFunction d2 = second_derivative_highorder(sol.solution);
  for (int i = 0; i <= g.panels(); ++i)
    REQUIRE(d2[i] - sol.solution[i] == Approx(h[i]).margin(1e-7));
}

TEST_CASE("linear solve rejects resonant lambda") {
  Grid g(64);
  REQUIRE_THROWS_AS(solve_linear(4.0, {GridFunction(g), 0.0, 0.0}), ResonantLambda);
  REQUIRE_THROWS_AS(solve_linear(1.0 + 1e-12, {GridFunction(g), 0.0, 0.0}), ResonantLambda);
}

TEST_CASE("near-singular boundary system is flagged when the resonance gate is loosened") {
  Grid g(64);
  double lambda = 1.0 + 1e-13;  // passes a 1e-15 resonance gate, 2x2 system hopeless
  REQUIRE_THROWS_AS(LinearOperator(lambda, g, 1e-15).solve({GridFunction(g), 0.0, 1.0}),
                    SingularBoundarySystem);
}

TEST_CASE("property: substitution residual for random nonresonant problems") {
  std::mt19937 rng(321);
  std::uniform_real_distribution<double> lam_draw(-4.0, 20.0);
  Grid g(256);
  int done = 0;
  while (done < 15) {
    double lambda = lam_draw(rng);
    bool near = false;
    for (int n = 1; n <= 4; ++n)
      if (std::fabs(lambda - n * n) < 0.5) near = true;
    if (near) continue;
    ++done;
    BoundaryTriple rhs = testutil::random_triple(rng, g);
    LinearSolve sol = solve_linear(lambda, rhs);
    double gate = std::max(1e-6, 500.0 / (256.0 * 256.0)) * std::max(sup_norm(rhs.h), 1e-3);
    REQUIRE(sol.residual_ode <= gate);
    REQUIRE(sol.bc_defect.first <= 1e-12 * (1 + std::fabs(rhs.h1)));
    REQUIRE(sol.bc_defect.second <= 1e-12 * (1 + std::fabs(rhs.h2)));
  }
}

TEST_CASE("property: solve is linear in the data") {
  std::mt19937 rng(99);
  Grid g(128);
  for (double lambda : {-2.0, 0.5, 6.5}) {
    BoundaryTriple a = testutil::random_triple(rng, g);
    BoundaryTriple b = testutil::random_triple(rng, g);
    double al = 1.3, be = -0.7;
    GridFunction lhs = solve_linear(lambda, al * a + be * b).solution;
    GridFunction rhs =
        axpy(al, solve_linear(lambda, a).solution, be * solve_linear(lambda, b).solution);
    double scale = 1.0 + sup_norm(lhs);
    REQUIRE(sup_distance(lhs, rhs) <= 1e-10 * scale);
  }
}

TEST_CASE("linear solve agrees with an independent finite-difference solve") {
  std::mt19937 rng(2024);
  Grid g(256);
  for (double lambda : {0.5, -2.0, 6.5}) {
    BoundaryTriple rhs = testutil::random_triple(rng, g, 2);
    LinearSolve sol = solve_linear(lambda, rhs);
    GridFunction fd = fd_linear_richardson(lambda, rhs);
    REQUIRE(sup_distance(sol.solution, fd) <= 1e-6);
  }
}

TEST_CASE("inverse norm estimate blows up toward resonance") {
  Grid g(128);
  double prev = 0.0;
  for (double lambda : {0.9, 0.99, 0.999}) {
    double est = inverse_norm_estimate(lambda, g);
    REQUIRE(est > prev);
    prev = est;
  }
  REQUIRE(prev > 100.0);
}

TEST_CASE("inverse norm estimate: coercive case is finite and mesh-stable") {
  double e128 = inverse_norm_estimate(-1.0, Grid(128));
  double e256 = inverse_norm_estimate(-1.0, Grid(256));
  REQUIRE(e128 > 0.0);
  REQUIRE(std::isfinite(e128));
  REQUIRE(std::fabs(e128 - e256) <= 0.05 * e256);

  double f128 = inverse_norm_estimate(0.5, Grid(128));
  double f256 = inverse_norm_estimate(0.5, Grid(256));
  REQUIRE(std::fabs(f128 - f256) <= 0.05 * f256);
}
