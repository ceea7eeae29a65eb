#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "slbvp/resonance.hpp"

using namespace slbvp;
using Catch::Approx;

TEST_CASE("basis invariants for n = 1..4") {
  Grid g(256);
  for (int n = 1; n <= 4; ++n) {
    ResonanceBasis b = make_basis(n, g);
    REQUIRE(inner_l2(b.psi, b.psi) == Approx(1.0).margin(1e-10));
    REQUIRE(inner_l2(b.psi, b.phi) == Approx(0.0).margin(1e-10));
    REQUIRE(inner_weighted(b.psi_vec, b.psi_vec, n) == Approx(1.0).margin(1e-9));

    // discrete Wronskian psi phi' - psi' phi = 1 via central differences
    double dt = g.spacing();
    for (int i = 1; i < g.panels(); ++i) {
      double dpsi = (b.psi[i + 1] - b.psi[i - 1]) / (2 * dt);
      double dphi = (b.phi[i + 1] - b.phi[i - 1]) / (2 * dt);
      REQUIRE(b.psi[i] * dphi - dpsi * b.phi[i] == Approx(1.0).margin(1e-6));
    }
  }
}

TEST_CASE("boundary constants of the basis") {
  Grid g(256);
  ResonanceBasis b1 = make_basis(1, g);
  REQUIRE(b1.v1n == Approx(-std::sqrt(kPi / 2)).epsilon(1e-15));
  REQUIRE(b1.v2n == Approx(std::sqrt(kPi / 2)).epsilon(1e-15));
  REQUIRE(b1.psi.value_at(kPi / 2) == Approx(std::sqrt(2 / kPi)).epsilon(1e-12));

  ResonanceBasis b2 = make_basis(2, g);
  REQUIRE(b2.v2n == Approx(-std::sqrt(kPi / 8)).epsilon(1e-15));
  REQUIRE(b2.phi[0] == Approx(b2.v1n).epsilon(1e-15));
  REQUIRE(b2.phi[g.panels()] == Approx(b2.v2n).margin(1e-14));

  REQUIRE_THROWS_AS(make_basis(0, g), Error);
}

TEST_CASE("kernel operator inverts A at resonance and meets its boundary identities") {
  Grid g(256);
  ResonanceBasis b = make_basis(2, g);
  GridFunction h = sample_fn([](double t) { return std::exp(t); }, g);
  GridFunction kh = kernel_apply(b, h);

  // substitution: (K h)'' + n^2 K h = h
  GridFunction d2 = second_derivative_highorder(kh);
  double worst = 0.0;
  for (int i = 0; i <= g.panels(); ++i)
    worst = std::max(worst, std::fabs(d2[i] + 4.0 * kh[i] - h[i]));
  REQUIRE(worst <= 1e-6);

  // same check with the plain central stencil stays within its own order
  GridFunction c2 = second_derivative_central(kh);
  double worst_c = 0.0;
  for (int i = 1; i < g.panels(); ++i)
    worst_c = std::max(worst_c, std::fabs(c2[i] + 4.0 * kh[i] - h[i]));
  REQUIRE(worst_c <= std::max(1e-5, 1000.0 / (256.0 * 256.0)) * sup_norm(h));

  std::mt19937 rng(17);
  for (int n = 1; n <= 3; ++n) {
    ResonanceBasis bn = make_basis(n, g);
    GridFunction hr = testutil::random_trig(rng, g);
    GridFunction khr = kernel_apply(bn, hr);
    REQUIRE(std::fabs(khr[0]) <= 1e-12 * (1 + sup_norm(hr)));
    REQUIRE(khr[g.panels()] == Approx(inner_l2(hr, bn.psi) * bn.v2n).margin(1e-9));
  }
}

TEST_CASE("solvability defect") {
  Grid g(256);
  ResonanceBasis b1 = make_basis(1, g);
  GridFunction s = sample_fn([](double t) { return std::sin(t); }, g);
  REQUIRE(solvability_defect(b1, {s, 0.0, 0.0}) == Approx(-kPi / 2).margin(1e-9));

  for (int n = 1; n <= 4; ++n) {
    ResonanceBasis b = make_basis(n, g);
    double h2 = (n % 2 == 0) ? 1.0 : -1.0;
    REQUIRE(solvability_defect(b, {GridFunction(g), 1.0, h2}) == Approx(0.0).margin(1e-15));

    GridFunction orth = sample_fn([n](double t) { return std::sin(2 * n * t); }, g);
    REQUIRE(std::fabs(solvability_defect(b, {orth, 0.0, 0.0})) <= 1e-10);
  }
}

TEST_CASE("kernel projection") {
  Grid g(256);
  std::mt19937 rng(23);
  for (int n : {1, 3}) {
    ResonanceBasis b = make_basis(n, g);
    REQUIRE(sup_distance(project_kernel(b, b.psi), b.psi) <= 1e-9);
    REQUIRE(sup_norm(project_kernel(b, b.phi)) <= 1e-9);
    GridFunction u = testutil::random_trig(rng, g);
    GridFunction pu = project_kernel(b, u);
    REQUIRE(sup_distance(project_kernel(b, pu), pu) <= 1e-10);

    // complementarity
    GridFunction rest = u - pu;
    REQUIRE(sup_distance(pu + rest, u) == 0.0);
    REQUIRE(std::fabs(inner_l2(rest, b.psi)) <= 1e-10 * std::max(1.0, sup_norm(u)));
  }
}

TEST_CASE("coimage projection") {
  Grid g(256);
  std::mt19937 rng(29);
  for (int n : {1, 2}) {
    ResonanceBasis b = make_basis(n, g);
    BoundaryTriple q = project_coimage(b, b.psi_vec);
    REQUIRE(sup_distance(q.h, b.psi_vec.h) <= 1e-9);
    REQUIRE(q.h1 == Approx(b.psi_vec.h1).margin(1e-9));
    REQUIRE(q.h2 == Approx(b.psi_vec.h2).margin(1e-9));

    BoundaryTriple r = testutil::random_triple(rng, g);
    BoundaryTriple qr = project_coimage(b, r);
    BoundaryTriple qqr = project_coimage(b, qr);
    REQUIRE(combined_norm(qqr - qr) <= 1e-10 * (1 + combined_norm(r)));

    // zero defect forces Q h to vanish (the two conditions are proportional)
    BoundaryTriple z = testutil::random_triple(rng, g);
    z.h1 = (integrate(b.sin_n * z.h) / b.n - b.parity * z.h2);
    REQUIRE(std::fabs(solvability_defect(b, z)) <= 1e-12);
    REQUIRE(combined_norm(project_coimage(b, z)) <= 1e-8 * (1 + combined_norm(z)));
  }
}

TEST_CASE("generalized inverse on reference data") {
  Grid g(256);
  for (int n : {1, 2, 3}) {
    ResonanceBasis b = make_basis(n, g);
    GridFunction z = generalized_inverse(b, {GridFunction(g), 0.0, 0.0});
    REQUIRE(sup_norm(z) <= 1e-12);

    // L phi = (0, v1n, v2n), and phi is already in ker^perp
    GridFunction u = generalized_inverse(b, {GridFunction(g), b.v1n, b.v2n});
    REQUIRE(sup_distance(u, b.phi) <= 1e-8);
  }
}

TEST_CASE("generalized inverse solves the resonant system for admissible data") {
  Grid g(256);
  std::mt19937 rng(31);
  for (int n : {1, 2, 4}) {
    ResonanceBasis b = make_basis(n, g);
    // h orthogonal to sin(nt): random trig with the sin(nt) component removed
    GridFunction h = testutil::random_trig(rng, g, 5);
    GridFunction sin_n = b.sin_n;
    h = axpy(-integrate(h * sin_n) / integrate(sin_n * sin_n), sin_n, h);
    BoundaryTriple rhs{h, 0.0, 0.0};
    REQUIRE(std::fabs(solvability_defect(b, rhs)) <= 1e-10);

    GridFunction u = generalized_inverse(b, rhs);
    GridFunction d2 = second_derivative_highorder(u);
    double worst = 0.0;
    for (int i = 0; i <= g.panels(); ++i)
      worst = std::max(worst, std::fabs(d2[i] + n * n * u[i] - h[i]));
    REQUIRE(worst <= 1e-5);
    REQUIRE(std::fabs(u[0]) <= 1e-9);
    REQUIRE(std::fabs(u[g.panels()]) <= 1e-9);
    REQUIRE(std::fabs(inner_l2(u, b.psi)) <= 1e-9);
  }
}

TEST_CASE("generalized inverse rejects data off the image") {
  Grid g(256);
  ResonanceBasis b = make_basis(2, g);
  BoundaryTriple bad{GridFunction(g), 1.0, 0.0};  // defect = n * h1 = 2
  REQUIRE_THROWS_AS(generalized_inverse(b, bad), NotInImage);
  try {
    generalized_inverse(b, bad);
  } catch (const NotInImage& e) {
    REQUIRE(e.defect == Approx(2.0).margin(1e-12));
  }
}

TEST_CASE("property: M then L reproduces admissible data") {
  Grid g(256);
  std::mt19937 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 1 + trial % 3;
    ResonanceBasis b = make_basis(n, g);
    BoundaryTriple rhs = testutil::random_triple(rng, g);
    rhs.h1 = integrate(b.sin_n * rhs.h) / n - b.parity * rhs.h2;  // zero the defect
    GridFunction u = generalized_inverse(b, rhs);

    GridFunction d2 = second_derivative_highorder(u);
    double worst = 0.0;
    for (int i = 0; i <= g.panels(); ++i)
      worst = std::max(worst, std::fabs(d2[i] + n * n * u[i] - rhs.h[i]));
    REQUIRE(worst <= 1e-6 * (1 + combined_norm(rhs)));
    REQUIRE(std::fabs(u[0] - rhs.h1) <= 1e-6 * (1 + combined_norm(rhs)));
    REQUIRE(std::fabs(u[g.panels()] - rhs.h2) <= 1e-6 * (1 + combined_norm(rhs)));
  }
}

TEST_CASE("property: M L = I - P on the explicit test family") {
  Grid g(256);
  std::mt19937 rng(41);
  for (int n : {1, 2, 3, 4}) {
    ResonanceBasis b = make_basis(n, g);
    GridFunction h = testutil::random_trig(rng, g);
    double alpha = 0.8, beta = -1.1;
    GridFunction kh = kernel_apply(b, h);
    GridFunction u = axpy(alpha, b.psi, axpy(beta, b.phi, kh));

    // L u = (h, u(0), u(pi)) analytically, since A psi = A phi = 0, A K h = h
    BoundaryTriple lu{h, u[0], u[g.panels()]};
    GridFunction mlu = generalized_inverse(b, lu);
    GridFunction expected = u - project_kernel(b, u);
    REQUIRE(sup_distance(mlu, expected) <= 1e-5);
  }
}
