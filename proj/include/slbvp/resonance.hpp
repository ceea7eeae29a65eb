#pragma once

#include <cmath>

#include "slbvp/grid.hpp"

namespace slbvp {

/// Everything attached to the resonant mode lambda = n^2: the L2-normalized
/// kernel basis psi_n, its Wronskian partner phi_n, the boundary values
/// v1n = phi_n(0), v2n = phi_n(pi), and the unit coimage direction psi_vec.
struct ResonanceBasis {
  int n = 1;
  GridFunction psi;        // sqrt(2/pi) sin(nt)
  GridFunction phi;        // -sqrt(pi/2) cos(nt) / n
  GridFunction sin_n;      // sin(nt), the raw kernel direction
  double v1n = 0.0;        // phi(0)  = -sqrt(pi/(2n^2))
  double v2n = 0.0;        // phi(pi) = (-1)^{n+1} sqrt(pi/(2n^2))
  BoundaryTriple psi_vec;  // (psi, 1/v1n, -1/v2n), unit in the weighted product
  double parity = 1.0;     // (-1)^{n+1}
};

inline ResonanceBasis make_basis(int n, const Grid& g) {
  if (n < 1) throw Error("mode index n must be >= 1");
  ResonanceBasis b;
  b.n = n;
  b.parity = (n % 2 == 0) ? -1.0 : 1.0;
  b.psi = GridFunction(g);
  b.phi = GridFunction(g);
  b.sin_n = GridFunction(g);
  const double cpsi = std::sqrt(2.0 / kPi);
  const double cphi = -std::sqrt(kPi / 2.0) / n;
  for (int i = 0; i < g.nodes(); ++i) {
    double t = g.node(i);
    b.sin_n[i] = std::sin(n * t);
    b.psi[i] = cpsi * b.sin_n[i];
    b.phi[i] = cphi * std::cos(n * t);
  }
  b.v1n = -std::sqrt(kPi / (2.0 * n * n));
  b.v2n = b.parity * std::sqrt(kPi / (2.0 * n * n));
  b.psi_vec = BoundaryTriple{b.psi, 1.0 / b.v1n, -1.0 / b.v2n};
  return b;
}

/// K_n h(t) = int_0^pi omega_n(t,s) h(s) ds with the triangular kernel
/// omega_n(t,s) = psi(t)phi(s) for t <= s and psi(s)phi(t) for s <= t.
/// Split at the node: K_n h = phi * int_0^t psi h + psi * int_t^pi phi h,
/// so A_{n^2} K_n h = h, (K_n h)(0) = 0 and (K_n h)(pi) = <h,psi> v2n.
inline GridFunction kernel_apply(const ResonanceBasis& b, const GridFunction& h) {
  require_same_grid(b.psi, h);
  GridFunction cpsi = cumulative_integral(b.psi * h);
  GridFunction cphi = cumulative_integral(b.phi * h);
  const double cphi_total = cphi.values().back();
  GridFunction out(h.grid());
  for (int i = 0; i < h.size(); ++i)
    out[i] = b.phi[i] * cpsi[i] + b.psi[i] * (cphi_total - cphi[i]);
  return out;
}

/// D = n(h1 + (-1)^{n+1} h2) - int_0^pi sin(nt) h(t) dt.
/// The triple lies in Im(L_{n^2}) exactly when D vanishes.
inline double solvability_defect(const ResonanceBasis& b, const BoundaryTriple& rhs) {
  require_same_grid(b.sin_n, rhs.h);
  return b.n * (rhs.h1 + b.parity * rhs.h2) - integrate(b.sin_n * rhs.h);
}

/// Scale-invariant acceptance gate for the solvability defect.
inline double image_tolerance(const BoundaryTriple& rhs) {
  return 1e-8 * (1.0 + sup_norm(rhs.h) + std::fabs(rhs.h1) + std::fabs(rhs.h2));
}

/// P_n u = <u, psi>_2 psi, the orthogonal projection onto the kernel.
inline GridFunction project_kernel(const ResonanceBasis& b, const GridFunction& u) {
  require_same_grid(b.psi, u);
  return inner_l2(u, b.psi) * b.psi;
}

/// Q_n h = <h, psi_vec> psi_vec in the weighted product; projects onto the
/// orthogonal complement of Im(L_{n^2}).
inline BoundaryTriple project_coimage(const ResonanceBasis& b, const BoundaryTriple& rhs) {
  double q = inner_weighted(rhs, b.psi_vec, b.n);
  return q * b.psi_vec;
}

/// Generalized inverse M_n: for rhs in the image, the unique u with
/// L_{n^2} u = rhs and <u, psi>_2 = 0. Built as K_n h + a psi + b phi with
/// b = h1/v1n (matches the left boundary value) and a chosen to cancel the
/// kernel component exactly.
inline GridFunction generalized_inverse(const ResonanceBasis& b, const BoundaryTriple& rhs) {
  double defect = solvability_defect(b, rhs);
  if (std::fabs(defect) > image_tolerance(rhs)) throw NotInImage(defect);
  GridFunction kh = kernel_apply(b, rhs.h);
  double beta = rhs.h1 / b.v1n;
  GridFunction u = axpy(beta, b.phi, kh);
  double alpha = -inner_l2(u, b.psi);
  return axpy(alpha, b.psi, u);
}

}  // namespace slbvp
