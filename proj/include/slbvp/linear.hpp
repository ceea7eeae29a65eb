#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "slbvp/grid.hpp"

namespace slbvp {

/// Problems with |lambda - n^2| below this are treated as resonant.
inline constexpr double kResonanceTol = 1e-9;

/// Returns n >= 1 with |lambda - n^2| <= tol, if any.
inline std::optional<int> is_resonant(double lambda, double tol = kResonanceTol) {
  if (tol <= 0.0) throw Error("resonance tolerance must be positive");
  if (lambda < 1.0 - tol) return std::nullopt;
  int n = static_cast<int>(std::lround(std::sqrt(std::max(lambda, 0.0))));
  if (n >= 1 && std::fabs(lambda - static_cast<double>(n) * n) <= tol) return n;
  return std::nullopt;
}

/// Result of the nonresonant linear solve L_lambda v = (h, h1, h2).
struct LinearSolve {
  double lambda = 0.0;
  GridFunction solution;
  double residual_ode = 0.0;              // sup |v'' + lambda v - h|, 3-point central differences
  std::pair<double, double> bc_defect{0.0, 0.0};
};

/// The operator v -> v'' + lambda*v with Dirichlet rows, inverted on a fixed
/// grid by variation of parameters. Caches the fundamental pair, so repeated
/// solves (Picard sweeps, Jacobian columns, norm probes) are O(N) each.
class LinearOperator {
 public:
  LinearOperator(double lambda, const Grid& g, double resonance_tol = kResonanceTol)
      : lambda_(lambda), grid_(g), b1_(g), b2_(g) {
    if (auto n = is_resonant(lambda, resonance_tol)) throw ResonantLambda(lambda, *n);
    if (lambda > 0.0) {
      double om = std::sqrt(lambda);
      for (int i = 0; i < g.nodes(); ++i) {
        b1_[i] = std::cos(om * g.node(i));
        b2_[i] = std::sin(om * g.node(i));
      }
      wronskian_ = om;
    } else if (lambda < 0.0) {
      double om = std::sqrt(-lambda);
      for (int i = 0; i < g.nodes(); ++i) {
        b1_[i] = std::cosh(om * g.node(i));
        b2_[i] = std::sinh(om * g.node(i));
      }
      wronskian_ = om;
    } else {
      for (int i = 0; i < g.nodes(); ++i) {
        b1_[i] = 1.0;
        b2_[i] = g.node(i);
      }
      wronskian_ = 1.0;
    }
  }

  double lambda() const { return lambda_; }
  const Grid& grid() const { return grid_; }

  GridFunction solve(const BoundaryTriple& rhs) const {
    if (rhs.grid() != grid_) throw GridMismatch();
    const int n = grid_.panels();

    // particular solution: v_p = (b2 * int_0^t b1 h - b1 * int_0^t b2 h) / W
    GridFunction c1 = cumulative_integral(b1_ * rhs.h);
    GridFunction c2 = cumulative_integral(b2_ * rhs.h);
    GridFunction vp(grid_);
    for (int i = 0; i <= n; ++i)
      vp[i] = (b2_[i] * c1[i] - b1_[i] * c2[i]) / wronskian_;

    // 2x2 boundary system for the homogeneous coefficients
    double m00 = b1_[0], m01 = b2_[0];
    double m10 = b1_[n], m11 = b2_[n];
    double r0 = rhs.h1 - vp[0];
    double r1 = rhs.h2 - vp[n];
    double det = m00 * m11 - m01 * m10;
    double norm_m = std::max(std::fabs(m00) + std::fabs(m01), std::fabs(m10) + std::fabs(m11));
    double norm_inv = (det == 0.0)
                          ? std::numeric_limits<double>::infinity()
                          : std::max(std::fabs(m11) + std::fabs(m01),
                                     std::fabs(m10) + std::fabs(m00)) / std::fabs(det);
    double cond = norm_m * norm_inv;
    if (!(cond < 1e12)) throw SingularBoundarySystem(cond);
    double a = (r0 * m11 - r1 * m01) / det;
    double b = (r1 * m00 - r0 * m10) / det;

    GridFunction v(grid_);
    for (int i = 0; i <= n; ++i) v[i] = vp[i] + a * b1_[i] + b * b2_[i];
    return v;
  }

 private:
  double lambda_;
  Grid grid_;
  GridFunction b1_, b2_;
  double wronskian_;
};

/// Solve v'' + lambda v = h, v(0) = h1, v(pi) = h2 for nonresonant lambda and
/// report construction-independent defect measurements.
inline LinearSolve solve_linear(double lambda, const BoundaryTriple& rhs) {
  LinearOperator op(lambda, rhs.grid());
  LinearSolve out;
  out.lambda = lambda;
  out.solution = op.solve(rhs);

  const int n = rhs.grid().panels();
  GridFunction d2 = second_derivative_central(out.solution);
  double res = 0.0;
  for (int i = 1; i < n; ++i)
    res = std::max(res, std::fabs(d2[i] + lambda * out.solution[i] - rhs.h[i]));
  out.residual_ode = res;
  out.bc_defect = {std::fabs(out.solution[0] - rhs.h1),
                   std::fabs(out.solution[n] - rhs.h2)};
  return out;
}

/// Upper estimate of the sup-norm operator norm of L_lambda^{-1}, probed
/// column by column: for each node, solve with a unit-mass hat at that node
/// and unit boundary data, and take the largest response norm. An estimate,
/// not a certified bound.
inline double inverse_norm_estimate(double lambda, const Grid& grid) {
  LinearOperator op(lambda, grid);
  double best = 0.0;
  for (int j = 0; j < grid.nodes(); ++j) {
    GridFunction hat(grid);
    hat[j] = 1.0;
    double mass = cumulative_integral(hat).values().back();
    BoundaryTriple probe{(1.0 / mass) * hat, 1.0, 1.0};
    best = std::max(best, sup_norm(op.solve(probe)));
  }
  return best;
}

}  // namespace slbvp
