#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "slbvp/errors.hpp"
#include "slbvp/expr.hpp"

namespace slbvp {

inline constexpr double kPi = 3.14159265358979323846;

/// Uniform mesh t_i = i*pi/N on [0, pi]. N must be even (composite Simpson).
class Grid {
 public:
  explicit Grid(int panels = 256) : panels_(panels) {
    if (panels < 2 || panels % 2 != 0)
      throw Error("grid panel count must be a positive even integer");
  }
  int panels() const { return panels_; }
  int nodes() const { return panels_ + 1; }
  double spacing() const { return kPi / panels_; }
  double node(int i) const { return i * kPi / panels_; }
  bool operator==(const Grid& o) const { return panels_ == o.panels_; }
  bool operator!=(const Grid& o) const { return panels_ != o.panels_; }

 private:
  int panels_;
};

/// Real function sampled at the grid nodes; the computational stand-in for
/// an element of C[0,pi].
class GridFunction {
 public:
  GridFunction() : grid_(), values_(grid_.nodes(), 0.0) {}
  explicit GridFunction(const Grid& g, double fill = 0.0)
      : grid_(g), values_(g.nodes(), fill) {}
  GridFunction(const Grid& g, std::vector<double> values)
      : grid_(g), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != g.nodes())
      throw Error("value count does not match grid");
  }

  const Grid& grid() const { return grid_; }
  int size() const { return static_cast<int>(values_.size()); }
  double& operator[](int i) { return values_[i]; }
  double operator[](int i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// Linear interpolation between nodes; t is clamped to [0, pi].
  double value_at(double t) const {
    double dt = grid_.spacing();
    double s = std::clamp(t, 0.0, kPi) / dt;
    int i = std::min(static_cast<int>(s), grid_.panels() - 1);
    double w = s - i;
    return (1.0 - w) * values_[i] + w * values_[i + 1];
  }

  bool all_finite() const {
    for (double v : values_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
  if (a.grid() != b.grid()) throw GridMismatch();
}

// pointwise arithmetic -------------------------------------------------------

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out = a;
  for (int i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out = a;
  for (int i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

inline GridFunction operator*(double s, const GridFunction& a) {
  GridFunction out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= s;
  return out;
}

inline GridFunction operator*(const GridFunction& a, double s) { return s * a; }

/// Pointwise product.
inline GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  require_same_grid(a, b);
  GridFunction out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

inline GridFunction operator-(const GridFunction& a) { return -1.0 * a; }

/// alpha*x + y.
inline GridFunction axpy(double alpha, const GridFunction& x, const GridFunction& y) {
  require_same_grid(x, y);
  GridFunction out = y;
  for (int i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
  return out;
}

inline double sup_norm(const GridFunction& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::fabs(v));
  return m;
}

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
  return sup_norm(a - b);
}

/// Sample an expression in x at the grid nodes.
inline GridFunction sample(const Expr& e, const Grid& g) {
  GridFunction out(g);
  EvalEnv env;
  for (int i = 0; i < g.nodes(); ++i) {
    env.x = g.node(i);
    double v = eval(e, env);
    if (!std::isfinite(v)) throw DomainError("sampled expression is not finite");
    out[i] = v;
  }
  return out;
}

inline GridFunction sample(double (*fn)(double), const Grid& g) {
  GridFunction out(g);
  for (int i = 0; i < g.nodes(); ++i) out[i] = fn(g.node(i));
  return out;
}

template <class F>
inline GridFunction sample_fn(F&& fn, const Grid& g) {
  GridFunction out(g);
  for (int i = 0; i < g.nodes(); ++i) out[i] = fn(g.node(i));
  return out;
}

/// Resample onto another grid by linear interpolation.
inline GridFunction resample(const GridFunction& f, const Grid& g) {
  if (f.grid() == g) return f;
  GridFunction out(g);
  for (int i = 0; i < g.nodes(); ++i) out[i] = f.value_at(g.node(i));
  return out;
}

// quadrature ------------------------------------------------------------------

/// Composite Simpson over the full interval; O(N^-4) for C^4 integrands.
inline double integrate(const GridFunction& f) {
  const int n = f.grid().panels();
  const double dt = f.grid().spacing();
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; i += 2) odd += f[i];
  for (int i = 2; i < n; i += 2) even += f[i];
  return dt / 3.0 * (f[0] + f[n] + 4.0 * odd + 2.0 * even);
}

/// Prefix integrals F(t_i) = int_0^{t_i} f. Each interior panel is integrated
/// with the same centered 6-node quintic rule, so the discretization error is
/// a smooth function of t (no parity sawtooth); the four end panels use
/// shifted 6-node rules of the same order.
inline GridFunction cumulative_integral(const GridFunction& f) {
  static constexpr std::array<double, 6> w_mid = {11.0 / 1440, -93.0 / 1440, 802.0 / 1440,
                                                  802.0 / 1440, -93.0 / 1440, 11.0 / 1440};
  static constexpr std::array<double, 6> w_first = {475.0 / 1440, 1427.0 / 1440, -798.0 / 1440,
                                                    482.0 / 1440, -173.0 / 1440, 27.0 / 1440};
  static constexpr std::array<double, 6> w_second = {-27.0 / 1440, 637.0 / 1440, 1022.0 / 1440,
                                                     -258.0 / 1440, 77.0 / 1440, -11.0 / 1440};
  const int n = f.grid().panels();
  const double dt = f.grid().spacing();
  if (n < 6) throw Error("cumulative integration needs at least 6 panels");

  auto panel = [&](const std::array<double, 6>& w, int j0, bool reversed) {
    double s = 0.0;
    for (int k = 0; k < 6; ++k) s += w[k] * f[reversed ? j0 + 5 - k : j0 + k];
    return dt * s;
  };

  GridFunction out(f.grid());
  double acc = 0.0;
  for (int j = 0; j < n; ++j) {
    double q;
    if (j == 0) q = panel(w_first, 0, false);
    else if (j == 1) q = panel(w_second, 0, false);
    else if (j == n - 2) q = panel(w_second, n - 5, true);
    else if (j == n - 1) q = panel(w_first, n - 5, true);
    else q = panel(w_mid, j - 2, false);
    acc += q;
    out[j + 1] = acc;
  }
  return out;
}

/// Standard L2 inner product by quadrature.
inline double inner_l2(const GridFunction& f, const GridFunction& g) {
  require_same_grid(f, g);
  return integrate(f * g);
}

inline double norm_l2(const GridFunction& f) { return std::sqrt(inner_l2(f, f)); }

// boundary triples ------------------------------------------------------------

/// Element (h, h1, h2) of L2 x R^2, the codomain of the boundary operator.
struct BoundaryTriple {
  GridFunction h;
  double h1 = 0.0;
  double h2 = 0.0;

  BoundaryTriple() = default;
  BoundaryTriple(GridFunction h_, double h1_, double h2_)
      : h(std::move(h_)), h1(h1_), h2(h2_) {}
  const Grid& grid() const { return h.grid(); }
};

inline BoundaryTriple operator+(const BoundaryTriple& a, const BoundaryTriple& b) {
  return {a.h + b.h, a.h1 + b.h1, a.h2 + b.h2};
}

inline BoundaryTriple operator-(const BoundaryTriple& a, const BoundaryTriple& b) {
  return {a.h - b.h, a.h1 - b.h1, a.h2 - b.h2};
}

inline BoundaryTriple operator*(double s, const BoundaryTriple& a) {
  return {s * a.h, s * a.h1, s * a.h2};
}

/// max(sup|h|, |h1|, |h2|): the norm used for triple-valued residual checks.
inline double combined_norm(const BoundaryTriple& a) {
  return std::max(sup_norm(a.h), std::max(std::fabs(a.h1), std::fabs(a.h2)));
}

/// Weighted inner product on L2 x R^2:
/// (pi/(pi+4n^2)) * ( <a.h, b.h>_2 + a.h1*b.h1 + a.h2*b.h2 ).
inline double inner_weighted(const BoundaryTriple& a, const BoundaryTriple& b, int n) {
  if (n < 1) throw Error("mode index n must be >= 1");
  double dot = inner_l2(a.h, b.h) + a.h1 * b.h1 + a.h2 * b.h2;
  return kPi / (kPi + 4.0 * n * n) * dot;
}

// derivative stencils ----------------------------------------------------------

namespace detail {

/// Fornberg's algorithm: weights of the m-th derivative at z on nodes x.
inline std::vector<double> fd_weights(double z, const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1.0, c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

}  // namespace detail

/// Second derivative at the interior nodes by the 3-point central stencil;
/// endpoints are left at zero. O(N^-2) measurement accuracy.
inline GridFunction second_derivative_central(const GridFunction& f) {
  const int n = f.grid().panels();
  const double dt2 = f.grid().spacing() * f.grid().spacing();
  GridFunction out(f.grid());
  for (int i = 1; i < n; ++i) out[i] = (f[i - 1] - 2.0 * f[i] + f[i + 1]) / dt2;
  return out;
}

/// Second derivative at every node from a 9-point stencil (8th order),
/// centered where possible and shifted near the boundary. Used to verify
/// ODE residuals independently of how a solution was constructed.
inline GridFunction second_derivative_highorder(const GridFunction& f) {
  constexpr int width = 9;
  const int n = f.grid().panels();
  if (n + 1 < width) throw Error("high-order stencil needs at least 9 nodes");
  const double dt = f.grid().spacing();

  std::vector<double> xloc(width);
  for (int k = 0; k < width; ++k) xloc[k] = k * dt;
  std::array<std::vector<double>, width> weights;
  for (int off = 0; off < width; ++off)
    weights[off] = detail::fd_weights(off * dt, xloc, 2);

  GridFunction out(f.grid());
  for (int i = 0; i <= n; ++i) {
    int j0 = std::clamp(i - width / 2, 0, n - width + 1);
    const auto& w = weights[i - j0];
    double s = 0.0;
    for (int k = 0; k < width; ++k) s += w[k] * f[j0 + k];
    out[i] = s;
  }
  return out;
}

// serialization -----------------------------------------------------------------

namespace detail {

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// CSV with header `t,value`, one row per node, 17 significant digits.
inline void write_csv(std::ostream& os, const GridFunction& f) {
  os << "t,value\n";
  for (int i = 0; i < f.size(); ++i)
    os << detail::g17(f.grid().node(i)) << ',' << detail::g17(f[i]) << '\n';
}

}  // namespace slbvp
