#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>

#include "slbvp/errors.hpp"
#include "slbvp/grid.hpp"

namespace slbvp::detail {

inline Eigen::VectorXd to_vec(const GridFunction& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(), f.size());
}

/// Partial-pivot LU with a guard on the pivot spread.
struct GuardedLU {
  explicit GuardedLU(const Eigen::MatrixXd& m) : lu(m) {
    const auto& d = lu.matrixLU().diagonal();
    double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      double a = std::fabs(d[i]);
      dmax = std::max(dmax, a);
      dmin = std::min(dmin, a);
    }
    if (!std::isfinite(dmax) || dmin <= 1e-14 * dmax)
      throw SingularJacobian("Jacobian is numerically singular (pivot ratio " +
                             std::to_string(dmax > 0 ? dmin / dmax : 0.0) + ")");
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
};

}  // namespace slbvp::detail
