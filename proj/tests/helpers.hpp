#pragma once

#include <cmath>
#include <random>

#include "slbvp/grid.hpp"
#include "slbvp/problem.hpp"

namespace testutil {

using namespace slbvp;

/// Random trig polynomial a0 + sum_k (a_k sin(kt) + b_k cos(kt)), k <= kmax.
inline GridFunction random_trig(std::mt19937& rng, const Grid& g, int kmax = 3,
                                double amplitude = 1.0) {
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  double a0 = coef(rng);
  std::vector<double> as(kmax + 1), bs(kmax + 1);
  for (int k = 1; k <= kmax; ++k) {
    as[k] = coef(rng);
    bs[k] = coef(rng);
  }
  GridFunction out(g);
  for (int i = 0; i < g.nodes(); ++i) {
    double t = g.node(i);
    double v = a0;
    for (int k = 1; k <= kmax; ++k) v += as[k] * std::sin(k * t) + bs[k] * std::cos(k * t);
    out[i] = v;
  }
  return out;
}

inline BoundaryTriple random_triple(std::mt19937& rng, const Grid& g, int kmax = 3,
                                    double amplitude = 1.0) {
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  return {random_trig(rng, g, kmax, amplitude), coef(rng), coef(rng)};
}

}  // namespace testutil
