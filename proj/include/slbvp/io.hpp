#pragma once

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "slbvp/solvers.hpp"

namespace slbvp {

/// key=value summary block for a solve. Deterministic: fixed key order,
/// 17 significant digits, no timestamps.
inline void write_report(std::ostream& os, const SolveReport& rep) {
  using detail::g17;
  os << "method=" << method_name(rep.method) << '\n';
  os << "lambda=" << g17(rep.lambda) << '\n';
  os << "epsilon=" << g17(rep.epsilon) << '\n';
  os << "iterations=" << rep.iterations << '\n';
  os << "ode_residual=" << g17(rep.ode_residual) << '\n';
  os << "bc_residual_0=" << g17(rep.bc_residual.first) << '\n';
  os << "bc_residual_pi=" << g17(rep.bc_residual.second) << '\n';
  if (rep.method == Method::picard) {
    os << "contraction_product=" << g17(rep.contraction_product) << '\n';
    os << "contraction_warning=" << (rep.contraction_warning ? 1 : 0) << '\n';
    os << "empirical_ratio=" << g17(rep.empirical_ratio) << '\n';
  }
  if (rep.method == Method::resonant) {
    os << "c_bar=" << g17(rep.c_bar) << '\n';
    os << "transversality=" << g17(rep.transversality) << '\n';
  }
  for (std::size_t i = 0; i < rep.step_norms.size(); ++i)
    os << "step_norm_" << (i + 1) << '=' << g17(rep.step_norms[i]) << '\n';
}

/// CSV of a bifurcation scan with header c,B,T.
inline void write_scan_csv(std::ostream& os, const std::vector<double>& c,
                           const std::vector<double>& b, const std::vector<double>& t) {
  using detail::g17;
  os << "c,B,T\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    os << g17(c[i]) << ',' << g17(b[i]) << ',' << g17(t[i]) << '\n';
}

/// CSV comparing the main solution with the oracle on a common grid.
inline void write_comparison_csv(std::ostream& os, const GridFunction& main_solution,
                                 const GridFunction& oracle_solution) {
  using detail::g17;
  require_same_grid(main_solution, oracle_solution);
  os << "t,main,oracle\n";
  for (int i = 0; i < main_solution.size(); ++i)
    os << g17(main_solution.grid().node(i)) << ',' << g17(main_solution[i]) << ','
       << g17(oracle_solution[i]) << '\n';
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << contents;
}

}  // namespace slbvp
