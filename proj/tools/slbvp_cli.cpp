// Command-line front end: problem-file ingestion, one subcommand per solver
// path, and deterministic data artifacts (no timestamps, 17-digit floats).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "slbvp/io.hpp"
#include "slbvp/oracle.hpp"
#include "slbvp/problem_file.hpp"
#include "slbvp/solvers.hpp"

namespace {

using namespace slbvp;

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitNoSolution = 2;
constexpr int kExitInputError = 3;
constexpr int kExitUnsolvable = 4;

std::string g17(double v) { return detail::g17(v); }

struct LoadedProblem {
  ParsedProblemFile file;
  ProblemSpec problem;
  Grid grid;
  SolverOptions opts;
  std::string base;  // artifact path prefix: input path minus extension
};

LoadedProblem load(const std::string& path) {
  LoadedProblem lp{parse_problem_file_at(path), {}, Grid(256), {}, {}};
  lp.problem = to_problem_spec(lp.file);
  lp.grid = Grid(lp.file.numerics.n_panels);
  lp.opts.tol = lp.file.numerics.tol;
  lp.opts.max_iter = lp.file.numerics.max_iter;
  std::filesystem::path base(path);
  base.replace_extension();
  lp.base = base.string();
  return lp;
}

// Points of the nonlocal functionals are evaluated by linear interpolation;
// flag any point that is not (numerically) a node and suggest a panel count
// that would make it one.
void warn_off_node_points(const ProblemSpec& p, const Grid& grid) {
  auto check = [&](const NonlocalFunctional& eta, const char* name) {
    for (const auto& term : eta.terms) {
      double idx = term.point / grid.spacing();
      double dist = std::fabs(idx - std::round(idx)) * grid.spacing();
      if (dist <= 1e-12) continue;
      std::string suggestion;
      for (int np = grid.panels(); np <= 4 * grid.panels(); np += 2) {
        double j = term.point * np / kPi;
        if (std::fabs(j - std::round(j)) * kPi / np <= 1e-12) {
          suggestion = "; N = " + std::to_string(np) + " would place it on a node";
          break;
        }
      }
      std::cerr << "warning: " << name << " point " << g17(term.point) << " is "
                << g17(dist) << " away from the nearest grid node; evaluation uses "
                << "linear interpolation" << suggestion << "\n";
    }
  };
  check(p.eta1, "eta1");
  check(p.eta2, "eta2");
}

void write_solution_csv(const std::string& path, const GridFunction& u) {
  std::ostringstream os;
  write_csv(os, u);
  write_file(path, os.str());
  std::cout << "wrote " << path << "\n";
}

void write_text(const std::string& path, const std::string& text) {
  write_file(path, text);
  std::cout << "wrote " << path << "\n";
}

GridFunction linear_seed(const ProblemSpec& p, const Grid& grid) {
  return solve_linear(p.lambda, forcing_triple(p, grid)).solution;
}

int cmd_solve(const std::string& path, bool use_picard) {
  LoadedProblem lp = load(path);
  const ProblemSpec& p = lp.problem;
  warn_off_node_points(p, lp.grid);

  auto n = is_resonant(p.lambda);
  if (!n) {
    SolveReport rep;
    try {
      rep = use_picard ? picard_solve(p, lp.grid, lp.opts)
                       : newton_solve(p, linear_seed(p, lp.grid), lp.opts);
    } catch (const NoConvergence& e) {
      std::cerr << "no solution found: " << e.what() << "\n";
      return kExitNoSolution;
    }
    if (rep.contraction_warning)
      std::cerr << "warning: contraction product " << g17(rep.contraction_product)
                << " >= 1; Picard convergence is not guaranteed\n";
    write_solution_csv(lp.base + ".solution.csv", rep.solution);
    std::ostringstream os;
    os << "status=ok\nresonant=0\n";
    write_report(os, rep);
    write_text(lp.base + ".report.txt", os.str());
    return kExitOk;
  }

  // resonant pipeline: solvability check, bifurcation scan, per-root solve
  ResonanceBasis basis = make_basis(*n, lp.grid);
  BoundaryTriple hvec = forcing_triple(p, lp.grid);
  double defect = solvability_defect(basis, hvec);
  std::ostringstream os;
  os << "resonant=1\nn=" << *n << "\nsolvability_defect=" << g17(defect) << "\n";
  if (std::fabs(defect) > image_tolerance(hvec)) {
    os << "status=unsolvable\n";
    write_text(lp.base + ".report.txt", os.str());
    std::cerr << "linear problem at resonance is unsolvable (defect = " << g17(defect)
              << ")\n";
    return kExitNoSolution;
  }

  std::vector<BifurcationRoot> roots =
      find_bifurcation_roots(p, basis, lp.file.numerics.c_min, lp.file.numerics.c_max,
                             lp.file.numerics.scan_points, lp.opts);
  os << "roots_found=" << roots.size() << "\n";
  int solved = 0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    const auto& root = roots[k];
    std::string prefix = "root_" + std::to_string(k + 1) + "_";
    os << prefix << "c_bar=" << g17(root.c_bar) << "\n";
    os << prefix << "defect=" << g17(root.defect) << "\n";
    os << prefix << "transversality=" << g17(root.transversality) << "\n";
    os << prefix << "degenerate=" << (root.degenerate ? 1 : 0) << "\n";
    if (root.degenerate) {
      os << prefix << "status=degenerate\n";
      continue;
    }
    try {
      SolveReport rep = resonant_solve(p, lp.grid, root, lp.opts);
      ++solved;
      std::string file = lp.base + (solved == 1 ? ".solution.csv"
                                                : ".solution" + std::to_string(solved) + ".csv");
      write_solution_csv(file, rep.solution);
      os << prefix << "status=solved\n";
      os << prefix << "solution_file=" << std::filesystem::path(file).filename().string()
         << "\n";
      std::ostringstream block;
      write_report(block, rep);
      std::istringstream lines(block.str());
      std::string line;
      while (std::getline(lines, line)) os << prefix << line << "\n";
    } catch (const Error& e) {
      os << prefix << "status=failed\n";
      os << prefix << "error=" << e.what() << "\n";
    }
  }
  os << "status=" << (solved > 0 ? "ok" : "no_solution") << "\n";
  write_text(lp.base + ".report.txt", os.str());
  if (solved == 0) {
    std::cerr << (roots.empty() ? "no bifurcation roots in the scan range\n"
                                : "no root could be solved\n");
    return kExitNoSolution;
  }
  return kExitOk;
}

int cmd_check(const std::string& path) {
  LoadedProblem lp = load(path);
  const ProblemSpec& p = lp.problem;
  auto n = is_resonant(p.lambda);
  std::cout << "lambda=" << g17(p.lambda) << "\n";
  std::cout << "epsilon=" << g17(p.epsilon) << "\n";
  std::cout << "resonant=" << (n ? 1 : 0) << "\n";
  if (n) {
    ResonanceBasis basis = make_basis(*n, lp.grid);
    BoundaryTriple hvec = forcing_triple(p, lp.grid);
    double defect = solvability_defect(basis, hvec);
    bool solvable = std::fabs(defect) <= image_tolerance(hvec);
    std::cout << "n=" << *n << "\n";
    std::cout << "solvability_defect=" << g17(defect) << "\n";
    std::cout << "solvable=" << (solvable ? 1 : 0) << "\n";
    return solvable ? kExitOk : kExitUnsolvable;
  }
  double norm_est = inverse_norm_estimate(p.lambda, lp.grid);
  GridFunction v0 = linear_seed(p, lp.grid);
  double alpha = slbvp::detail::lipschitz_estimate(p, v0);
  double product = std::fabs(p.epsilon) * norm_est * alpha;
  std::cout << "inverse_norm_estimate=" << g17(norm_est) << "\n";
  std::cout << "lipschitz_estimate=" << g17(alpha) << "\n";
  std::cout << "contraction_product=" << g17(product) << "\n";
  std::cout << "contraction_ok=" << (product < 1.0 ? 1 : 0) << "\n";
  return kExitOk;
}

int cmd_bifurcation(const std::string& path) {
  LoadedProblem lp = load(path);
  const ProblemSpec& p = lp.problem;
  auto n = is_resonant(p.lambda);
  if (!n) {
    std::cerr << "bifurcation scan requires lambda at a resonance n^2\n";
    return kExitInputError;
  }
  warn_off_node_points(p, lp.grid);
  ResonanceBasis basis = make_basis(*n, lp.grid);

  const auto& num = lp.file.numerics;
  std::vector<double> cs(num.scan_points), bs(num.scan_points), ts(num.scan_points);
  try {
    slbvp::detail::ReducedFamily fam(p, basis);
    for (int k = 0; k < num.scan_points; ++k) {
      cs[k] = num.c_min + (num.c_max - num.c_min) * k / (num.scan_points - 1);
      bs[k] = slbvp::detail::bifurcation_value(p, fam, cs[k]);
      ts[k] = slbvp::detail::transversality_value(p, fam, cs[k]);
    }
  } catch (const NotInImage& e) {
    std::cerr << "linear problem at resonance is unsolvable; no family to scan ("
              << e.what() << ")\n";
    return kExitNoSolution;
  }
  std::ostringstream scan;
  write_scan_csv(scan, cs, bs, ts);
  write_text(lp.base + ".bifurcation.csv", scan.str());

  std::vector<BifurcationRoot> roots = find_bifurcation_roots(
      p, basis, num.c_min, num.c_max, num.scan_points, lp.opts);
  std::ostringstream rt;
  rt << "roots=" << roots.size() << "\n";
  for (std::size_t k = 0; k < roots.size(); ++k) {
    rt << "c_bar_" << (k + 1) << "=" << g17(roots[k].c_bar) << "\n";
    rt << "B_" << (k + 1) << "=" << g17(roots[k].defect) << "\n";
    rt << "T_" << (k + 1) << "=" << g17(roots[k].transversality) << "\n";
    rt << "degenerate_" << (k + 1) << "=" << (roots[k].degenerate ? 1 : 0) << "\n";
  }
  write_text(lp.base + ".roots.txt", rt.str());
  return kExitOk;
}

int cmd_oracle(const std::string& path) {
  LoadedProblem lp = load(path);
  const ProblemSpec& p = lp.problem;
  warn_off_node_points(p, lp.grid);

  GridFunction main_solution(lp.grid);
  auto n = is_resonant(p.lambda);
  try {
    if (n) {
      ResonanceBasis basis = make_basis(*n, lp.grid);
      auto roots = find_bifurcation_roots(p, basis, lp.file.numerics.c_min,
                                          lp.file.numerics.c_max,
                                          lp.file.numerics.scan_points, lp.opts);
      const BifurcationRoot* usable = nullptr;
      for (const auto& r : roots)
        if (!r.degenerate) {
          usable = &r;
          break;
        }
      if (!usable) {
        std::cerr << "no usable bifurcation root; nothing to cross-check\n";
        return kExitNoSolution;
      }
      main_solution = resonant_solve(p, lp.grid, *usable, lp.opts).solution;
    } else {
      main_solution = newton_solve(p, linear_seed(p, lp.grid), lp.opts).solution;
    }

    oracle::FdOptions fd_opts;
    GridFunction fd = oracle::fd_solve_richardson(p, 2 * lp.grid.panels(), main_solution, fd_opts);
    std::ostringstream cmp;
    write_comparison_csv(cmp, main_solution, fd);
    write_text(lp.base + ".oracle.csv", cmp.str());
    std::cout << "sup_difference=" << g17(sup_distance(main_solution, fd)) << "\n";

    std::vector<int> n_list = {lp.grid.panels() / 2, lp.grid.panels(), 2 * lp.grid.panels()};
    auto table = oracle::fd_refine_study(p, n_list, main_solution, fd_opts);
    for (const auto& row : table)
      std::cout << "refine_N=" << row.n_panels << " diff_to_finest="
                << g17(row.diff_to_finest) << "\n";
  } catch (const NoConvergence& e) {
    std::cerr << "solver or oracle did not converge: " << e.what() << "\n";
    return kExitNoSolution;
  } catch (const SingularJacobian& e) {
    std::cerr << "oracle Jacobian is singular: " << e.what() << "\n";
    return kExitNoSolution;
  }
  return kExitOk;
}

int cmd_example(int n, int m, double big_k, const std::string& t1_text, double eps,
                const std::string& prefix) {
  if (n < 2 || n % 2 != 0) {
    std::cerr << "n must be a positive even integer (the closed form needs n in 2N)\n";
    return kExitInputError;
  }
  if (m <= 2) {
    std::cerr << "m must be an integer > 2\n";
    return kExitInputError;
  }
  if (!(big_k > 0.0)) {
    std::cerr << "K must be positive\n";
    return kExitInputError;
  }
  double t1;
  try {
    t1 = eval(parse(t1_text, VarSet::none()), EvalEnv{});
  } catch (const Error& e) {
    std::cerr << "bad t1: " << e.what() << "\n";
    return kExitInputError;
  }
  if (!(t1 >= 0.0 && t1 <= kPi)) {
    std::cerr << "t1 must lie in [0, pi]\n";
    return kExitInputError;
  }
  double s = std::sin(n * t1);
  if (std::fabs(s) < 1e-9) {
    std::cerr << "t1 must not be a multiple of pi/n (sin(n t1) = 0)\n";
    return kExitInputError;
  }

  ProblemSpec p;
  p.lambda = static_cast<double>(n) * n;
  p.epsilon = eps;
  p.h = Expr::constant(0.0);
  p.h1 = 1.0;
  p.h2 = (n % 2 == 0) ? 1.0 : -1.0;
  p.f = parse("v^2", VarSet::xv());
  p.eta1.add_term(parse("v^" + std::to_string(m), VarSet::v_only()), t1);
  double g2_value = ((n % 2 == 0) ? 1.0 : -1.0) * big_k;
  p.eta2.add_term(Expr::constant(g2_value), 0.0);

  Grid grid(256);
  warn_off_node_points(p, grid);
  ResonanceBasis basis = make_basis(n, grid);

  double c_expected = (std::pow(big_k, 1.0 / m) - std::cos(n * t1)) / s;
  double t_expected = n * m * std::pow(std::pow(big_k, 1.0 / m), m - 1) * s;

  double lo = std::min(c_expected - 5.0, -10.0), hi = std::max(c_expected + 5.0, 10.0);
  std::vector<BifurcationRoot> roots;
  try {
    roots = find_bifurcation_roots(p, basis, lo, hi, 801);
  } catch (const Error& e) {
    std::cerr << "bifurcation scan failed: " << e.what() << "\n";
    return kExitAssertion;
  }

  const BifurcationRoot* match = nullptr;
  for (const auto& r : roots)
    if (std::fabs(r.c_bar - c_expected) <= 1e-10 && !r.degenerate) {
      match = &r;
      break;
    }
  std::ostringstream os;
  os << "n=" << n << "\nm=" << m << "\nK=" << g17(big_k) << "\nt1=" << g17(t1)
     << "\nepsilon=" << g17(eps) << "\n";
  os << "c_bar_expected=" << g17(c_expected) << "\n";
  os << "transversality_expected=" << g17(t_expected) << "\n";
  os << "roots_found=" << roots.size() << "\n";
  for (std::size_t k = 0; k < roots.size(); ++k)
    os << "root_" << (k + 1) << "_c_bar=" << g17(roots[k].c_bar) << "\n";

  if (!match) {
    os << "status=failed_no_matching_root\n";
    write_text(prefix + ".report.txt", os.str());
    std::cerr << "assertion failed: no root within 1e-10 of the closed form "
              << g17(c_expected) << "\n";
    return kExitAssertion;
  }
  os << "c_bar=" << g17(match->c_bar) << "\n";
  os << "transversality=" << g17(match->transversality) << "\n";
  if (std::fabs(match->transversality - t_expected) > 1e-6) {
    os << "status=failed_transversality\n";
    write_text(prefix + ".report.txt", os.str());
    std::cerr << "assertion failed: T(c_bar) = " << g17(match->transversality)
              << " differs from closed form " << g17(t_expected) << "\n";
    return kExitAssertion;
  }

  SolveReport rep;
  try {
    rep = resonant_solve(p, grid, *match);
  } catch (const Error& e) {
    os << "status=failed_solve\n";
    write_text(prefix + ".report.txt", os.str());
    std::cerr << "resonant solve failed: " << e.what() << "\n";
    return kExitAssertion;
  }
  double residual_gate = std::max(1e-8, 2e-6 * std::fabs(eps));
  bool residual_ok = rep.ode_residual <= residual_gate &&
                     rep.bc_residual.first <= residual_gate &&
                     rep.bc_residual.second <= residual_gate;
  write_solution_csv(prefix + ".solution.csv", rep.solution);
  write_report(os, rep);
  os << "residual_gate=" << g17(residual_gate) << "\n";
  os << "status=" << (residual_ok ? "ok" : "failed_residual") << "\n";
  write_text(prefix + ".report.txt", os.str());
  if (!residual_ok) {
    std::cerr << "assertion failed: residuals exceed " << g17(residual_gate) << "\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_aquifer(const std::string& path) {
  LoadedProblem lp = load(path);
  if (!lp.file.aquifer) {
    std::cerr << "file has no [aquifer] section\n";
    return kExitInputError;
  }
  const AquiferParams& a = *lp.file.aquifer;
  SteadyStateHead head = steady_state_head(a);
  std::cout << "c2=" << g17(head.c2) << "\nc1=" << g17(head.c1) << "\nc0=" << g17(head.c0)
            << "\n";

  std::ostringstream os;
  os << "t,value\n";
  const int n = lp.grid.panels();
  for (int i = 0; i <= n; ++i) {
    double x = a.L * i / n;
    os << g17(x) << ',' << g17(head.at(x)) << '\n';
  }
  write_text(lp.base + ".head.csv", os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for weakly nonlinear Sturm-Liouville problems with nonlocal "
               "boundary conditions"};
  app.require_subcommand(1);

  std::string file;
  bool use_picard = false;
  auto* solve = app.add_subcommand("solve", "solve the problem in a file");
  solve->add_option("file", file, "problem file")->required();
  solve->add_flag("--picard", use_picard, "use Picard iteration on nonresonant problems");

  auto* check = app.add_subcommand("check", "resonance, solvability and contraction report");
  check->add_option("file", file, "problem file")->required();

  auto* bif = app.add_subcommand("bifurcation", "scan the bifurcation function B(c)");
  bif->add_option("file", file, "problem file")->required();

  auto* orc = app.add_subcommand("oracle", "finite-difference cross-check");
  orc->add_option("file", file, "problem file")->required();

  int ex_n = 2, ex_m = 3;
  double ex_k = 8.0, ex_eps = 1e-3;
  std::string ex_t1 = "pi/4", ex_prefix = "example";
  auto* ex = app.add_subcommand("example", "closed-form resonant worked example");
  ex->add_option("n", ex_n, "resonant mode (even)")->required();
  ex->add_option("m", ex_m, "exponent of g1(x) = x^m, m > 2")->required();
  ex->add_option("K", ex_k, "g2 magnitude, K > 0")->required();
  ex->add_option("t1", ex_t1, "evaluation point (accepts pi literals)")->required();
  ex->add_option("eps", ex_eps, "perturbation size")->required();
  ex->add_option("--prefix", ex_prefix, "artifact path prefix");

  auto* aqu = app.add_subcommand("aquifer", "steady-state head profile");
  aqu->add_option("file", file, "problem file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(file, use_picard);
    if (check->parsed()) return cmd_check(file);
    if (bif->parsed()) return cmd_bifurcation(file);
    if (orc->parsed()) return cmd_oracle(file);
    if (ex->parsed()) return cmd_example(ex_n, ex_m, ex_k, ex_t1, ex_eps, ex_prefix);
    if (aqu->parsed()) return cmd_aquifer(file);
  } catch (const ProblemFileError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitAssertion;
  }
  return kExitInputError;
}
