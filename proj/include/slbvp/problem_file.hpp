#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "slbvp/hydrology.hpp"
#include "slbvp/problem.hpp"

namespace slbvp {

/// Numerical controls read from the [numerics] section.
struct NumericsOptions {
  int n_panels = 256;
  double tol = 1e-12;
  int max_iter = 50;
  double c_min = -10.0;
  double c_max = 10.0;
  int scan_points = 401;
};

/// Contents of a problem file: [problem] data, optional [eta1]/[eta2] terms,
/// [numerics], and an optional [aquifer] scenario.
struct ParsedProblemFile {
  bool has_problem = false;
  bool has_lambda = false, has_h = false, has_h1 = false, has_h2 = false;
  double lambda = 0.0;
  double epsilon = 0.0;
  Expr h = Expr::constant(0.0);
  double h1 = 0.0, h2 = 0.0;
  Expr f = Expr::constant(0.0);
  NonlocalFunctional eta1, eta2;
  NumericsOptions numerics;
  std::optional<AquiferParams> aquifer;
  double aquifer_lambda = 0.0;  // lambda before aquifer rescaling
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline double parse_number(std::string_view text, int line) {
  try {
    return eval(parse(text, VarSet::none()), EvalEnv{});
  } catch (const Error& e) {
    throw ProblemFileError(std::string("bad numeric value '") + std::string(text) +
                           "': " + e.what(), line);
  }
}

inline int parse_int(std::string_view text, int line, const char* what) {
  double v = parse_number(text, line);
  int i = static_cast<int>(std::lround(v));
  if (std::fabs(v - i) > 1e-9)
    throw ProblemFileError(std::string(what) + " must be an integer", line);
  return i;
}

inline Expr parse_expr(std::string_view text, VarSet vars, int line) {
  try {
    return parse(text, vars);
  } catch (const Error& e) {
    throw ProblemFileError(std::string("bad expression '") + std::string(text) +
                           "': " + e.what(), line);
  }
}

}  // namespace detail

/// Line-oriented key=value format with bracketed section headers. Comments
/// start with '#'; unknown sections and keys are rejected; keys are
/// case-sensitive; numeric values accept constant expressions such as pi/4.
inline ParsedProblemFile parse_problem_file(std::istream& in) {
  ParsedProblemFile out;
  enum class Section { none, problem, eta1, eta2, numerics, aquifer };
  Section section = Section::none;
  AquiferParams aq;
  bool aq_alpha = false, aq_l = false, aq_h1 = false, aq_h2 = false;
  bool has_aquifer = false;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = detail::trim(s);
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']') throw ProblemFileError("unterminated section header", line);
      std::string_view name = s.substr(1, s.size() - 2);
      if (name == "problem") { section = Section::problem; out.has_problem = true; }
      else if (name == "eta1") section = Section::eta1;
      else if (name == "eta2") section = Section::eta2;
      else if (name == "numerics") section = Section::numerics;
      else if (name == "aquifer") { section = Section::aquifer; has_aquifer = true; }
      else throw ProblemFileError("unknown section [" + std::string(name) + "]", line);
      continue;
    }

    auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ProblemFileError("expected key = value", line);
    std::string key(detail::trim(s.substr(0, eq)));
    std::string_view value = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ProblemFileError("missing key", line);
    if (value.empty()) throw ProblemFileError("missing value for key '" + key + "'", line);

    switch (section) {
      case Section::none:
        throw ProblemFileError("key '" + key + "' outside any section", line);
      case Section::problem:
        if (key == "lambda") { out.lambda = detail::parse_number(value, line); out.has_lambda = true; }
        else if (key == "epsilon") out.epsilon = detail::parse_number(value, line);
        else if (key == "h") { out.h = detail::parse_expr(value, VarSet::x_only(), line); out.has_h = true; }
        else if (key == "h1") { out.h1 = detail::parse_number(value, line); out.has_h1 = true; }
        else if (key == "h2") { out.h2 = detail::parse_number(value, line); out.has_h2 = true; }
        else if (key == "f") out.f = detail::parse_expr(value, VarSet::xv(), line);
        else throw ProblemFileError("unknown key '" + key + "' in [problem]", line);
        break;
      case Section::eta1:
      case Section::eta2: {
        if (key != "term")
          throw ProblemFileError("unknown key '" + key + "' in [eta1]/[eta2]", line);
        auto at = value.rfind('@');
        if (at == std::string_view::npos)
          throw ProblemFileError("term must be '<expr in v> @ <point>'", line);
        Expr g = detail::parse_expr(detail::trim(value.substr(0, at)), VarSet::v_only(), line);
        double point = detail::parse_number(detail::trim(value.substr(at + 1)), line);
        auto& eta = (section == Section::eta1) ? out.eta1 : out.eta2;
        try {
          eta.add_term(std::move(g), point);
        } catch (const Error& e) {
          throw ProblemFileError(e.what(), line);
        }
        break;
      }
      case Section::numerics:
        if (key == "N") out.numerics.n_panels = detail::parse_int(value, line, "N");
        else if (key == "tol") out.numerics.tol = detail::parse_number(value, line);
        else if (key == "max_iter") out.numerics.max_iter = detail::parse_int(value, line, "max_iter");
        else if (key == "c_min") out.numerics.c_min = detail::parse_number(value, line);
        else if (key == "c_max") out.numerics.c_max = detail::parse_number(value, line);
        else if (key == "scan_points") out.numerics.scan_points = detail::parse_int(value, line, "scan_points");
        else throw ProblemFileError("unknown key '" + key + "' in [numerics]", line);
        break;
      case Section::aquifer:
        if (key == "alpha") { aq.alpha = detail::parse_number(value, line); aq_alpha = true; }
        else if (key == "beta") aq.beta = detail::parse_number(value, line);
        else if (key == "L") { aq.L = detail::parse_number(value, line); aq_l = true; }
        else if (key == "h1") { aq.h1 = detail::parse_number(value, line); aq_h1 = true; }
        else if (key == "h2") { aq.h2 = detail::parse_number(value, line); aq_h2 = true; }
        else throw ProblemFileError("unknown key '" + key + "' in [aquifer]", line);
        break;
    }
  }

  if (has_aquifer) {
    if (out.has_h || out.has_h1 || out.has_h2)
      throw ProblemFileError(
          "h, h1, h2 come from the [aquifer] section and may not also appear in [problem]", 0);
    (void)aq_alpha; (void)aq_l; (void)aq_h1; (void)aq_h2;
    out.aquifer = aq;
  } else if (out.has_problem && !out.has_lambda) {
    throw ProblemFileError("missing required key 'lambda' in [problem]", 0);
  }
  if (!has_aquifer && !out.has_problem)
    throw ProblemFileError("file contains neither [problem] nor [aquifer]", 0);
  return out;
}

inline ParsedProblemFile parse_problem_file_at(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open problem file '" + path + "'");
  return parse_problem_file(in);
}

/// Assemble the ProblemSpec, routing through the aquifer rescaling when an
/// [aquifer] section is present.
inline ProblemSpec to_problem_spec(const ParsedProblemFile& file) {
  if (file.aquifer) {
    ScaledProblem sp = build_problem(*file.aquifer, file.has_lambda ? file.lambda : 0.0,
                                     file.f, file.eta1, file.eta2, file.epsilon);
    return sp.problem;
  }
  ProblemSpec p;
  p.lambda = file.lambda;
  p.epsilon = file.epsilon;
  p.h = file.h;
  p.h1 = file.h1;
  p.h2 = file.h2;
  p.f = file.f;
  p.eta1 = file.eta1;
  p.eta2 = file.eta2;
  return p;
}

}  // namespace slbvp
