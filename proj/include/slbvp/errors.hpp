#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slbvp {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- expression errors ---

struct SyntaxError : Error {
  SyntaxError(std::string msg, std::size_t pos)
      : Error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

struct UnknownIdentifier : Error {
  explicit UnknownIdentifier(std::string n)
      : Error("unknown identifier '" + n + "'"), name(std::move(n)) {}
  std::string name;
};

struct DisallowedVariable : Error {
  explicit DisallowedVariable(std::string n)
      : Error("variable '" + n + "' is not allowed in this context"), name(std::move(n)) {}
  std::string name;
};

struct DomainError : Error {
  using Error::Error;
};

struct UnsupportedDerivative : Error {
  using Error::Error;
};

// --- grid / linear algebra errors ---

struct GridMismatch : Error {
  GridMismatch() : Error("operands live on different grids") {}
};

struct ResonantLambda : Error {
  ResonantLambda(double lambda, int n)
      : Error("lambda = " + std::to_string(lambda) + " is resonant (n = " +
              std::to_string(n) + "); the invertible-case solvers do not apply") {}
};

struct SingularBoundarySystem : Error {
  explicit SingularBoundarySystem(double cond)
      : Error("boundary 2x2 system is numerically singular (cond ~ " +
              std::to_string(cond) + "); lambda is too close to resonance") {}
};

struct NotInImage : Error {
  explicit NotInImage(double defect)
      : Error("right-hand side is not in the image of the resonant operator "
              "(solvability defect = " + std::to_string(defect) + ")"),
        defect(defect) {}
  double defect;
};

struct SingularJacobian : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  NoConvergence(int iters, double last_step)
      : Error("iteration did not converge after " + std::to_string(iters) +
              " steps (last step/ratio = " + std::to_string(last_step) + ")"),
        iterations(iters), last_step(last_step) {}
  int iterations;
  double last_step;
};

struct DegenerateRoot : Error {
  explicit DegenerateRoot(double transversality)
      : Error("bifurcation root is degenerate (|T| = " + std::to_string(transversality) +
              " below floor); the reduced Jacobian is not certifiably invertible") {}
};

// --- problem file errors ---

struct ProblemFileError : Error {
  ProblemFileError(std::string msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

}  // namespace slbvp
