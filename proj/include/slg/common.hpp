#pragma once
// Shared basics: linear-algebra aliases and the library-wide error type.

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace slg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

// Every failure the library can raise deliberately.  Keeping these as an enum
// (rather than ad-hoc runtime_errors) lets the CLI map classes of failure to
// stable exit codes and lets tests assert on the precise condition.
enum class Errc {
  ZeroDegreeVertex,
  AsymmetricInput,
  NonPositiveFirstEigenvector,
  ShapeMismatch,
  ConvergenceFailure,
  EmptyBlock,
  DegenerateDenominator,
  OutOfSupport,
  InvalidParam,
  NotPositiveDefinite,
  PositivityRejectionExhausted,
  DimensionMismatch,
  TooManySpikes,
  NonFiniteLogDensity,
  EmptySplit,
  InsufficientSamples,
  MissingFitArtifacts,
  ChecksumMismatch,
  DisconnectedAtZeroNoise,
  RecoveredAdjacencyInvalid,
  NoGraphsFound,
  DisconnectedGraph,
  ParseError,
  IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

// Process exit codes used by the CLI.  Grouped by the kind of failure so
// scripts can branch without parsing messages.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitArtifact = 5,
};

int exit_code_for(Errc c);

}  // namespace slg
