#include "slg/common.hpp"

namespace slg {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::ZeroDegreeVertex: return "ZeroDegreeVertex";
    case Errc::AsymmetricInput: return "AsymmetricInput";
    case Errc::NonPositiveFirstEigenvector: return "NonPositiveFirstEigenvector";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::EmptyBlock: return "EmptyBlock";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::OutOfSupport: return "OutOfSupport";
    case Errc::InvalidParam: return "InvalidParam";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::PositivityRejectionExhausted: return "PositivityRejectionExhausted";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::TooManySpikes: return "TooManySpikes";
    case Errc::NonFiniteLogDensity: return "NonFiniteLogDensity";
    case Errc::EmptySplit: return "EmptySplit";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::MissingFitArtifacts: return "MissingFitArtifacts";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::DisconnectedAtZeroNoise: return "DisconnectedAtZeroNoise";
    case Errc::RecoveredAdjacencyInvalid: return "RecoveredAdjacencyInvalid";
    case Errc::NoGraphsFound: return "NoGraphsFound";
    case Errc::DisconnectedGraph: return "DisconnectedGraph";
    case Errc::ParseError: return "ParseError";
    case Errc::IoError: return "IoError";
  }
  return "UnknownError";
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::NoGraphsFound:
      return kExitUsage;
    case Errc::ZeroDegreeVertex:
    case Errc::AsymmetricInput:
    case Errc::ShapeMismatch:
    case Errc::DimensionMismatch:
    case Errc::TooManySpikes:
    case Errc::InvalidParam:
    case Errc::OutOfSupport:
    case Errc::DisconnectedGraph:
    case Errc::ParseError:
      return kExitData;
    case Errc::NonPositiveFirstEigenvector:
    case Errc::ConvergenceFailure:
    case Errc::DegenerateDenominator:
    case Errc::NotPositiveDefinite:
    case Errc::PositivityRejectionExhausted:
    case Errc::NonFiniteLogDensity:
    case Errc::DisconnectedAtZeroNoise:
    case Errc::RecoveredAdjacencyInvalid:
      return kExitNumeric;
    case Errc::MissingFitArtifacts:
    case Errc::ChecksumMismatch:
    case Errc::IoError:
      return kExitArtifact;
    case Errc::EmptyBlock:
    case Errc::EmptySplit:
    case Errc::InsufficientSamples:
      return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace slg
