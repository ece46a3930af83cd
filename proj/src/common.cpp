#include "qadapt/common.hpp"

#include <cmath>

#include "qadapt/rng.hpp"

namespace qadapt {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonDiagonalObservableOnDiagonalState: return "NonDiagonalObservableOnDiagonalState";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::InvalidObservable: return "InvalidObservable";
    case ErrorKind::EmptyTranscript: return "EmptyTranscript";
    case ErrorKind::NonLocalObservable: return "NonLocalObservable";
    case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::IndivisibleBatching: return "IndivisibleBatching";
    case ErrorKind::UnsupportedPair: return "UnsupportedPair";
    case ErrorKind::BudgetExhausted: return "BudgetExhausted";
    case ErrorKind::UniverseTooLarge: return "UniverseTooLarge";
    case ErrorKind::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorKind::ZeroExpectation: return "ZeroExpectation";
    case ErrorKind::NonpositiveT: return "NonpositiveT";
    case ErrorKind::Halted: return "Halted";
    case ErrorKind::PrimitiveMismatch: return "PrimitiveMismatch";
    case ErrorKind::TruncationActive: return "TruncationActive";
    case ErrorKind::CapExceeded: return "CapExceeded";
    case ErrorKind::NegativeResidualTrace: return "NegativeResidualTrace";
    case ErrorKind::MistakeBudgetExceeded: return "MistakeBudgetExceeded";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidPair: return "InvalidPair";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::MalformedSnapshot: return "MalformedSnapshot";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

#ifndef QADAPT_BUILD_ID
#define QADAPT_BUILD_ID "unknown"
#endif

const char* build_id() { return QADAPT_BUILD_ID; }

double laplace(Rng& rng, double scale) {
  if (scale <= 0.0) return 0.0;
  // Inverse CDF on a symmetric uniform draw.
  double u = uniform01(rng) - 0.5;
  while (u == -0.5) u = uniform01(rng) - 0.5;
  return -scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
}

}  // namespace qadapt
