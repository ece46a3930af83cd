#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qadapt {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Tolerances shared by every module.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;
inline constexpr double kUnitNormTol = 1e-10;
inline constexpr double kOrthoTol = 1e-9;
inline constexpr double kSpectralSlack = 1e-9;
inline constexpr double kGramSchmidtCutoff = 1e-8;
inline constexpr double kZeroExpectation = 1e-12;

// Re tr(A B) in O(d^2).
inline double trace_product(const Mat& A, const Mat& B) { return A.cwiseProduct(B.transpose()).sum().real(); }

// Every failure raised by the library carries a stable kind so callers
// (tests, the CLI) can branch without parsing messages.
enum class ErrorKind {
  DimensionMismatch,
  NonDiagonalObservableOnDiagonalState,
  InvalidState,
  InvalidObservable,
  EmptyTranscript,
  NonLocalObservable,
  RejectionBudgetExceeded,
  EmptyDataset,
  IndivisibleBatching,
  UnsupportedPair,
  BudgetExhausted,
  UniverseTooLarge,
  DimensionTooLarge,
  ZeroExpectation,
  NonpositiveT,
  Halted,
  PrimitiveMismatch,
  TruncationActive,
  CapExceeded,
  NegativeResidualTrace,
  MistakeBudgetExceeded,
  LengthMismatch,
  InvalidPair,
  MalformedCsv,
  MalformedSnapshot,
  ConfigError,
};

const char* error_kind_name(ErrorKind kind);

// git-describe style identifier fixed at configure time.
const char* build_id();

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Visitor helper for std::visit over the observable and state variants.
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace qadapt
