#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <memory>

#include "qadapt/attack.hpp"
#include "qadapt/experiments.hpp"
#include "qadapt/state.hpp"
#include "qadapt/transcript.hpp"

using namespace qadapt;

namespace {

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::ConfigError;
}

}  // namespace

TEST_CASE("expectation of Z on uniform bits is zero") {
  const DiagonalState s{ProductBitModel::uniform(4)};
  CHECK(expectation(s, Observable{SingleQubitZ{0}}) == doctest::Approx(0.0));
  CHECK(expectation(s, Observable{make_zparity({0, 2})}) == doctest::Approx(0.0));
}

TEST_CASE("majority coordinate over two coins") {
  // Enumerate the four assignments of (Q1, Q2) by hand.
  for (MajorityRule rule : {MajorityRule::AnyPositive, MajorityRule::StrictMajority}) {
    double oracle = 0.0;
    for (int q1 = 0; q1 < 2; ++q1)
      for (int q2 = 0; q2 < 2; ++q2) {
        const int ones = q1 + q2;
        const bool derived = rule == MajorityRule::AnyPositive ? ones > 0 : 2 * ones > 2;
        oracle += 0.25 * (derived ? -1.0 : 1.0);
      }
    auto model = std::make_shared<MajorityModel>(6, rule);
    const std::size_t coord = model->register_subset({0, 1});
    const DiagonalState s{model};
    CHECK(expectation(s, Observable{SingleQubitZ{coord}}) == doctest::Approx(oracle));
    CHECK(MajorityModel::derived_truth(2, rule) == doctest::Approx(oracle));
  }
  // The worked example reads the rule as "some coin is 1".
  CHECK(MajorityModel::derived_truth(2, MajorityRule::AnyPositive) == doctest::Approx(-0.5));
}

TEST_CASE("projector onto the prepared state has expectation one") {
  const DenseState s = basis_state(2, 0);
  Vec zero = Vec::Zero(2);
  zero(0) = 1.0;
  CHECK(expectation(s, Observable{make_projector(zero)}) == doctest::Approx(1.0));
}

TEST_CASE("dense expectation errors") {
  const DenseState s = maximally_mixed(4);
  CHECK(kind_of([&] { expectation(s, Observable{make_pauli("XYZ")}); }) == ErrorKind::DimensionMismatch);
  const DiagonalState diag{ProductBitModel::uniform(2)};
  CHECK(kind_of([&] { expectation(diag, Observable{make_pauli("XI")}); }) ==
        ErrorKind::NonDiagonalObservableOnDiagonalState);
  CHECK(expectation(diag, Observable{make_pauli("ZZ")}) == doctest::Approx(0.0));
}

TEST_CASE("uniform 3-bit sampling passes a chi-square test") {
  const DiagonalState s{ProductBitModel::uniform(3)};
  Rng rng(11);
  std::array<double, 8> counts{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const LazyBitstring b = sample_bitstring(s, rng);
    counts[static_cast<std::size_t>(b.bit(0) * 4 + b.bit(1) * 2 + b.bit(2))] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - n / 8.0) * (c - n / 8.0) / (n / 8.0);
  // 7 degrees of freedom; 24.3 is the 0.999 quantile.
  CHECK(chi2 < 24.3);
}

TEST_CASE("singleton majority coordinate copies its coin") {
  for (MajorityRule rule : {MajorityRule::AnyPositive, MajorityRule::StrictMajority}) {
    auto model = std::make_shared<MajorityModel>(5, rule);
    const std::size_t coord = model->register_subset({1});
    const DiagonalState s{model};
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const LazyBitstring b = sample_bitstring(s, rng);
      CHECK(b.bit(coord) == b.bit(1));
    }
  }
}

TEST_CASE("empty subset coordinate is always zero") {
  auto model = std::make_shared<MajorityModel>(4, MajorityRule::StrictMajority);
  const std::size_t coord = model->register_subset({});
  Rng rng(5);
  for (int i = 0; i < 50; ++i) CHECK_FALSE(sample_bitstring(DiagonalState{model}, rng).bit(coord));
  CHECK(expectation(DiagonalState{model}, Observable{SingleQubitZ{coord}}) == doctest::Approx(1.0));
}

TEST_CASE("seeded sampling is deterministic") {
  const DiagonalState s{ProductBitModel::uniform(16)};
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) CHECK(sample_bitstring(s, a).base_bits() == sample_bitstring(s, b).base_bits());
}

TEST_CASE("evaluate_accuracy") {
  Transcript t;
  CHECK(kind_of([&] { evaluate_accuracy(t, 0.1); }) == ErrorKind::EmptyTranscript);
  t.record(Observable{SingleQubitZ{0}}, 0.25, 0.25);
  t.record(Observable{SingleQubitZ{1}}, -0.5, -0.5);
  AccuracyReport r = evaluate_accuracy(t, 0.1);
  CHECK(r.max_error == 0.0);
  CHECK_FALSE(r.violated);
  t.record(Observable{SingleQubitZ{2}}, 0.99, 0.0);
  r = evaluate_accuracy(t, 0.5);
  CHECK(r.max_error == doctest::Approx(0.99));
  CHECK(r.violated);
}

TEST_CASE("Monte Carlo Z marginals match the exact evaluator") {
  const auto model = std::make_shared<ProductBitModel>(std::vector<double>{0.1, 0.5, 0.8, 0.35});
  const DiagonalState s{model};
  Rng rng(17);
  const int n = 100000;
  const std::vector<std::vector<std::size_t>> supports = {{0}, {2}, {0, 3}, {1, 2, 3}};
  for (const auto& sup : supports) {
    double acc = 0.0, acc2 = 0.0;
    Rng local = rng;
    for (int i = 0; i < n; ++i) {
      const LazyBitstring b = sample_bitstring(s, local);
      int parity = 0;
      for (std::size_t q : sup) parity ^= b.bit(q) ? 1 : 0;
      const double v = parity ? -1.0 : 1.0;
      acc += v;
      acc2 += v * v;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    // Independent oracle: product of per-bit Z expectations (1 - 2p).
    double exact = 1.0;
    for (std::size_t q : sup) exact *= 1.0 - 2.0 * std::vector<double>{0.1, 0.5, 0.8, 0.35}[q];
    CHECK(std::abs(mean - exact) <= 5.0 * se + 1e-12);
    CHECK(expectation(s, Observable{make_zparity(sup)}) == doctest::Approx(exact).epsilon(1e-12));
  }
}

TEST_CASE("dense expectation agrees with the eigenbasis sum") {
  Rng rng(23);
  for (std::size_t d : {2u, 4u, 8u, 16u, 32u}) {
    const DenseState s = random_state(d, 3, rng);
    const Mat H = random_hermitian(d, 1.0, rng);
    // Eigenbasis of rho computed here, independently of the library path.
    Eigen::SelfAdjointEigenSolver<Mat> es(s.rho);
    double oracle = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
      oracle += es.eigenvalues()(k) * (es.eigenvectors().col(k).adjoint() * H * es.eigenvectors().col(k))(0, 0).real();
    const Observable obs{make_hermitian_any_norm(H)};
    CHECK(std::abs(expectation(s, obs) - oracle) < 1e-9);
    CHECK(std::abs(expectation_eigenbasis(s, obs) - oracle) < 1e-9);
    const Mat I = Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    CHECK(expectation(s, Observable{make_hermitian(I)}) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("state and observable invariants are validated") {
  Mat bad = Mat::Zero(2, 2);
  bad(0, 0) = 0.5;
  CHECK(kind_of([&] { make_dense_state(bad); }) == ErrorKind::InvalidState);
  Mat neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK(kind_of([&] { make_dense_state(neg); }) == ErrorKind::InvalidState);
  Vec v = Vec::Ones(2);
  CHECK(kind_of([&] { make_projector(v); }) == ErrorKind::InvalidObservable);
  CHECK(kind_of([&] { make_hermitian(2.0 * Mat::Identity(2, 2)); }) == ErrorKind::InvalidObservable);
  CHECK(kind_of([&] { make_pauli("XQ"); }) == ErrorKind::InvalidObservable);
  HermitianDense h = make_hermitian(pauli_string_matrix("XZ"));
  const Mat gram = h.vecs.adjoint() * h.vecs;
  CHECK((gram - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("MechanismConfig validation") {
  MechanismConfig c;
  CHECK_NOTHROW(c.validate());
  c.eps = 1.0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
  c.eps = 0.1;
  c.K = 0;
  CHECK(kind_of([&] { c.validate(); }) == ErrorKind::ConfigError);
}
