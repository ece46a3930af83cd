#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "qadapt/mechanisms.hpp"
#include "qadapt/experiments.hpp"

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

// Bell vectors on two qubits in the ordering PhiPlus, PhiMinus, PsiPlus, PsiMinus.
Vec bell_vector(int k) {
  const double r = 1.0 / std::sqrt(2.0);
  Vec v = Vec::Zero(4);
  switch (k) {
    case 0: v(0) = r, v(3) = r; break;
    case 1: v(0) = r, v(3) = -r; break;
    case 2: v(1) = r, v(2) = r; break;
    default: v(1) = r, v(2) = -r; break;
  }
  return v;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

TEST_CASE("truncation of batch means") {
  CHECK(truncation_bound(9.0, 9) == doctest::Approx(3.0));
  CHECK(truncate_to(5.0, 3.0) == 3.0);
  CHECK(truncate_to(-5.0, 3.0) == -3.0);
  CHECK(truncate_to(1.25, 3.0) == 1.25);
  const BatchedEstimates b = truncate_batches({5.0, -0.5}, 9.0, 9);
  CHECK(b.truncated == std::vector<double>{3.0, -0.5});
  CHECK(b.raw == std::vector<double>{5.0, -0.5});
}

TEST_CASE("private median of constant batches lands within one grid step") {
  Rng rng(1);
  const double gamma = 0.025;
  for (double c : {0.37, -0.8, 0.0}) {
    const std::vector<double> v(40, c);
    for (int i = 0; i < 200; ++i) CHECK(std::abs(private_median(v, -1.0, 1.0, gamma, 2.0, rng) - c) <= gamma);
  }
  CHECK(kind_of([&] { private_median({}, -1, 1, 0.1, 1.0, rng); }) == ErrorKind::EmptyDataset);
}

TEST_CASE("private median tracks the sample median") {
  Rng rng(2);
  std::vector<double> v;
  for (int i = 0; i < 101; ++i) v.push_back(-0.5 + i * 0.01);  // median 0
  for (int i = 0; i < 200; ++i) CHECK(std::abs(private_median(v, -1.0, 1.0, 0.025, 2.0, rng)) <= 0.2);
}

TEST_CASE("DP median session answers stay inside the truncation interval") {
  const DenseState s = maximally_mixed(2);
  const PauliDataset ds = make_pauli_dataset(s, 4000, 3);
  DpMedianSession sess = DpMedianSession::over(ds, 40, DpMedianConfig{}, 4);
  Rng rng(5);
  for (int i = 0; i < 30; ++i) {
    const PauliString p = random_pauli(1, rng);
    const double a = sess.answer(Observable{p});
    CHECK(std::abs(a) <= sess.last_batches().bound + 1e-12);
    CHECK(std::abs(a) <= 0.3);
  }
  CHECK(sess.answered() == 30);
  CHECK(sess.trace().size() == 30);
  CHECK(kind_of([&] { DpMedianSession::over(ds, 7, DpMedianConfig{}, 1); }) == ErrorKind::IndivisibleBatching);
}

TEST_CASE("mw_project reaches its target") {
  std::vector<double> w(6, 1.0 / 6.0);
  const std::vector<double> f = {-1, -0.5, 0, 0.25, 0.5, 1};
  for (double target : {0.6, -0.3, 0.0833333}) {
    mw_project(w, f, target);
    double sum = 0.0, mean = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      sum += w[x];
      mean += w[x] * f[x];
      CHECK(w[x] > 0.0);
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(mean == doctest::Approx(target).epsilon(1e-7));
  }
}

TEST_CASE("PMW answers constant queries exactly and repeats lazily") {
  auto uni = std::make_shared<const PauliUniverse>(1);
  Rng rng(6);
  const DenseState s = random_state(2, 1, rng);
  PmwSession pmw(sample_histogram(uni, s, 20000, rng), PmwConfig{}, 7);
  CHECK(pmw.answer(Mat(0.4 * Mat::Identity(2, 2))) == doctest::Approx(0.4));
  CHECK(pmw.updates() == 0);
  const Observable z{make_pauli("Z")};
  pmw.answer(z);
  const double second = pmw.answer(z);
  const std::size_t after_second = pmw.updates();
  const double third = pmw.answer(z);
  // Once the hypothesis fits Z, a lazy repeat returns the same hypothesis value.
  if (pmw.updates() == after_second) CHECK(third == second);
  const double truth = expectation(s, z);
  CHECK(std::abs(second - truth) <= 0.1);
  const Mat h = pmw.hypothesis();
  CHECK(h.trace().real() == doctest::Approx(1.0));
}

TEST_CASE("statistical-query answers are clamped") {
  SqMechanism<double> sq({0.9, 0.95, 1.0}, SqConfig{1.0, 50.0, 100, 1e-6}, 8);
  for (int i = 0; i < 50; ++i) CHECK(std::abs(sq.answer([](double x) { return x; })) <= 1.0);
  SqMechanism<double> tight({3.0, 3.0}, SqConfig{1.0, 1e-9, 2, 1e-6}, 9);
  CHECK(tight.empirical([](double x) { return x; }) == 1.0);
  tight.answer([](double x) { return x; });
  tight.answer([](double x) { return x; });
  CHECK(kind_of([&] { tight.answer([](double x) { return x; }); }) == ErrorKind::BudgetExhausted);
  CHECK(tight.rho_spent() == doctest::Approx(2.0 * tight.rho_per_query()));
}

TEST_CASE("Bell eigenvalues match dense sigma (x) sigma") {
  const std::map<char, Mat> sigma = {{'I', pauli_string_matrix("I")},
                                     {'X', pauli_string_matrix("X")},
                                     {'Y', pauli_string_matrix("Y")},
                                     {'Z', pauli_string_matrix("Z")}};
  for (int k = 0; k < 4; ++k) {
    const Vec b = bell_vector(k);
    for (const auto& [c, m] : sigma) {
      const double e = (b.adjoint() * kron(m, m) * b)(0, 0).real();
      CHECK(bell_eigenvalue(static_cast<BellOutcome>(k), c) == static_cast<int>(std::lround(e)));
    }
  }
}

TEST_CASE("one-qubit Bell law") {
  // |0> gives PhiPlus or PhiMinus with probability 1/2; I/2 is uniform.
  const std::vector<double> p0 = bell_distribution(basis_state(2, 0));
  CHECK(p0[0] == doctest::Approx(0.5));
  CHECK(p0[1] == doctest::Approx(0.5));
  CHECK(p0[2] == doctest::Approx(0.0));
  CHECK(p0[3] == doctest::Approx(0.0));
  for (double p : bell_distribution(maximally_mixed(2))) CHECK(p == doctest::Approx(0.25));
  Rng rng(10);
  const DenseState s = random_state(2, 2, rng);
  const std::vector<double> p = bell_distribution(s);
  const Mat rr = kron(s.rho, s.rho);
  for (int k = 0; k < 4; ++k) {
    const Vec b = bell_vector(k);
    CHECK(p[static_cast<std::size_t>(k)] == doctest::Approx((b.adjoint() * rr * b)(0, 0).real()));
  }
}

TEST_CASE("q_P is an unbiased estimate of tr(P rho)^2") {
  Rng rng(11);
  const DenseState s = random_state(4, 2, rng);
  const std::vector<double> p = bell_distribution(s);
  for (const std::string sym : {"II", "XZ", "YY", "ZI", "XY"}) {
    const PauliString ps = make_pauli(sym);
    double e = 0.0;
    for (std::size_t code = 0; code < p.size(); ++code) e += p[code] * q_p(bell_from_code(code, 2), ps);
    const double t = (pauli_string_matrix(sym) * s.rho).trace().real();
    CHECK(e == doctest::Approx(t * t).epsilon(1e-10));
    CHECK(expected_q_p(s, ps) == doctest::Approx(t * t).epsilon(1e-10));
  }
  BellSample phi_plus{{BellOutcome::PhiPlus}};
  CHECK(q_p(phi_plus, make_pauli("Y")) == -1);
  CHECK(q_p(phi_plus, make_pauli("Z")) == 1);
}

TEST_CASE("Pauli sign oracle") {
  const DenseState zero = basis_state(2, 0), one = basis_state(2, 1);
  CHECK(pauli_sign_oracle(zero, make_pauli("Z")).sign == 1);
  CHECK(pauli_sign_oracle(one, make_pauli("Z")).sign == -1);
  const SignResult x = pauli_sign_oracle(zero, make_pauli("X"));
  CHECK(x.zero_flag);
  CHECK(x.sign == 1);
  CHECK_FALSE(pauli_sign_oracle(one, make_pauli("Z")).zero_flag);
}

TEST_CASE("adaptive Pauli mechanism recovers signed expectations") {
  Rng rng(12);
  const DenseState s = random_state(4, 1, rng);
  AdaptivePauliMechanism mech(s, 200000, SqConfig{1.0, 1e-3, 20, 1e-6}, 13);
  for (const std::string sym : {"ZZ", "XI", "YX", "IZ"}) {
    const double t = expectation(s, Observable{make_pauli(sym)});
    CHECK(std::abs(mech.answer(make_pauli(sym)) - t) <= 0.05);
  }
}
