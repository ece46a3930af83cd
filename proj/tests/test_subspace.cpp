#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "qadapt/experiments.hpp"
#include "qadapt/subspace.hpp"

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

Vec ket(std::size_t d, std::size_t i) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(d));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("projection onto a subspace") {
  Subspace sub(2);
  const Vec plus = (ket(2, 0) + ket(2, 1)) / std::sqrt(2.0);
  Subspace::Projection empty = sub.project(plus);
  CHECK(empty.coords.size() == 0);
  CHECK(empty.perp_norm == doctest::Approx(1.0));
  sub.extend({ket(2, 0)});
  const Subspace::Projection p = sub.project(plus);
  REQUIRE(p.coords.size() == 1);
  CHECK(std::abs(p.coords(0)) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.perp_norm == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(sub.project(ket(2, 0)).perp_norm == doctest::Approx(0.0));

  Rng rng(1);
  Subspace big(16);
  big.extend({haar_vector(16, rng), haar_vector(16, rng), haar_vector(16, rng)});
  for (int i = 0; i < 20; ++i) {
    const Subspace::Projection q = big.project(haar_vector(16, rng));
    CHECK(q.coords.squaredNorm() + q.perp_norm * q.perp_norm == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("Gram-Schmidt extension") {
  Subspace sub(2);
  CHECK(sub.extend({ket(2, 0)}) == 1);
  CHECK(sub.extend({ket(2, 0)}) == 0);
  CHECK(sub.k() == 1);
  CHECK(sub.extend({(ket(2, 0) + ket(2, 1)) / std::sqrt(2.0)}) == 1);
  REQUIRE(sub.k() == 2);
  CHECK(std::abs(sub.basis()[1](1)) == doctest::Approx(1.0));
  CHECK(std::abs(sub.basis()[1](0)) < 1e-12);

  Subspace fresh(8);
  CHECK(fresh.extend({ket(8, 2), ket(8, 5), ket(8, 7)}) == 3);
  Rng rng(2);
  Subspace many(12);
  std::vector<Vec> vs;
  for (int i = 0; i < 7; ++i) vs.push_back(haar_vector(12, rng));
  many.extend(vs);
  const Mat phi = many.basis_matrix();
  CHECK((phi.adjoint() * phi - Mat::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-9);
  Subspace capped(4, 1);
  capped.extend({ket(4, 0)});
  CHECK(kind_of([&] { capped.extend({ket(4, 1)}); }) == ErrorKind::CapExceeded);
}

TEST_CASE("padded state") {
  Mat rho = Mat::Zero(2, 2);
  rho(0, 0) = 0.3;
  rho(1, 1) = 0.7;
  rho(0, 1) = rho(1, 0) = 0.2;
  Subspace sub(2);
  sub.extend({ket(2, 0)});
  const PaddedState p = pad_state(sub, make_dense_state(rho));
  REQUIRE(p.rho.dim() == 2);
  CHECK(p.rho.rho(0, 0).real() == doctest::Approx(0.3));
  CHECK(p.rho.rho(1, 1).real() == doctest::Approx(0.7));
  CHECK(std::abs(p.rho.rho(0, 1)) < 1e-12);
  CHECK(p.residual == doctest::Approx(0.7));

  Rng rng(3);
  const DenseState s = random_state(8, 3, rng);
  Subspace full(8);
  for (std::size_t i = 0; i < 8; ++i) full.extend({ket(8, i)});
  CHECK(pad_state(full, s).residual == doctest::Approx(0.0).epsilon(1e-9));

  Subspace three(8);
  three.extend({haar_vector(8, rng), haar_vector(8, rng), haar_vector(8, rng)});
  const PaddedState q = pad_state(three, s);
  CHECK(q.rho.dim() == 4);
  for (int i = 0; i < 10; ++i) {
    Vec c = Vec::Zero(3);
    std::normal_distribution<double> g;
    for (int j = 0; j < 3; ++j) c(j) = cplx(g(rng), g(rng));
    c.normalize();
    const Vec psi = three.basis_matrix() * c;
    Vec padded = Vec::Zero(4);
    padded.head(3) = c;
    const double lhs = (padded.adjoint() * q.rho.rho * padded)(0, 0).real();
    const double rhs = (psi.adjoint() * s.rho * psi)(0, 0).real();
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("projection is a Frobenius contraction") {
  Rng rng(4);
  for (std::size_t d : {4u, 16u, 32u}) {
    Subspace sub(d);
    for (std::size_t i = 0; i < d / 3 + 1; ++i) sub.extend({haar_vector(d, rng)});
    const auto D = static_cast<Eigen::Index>(d);
    const Mat A = Mat::Random(D, D);
    CHECK(sub.sandwich(A).norm() <= A.norm() + 1e-9);
    CHECK(sub.compress(A).norm() <= A.norm() + 1e-9);
  }
}

TEST_CASE("mistake caps") {
  CHECK(single_rank_mistake_cap(0.2) == 711);
  CHECK(single_rank_mistake_cap(0.25) == 455);
  CHECK(low_rank_mistake_cap(2, 0.3) == 1264);
  CHECK(low_rank_mistake_cap(1, 0.2) == single_rank_mistake_cap(0.2));
}

TEST_CASE("queries inside the learned span cause no further mistakes") {
  Rng rng(5);
  // Both seed directions carry mass 1/2, so each is a mistake and enters the span.
  Subspace ab(8);
  ab.extend({haar_vector(8, rng), haar_vector(8, rng)});
  const Vec a = ab.basis()[0], b = ab.basis()[1];
  const DenseState s = make_dense_state(0.5 * a * a.adjoint() + 0.5 * b * b.adjoint());
  ExactTeacher teacher(s, 0.15);
  ExactTomograph tomo(s);
  LearnerConfig cfg;
  cfg.eps = 0.2;
  const LearnerResult r = run_single_rank(
      s, 40,
      [&](std::size_t round, const std::vector<double>&) {
        if (round < 2) return round == 0 ? a : b;
        Vec v = std::cos(0.1 * round) * a + std::sin(0.1 * round) * b * cplx(0.0, 1.0);
        return Vec(v.normalized());
      },
      cfg, teacher, tomo);
  CHECK(r.ledger.mistake_count == 2);
  for (const LedgerRow& row : r.ledger.rows)
    if (row.round >= 2) CHECK_FALSE(row.mistake);
  CHECK(r.max_error <= 0.15 + 1e-9);
}

TEST_CASE("heavy orthonormal directions are at most 1/eps") {
  Rng rng(6);
  const DenseState s = random_state(16, 6, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(s.rho);
  const double eps = 0.25;
  ExactTeacher teacher(s, 3.0 * eps / 4.0);
  ExactTomograph tomo(s);
  LearnerConfig cfg;
  cfg.eps = eps;
  const LearnerResult r = run_single_rank(
      s, 16, [&](std::size_t round, const std::vector<double>&) { return Vec(es.eigenvectors().col(15 - round)); }, cfg,
      teacher, tomo);
  CHECK(r.ledger.heavy_directions(eps) <= 4);
  double mass = 0.0;
  for (double m : r.ledger.added_direction_mass) mass += m;
  CHECK(mass <= 1.0 + 1e-9);
}

TEST_CASE("bounded Frobenius learner with O = rho") {
  Rng rng(7);
  const Vec psi = haar_vector(16, rng);
  const DenseState s = pure_state(psi);
  const double eps = 0.3;
  ExactTeacher teacher(s, eps / 2.0);
  ExactTomograph tomo(s);
  LearnerConfig cfg;
  cfg.eps = eps;
  cfg.B = 1.0;
  const LearnerResult r =
      run_bounded_frobenius(s, 5, [&](std::size_t, const std::vector<double>&) { return s.rho; }, cfg, teacher, tomo);
  for (const Round& row : r.transcript.rounds) {
    CHECK(row.truth == doctest::Approx(1.0));
    CHECK(std::abs(row.answer - 1.0) <= eps);
  }
  CHECK(r.ledger.gap_breaches == 0);
}

TEST_CASE("bounded Frobenius learner on random queries") {
  Rng rng(8);
  const DenseState s = random_state(16, 3, rng);
  const double eps = 0.3, B = 2.0;
  ExactTeacher teacher(s, eps / 2.0);
  ExactTomograph tomo(s);
  LearnerConfig cfg;
  cfg.eps = eps;
  cfg.B = B;
  const LearnerResult r = run_bounded_frobenius(
      s, 60, [&](std::size_t, const std::vector<double>&) { return random_hermitian(16, B * 0.9, rng); }, cfg, teacher,
      tomo);
  CHECK(r.max_error <= eps);
  CHECK(r.ledger.gap_breaches == 0);
  CHECK(r.ledger.retained_breaches == 0);
  for (const LedgerRow& row : r.ledger.rows) CHECK(row.discarded <= eps / 2.0 + 1e-12);
}

TEST_CASE("low-rank learner keeps the rank bound") {
  Rng rng(9);
  const DenseState s = random_state(32, 2, rng);
  const double eps = 0.3;
  ExactTeacher teacher(s, eps / 2.0);
  ExactTomograph tomo(s);
  LearnerConfig cfg;
  cfg.eps = eps;
  cfg.R = 2;
  const LearnerResult r = run_low_rank(
      s, 40,
      [&](std::size_t, const std::vector<double>&) {
        const Vec u = haar_vector(32, rng), v = haar_vector(32, rng);
        return Mat(0.7 * u * u.adjoint() - 0.5 * v * v.adjoint());
      },
      cfg, teacher, tomo);
  CHECK(r.ledger.rank_breaches == 0);
  CHECK(r.ledger.mistake_count <= low_rank_mistake_cap(2, eps));
  CHECK(r.max_error <= eps);
}
