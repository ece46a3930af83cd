#include <doctest.h>

#include <cmath>
#include <memory>

#include "qadapt/experiments.hpp"
#include "qadapt/threshold.hpp"

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

Mat projector0(std::size_t d) {
  Mat p = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  p(0, 0) = 1.0;
  return p;
}

}  // namespace

TEST_CASE("truncation level") {
  // 1 + 40 * 1 * ln(100) * (ln 1 + 4)
  CHECK(threshold_T(1.0, 0.48) == doctest::Approx(1.0 + 160.0 * std::log(100.0)));
  CHECK(threshold_T(1.0, 0.48) == doctest::Approx(737.83).epsilon(1e-4));
  CHECK(threshold_T(0.25, 0.48) == threshold_T(1.0, 0.48));
  CHECK(threshold_T(4.0, 0.1) == doctest::Approx(1.0 + 80.0 * std::log(480.0) * (std::log(4.0) + 4.0)));
  CHECK(truncate_value(800.0, 737.0) == 737.0);
  CHECK(truncate_value(-5.0, 3.0) == -3.0);
  CHECK(truncate_value(2.5, 3.0) == 2.5);
  CHECK(kind_of([] { truncate_value(1.0, 0.0); }) == ErrorKind::NonpositiveT);
}

TEST_CASE("threshold search sample count grows like sqrt(ell)") {
  const double a = static_cast<double>(threshold_search_samples(1.0, 0.2, 100, 1000, 1e-3));
  const double b = static_cast<double>(threshold_search_samples(1.0, 0.2, 400, 1000, 1e-3));
  CHECK(b / a == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("sparse vector with ell = 2 halts on the third No") {
  SparseVector sv(SparseVectorConfig{0.1, 1e-6, 1e-6, 2}, 1);
  CHECK(sv.submit(0.0, 1.0) == SvAnswer::Yes);
  CHECK(sv.submit(1.0, 0.0) == SvAnswer::No);
  CHECK(sv.submit(0.3, 0.5) == SvAnswer::Yes);
  CHECK(sv.submit(1.0, 0.0) == SvAnswer::No);
  CHECK_FALSE(sv.budget().halted);
  CHECK(sv.submit(1.0, 0.0) == SvAnswer::No);
  CHECK(sv.budget().halted);
  CHECK(sv.budget().no_count == 3);
  CHECK(kind_of([&] { sv.submit(0.0, 1.0); }) == ErrorKind::Halted);
}

TEST_CASE("sparse vector contract on a record stream") {
  SparseVector sv(SparseVectorConfig{0.2, 0.002, 0.002, 100}, 2);
  const std::vector<double> records = {0.1, 0.3, 0.5};  // mean 0.3
  for (int i = 0; i < 50; ++i) {
    CHECK(sv.submit_records(records, [](double x) { return x; }, 0.25) == SvAnswer::No);
    CHECK(sv.submit_records(records, [](double x) { return x; }, 0.55) == SvAnswer::Yes);
  }
}

TEST_CASE("shadow threshold search clauses") {
  const DenseState s = basis_state(3, 0);
  const PovmSampler sampler(s);
  auto sketch = std::make_shared<const PovmSketch>(build_povm_sketch(sampler, 10, 4000, 3));
  ThresholdConfig cfg;
  cfg.eps = 0.3;
  cfg.ell = 50;
  ShadowThresholdSearch search(sketch, cfg, 4);
  const Observable p0{make_hermitian(projector0(3))};
  CHECK(search.statistic(p0) == doctest::Approx(1.0).epsilon(0.05));
  for (int i = 0; i < 20; ++i) {
    CHECK(search.submit(ThresholdQuery{p0, 0.8}) == SvAnswer::No);  // truth > theta
    CHECK(search.submit(ThresholdQuery{p0, 1.4}) == SvAnswer::Yes);  // truth <= theta - eps
  }
  CHECK(search.budget().no_count == 20);
  CHECK(search.log().size() == 40);
  CHECK(search.log().front().answer == "No");
}

TEST_CASE("threshold search input validation") {
  const DenseState s = maximally_mixed(2);
  auto pauli = std::make_shared<const PauliDataset>(make_pauli_dataset(s, 10, 5));
  CHECK(kind_of([&] { ShadowThresholdSearch(pauli, ThresholdConfig{}, 1); }) == ErrorKind::PrimitiveMismatch);
  auto sketch = std::make_shared<const PovmSketch>(build_povm_sketch(PovmSampler(s), 2, 10, 6));
  const TruncatedStatistic tight(sketch, 2.0);
  CHECK(kind_of([&] { tight.mean(projector0(2)); }) == ErrorKind::TruncationActive);
  CHECK(kind_of([&] { TruncatedStatistic(sketch, 0.0); }) == ErrorKind::NonpositiveT);
}

TEST_CASE("truncated statistic on raw snapshots clamps each value") {
  Rng rng(7);
  const DenseState s = random_state(4, 2, rng);
  auto ds = std::make_shared<const PovmDataset>(make_povm_dataset(s, 2000, 8));
  const Mat O = projector0(4);
  const double T = 1.5;
  double oracle = 0.0;
  for (const Vec& v : ds->snaps) {
    const double raw = 5.0 * std::norm(v(0)) - 1.0;
    oracle += std::clamp(raw, -T, T);
  }
  oracle /= static_cast<double>(ds->size());
  CHECK(TruncatedStatistic(ds, T).mean(O) == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("closeness teacher passes close guesses and corrects far ones") {
  const DenseState s = basis_state(4, 0);
  auto sketch = std::make_shared<const PovmSketch>(build_povm_sketch(PovmSampler(s), 48, 2000, 9));
  TeacherConfig cfg;
  cfg.eps = 0.3;
  cfg.ell = 40;
  ClosenessTeacher teacher(sketch, cfg, 10);
  const Mat O = projector0(4);
  for (int i = 0; i < 10; ++i) {
    CHECK(teacher.check(O, 1.0).verdict == TeacherVerdict::Pass);
    CHECK(teacher.check(O, 0.9).verdict == TeacherVerdict::Pass);
    const TeacherResult far = teacher.check(O, 0.5);
    CHECK(far.verdict == TeacherVerdict::Mistake);
    CHECK(std::abs(far.correction - 1.0) <= cfg.eps / 4.0);
  }
  CHECK(teacher.mistakes() == 10);
  CHECK(teacher.log().size() == 30);
}
