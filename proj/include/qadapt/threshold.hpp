#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/mechanisms.hpp"
#include "qadapt/observable.hpp"
#include "qadapt/rng.hpp"
#include "qadapt/shadows.hpp"

namespace qadapt {

// T = 1 + 40 sqrt(B) ln(48/eps) (ln B + 4), with B clamped to at least 1.
double threshold_T(double B, double eps);
double truncate_value(double raw, double T);

// Samples planned for a threshold search of M queries with at most ell
// "No" answers; grows like sqrt(ell) through advanced composition.
std::size_t threshold_search_samples(double B, double eps, std::size_t ell, std::size_t M, double delta);

enum class SvAnswer { Yes, No };
std::string to_string(SvAnswer a);

struct SparseVectorConfig {
  double eps = 0.1;             // contract gap: value > theta gives No, value <= theta - eps gives Yes
  double threshold_noise = 0.006;
  double query_noise = 0.006;
  std::size_t ell = 10;
};

struct BudgetState {
  std::size_t ell_total = 0;
  std::size_t no_count = 0;
  bool halted = false;
};

// Above-threshold core. It compares a noisy statistic with a noisy
// threshold placed at theta - eps/2, redrawing the threshold noise after
// each "No". The answer that takes no_count past ell is still returned;
// every later call throws Halted.
class SparseVector {
 public:
  SparseVector(SparseVectorConfig cfg, std::uint64_t seed);
  SvAnswer submit(double value, double theta);

  template <class Record, class Query>
  SvAnswer submit_records(const std::vector<Record>& records, Query&& q, double theta) {
    if (records.empty()) throw Error(ErrorKind::EmptyDataset, "no records");
    double acc = 0.0;
    for (const Record& r : records) acc += q(r);
    return submit(acc / static_cast<double>(records.size()), theta);
  }

  const BudgetState& budget() const { return budget_; }
  const SparseVectorConfig& config() const { return cfg_; }

 private:
  void redraw();
  SparseVectorConfig cfg_;
  Rng rng_;
  BudgetState budget_;
  double threshold_shift_ = 0.0;
};

struct ThresholdQuery {
  Observable obs;
  double theta = 0.0;
};

struct ThresholdConfig {
  double eps = 0.3;
  double B = 1.0;
  std::size_t ell = 10;
  double threshold_noise = 0.006;
  double query_noise = 0.006;
};

struct ThresholdLogRow {
  std::size_t query_id = 0;
  double theta = 0.0;
  std::string answer;
  double correction = 0.0;
  std::size_t no_count = 0;
};

using ShadowSource = std::variant<std::shared_ptr<const PauliDataset>, std::shared_ptr<const PovmDataset>,
                                  std::shared_ptr<const PovmSketch>>;

// Truncated POVM shadow statistic. A sketch gives the exact mean only when
// truncation at T can never bind, i.e. T >= (d+1) ||O|| + |tr O|.
class TruncatedStatistic {
 public:
  TruncatedStatistic(ShadowSource source, double T);
  double mean(const Mat& obs) const;
  double T() const { return T_; }
  std::size_t dim() const { return d_; }

 private:
  std::shared_ptr<const PovmDataset> raw_;
  std::shared_ptr<const PovmSketch> sketch_;
  double T_;
  std::size_t d_ = 0;
};

// Sparse vector on truncated shadow values with parameters (eps/3, delta)
// and thresholds theta - eps/3.
class ShadowThresholdSearch {
 public:
  ShadowThresholdSearch(ShadowSource source, ThresholdConfig cfg, std::uint64_t seed);
  SvAnswer submit(const ThresholdQuery& q);
  double statistic(const Observable& obs) const;
  double T() const { return stat_.T(); }
  const BudgetState& budget() const { return sv_.budget(); }
  const std::vector<ThresholdLogRow>& log() const { return log_; }

 private:
  ThresholdConfig cfg_;
  TruncatedStatistic stat_;
  SparseVector sv_;
  std::vector<ThresholdLogRow> log_;
};

enum class TeacherVerdict { Pass, Mistake };

struct TeacherResult {
  TeacherVerdict verdict = TeacherVerdict::Pass;
  double correction = 0.0;
};

struct TeacherConfig {
  double eps = 0.3;
  double B = 1.0;
  std::size_t ell = 10;          // mistakes allowed before Halted
  double threshold_noise = 0.006;
  double query_noise = 0.006;
  double median_eps_dp = 2.0;
  std::size_t max_corrections = 1000;
};

// Closeness check. The guess is tested through the simulated inputs
// (O, guess + eps) and (I - O, 1 - guess + eps) with a sparse vector of
// accuracy eps/4, so an error above eps is a Mistake and one at most
// 3eps/4 a Pass. Corrections come from the DP median at accuracy eps/4.
class ClosenessTeacher {
 public:
  ClosenessTeacher(std::shared_ptr<const PovmSketch> sketch, TeacherConfig cfg, std::uint64_t seed);
  TeacherResult check(const Observable& obs, double guess);
  TeacherResult check(const Mat& obs, double guess);
  const BudgetState& budget() const { return sv_.budget(); }
  std::size_t mistakes() const { return mistakes_; }
  const std::vector<ThresholdLogRow>& log() const { return log_; }

 private:
  TeacherConfig cfg_;
  std::shared_ptr<const PovmSketch> sketch_;
  TruncatedStatistic stat_;
  SparseVector sv_;
  DpMedianSession median_;
  std::size_t mistakes_ = 0;
  std::size_t queries_ = 0;
  std::vector<ThresholdLogRow> log_;
};

}  // namespace qadapt
