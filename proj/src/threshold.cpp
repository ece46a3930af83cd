#include "qadapt/threshold.hpp"

#include <algorithm>
#include <cmath>

namespace qadapt {

double threshold_T(double B, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::ConfigError, "eps must be positive");
  const double b = std::max(B, 1.0);
  return 1.0 + 40.0 * std::sqrt(b) * std::log(48.0 / eps) * (std::log(b) + 4.0);
}

double truncate_value(double raw, double T) {
  if (!(T > 0.0)) throw Error(ErrorKind::NonpositiveT, "truncation level must be positive");
  return std::clamp(raw, -T, T);
}

std::size_t threshold_search_samples(double B, double eps, std::size_t ell, std::size_t M, double delta) {
  const double T = threshold_T(B, eps);
  const double l = static_cast<double>(std::max<std::size_t>(ell, 1));
  const double n = T * std::sqrt(l * std::log(1.0 / delta)) * std::log(static_cast<double>(std::max<std::size_t>(M, 1)) / delta) /
                   (eps / 3.0);
  return static_cast<std::size_t>(std::ceil(n));
}

std::string to_string(SvAnswer a) { return a == SvAnswer::Yes ? "Yes" : "No"; }

SparseVector::SparseVector(SparseVectorConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {
  if (!(cfg_.eps > 0.0) || !(cfg_.threshold_noise > 0.0) || !(cfg_.query_noise > 0.0))
    throw Error(ErrorKind::ConfigError, "sparse vector parameters must be positive");
  budget_.ell_total = cfg_.ell;
  redraw();
}

void SparseVector::redraw() { threshold_shift_ = laplace(rng_, cfg_.threshold_noise); }

SvAnswer SparseVector::submit(double value, double theta) {
  if (budget_.halted) throw Error(ErrorKind::Halted, "sparse vector exhausted its No budget");
  const double noisy = value + laplace(rng_, cfg_.query_noise);
  if (noisy > theta - cfg_.eps / 2.0 + threshold_shift_) {
    ++budget_.no_count;
    budget_.halted = budget_.no_count > budget_.ell_total;
    redraw();
    return SvAnswer::No;
  }
  return SvAnswer::Yes;
}

TruncatedStatistic::TruncatedStatistic(ShadowSource source, double T) : T_(T) {
  if (!(T > 0.0)) throw Error(ErrorKind::NonpositiveT, "truncation level must be positive");
  std::visit(overloaded{
                 [](const std::shared_ptr<const PauliDataset>&) {
                   throw Error(ErrorKind::PrimitiveMismatch, "threshold search needs POVM shadows");
                 },
                 [this](const std::shared_ptr<const PovmDataset>& ds) {
                   if (!ds || ds->size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
                   raw_ = ds;
                   d_ = ds->d;
                 },
                 [this](const std::shared_ptr<const PovmSketch>& sk) {
                   if (!sk || sk->count() == 0) throw Error(ErrorKind::EmptyDataset, "empty sketch");
                   sketch_ = sk;
                   d_ = sk->d;
                 },
             },
             source);
}

double TruncatedStatistic::mean(const Mat& obs) const {
  if (static_cast<std::size_t>(obs.rows()) != d_) throw Error(ErrorKind::DimensionMismatch, "query dimension");
  if (sketch_) {
    const double reach = static_cast<double>(d_ + 1) * spectral_norm(obs) + std::abs(obs.trace().real());
    if (reach > T_) throw Error(ErrorKind::TruncationActive, "truncation may bind; raw snapshots required");
    return sketch_->mean(obs);
  }
  const std::vector<double> values = snapshot_values(*raw_, obs);
  double acc = 0.0;
  for (double v : values) acc += truncate_value(v, T_);
  return acc / static_cast<double>(values.size());
}

ShadowThresholdSearch::ShadowThresholdSearch(ShadowSource source, ThresholdConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      stat_(std::move(source), threshold_T(cfg.B, cfg.eps)),
      sv_(SparseVectorConfig{cfg.eps / 3.0, cfg.threshold_noise, cfg.query_noise, cfg.ell}, seed) {}

double ShadowThresholdSearch::statistic(const Observable& obs) const { return stat_.mean(to_dense(obs, stat_.dim())); }

SvAnswer ShadowThresholdSearch::submit(const ThresholdQuery& q) {
  const double s = statistic(q.obs);
  const SvAnswer a = sv_.submit(s, q.theta - cfg_.eps / 3.0);
  log_.push_back(ThresholdLogRow{log_.size(), q.theta, to_string(a), 0.0, sv_.budget().no_count});
  return a;
}

namespace {

DpMedianConfig teacher_median(const TeacherConfig& cfg, double B) {
  DpMedianConfig m;
  m.accuracy = cfg.eps / 4.0;
  m.eps_dp_per_query = cfg.median_eps_dp;
  m.max_queries = cfg.max_corrections;
  m.B = B;
  return m;
}

}  // namespace

ClosenessTeacher::ClosenessTeacher(std::shared_ptr<const PovmSketch> sketch, TeacherConfig cfg, std::uint64_t seed)
    : cfg_(cfg),
      sketch_(sketch),
      stat_(ShadowSource{sketch}, threshold_T(cfg.B, cfg.eps / 4.0)),
      sv_(SparseVectorConfig{cfg.eps / 4.0, cfg.threshold_noise, cfg.query_noise, cfg.ell}, derive_seed(seed, {0})),
      median_(DpMedianSession::over(sketch, teacher_median(cfg, 3.0 * cfg.B), derive_seed(seed, {1}))) {}

TeacherResult ClosenessTeacher::check(const Observable& obs, double guess) {
  return check(to_dense(obs, sketch_->d), guess);
}

TeacherResult ClosenessTeacher::check(const Mat& obs, double guess) {
  const double s = stat_.mean(obs);
  const double theta_hi = guess + cfg_.eps;
  const double theta_lo = 1.0 - guess + cfg_.eps;
  // The complement statistic uses tr(I rho_hat) = 1 for every POVM snapshot.
  bool mistake = sv_.submit(s, theta_hi) == SvAnswer::No;
  if (!mistake) mistake = sv_.submit(1.0 - s, theta_lo) == SvAnswer::No;
  TeacherResult r;
  if (mistake) {
    ++mistakes_;
    r.verdict = TeacherVerdict::Mistake;
    r.correction = median_.answer(Observable{make_hermitian_any_norm(obs)});
  }
  log_.push_back(ThresholdLogRow{queries_++, guess, mistake ? "Mistake" : "Pass", r.correction, sv_.budget().no_count});
  return r;
}

}  // namespace qadapt
