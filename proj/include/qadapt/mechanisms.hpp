#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/observable.hpp"
#include "qadapt/rng.hpp"
#include "qadapt/shadows.hpp"
#include "qadapt/state.hpp"
#include "qadapt/universe.hpp"

namespace qadapt {

// One audit line per answered query.
struct TraceRow {
  std::size_t query_id = 0;
  double answer = 0.0;
  double noise_scale = 0.0;
  double budget_remaining = 0.0;
};

// ---------------------------------------------------------------- DP median

struct BatchedEstimates {
  std::vector<double> raw;
  std::vector<double> truncated;
  double bound = 0.0;
};

// 2 sqrt(B / N) + 1 for batches of N snapshots.
double truncation_bound(double B, std::size_t batch_size);
double truncate_to(double value, double bound);
BatchedEstimates truncate_batches(const std::vector<double>& means, double B, std::size_t batch_size);

// Exponential mechanism over the grid lo, lo + gamma, ..., hi. Candidate c
// owns the bin [c - gamma/2, c + gamma/2) and scores -max(#below, #above),
// which is maximal on the bin holding the median and has sensitivity 1.
double private_median(const std::vector<double>& values, double lo, double hi, double gamma, double eps_dp,
                      Rng& rng);

struct DpMedianConfig {
  double accuracy = 0.1;        // target eps; grid spacing is grid_fraction * accuracy
  double grid_fraction = 0.25;
  double eps_dp_per_query = 2.0;
  std::size_t max_queries = 1000;
  double B = 0.0;               // <= 0 means per-query shadow_norm_bound
};

class DpMedianSession {
 public:
  using BatchSource = std::function<std::vector<double>(const Observable&)>;
  using NormSource = std::function<double(const Observable&)>;

  DpMedianSession(BatchSource batches, NormSource norm, std::size_t batch_size, DpMedianConfig cfg,
                  std::uint64_t seed);
  // K equal batches of the dataset; IndivisibleBatching if |ds| % K != 0.
  static DpMedianSession over(const PauliDataset& ds, std::size_t K, DpMedianConfig cfg, std::uint64_t seed);
  static DpMedianSession over(std::shared_ptr<const PovmSketch> sketch, DpMedianConfig cfg, std::uint64_t seed);

  double answer(const Observable& query);
  BatchedEstimates last_batches() const { return last_; }
  std::size_t answered() const { return answered_; }
  double epsilon_spent() const { return static_cast<double>(answered_) * cfg_.eps_dp_per_query; }
  const std::vector<TraceRow>& trace() const { return trace_; }

 private:
  BatchSource batches_;
  NormSource norm_;
  std::size_t batch_size_;
  DpMedianConfig cfg_;
  Rng rng_;
  std::size_t answered_ = 0;
  BatchedEstimates last_;
  std::vector<TraceRow> trace_;
};

// ---------------------------------------------------------------- PMW

struct PmwConfig {
  double alpha = 0.1;            // accuracy target
  double threshold = 0.0;        // sparse-vector gate; <= 0 means alpha / 2
  double threshold_noise = 0.004;
  double gate_noise = 0.004;
  double answer_noise = 0.004;
  std::size_t max_updates = 500;
  std::size_t max_queries = 0;   // 0 = unlimited
};

// Private multiplicative weights over a finite snapshot universe. The
// hypothesis starts uniform; a query is answered from the hypothesis unless
// the noisy gap to the data exceeds the noisy threshold, in which case a
// noisy data answer is released and the hypothesis is tilted until it
// reproduces that answer.
class PmwSession {
 public:
  PmwSession(CodeHistogram data, PmwConfig cfg, std::uint64_t seed);

  double answer(const Mat& obs);
  double answer(const Observable& obs) { return answer(to_dense(obs, data_.universe->dim())); }
  double answer_values(const std::vector<double>& f);

  const std::vector<double>& weights() const { return w_; }
  Mat hypothesis() const;
  std::size_t updates() const { return updates_; }
  std::size_t answered() const { return answered_; }
  double epsilon_spent() const { return eps_spent_; }
  const std::vector<TraceRow>& trace() const { return trace_; }
  const CodeHistogram& data() const { return data_; }

 private:
  void redraw_threshold();

  CodeHistogram data_;
  PmwConfig cfg_;
  Rng rng_;
  std::vector<double> w_;
  double noisy_threshold_ = 0.0;
  std::size_t updates_ = 0;
  std::size_t answered_ = 0;
  double eps_spent_ = 0.0;
  std::vector<TraceRow> trace_;
};

// Tilt w toward w * exp(eta f), renormalized, with eta chosen so that the
// new mean of f equals target (clamped strictly inside the range of f).
void mw_project(std::vector<double>& w, const std::vector<double>& f, double target);

// ---------------------------------------------------------------- SQ mechanism

struct SqConfig {
  double C = 1.0;          // queries map records into [-C, C]
  double sigma = 0.01;     // Gaussian noise std per answer
  std::size_t max_queries = 1000;
  double delta = 1e-6;     // for reporting (eps, delta) from zCDP
};

// Gaussian-noised empirical means with zCDP accounting. Records may carry
// multiplicities so that large i.i.d. datasets over a small alphabet are
// stored as histograms.
template <class Record>
class SqMechanism {
 public:
  SqMechanism(std::vector<Record> records, std::vector<std::uint64_t> counts, SqConfig cfg, std::uint64_t seed)
      : records_(std::move(records)), counts_(std::move(counts)), cfg_(cfg), rng_(seed) {
    if (counts_.empty()) counts_.assign(records_.size(), 1);
    if (counts_.size() != records_.size()) throw Error(ErrorKind::LengthMismatch, "records vs counts");
    for (std::uint64_t c : counts_) total_ += c;
    if (total_ == 0) throw Error(ErrorKind::EmptyDataset, "no records");
    if (!(cfg_.C > 0.0) || !(cfg_.sigma > 0.0)) throw Error(ErrorKind::ConfigError, "C and sigma must be positive");
  }
  SqMechanism(std::vector<Record> records, SqConfig cfg, std::uint64_t seed)
      : SqMechanism(std::move(records), {}, cfg, seed) {}

  template <class Query>
  double answer(Query&& q) {
    if (answered_ >= cfg_.max_queries) throw Error(ErrorKind::BudgetExhausted, "statistical-query budget spent");
    const double mean = empirical(q);
    const double noisy = mean + std::normal_distribution<double>(0.0, cfg_.sigma)(rng_);
    const double out = std::clamp(noisy, -cfg_.C, cfg_.C);
    ++answered_;
    rho_spent_ += rho_per_query();
    trace_.push_back(TraceRow{answered_ - 1, out, cfg_.sigma,
                              static_cast<double>(cfg_.max_queries - answered_)});
    return out;
  }

  // Noise-free mean of the clamped query; what a plain mechanism releases.
  template <class Query>
  double empirical(Query&& q) const {
    double acc = 0.0;
    for (std::size_t r = 0; r < records_.size(); ++r) {
      if (counts_[r] == 0) continue;
      acc += static_cast<double>(counts_[r]) * std::clamp(static_cast<double>(q(records_[r])), -cfg_.C, cfg_.C);
    }
    return acc / static_cast<double>(total_);
  }

  double rho_per_query() const {
    const double sens = 2.0 * cfg_.C / static_cast<double>(total_);
    return sens * sens / (2.0 * cfg_.sigma * cfg_.sigma);
  }
  double rho_spent() const { return rho_spent_; }
  double epsilon_spent() const { return rho_spent_ + 2.0 * std::sqrt(rho_spent_ * std::log(1.0 / cfg_.delta)); }
  std::size_t answered() const { return answered_; }
  std::uint64_t size() const { return total_; }
  const std::vector<TraceRow>& trace() const { return trace_; }

  // Noise level that spends a total zCDP budget rho over max_queries answers.
  static double sigma_for_budget(double C, std::uint64_t n, std::size_t max_queries, double rho_total) {
    const double sens = 2.0 * C / static_cast<double>(n);
    return sens * std::sqrt(static_cast<double>(max_queries) / (2.0 * rho_total));
  }

 private:
  std::vector<Record> records_;
  std::vector<std::uint64_t> counts_;
  SqConfig cfg_;
  Rng rng_;
  std::uint64_t total_ = 0;
  std::size_t answered_ = 0;
  double rho_spent_ = 0.0;
  std::vector<TraceRow> trace_;
};

// ---------------------------------------------------------------- Bell pipeline

enum class BellOutcome : std::uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

struct BellSample {
  std::vector<BellOutcome> pairs;  // pair k = qubit k of both copies
  std::size_t n_qubits() const { return pairs.size(); }
};

// Eigenvalue of sigma (x) sigma on the given Bell state; I gives 1.
int bell_eigenvalue(BellOutcome outcome, char sigma);
// Outcome-string code: base 4, qubit 0 most significant.
std::uint64_t bell_code(const BellSample& s);
BellSample bell_from_code(std::uint64_t code, std::size_t n_qubits);
// Born law on rho (x) rho over all 4^n outcome strings.
std::vector<double> bell_distribution(const DenseState& state);

class BellSampler {
 public:
  explicit BellSampler(const DenseState& state);
  BellSample sample(Rng& rng) const;
  std::uint64_t sample_code(Rng& rng) const;
  // Exact multinomial histogram of `count` samples over outcome codes.
  std::vector<std::uint64_t> sample_counts(std::uint64_t count, Rng& rng) const;
  const std::vector<double>& distribution() const { return p_; }
  std::size_t n_qubits() const { return n_; }

 private:
  std::size_t n_;
  std::vector<double> p_;
};

BellSample bell_sample(const DenseState& state, Rng& rng);
int q_p(const BellSample& s, const PauliString& p);
double pauli_magnitude_query(const std::vector<BellSample>& samples, const PauliString& p);
// Exact E[q_P] under the Bell law; equals |tr(P rho)|^2.
double expected_q_p(const DenseState& state, const PauliString& p);

struct SignResult {
  int sign = 1;
  bool zero_flag = false;
};
SignResult pauli_sign_oracle(const DenseState& state, const PauliString& p);

// Magnitude through an SqMechanism over Bell records, sign from the dense
// state: answer = sign * sqrt(max(magnitude, 0)).
class AdaptivePauliMechanism {
 public:
  AdaptivePauliMechanism(const DenseState& state, std::uint64_t bell_samples, SqConfig cfg, std::uint64_t seed);
  double answer(const PauliString& p);
  double last_magnitude() const { return last_magnitude_; }
  const std::vector<TraceRow>& trace() const { return sq_.trace(); }
  const SqMechanism<std::uint64_t>& sq() const { return sq_; }

 private:
  static SqMechanism<std::uint64_t> build(const DenseState& state, std::uint64_t bell_samples, SqConfig cfg,
                                          std::uint64_t seed);
  DenseState state_;
  std::size_t n_;
  SqMechanism<std::uint64_t> sq_;
  double last_magnitude_ = 0.0;
};

}  // namespace qadapt
