#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "qadapt/rng.hpp"
#include "qadapt/state.hpp"

namespace qadapt {

// Rule mapping the base coins Q_i, i in I, to the derived coordinate.
// StrictMajority sets Q = 1 iff more than half of the coins in I are 1.
// AnyPositive reads "sum_{i in I} Q_i > 0" over {0,1}-valued coins, i.e.
// Q = 1 iff some coin in I is 1. The empty set always gives 0.
enum class MajorityRule { StrictMajority, AnyPositive };

// M uniform base coins plus derived coordinates registered on demand.
// Coordinates 0..M-1 are the coins, M + j is the j-th registered subset.
class MajorityModel : public DiagonalModel {
 public:
  MajorityModel(std::size_t M, MajorityRule rule) : M_(M), rule_(rule) {}
  std::size_t register_subset(std::vector<std::size_t> subset);
  std::size_t base_count() const { return M_; }
  MajorityRule rule() const { return rule_; }
  const std::vector<std::size_t>& subset(std::size_t j) const { return subsets_.at(j); }

  std::size_t width() const override { return M_ + subsets_.size(); }
  std::vector<std::uint8_t> sample_base(Rng& rng) const override;
  bool bit(const std::vector<std::uint8_t>& base, std::size_t coordinate) const override;
  double z_expectation(const std::vector<std::size_t>& support) const override;

  // Exact tr(Z rho) of a derived coordinate whose subset has k coins.
  static double derived_truth(std::size_t k, MajorityRule rule);
  static bool derived_bit(std::size_t ones, std::size_t k, MajorityRule rule);

 private:
  std::size_t M_;
  MajorityRule rule_;
  std::vector<std::vector<std::size_t>> subsets_;
};

struct AttackParams {
  // a(Z_i) >= threshold_multiplier / sqrt(N) selects coordinate i.
  double threshold_multiplier = 9.0;
  MajorityRule rule = MajorityRule::StrictMajority;
};

struct AdaptiveOutcome {
  double adaptive_error = 0.0;
  double answer = 0.0;
  double truth = 0.0;
  std::size_t selected_set_size = 0;
};

struct NonAdaptiveOutcome {
  double max_error = 0.0;
};

// Packed-bitset simulation of the +-3 snapshot channel: each snapshot value
// of Z_i is the sign of the bit with probability 1/3 and a fair +-3 coin
// otherwise. Counts are drawn from their exact binomial laws.
AdaptiveOutcome run_adaptive_attack(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params = {});
NonAdaptiveOutcome run_nonadaptive_baseline(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params = {});

// Reference path through MajorityModel and explicit Pauli snapshots. Same
// law as run_adaptive_attack, intended for small N * M.
AdaptiveOutcome run_adaptive_attack_reference(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params = {});

// Exact Pr[a(Z_i) >= threshold] under the +-3 channel for a fair coin.
double selection_probability(std::size_t N, double threshold);

struct AttackRecord {
  std::size_t M = 0;
  std::size_t N = 0;
  std::size_t runs = 0;
  double adaptive_error_mean = 0.0;
  double adaptive_error_std = 0.0;
  double nonadaptive_error_mean = 0.0;
  double nonadaptive_error_std = 0.0;
  double selected_mean = 0.0;
};

struct AttackResult {
  std::vector<AttackRecord> records;
};

// Trial (M, run) uses the stream derive_seed(seed, {M, run, mode}); trials
// run in parallel and the reduction is serial.
AttackResult attack_experiment(std::size_t N, const std::vector<std::size_t>& M_list, std::size_t runs,
                               std::uint64_t seed, const AttackParams& params = {});

// Mean and sample standard deviation (0 for a single value).
void mean_std(const std::vector<double>& xs, double& mean, double& stdev);

}  // namespace qadapt
