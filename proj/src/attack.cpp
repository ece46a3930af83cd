#include "qadapt/attack.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "qadapt/shadows.hpp"

namespace qadapt {

std::size_t MajorityModel::register_subset(std::vector<std::size_t> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  for (std::size_t i : subset)
    if (i >= M_) throw Error(ErrorKind::DimensionMismatch, "subset index outside the base coins");
  subsets_.push_back(std::move(subset));
  return M_ + subsets_.size() - 1;
}

std::vector<std::uint8_t> MajorityModel::sample_base(Rng& rng) const {
  std::vector<std::uint8_t> out(M_);
  for (std::size_t i = 0; i < M_; ++i) out[i] = fair_coin(rng) ? 1 : 0;
  return out;
}

bool MajorityModel::derived_bit(std::size_t ones, std::size_t k, MajorityRule rule) {
  if (k == 0) return false;
  if (rule == MajorityRule::AnyPositive) return ones > 0;
  return 2 * ones > k;
}

bool MajorityModel::bit(const std::vector<std::uint8_t>& base, std::size_t coordinate) const {
  if (coordinate < M_) return base.at(coordinate) != 0;
  const auto& s = subsets_.at(coordinate - M_);
  std::size_t ones = 0;
  for (std::size_t i : s) ones += base[i];
  return derived_bit(ones, s.size(), rule_);
}

double MajorityModel::derived_truth(std::size_t k, MajorityRule rule) {
  if (k == 0) return 1.0;
  if (rule == MajorityRule::AnyPositive) return 2.0 * std::pow(0.5, static_cast<double>(k)) - 1.0;
  // Strict majority of fair coins: E[Z] = P(Q=0) - P(Q=1) = P(tie).
  if (k % 2 == 1) return 0.0;
  const double kk = static_cast<double>(k);
  return std::exp(std::lgamma(kk + 1.0) - 2.0 * std::lgamma(kk / 2.0 + 1.0) - kk * std::log(2.0));
}

double MajorityModel::z_expectation(const std::vector<std::size_t>& support) const {
  if (support.empty()) return 1.0;
  std::vector<std::size_t> derived;
  std::vector<std::size_t> base;
  for (std::size_t c : support) {
    if (c >= width()) throw Error(ErrorKind::DimensionMismatch, "coordinate out of range");
    (c < M_ ? base : derived).push_back(c);
  }
  if (derived.empty()) return 0.0;  // product of independent fair coins
  if (base.empty() && derived.size() == 1) return derived_truth(subsets_[derived[0] - M_].size(), rule_);
  // General case: coins outside every involved subset factor out as fair
  // coins; otherwise enumerate the involved coins.
  std::vector<std::size_t> involved;
  for (std::size_t c : derived)
    for (std::size_t i : subsets_[c - M_]) involved.push_back(i);
  std::sort(involved.begin(), involved.end());
  involved.erase(std::unique(involved.begin(), involved.end()), involved.end());
  for (std::size_t b : base)
    if (!std::binary_search(involved.begin(), involved.end(), b)) return 0.0;
  if (involved.size() > 22) throw Error(ErrorKind::UnsupportedPair, "parity too wide for exact enumeration");
  std::vector<std::uint8_t> bits(M_, 0);
  double total = 0.0;
  const std::uint64_t count = std::uint64_t{1} << involved.size();
  for (std::uint64_t x = 0; x < count; ++x) {
    for (std::size_t k = 0; k < involved.size(); ++k) bits[involved[k]] = static_cast<std::uint8_t>((x >> k) & 1U);
    int parity = 0;
    for (std::size_t c : support) parity ^= bit(bits, c) ? 1 : 0;
    total += parity ? -1.0 : 1.0;
  }
  return total / static_cast<double>(count);
}

namespace {

// Column-major packed coin matrix: column i holds the N sample bits of coin i.
struct CoinColumns {
  std::size_t N = 0;
  std::size_t words = 0;
  std::vector<std::uint64_t> data;
  const std::uint64_t* column(std::size_t i) const { return data.data() + i * words; }
};

CoinColumns draw_columns(std::size_t N, std::size_t M, Rng& rng) {
  CoinColumns c;
  c.N = N;
  c.words = (N + 63) / 64;
  c.data.resize(c.words * M);
  const std::uint64_t tail = (N % 64) ? ((std::uint64_t{1} << (N % 64)) - 1) : ~std::uint64_t{0};
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t w = 0; w < c.words; ++w) c.data[i * c.words + w] = rng();
    c.data[i * c.words + c.words - 1] &= tail;
  }
  return c;
}

std::size_t popcount_column(const std::uint64_t* col, std::size_t words) {
  std::size_t n = 0;
  for (std::size_t w = 0; w < words; ++w) n += static_cast<std::size_t>(std::popcount(col[w]));
  return n;
}

std::size_t binomial(Rng& rng, std::size_t n, double p) {
  if (n == 0) return 0;
  return std::binomial_distribution<std::size_t>(n, p)(rng);
}

// Shadow estimate of Z on a column with `ones` one-bits among N samples.
double shadow_estimate(std::size_t N, std::size_t ones, Rng& rng) {
  const std::size_t zeros = N - ones;
  const std::size_t z0 = binomial(rng, zeros, 1.0 / 3.0);
  const std::size_t z1 = binomial(rng, ones, 1.0 / 3.0);
  const std::size_t rest = N - z0 - z1;
  const std::size_t heads = binomial(rng, rest, 0.5);
  const double sum = static_cast<double>(z0) - static_cast<double>(z1) + 2.0 * static_cast<double>(heads) -
                     static_cast<double>(rest);
  return 3.0 * sum / static_cast<double>(N);
}

// Number of samples whose derived bit over the columns in `subset` is 1.
std::size_t derived_ones(const CoinColumns& c, const std::vector<std::size_t>& subset, MajorityRule rule) {
  if (subset.empty()) return 0;
  std::vector<std::uint32_t> counts(c.N, 0);
  for (std::size_t i : subset) {
    const std::uint64_t* col = c.column(i);
    for (std::size_t w = 0; w < c.words; ++w) {
      std::uint64_t x = col[w];
      while (x) {
        const int b = std::countr_zero(x);
        ++counts[w * 64 + static_cast<std::size_t>(b)];
        x &= x - 1;
      }
    }
  }
  std::size_t ones = 0;
  for (std::uint32_t k : counts) ones += MajorityModel::derived_bit(k, subset.size(), rule) ? 1 : 0;
  return ones;
}

}  // namespace

AdaptiveOutcome run_adaptive_attack(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params) {
  if (N < 1) throw Error(ErrorKind::ConfigError, "N must be at least 1");
  CoinColumns cols = draw_columns(N, M, rng);
  const double threshold = params.threshold_multiplier / std::sqrt(static_cast<double>(N));
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < M; ++i) {
    const double a = shadow_estimate(N, popcount_column(cols.column(i), cols.words), rng);
    if (a >= threshold) selected.push_back(i);
  }
  AdaptiveOutcome out;
  out.selected_set_size = selected.size();
  out.answer = shadow_estimate(N, derived_ones(cols, selected, params.rule), rng);
  out.truth = MajorityModel::derived_truth(selected.size(), params.rule);
  out.adaptive_error = std::abs(out.answer - out.truth);
  return out;
}

NonAdaptiveOutcome run_nonadaptive_baseline(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params) {
  if (N < 1) throw Error(ErrorKind::ConfigError, "N must be at least 1");
  CoinColumns cols = draw_columns(N, M, rng);
  NonAdaptiveOutcome out;
  for (std::size_t i = 0; i < M; ++i) {
    const double a = shadow_estimate(N, popcount_column(cols.column(i), cols.words), rng);
    out.max_error = std::max(out.max_error, std::abs(a));
  }
  std::vector<std::size_t> fixed((3 * M + 3) / 4);
  for (std::size_t i = 0; i < fixed.size(); ++i) fixed[i] = i;
  const double a = shadow_estimate(N, derived_ones(cols, fixed, params.rule), rng);
  out.max_error = std::max(out.max_error, std::abs(a - MajorityModel::derived_truth(fixed.size(), params.rule)));
  return out;
}

AdaptiveOutcome run_adaptive_attack_reference(std::size_t N, std::size_t M, Rng& rng, const AttackParams& params) {
  auto model = std::make_shared<MajorityModel>(M, params.rule);
  DiagonalState state{model};
  std::vector<LazyBitstring> samples;
  std::vector<PauliSnapshot> snaps;
  samples.reserve(N);
  for (std::size_t k = 0; k < N; ++k) {
    samples.push_back(sample_bitstring(state, rng));
    snaps.push_back(pauli_snapshot(samples.back(), M, rng));
  }
  const double threshold = params.threshold_multiplier / std::sqrt(static_cast<double>(N));
  std::vector<std::size_t> selected;
  for (std::size_t i = 0; i < M; ++i) {
    double s = 0.0;
    for (const PauliSnapshot& sn : snaps) s += snapshot_expectation(sn, SingleQubitZ{i}, ZValueModel::SignOfOutcome);
    if (s / static_cast<double>(N) >= threshold) selected.push_back(i);
  }
  const std::size_t coord = model->register_subset(selected);
  // The derived qubit's basis and any off-basis coin are independent of
  // everything drawn so far, so they are drawn now.
  double s = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    PauliSnapshot one;
    const std::size_t b = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
    const int outcome = b == 0 ? (samples[k].bit(coord) ? 1 : 0) : (fair_coin(rng) ? 1 : 0);
    one.codes = {static_cast<std::uint8_t>(2 * b + outcome)};
    s += snapshot_expectation(one, SingleQubitZ{0}, ZValueModel::SignOfOutcome);
  }
  AdaptiveOutcome out;
  out.selected_set_size = selected.size();
  out.answer = s / static_cast<double>(N);
  out.truth = expectation(state, SingleQubitZ{coord});
  out.adaptive_error = std::abs(out.answer - out.truth);
  return out;
}

double selection_probability(std::size_t N, double threshold) {
  // a = 3 (2H - N) / N with H ~ Bin(N, 1/2); a >= t iff H >= N (t/3 + 1) / 2.
  const double nn = static_cast<double>(N);
  const double h_min = std::ceil(nn * (threshold / 3.0 + 1.0) / 2.0 - 1e-12);
  double total = 0.0;
  for (std::size_t h = static_cast<std::size_t>(std::max(0.0, h_min)); h <= N; ++h) {
    const double hh = static_cast<double>(h);
    total += std::exp(std::lgamma(nn + 1.0) - std::lgamma(hh + 1.0) - std::lgamma(nn - hh + 1.0) - nn * std::log(2.0));
  }
  return std::min(1.0, total);
}

void mean_std(const std::vector<double>& xs, double& mean, double& stdev) {
  mean = 0.0;
  stdev = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  stdev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

AttackResult attack_experiment(std::size_t N, const std::vector<std::size_t>& M_list, std::size_t runs,
                               std::uint64_t seed, const AttackParams& params) {
  if (runs < 1) throw Error(ErrorKind::ConfigError, "runs must be at least 1");
  AttackResult result;
  for (std::size_t M : M_list) {
    std::vector<double> adaptive(runs), nonadaptive(runs), selected(runs);
    const auto nr = static_cast<std::int64_t>(runs);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t r = 0; r < nr; ++r) {
      const auto ru = static_cast<std::uint64_t>(r);
      Rng ra = make_rng(seed, {M, ru, 0});
      Rng rn = make_rng(seed, {M, ru, 1});
      AdaptiveOutcome a = run_adaptive_attack(N, M, ra, params);
      adaptive[static_cast<std::size_t>(r)] = a.adaptive_error;
      selected[static_cast<std::size_t>(r)] = static_cast<double>(a.selected_set_size);
      nonadaptive[static_cast<std::size_t>(r)] = run_nonadaptive_baseline(N, M, rn, params).max_error;
    }
    AttackRecord rec;
    rec.M = M;
    rec.N = N;
    rec.runs = runs;
    mean_std(adaptive, rec.adaptive_error_mean, rec.adaptive_error_std);
    mean_std(nonadaptive, rec.nonadaptive_error_mean, rec.nonadaptive_error_std);
    double unused = 0.0;
    mean_std(selected, rec.selected_mean, unused);
    result.records.push_back(rec);
  }
  return result;
}

}  // namespace qadapt
