#include "qadapt/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qadapt {

double truncation_bound(double B, std::size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorKind::EmptyDataset, "empty batch");
  return 2.0 * std::sqrt(std::max(B, 0.0) / static_cast<double>(batch_size)) + 1.0;
}

double truncate_to(double value, double bound) { return std::clamp(value, -bound, bound); }

BatchedEstimates truncate_batches(const std::vector<double>& means, double B, std::size_t batch_size) {
  BatchedEstimates out;
  out.raw = means;
  out.bound = truncation_bound(B, batch_size);
  out.truncated.reserve(means.size());
  for (double m : means) out.truncated.push_back(truncate_to(m, out.bound));
  return out;
}

double private_median(const std::vector<double>& values, double lo, double hi, double gamma, double eps_dp,
                      Rng& rng) {
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "no batch means");
  if (!(gamma > 0.0) || !(eps_dp > 0.0) || hi < lo) throw Error(ErrorKind::ConfigError, "median grid");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t G = static_cast<std::size_t>(std::floor((hi - lo) / gamma + 1e-9)) + 1;
  const double n = static_cast<double>(sorted.size());
  std::vector<double> logw(G);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < G; ++j) {
    // Candidate c stands for the bin [c - gamma/2, c + gamma/2).
    const double c = lo + gamma * static_cast<double>(j);
    const double below =
        static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), c - 0.5 * gamma) - sorted.begin());
    const double above =
        n - static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), c + 0.5 * gamma) - sorted.begin());
    logw[j] = -0.5 * eps_dp * std::max(below, above);
    top = std::max(top, logw[j]);
  }
  std::vector<double> w(G);
  for (std::size_t j = 0; j < G; ++j) w[j] = std::exp(logw[j] - top);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  return std::min(hi, lo + gamma * static_cast<double>(pick(rng)));
}

DpMedianSession::DpMedianSession(BatchSource batches, NormSource norm, std::size_t batch_size, DpMedianConfig cfg,
                                 std::uint64_t seed)
    : batches_(std::move(batches)), norm_(std::move(norm)), batch_size_(batch_size), cfg_(cfg), rng_(seed) {
  if (batch_size_ == 0) throw Error(ErrorKind::EmptyDataset, "empty batches");
  if (!(cfg_.accuracy > 0.0) || !(cfg_.grid_fraction > 0.0) || !(cfg_.eps_dp_per_query > 0.0))
    throw Error(ErrorKind::ConfigError, "dp median parameters must be positive");
}

DpMedianSession DpMedianSession::over(const PauliDataset& ds, std::size_t K, DpMedianConfig cfg, std::uint64_t seed) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  if (K == 0 || ds.size() % K != 0) throw Error(ErrorKind::IndivisibleBatching, "dataset size not a multiple of K");
  const PauliDataset* data = &ds;
  return DpMedianSession(
      [data, K](const Observable& q) { return batch_means(snapshot_values(*data, q), K); },
      [](const Observable& q) { return shadow_norm_bound(q, Primitive::Pauli); }, ds.size() / K, cfg, seed);
}

DpMedianSession DpMedianSession::over(std::shared_ptr<const PovmSketch> sketch, DpMedianConfig cfg,
                                      std::uint64_t seed) {
  if (!sketch || sketch->count() == 0) throw Error(ErrorKind::EmptyDataset, "empty sketch");
  const std::size_t bs = sketch->batch_size;
  return DpMedianSession(
      [sketch](const Observable& q) { return sketch->batch_means(to_dense(q, sketch->d)); },
      [](const Observable& q) { return shadow_norm_bound(q, Primitive::Povm); }, bs, cfg, seed);
}

double DpMedianSession::answer(const Observable& query) {
  if (answered_ >= cfg_.max_queries) throw Error(ErrorKind::BudgetExhausted, "dp median query budget spent");
  std::vector<double> means = batches_(query);
  if (means.empty()) throw Error(ErrorKind::EmptyDataset, "no batch means");
  const double B = cfg_.B > 0.0 ? cfg_.B : norm_(query);
  last_ = truncate_batches(means, B, batch_size_);
  const double gamma = cfg_.grid_fraction * cfg_.accuracy;
  const double out = private_median(last_.truncated, -last_.bound, last_.bound, gamma, cfg_.eps_dp_per_query, rng_);
  ++answered_;
  trace_.push_back(TraceRow{answered_ - 1, out, 2.0 / cfg_.eps_dp_per_query,
                            static_cast<double>(cfg_.max_queries - answered_) * cfg_.eps_dp_per_query});
  return out;
}

void mw_project(std::vector<double>& w, const std::vector<double>& f, double target) {
  if (w.size() != f.size()) throw Error(ErrorKind::DimensionMismatch, "weights vs values");
  const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
  const double fmin = *mn, fmax = *mx;
  const double range = fmax - fmin;
  if (range <= 0.0) return;
  target = std::clamp(target, fmin + 1e-9 * range, fmax - 1e-9 * range);
  std::vector<double> logw(w.size());
  for (std::size_t x = 0; x < w.size(); ++x) logw[x] = w[x] > 0.0 ? std::log(w[x]) : -745.0;
  auto tilted_mean = [&](double eta, std::vector<double>* out) {
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < w.size(); ++x) top = std::max(top, logw[x] + eta * f[x]);
    double z = 0.0, m = 0.0;
    for (std::size_t x = 0; x < w.size(); ++x) {
      const double e = std::exp(logw[x] + eta * f[x] - top);
      z += e;
      m += e * f[x];
      if (out) (*out)[x] = e;
    }
    if (out)
      for (double& v : *out) v /= z;
    return m / z;
  };
  const double current = tilted_mean(0.0, nullptr);
  if (current == target) return;
  const double dir = target > current ? 1.0 : -1.0;
  double lo = 0.0, hi = dir / range;
  for (int k = 0; k < 60 && dir * (tilted_mean(hi, nullptr) - target) < 0.0; ++k) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (dir * (tilted_mean(mid, nullptr) - target) < 0.0) lo = mid;
    else hi = mid;
  }
  tilted_mean(0.5 * (lo + hi), &w);
}

PmwSession::PmwSession(CodeHistogram data, PmwConfig cfg, std::uint64_t seed)
    : data_(std::move(data)), cfg_(cfg), rng_(seed) {
  if (!data_.universe) throw Error(ErrorKind::ConfigError, "histogram without universe");
  if (data_.universe->m_bits() > 20) throw Error(ErrorKind::UniverseTooLarge, "universe wider than 20 bits");
  if (data_.total == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  if (cfg_.threshold <= 0.0) cfg_.threshold = cfg_.alpha / 2.0;
  if (!(cfg_.threshold_noise > 0.0) || !(cfg_.gate_noise > 0.0) || !(cfg_.answer_noise > 0.0))
    throw Error(ErrorKind::ConfigError, "PMW noise scales must be positive");
  w_.assign(data_.universe->size(), 1.0 / static_cast<double>(data_.universe->size()));
  redraw_threshold();
}

void PmwSession::redraw_threshold() { noisy_threshold_ = cfg_.threshold + laplace(rng_, cfg_.threshold_noise); }

double PmwSession::answer(const Mat& obs) { return answer_values(data_.universe->values(obs)); }

double PmwSession::answer_values(const std::vector<double>& f) {
  if (f.size() != w_.size()) throw Error(ErrorKind::DimensionMismatch, "value table vs universe");
  if (cfg_.max_queries && answered_ >= cfg_.max_queries) throw Error(ErrorKind::BudgetExhausted, "PMW query budget spent");
  const auto [mn, mx] = std::minmax_element(f.begin(), f.end());
  const double range = *mx - *mn;
  const double remaining = static_cast<double>(cfg_.max_updates - updates_);
  if (range <= 1e-12 * std::max(1.0, std::abs(*mx))) {
    ++answered_;
    trace_.push_back(TraceRow{answered_ - 1, f[0], 0.0, remaining});
    return f[0];
  }
  double data_value = 0.0, hyp_value = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) {
    data_value += static_cast<double>(data_.counts[x]) * f[x];
    hyp_value += w_[x] * f[x];
  }
  data_value /= static_cast<double>(data_.total);
  const double gap = std::abs(data_value - hyp_value) + laplace(rng_, cfg_.gate_noise);
  if (gap <= noisy_threshold_) {
    ++answered_;
    trace_.push_back(TraceRow{answered_ - 1, hyp_value, cfg_.gate_noise, remaining});
    return hyp_value;
  }
  if (updates_ >= cfg_.max_updates) throw Error(ErrorKind::BudgetExhausted, "PMW update budget spent");
  const double noisy = std::clamp(data_value + laplace(rng_, cfg_.answer_noise), *mn, *mx);
  mw_project(w_, f, noisy);
  double s = 0.0;
  for (double v : w_) s += v;
  for (double& v : w_) v /= s;
  ++updates_;
  ++answered_;
  const double sens = range / static_cast<double>(data_.total);
  eps_spent_ += sens / cfg_.threshold_noise + 2.0 * sens / cfg_.gate_noise + sens / cfg_.answer_noise;
  redraw_threshold();
  trace_.push_back(TraceRow{answered_ - 1, noisy, cfg_.answer_noise, static_cast<double>(cfg_.max_updates - updates_)});
  return noisy;
}

Mat PmwSession::hypothesis() const {
  const std::size_t d = data_.universe->dim();
  Mat h = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t x = 0; x < w_.size(); ++x)
    if (w_[x] > 0.0) h += w_[x] * data_.universe->snapshot_matrix(x);
  return h;
}

int bell_eigenvalue(BellOutcome outcome, char sigma) {
  switch (sigma) {
    case 'I': return 1;
    case 'X': return (outcome == BellOutcome::PhiPlus || outcome == BellOutcome::PsiPlus) ? 1 : -1;
    case 'Y': return (outcome == BellOutcome::PhiMinus || outcome == BellOutcome::PsiPlus) ? 1 : -1;
    case 'Z': return (outcome == BellOutcome::PhiPlus || outcome == BellOutcome::PhiMinus) ? 1 : -1;
    default: throw Error(ErrorKind::InvalidObservable, "Pauli symbol must be one of IXYZ");
  }
}

std::uint64_t bell_code(const BellSample& s) {
  std::uint64_t c = 0;
  for (BellOutcome o : s.pairs) c = c * 4 + static_cast<std::uint64_t>(o);
  return c;
}

BellSample bell_from_code(std::uint64_t code, std::size_t n_qubits) {
  BellSample s;
  s.pairs.resize(n_qubits);
  for (std::size_t k = n_qubits; k-- > 0;) {
    s.pairs[k] = static_cast<BellOutcome>(code & 3U);
    code >>= 2;
  }
  return s;
}

namespace {

// Amplitude <ab|beta> for Bell state beta on one pair.
double bell_amplitude(std::size_t beta, std::size_t a, std::size_t b) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (beta) {
    case 0: return a == b ? s : 0.0;
    case 1: return a == b ? (a == 0 ? s : -s) : 0.0;
    case 2: return a != b ? s : 0.0;
    default: return a != b ? (a == 0 ? s : -s) : 0.0;
  }
}

int q_p_code(std::uint64_t code, const std::string& symbols) {
  int v = 1;
  for (std::size_t k = symbols.size(); k-- > 0;) {
    v *= bell_eigenvalue(static_cast<BellOutcome>(code & 3U), symbols[k]);
    code >>= 2;
  }
  return v;
}

}  // namespace

std::vector<double> bell_distribution(const DenseState& state) {
  const std::size_t n = state.n_qubits();
  const std::size_t d = state.dim();
  if (d != (std::size_t{1} << n)) throw Error(ErrorKind::DimensionMismatch, "Bell sampling needs qubits");
  if (n > 5) throw Error(ErrorKind::DimensionTooLarge, "rho (x) rho is dense; n <= 5");
  const std::size_t outcomes = std::size_t{1} << (2 * n);
  std::vector<double> p(outcomes);
  const Mat rho_t = state.rho.transpose();
  for (std::size_t s = 0; s < outcomes; ++s) {
    Eigen::MatrixXd C(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t x = 0; x < d; ++x)
      for (std::size_t y = 0; y < d; ++y) {
        double amp = 1.0;
        for (std::size_t k = 0; k < n && amp != 0.0; ++k) {
          const std::size_t beta = (s >> (2 * (n - 1 - k))) & 3U;
          amp *= bell_amplitude(beta, (x >> (n - 1 - k)) & 1U, (y >> (n - 1 - k)) & 1U);
        }
        C(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = amp;
      }
    const Mat Cc = C.cast<cplx>();
    p[s] = std::max(0.0, (Cc.transpose() * state.rho * Cc * rho_t).trace().real());
  }
  return p;
}

BellSampler::BellSampler(const DenseState& state) : n_(state.n_qubits()), p_(bell_distribution(state)) {}

std::uint64_t BellSampler::sample_code(Rng& rng) const {
  std::discrete_distribution<std::uint64_t> pick(p_.begin(), p_.end());
  return pick(rng);
}

BellSample BellSampler::sample(Rng& rng) const { return bell_from_code(sample_code(rng), n_); }

std::vector<std::uint64_t> BellSampler::sample_counts(std::uint64_t count, Rng& rng) const {
  std::vector<std::uint64_t> counts(p_.size(), 0);
  double left_mass = 0.0;
  for (double v : p_) left_mass += v;
  std::uint64_t left = count;
  for (std::size_t x = 0; x < p_.size() && left > 0; ++x) {
    if (x + 1 == p_.size() || left_mass <= 0.0) {
      counts[x] = left;
      break;
    }
    const double prob = std::clamp(p_[x] / left_mass, 0.0, 1.0);
    const std::uint64_t c = std::binomial_distribution<std::uint64_t>(left, prob)(rng);
    counts[x] = c;
    left -= c;
    left_mass -= p_[x];
  }
  return counts;
}

BellSample bell_sample(const DenseState& state, Rng& rng) { return BellSampler(state).sample(rng); }

int q_p(const BellSample& s, const PauliString& p) {
  if (p.symbols.size() != s.n_qubits()) throw Error(ErrorKind::DimensionMismatch, "Pauli length vs Bell sample");
  int v = 1;
  for (std::size_t k = 0; k < s.n_qubits(); ++k) v *= bell_eigenvalue(s.pairs[k], p.symbols[k]);
  return v;
}

double pauli_magnitude_query(const std::vector<BellSample>& samples, const PauliString& p) {
  if (samples.empty()) throw Error(ErrorKind::EmptyDataset, "no Bell samples");
  double acc = 0.0;
  for (const BellSample& s : samples) acc += q_p(s, p);
  return acc / static_cast<double>(samples.size());
}

double expected_q_p(const DenseState& state, const PauliString& p) {
  if (p.symbols.size() != state.n_qubits()) throw Error(ErrorKind::DimensionMismatch, "Pauli length vs state");
  const std::vector<double> dist = bell_distribution(state);
  double acc = 0.0;
  for (std::size_t s = 0; s < dist.size(); ++s) acc += dist[s] * q_p_code(s, p.symbols);
  return acc;
}

SignResult pauli_sign_oracle(const DenseState& state, const PauliString& p) {
  if (state.n_qubits() > 10) throw Error(ErrorKind::DimensionTooLarge, "sign oracle is dense; n <= 10");
  const double t = expectation(state, Observable{p});
  if (std::abs(t) < kZeroExpectation) return SignResult{1, true};
  return SignResult{t > 0.0 ? 1 : -1, false};
}

SqMechanism<std::uint64_t> AdaptivePauliMechanism::build(const DenseState& state, std::uint64_t bell_samples,
                                                          SqConfig cfg, std::uint64_t seed) {
  BellSampler sampler(state);
  Rng rng = make_rng(seed, {0});
  std::vector<std::uint64_t> counts = sampler.sample_counts(bell_samples, rng);
  std::vector<std::uint64_t> codes(counts.size());
  for (std::size_t c = 0; c < codes.size(); ++c) codes[c] = c;
  return SqMechanism<std::uint64_t>(std::move(codes), std::move(counts), cfg, derive_seed(seed, {1}));
}

AdaptivePauliMechanism::AdaptivePauliMechanism(const DenseState& state, std::uint64_t bell_samples, SqConfig cfg,
                                               std::uint64_t seed)
    : state_(state), n_(state.n_qubits()), sq_(build(state, bell_samples, cfg, seed)) {}

double AdaptivePauliMechanism::answer(const PauliString& p) {
  if (p.symbols.size() != n_) throw Error(ErrorKind::DimensionMismatch, "Pauli length vs state");
  const std::string symbols = p.symbols;
  last_magnitude_ = sq_.answer([&symbols](std::uint64_t code) { return q_p_code(code, symbols); });
  const SignResult sign = pauli_sign_oracle(state_, p);
  return sign.sign * std::sqrt(std::max(last_magnitude_, 0.0));
}

}  // namespace qadapt
