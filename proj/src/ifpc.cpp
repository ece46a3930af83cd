#include "qadapt/ifpc.hpp"

#include <algorithm>
#include <cmath>

namespace qadapt {

std::array<std::uint8_t, 2> otp_encrypt_bit(std::uint8_t sk, std::uint8_t m) {
  if (sk > 1 || m > 1) throw Error(ErrorKind::LengthMismatch, "bits must be 0 or 1");
  return (m ^ sk) ? std::array<std::uint8_t, 2>{1, 0} : std::array<std::uint8_t, 2>{0, 1};
}

Bits otp_encrypt(const Bits& sk, const Bits& m) {
  if (sk.size() != m.size()) throw Error(ErrorKind::LengthMismatch, "key and message lengths differ");
  Bits c(2 * m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto pair = otp_encrypt_bit(sk[i], m[i]);
    c[2 * i] = pair[0];
    c[2 * i + 1] = pair[1];
  }
  return c;
}

std::uint8_t table_decrypt(std::uint8_t sk, std::array<std::uint8_t, 2> pair) {
  if (pair[0] == 1 && pair[1] == 0) return static_cast<std::uint8_t>(1 ^ sk);
  if (pair[0] == 0 && pair[1] == 1) return sk;
  throw Error(ErrorKind::InvalidPair, "ciphertext pair must be 10 or 01");
}

Bits otp_decrypt(const Bits& sk, const Bits& c) {
  if (c.size() != 2 * sk.size()) throw Error(ErrorKind::LengthMismatch, "ciphertext must be twice the key length");
  Bits m(sk.size());
  for (std::size_t i = 0; i < sk.size(); ++i) m[i] = table_decrypt(sk[i], {c[2 * i], c[2 * i + 1]});
  return m;
}

std::uint8_t parity_decrypt_identity(std::uint8_t sk, std::array<std::uint8_t, 2> pair) {
  const bool valid = (pair[0] == 1 && pair[1] == 0) || (pair[0] == 0 && pair[1] == 1);
  if (!valid) throw Error(ErrorKind::InvalidPair, "ciphertext pair must be 10 or 01");
  const auto e = otp_encrypt_bit(sk, 1);
  return static_cast<std::uint8_t>((e[0] * pair[0] + e[1] * pair[1]) & 1U);
}

void BaselineTracingCode::reset(std::size_t d, std::size_t, std::size_t M, std::uint64_t seed) {
  rng_.seed(seed);
  d_ = d;
  threshold_ = cfg_.threshold_factor * std::sqrt(static_cast<double>(std::max<std::size_t>(M, 1)));
  scores_.assign(d, 0.0);
  accused_.assign(d, 0);
  last_.assign(d, 0);
}

Bits BaselineTracingCode::challenge() {
  last_probe_ = uniform01(rng_) < cfg_.probe_probability;
  if (last_probe_) {
    std::fill(last_.begin(), last_.end(), 1);
    return last_;
  }
  const double r0 = std::asin(std::sqrt(cfg_.cutoff));
  const double r1 = std::asin(std::sqrt(1.0 - cfg_.cutoff));
  const double r = r0 + (r1 - r0) * uniform01(rng_);
  last_p_ = std::sin(r) * std::sin(r);
  for (std::size_t i = 0; i < d_; ++i) last_[i] = uniform01(rng_) < last_p_ ? 1 : 0;
  return last_;
}

std::vector<std::size_t> BaselineTracingCode::accuse(std::uint8_t rounded) {
  std::vector<std::size_t> out;
  if (last_probe_) return out;
  const double p = last_p_;
  const double up = std::sqrt((1.0 - p) / p);
  const double down = std::sqrt(p / (1.0 - p));
  for (std::size_t i = 0; i < d_; ++i) {
    if (accused_[i]) continue;
    if (rounded) scores_[i] += last_[i] ? up : -down;
    else scores_[i] += last_[i] ? -up : down;
    if (scores_[i] > threshold_) {
      accused_[i] = 1;
      out.push_back(i);
    }
  }
  return out;
}

std::uint64_t hash_bits(const Bits& b) {
  std::uint64_t h = splitmix64(b.size());
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    word = (word << 1) | (b[i] & 1U);
    if (i % 64 == 63) {
      h = splitmix64(h ^ word);
      word = 0;
    }
  }
  return splitmix64(h ^ word ^ 0x5bd1e995ULL);
}

std::uint64_t RestrictedChallenge::checksum() const {
  std::uint64_t h = splitmix64(round);
  for (std::size_t k = 0; k < users.size(); ++k) h = splitmix64(h ^ (users[k] * 2 + bits[k]));
  return h;
}

bool consistent(const Bits& challenge, const std::vector<std::size_t>& remaining, std::uint8_t rounded) {
  for (std::size_t i : remaining)
    if (challenge[i] == rounded) return true;
  return false;
}

namespace {

std::vector<std::size_t> distinct_sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Applies accusations to the game bookkeeping.
void apply_accusations(GameState& g, const std::vector<std::size_t>& accused_now, std::vector<std::uint8_t>& flag) {
  for (std::size_t i : accused_now) {
    if (flag[i]) {
      ++g.reaccusations;
      continue;
    }
    flag[i] = 1;
    g.accused.push_back(i);
    if (!std::binary_search(g.colluders.begin(), g.colluders.end(), i)) ++g.psi;
    g.remaining.erase(std::remove(g.remaining.begin(), g.remaining.end(), i), g.remaining.end());
  }
}

}  // namespace

GameState run_ifpc_game(FingerprintingCode& code, const GameAdversary& adversary, std::size_t N, std::size_t d,
                        std::size_t M, std::uint64_t seed) {
  if (N < 1 || N > d) throw Error(ErrorKind::ConfigError, "need 1 <= N <= d");
  Rng rng = make_rng(seed, {0});
  code.reset(d, N, M, derive_seed(seed, {1}));
  std::vector<std::size_t> pool(d);
  for (std::size_t i = 0; i < d; ++i) pool[i] = i;
  for (std::size_t k = 0; k < N; ++k) std::swap(pool[k], pool[k + rng() % (d - k)]);
  GameState g;
  g.colluders = distinct_sorted(std::vector<std::size_t>(pool.begin(), pool.begin() + static_cast<long>(N)));
  g.remaining = g.colluders;
  std::vector<std::uint8_t> flag(d, 0);
  for (std::size_t j = 0; j < M; ++j) {
    const Bits c = code.challenge();
    RestrictedChallenge view;
    view.round = j;
    view.users = g.remaining;
    for (std::size_t i : g.remaining) view.bits.push_back(c[i]);
    const std::uint8_t a = adversary(view) ? 1 : 0;
    if (!consistent(c, g.remaining, a)) ++g.theta;
    apply_accusations(g, code.accuse(a), flag);
    g.rounds = j + 1;
    g.log.push_back(GameLogRow{j, hash_bits(c), static_cast<double>(a), a, g.accused.size(), g.theta, g.psi});
  }
  return g;
}

std::uint8_t round_answer(double a) { return a >= 0.0 ? 0 : 1; }

std::size_t local_user_bits(std::size_t d) {
  std::size_t b = 0;
  while ((std::size_t{1} << b) < d) ++b;
  return b;
}

std::size_t pauli_attack_qubits(std::size_t d, std::size_t M) { return local_user_bits(d) + 2 * d * M; }

LocalSamples::LocalSamples(std::vector<std::size_t> users, std::size_t d, std::uint64_t key)
    : users_(std::move(users)), d_(d), key_(key) {}

std::size_t LocalSamples::user_bits() const { return local_user_bits(d_); }

Label128 LocalSamples::sigma(std::size_t round, const Bits& q) const {
  std::uint64_t hi = derive_seed(key_, {round, 0x68ULL});
  std::uint64_t lo = derive_seed(key_, {round, 0x6cULL});
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    word = (word << 1) | (q[i] & 1U);
    if (i % 64 == 63 || i + 1 == q.size()) {
      hi = splitmix64(hi ^ word);
      lo = splitmix64(lo + word * 0x9e3779b97f4a7c15ULL);
      word = 0;
    }
  }
  return Label128{hi, lo};
}

Label128 LocalSamples::register_query(std::size_t round, const Bits& q) {
  if (q.size() != d_) throw Error(ErrorKind::LengthMismatch, "query vector must have d bits");
  if (round != round_) {
    registered_.clear();
    round_ = round;
  }
  const Label128 label = sigma(round, q);
  for (const auto& [l, other] : registered_)
    if (l == label && other != q) throw Error(ErrorKind::ConfigError, "label collision in sigma");
  registered_.emplace_back(label, q);
  return label;
}

int LocalSamples::bit(std::size_t s, Label128 label, std::size_t round) const {
  const std::size_t u = users_.at(s);
  if (round == round_)
    for (const auto& [l, q] : registered_)
      if (l == label) return q[u];
  // Unregistered coordinates hold q'_u for a uniformly random q'.
  return static_cast<int>(derive_seed(key_, {round, label.hi, label.lo, u}) & 1U);
}

int LocalSamples::user_block_bit(std::size_t s, std::size_t k) const {
  const std::size_t b = user_bits();
  return static_cast<int>((users_.at(s) >> (b - 1 - k)) & 1U);
}

PauliSamples::PauliSamples(std::vector<std::size_t> users, std::size_t d) : users_(std::move(users)), d_(d) {}

std::array<std::uint8_t, 2> PauliSamples::pair(std::size_t s, std::size_t user) const {
  if (users_.at(s) != user) return {0, 0};
  return otp_encrypt_bit(sk_.at(user), 1);
}

int PauliSamples::parity(std::size_t s, const Bits& b) const {
  if (b.size() != 2 * d_) throw Error(ErrorKind::LengthMismatch, "parity mask must have 2d bits");
  const std::size_t u = users_.at(s);
  const auto e = otp_encrypt_bit(sk_.at(u), 1);
  return (e[0] * b[2 * u] + e[1] * b[2 * u + 1]) & 1;
}

LocalMechanism empirical_mean_local() {
  return [](const LocalSamples& samples, Label128 label, std::size_t round) {
    double acc = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) acc += 1.0 - 2.0 * samples.bit(s, label, round);
    return acc / static_cast<double>(samples.size());
  };
}

LocalMechanism constant_local(double value) {
  return [value](const LocalSamples&, Label128, std::size_t) { return value; };
}

PauliMechanism empirical_mean_pauli() {
  return [](const PauliSamples& samples, const Bits& b) {
    double acc = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) acc += 1.0 - 2.0 * samples.parity(s, b);
    return acc / static_cast<double>(samples.size());
  };
}

namespace {

// Shared round loop. `answer_round` builds the state for q and returns
// the mechanism's answer.
template <class AnswerRound>
AttackOutcome attack_loop(FingerprintingCode& code, const AttackConfig& cfg, std::uint64_t seed,
                          const std::vector<std::size_t>& users, AnswerRound&& answer_round) {
  AttackOutcome out;
  Rng rng = make_rng(seed, {3});
  code.reset(cfg.d, cfg.N, cfg.M, derive_seed(seed, {1}));
  GameState& g = out.game;
  g.colluders = distinct_sorted(users);
  g.remaining = g.colluders;
  std::vector<std::uint8_t> flag(cfg.d, 0);
  std::vector<std::uint8_t> in_remaining(cfg.d, 0);
  Bits q(cfg.d);
  for (std::size_t j = 0; j < cfg.M; ++j) {
    const Bits c = code.challenge();
    std::fill(in_remaining.begin(), in_remaining.end(), 0);
    for (std::size_t i : g.remaining) in_remaining[i] = 1;
    std::size_t ones = 0;
    for (std::size_t i = 0; i < cfg.d; ++i) {
      if (flag[i]) q[i] = 0;
      else if (!cfg.simulated || in_remaining[i]) q[i] = c[i];
      else q[i] = fair_coin(rng) ? 1 : 0;
      ones += q[i];
    }
    const double a = answer_round(j, q, out.transcript);
    const double truth = 1.0 - 2.0 * static_cast<double>(ones) / static_cast<double>(cfg.d);
    const double err = std::abs(a - truth);
    out.max_error = std::max(out.max_error, err);
    out.answers.push_back(a);
    out.transcript.rounds.back().answer = a;
    out.transcript.rounds.back().truth = truth;
    const std::uint8_t rounded = round_answer(a);
    if (!consistent(c, g.remaining, rounded)) ++g.theta;
    apply_accusations(g, code.accuse(rounded), flag);
    g.rounds = j + 1;
    g.log.push_back(GameLogRow{j, hash_bits(c), a, rounded, g.accused.size(), g.theta, g.psi});
    const bool probe = std::all_of(c.begin(), c.end(), [](std::uint8_t b) { return b == 1; });
    if (err >= cfg.force_level && probe && !out.forced_on_probe) {
      out.forced_on_probe = true;
      out.probe_forced_round = j;
    }
    if (err >= cfg.force_level && !out.forced) {
      out.forced = true;
      out.forced_round = j;
      if (cfg.stop_on_force) break;
    }
  }
  return out;
}

std::vector<std::size_t> draw_users(const AttackConfig& cfg, std::uint64_t seed) {
  if (cfg.N < 1 || cfg.d < 2) throw Error(ErrorKind::ConfigError, "need N >= 1 and d >= 2");
  Rng rng = make_rng(seed, {0});
  std::vector<std::size_t> users(cfg.N);
  for (std::size_t& u : users) u = static_cast<std::size_t>(rng() % cfg.d);
  return users;
}

}  // namespace

AttackOutcome run_local_attack(const LocalMechanism& mechanism, FingerprintingCode& code, const AttackConfig& cfg,
                               std::uint64_t seed) {
  const std::vector<std::size_t> users = draw_users(cfg, seed);
  LocalSamples samples(users, cfg.d, derive_seed(seed, {2}));
  AttackOutcome out = attack_loop(code, cfg, seed, users, [&](std::size_t j, const Bits& q, Transcript& t) {
    const Label128 label = samples.register_query(j, q);
    t.record(Observable{SingleQubitZ{static_cast<std::size_t>(label.lo)}}, 0.0, 0.0);
    return mechanism(samples, label, j);
  });
  out.qubits = 0;
  return out;
}

AttackOutcome run_pauli_attack(const PauliMechanism& mechanism, FingerprintingCode& code, const AttackConfig& cfg,
                               std::uint64_t seed) {
  const std::vector<std::size_t> users = draw_users(cfg, seed);
  PauliSamples samples(users, cfg.d);
  Rng key_rng = make_rng(seed, {4});
  const std::size_t offset = local_user_bits(cfg.d);
  AttackOutcome out = attack_loop(code, cfg, seed, users, [&](std::size_t j, const Bits& q, Transcript& t) {
    Bits sk(cfg.d);
    for (auto& b : sk) b = fair_coin(key_rng) ? 1 : 0;
    const Bits b = otp_encrypt(sk, q);
    samples.set_round_key(sk);
    ZParity z;
    if (cfg.d <= 64)
      for (std::size_t k = 0; k < b.size(); ++k)
        if (b[k]) z.support.push_back(offset + 2 * cfg.d * j + k);
    t.record(Observable{z}, 0.0, 0.0);
    return mechanism(samples, b);
  });
  out.qubits = pauli_attack_qubits(cfg.d, cfg.M);
  return out;
}

}  // namespace qadapt
