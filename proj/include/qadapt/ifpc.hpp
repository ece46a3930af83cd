#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/rng.hpp"
#include "qadapt/transcript.hpp"

namespace qadapt {

using Bits = std::vector<std::uint8_t>;

// Doubled encoding of m xor sk: bit 1 -> "10", bit 0 -> "01".
Bits otp_encrypt(const Bits& sk, const Bits& m);
Bits otp_decrypt(const Bits& sk, const Bits& c);
std::array<std::uint8_t, 2> otp_encrypt_bit(std::uint8_t sk, std::uint8_t m);
// Dec^1 through the identity Enc^1(sk, 1) . c mod 2.
std::uint8_t parity_decrypt_identity(std::uint8_t sk, std::array<std::uint8_t, 2> pair);
// Direct table decryption, used as the reference for the identity.
std::uint8_t table_decrypt(std::uint8_t sk, std::array<std::uint8_t, 2> pair);

class FingerprintingCode {
 public:
  virtual ~FingerprintingCode() = default;
  virtual void reset(std::size_t d, std::size_t N, std::size_t M, std::uint64_t seed) = 0;
  virtual Bits challenge() = 0;
  // Consumes the rounded answer for the last challenge; returns newly
  // accused users, never repeating an earlier accusation.
  virtual std::vector<std::size_t> accuse(std::uint8_t rounded) = 0;
};

struct BaselineCodeConfig {
  double probe_probability = 0.1;   // all-ones challenge rounds
  double cutoff = 0.01;             // bias range [cutoff, 1 - cutoff]
  double threshold_factor = 4.0;    // accuse when score > factor * sqrt(M)
};

// Score-based tracing: biases from the arcsine law, symmetric correlation
// scores, and a fixed accusation threshold. Probe rounds carry no score.
class BaselineTracingCode : public FingerprintingCode {
 public:
  explicit BaselineTracingCode(BaselineCodeConfig cfg = {}) : cfg_(cfg) {}
  void reset(std::size_t d, std::size_t N, std::size_t M, std::uint64_t seed) override;
  Bits challenge() override;
  std::vector<std::size_t> accuse(std::uint8_t rounded) override;
  const std::vector<double>& scores() const { return scores_; }
  double threshold() const { return threshold_; }

 private:
  BaselineCodeConfig cfg_;
  Rng rng_;
  std::size_t d_ = 0;
  double threshold_ = 0.0;
  std::vector<double> scores_;
  std::vector<std::uint8_t> accused_;
  Bits last_;
  double last_p_ = 0.5;
  bool last_probe_ = false;
};

// The adversary's view of a challenge: only the coordinates of the
// still-unaccused colluders.
struct RestrictedChallenge {
  std::size_t round = 0;
  std::vector<std::size_t> users;
  Bits bits;
  std::uint64_t checksum() const;
};

struct GameLogRow {
  std::size_t round = 0;
  std::uint64_t challenge_hash = 0;
  double answer = 0.0;
  std::uint8_t rounded = 0;
  std::size_t accused_count = 0;
  std::size_t theta = 0;
  std::size_t psi = 0;
};

struct GameState {
  std::vector<std::size_t> colluders;   // distinct users behind the samples
  std::vector<std::size_t> remaining;   // S^j
  std::vector<std::size_t> accused;     // T^j in accusation order
  std::size_t theta = 0;                // inconsistent rounds
  std::size_t psi = 0;                  // false accusations
  std::size_t rounds = 0;
  std::size_t reaccusations = 0;        // must stay 0
  std::vector<GameLogRow> log;
};

std::uint64_t hash_bits(const Bits& b);
// Consistent iff some remaining colluder has c_i equal to the rounded bit;
// an empty S^j is never consistent.
bool consistent(const Bits& challenge, const std::vector<std::size_t>& remaining, std::uint8_t rounded);

using GameAdversary = std::function<std::uint8_t(const RestrictedChallenge&)>;

GameState run_ifpc_game(FingerprintingCode& code, const GameAdversary& adversary, std::size_t N, std::size_t d,
                        std::size_t M, std::uint64_t seed);

// ------------------------------------------------------------- attacks

// Rounded answer: bit 0 (Z eigenvalue +1) iff a >= 0.
std::uint8_t round_answer(double a);

// Samples of the local construction. Coordinate (label, j) of group j holds
// q_user for the q with sigma_j(q) = label; sigma_j is a keyed 128-bit
// hash evaluated only at registered points.
struct Label128 {
  std::uint64_t hi = 0, lo = 0;
  bool operator==(const Label128& o) const { return hi == o.hi && lo == o.lo; }
};

class LocalSamples {
 public:
  LocalSamples(std::vector<std::size_t> users, std::size_t d, std::uint64_t key);
  Label128 sigma(std::size_t round, const Bits& q) const;
  // Registers q for this round; throws on a label collision.
  Label128 register_query(std::size_t round, const Bits& q);
  std::size_t size() const { return users_.size(); }
  std::size_t user_bits() const;
  // Bit of sample s at coordinate (label, round).
  int bit(std::size_t s, Label128 label, std::size_t round) const;
  int user_block_bit(std::size_t s, std::size_t k) const;

 private:
  std::vector<std::size_t> users_;
  std::size_t d_;
  std::uint64_t key_;
  std::size_t round_ = static_cast<std::size_t>(-1);
  std::vector<std::pair<Label128, Bits>> registered_;
};

// Samples of the Pauli construction: group j holds Enc^1(sk_u^j, 1) on the
// pair of user u and 00 elsewhere.
class PauliSamples {
 public:
  PauliSamples(std::vector<std::size_t> users, std::size_t d);
  void set_round_key(Bits sk) { sk_ = std::move(sk); }
  std::size_t size() const { return users_.size(); }
  // Parity b . x mod 2 of sample s on the current group.
  int parity(std::size_t s, const Bits& b) const;
  // The two qubits of user u's pair in the current group.
  std::array<std::uint8_t, 2> pair(std::size_t s, std::size_t user) const;

 private:
  std::vector<std::size_t> users_;
  std::size_t d_;
  Bits sk_;
};

using LocalMechanism = std::function<double(const LocalSamples&, Label128, std::size_t round)>;
using PauliMechanism = std::function<double(const PauliSamples&, const Bits& b)>;

LocalMechanism empirical_mean_local();
LocalMechanism constant_local(double value);
PauliMechanism empirical_mean_pauli();

struct AttackConfig {
  std::size_t N = 5;
  std::size_t d = 10000;
  std::size_t M = 1000;
  bool simulated = false;     // build q from c restricted to S^j only
  bool stop_on_force = true;  // stop at the first forced error of any kind
  double force_level = 0.99;
};

// Transcript queries carry the full parity support only when d <= 64.
struct AttackOutcome {
  Transcript transcript;
  GameState game;
  bool forced = false;
  std::size_t forced_round = 0;
  // Forcing on an all-ones probe round, which happens structurally once
  // enough sample users are accused rather than through sampling noise.
  bool forced_on_probe = false;
  std::size_t probe_forced_round = 0;
  double max_error = 0.0;
  std::vector<double> answers;
  std::size_t qubits = 0;
};

// ceil(log2 d) + 2 d M.
std::size_t pauli_attack_qubits(std::size_t d, std::size_t M);
std::size_t local_user_bits(std::size_t d);

AttackOutcome run_local_attack(const LocalMechanism& mechanism, FingerprintingCode& code, const AttackConfig& cfg,
                               std::uint64_t seed);
AttackOutcome run_pauli_attack(const PauliMechanism& mechanism, FingerprintingCode& code, const AttackConfig& cfg,
                               std::uint64_t seed);

}  // namespace qadapt
