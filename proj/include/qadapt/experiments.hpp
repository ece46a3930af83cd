#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qadapt/attack.hpp"
#include "qadapt/csv.hpp"
#include "qadapt/ifpc.hpp"
#include "qadapt/mechanisms.hpp"
#include "qadapt/subspace.hpp"
#include "qadapt/threshold.hpp"

namespace qadapt {

// Trials inside each experiment run under OpenMP. Trial t always draws
// from derive_seed(seed, {t}), so results do not depend on thread count.

// ------------------------------------------------------------ attack
struct AttackExpConfig {
  std::size_t N = 10000;
  std::vector<std::size_t> M_list = {100, 200, 400, 800, 1600, 3200, 6400, 10000};
  std::size_t runs = 100;
  AttackParams params;
};
AttackResult exp_attack(const AttackExpConfig& cfg, std::uint64_t seed);
CsvTable attack_table(const AttackResult& r, std::uint64_t seed);
// Adaptive errors of independent runs at a single (N, M).
std::vector<double> exp_attack_errors(std::size_t N, std::size_t M, std::size_t runs, std::uint64_t seed,
                                      const AttackParams& params = {});

// ------------------------------------------------------------ dp median
struct DpMedianExpConfig {
  std::size_t n_qubits = 1;
  std::size_t K = 48;
  std::size_t batch_size = 256;
  std::size_t trials = 100;
  DpMedianConfig median;
};
struct DpMedianTrial {
  double answer = 0.0;
  double truth = 0.0;
};
std::vector<DpMedianTrial> exp_dp_median(const DpMedianExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ POVM concentration
struct ConcentrationConfig {
  std::size_t d = 8;
  double B = 2.0;
  std::size_t samples = 100000;
  std::vector<double> taus = {0.25, 0.5, 1.0};
};
struct ConcentrationResult {
  std::vector<double> taus, tails, tail_bounds;
  double m2 = 0.0, m2_se = 0.0, m2_bound = 0.0;
  double m4 = 0.0, m4_se = 0.0, m4_bound = 0.0;
  double frobenius_sq = 0.0;
};
// Tail bound 2 exp(-tau^2 / (16B + 4 sqrt(B) tau)).
double concentration_bound(double tau, double B);
ConcentrationResult exp_povm_concentration(const ConcentrationConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ truncation bias
struct BiasConfig {
  std::size_t d = 16;
  double B = 4.0;
  std::vector<double> eps_list = {0.2, 0.3};
  std::size_t samples = 1000000;
};
struct BiasResult {
  double eps = 0.0, T = 0.0, bias = 0.0, bias_se = 0.0, max_abs_value = 0.0;
  std::size_t truncated = 0;
};
std::vector<BiasResult> exp_truncation_bias(const BiasConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ threshold contract
struct ThresholdExpConfig {
  std::size_t d = 8;
  double B = 2.0;
  double eps = 0.3;
  std::size_t ell = 10;
  std::size_t M = 200;
  std::size_t streams = 100;
  std::size_t samples = 20000;
  std::size_t batches = 20;
  double noise = 0.006;
};
struct ThresholdStream {
  std::size_t queries = 0, no_count = 0, clause1 = 0, clause2 = 0;
  bool halted = false;
  bool halting_exact = false;
};
std::vector<ThresholdStream> exp_threshold_contract(const ThresholdExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ closeness teacher
struct TeacherExpConfig {
  std::size_t d = 8;
  double eps = 0.3;
  std::size_t samples = 24000;
  std::size_t batches = 24;
  std::size_t trials = 100;
  double noise = 0.006;
};
struct TeacherTrial {
  bool flagged = false;
  double correction_error = 0.0;
};
std::vector<TeacherTrial> exp_teacher(const TeacherExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ subspace learner
struct MistakeBoundConfig {
  std::size_t d = 64;
  double eps = 0.2;
  std::size_t M = 400;
  std::size_t seeds = 100;
  std::size_t state_rank = 2;
};
struct MistakeBoundRun {
  std::size_t mistakes = 0, cap = 0, heavy = 0, final_k = 0, gap_breaches = 0;
};
std::vector<MistakeBoundRun> exp_mistake_bound(const MistakeBoundConfig& cfg, std::uint64_t seed);

struct LearnerExpConfig {
  std::size_t d = 16;
  double B = 4.0;
  double eps = 0.3;
  std::size_t M = 200;
  std::size_t seeds = 100;
  std::size_t state_rank = 4;
  std::size_t teacher_samples = 240000;
  std::size_t teacher_batches = 48;
  std::size_t teacher_ell = 80;
  double teacher_noise = 0.004;
  std::uint64_t pmw_samples = 10000000;
  double pmw_noise = 0.002;
};
struct LearnerRun {
  std::size_t mistakes = 0, final_k = 0, gap_breaches = 0, retained_breaches = 0;
  double max_error = 0.0, max_discarded = 0.0;
  bool completed = false;
  std::string failure;
};
std::vector<LearnerRun> exp_learner(const LearnerExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ PMW
struct PmwExpConfig {
  std::size_t n_qubits = 3;
  std::uint64_t samples = 1000000;
  std::size_t M = 500;
  std::size_t seeds = 100;
  PmwConfig pmw;
};
struct PmwRun {
  double max_error = 0.0, eps_spent = 0.0;
  std::size_t updates = 0, answered = 0, repeat_mismatches = 0;
  bool completed = false;
};
std::vector<PmwRun> exp_pmw(const PmwExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ IFPC
inline constexpr double kBaselineRoundConstant = 80.0;  // M = c N^2 for the baseline code
struct IfpcExpConfig {
  bool pauli = false;
  std::size_t N = 5;
  std::size_t d = 10000;
  double c = kBaselineRoundConstant;
  std::size_t seeds = 100;
  bool stop_on_force = false;
  BaselineCodeConfig code;
};
struct IfpcRun {
  bool forced = false, forced_on_probe = false;
  std::size_t forced_round = 0, probe_forced_round = 0, rounds = 0;
  std::size_t colluders = 0, accused_colluders = 0, psi = 0, theta = 0, reaccusations = 0;
  std::size_t qubits = 0;
};
std::vector<IfpcRun> exp_ifpc(const IfpcExpConfig& cfg, std::uint64_t seed);

// ------------------------------------------------------------ Pauli-Bell
struct BellExpConfig {
  std::size_t n_qubits = 3;
  std::uint64_t bell_samples = 200000;
  double sigma = 0.002;
  std::size_t M = 100;
  std::size_t seeds = 100;
};
struct BellRun {
  double max_error = 0.0;
  double max_unbiased_gap = 0.0;  // max_P |E[q_P] - tr(P rho)^2|, exact
  std::size_t queries = 0;
};
std::vector<BellRun> exp_pauli_bell(const BellExpConfig& cfg, std::uint64_t seed);

// Random Hermitian matrix with the given Frobenius norm squared.
Mat random_hermitian(std::size_t d, double frobenius_sq, Rng& rng);
// Random Pauli string on n qubits, never the identity.
PauliString random_pauli(std::size_t n, Rng& rng);

}  // namespace qadapt
