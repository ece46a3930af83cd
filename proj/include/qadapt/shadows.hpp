#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/observable.hpp"
#include "qadapt/rng.hpp"
#include "qadapt/state.hpp"

namespace qadapt {

enum class Primitive { Pauli, Povm };

enum class PauliBasis : std::uint8_t { Z = 0, X = 1, Y = 2 };

// Per-qubit code = 2 * basis + outcome, i.e. one of the six Pauli
// eigenstates. Text form uses the alphabet "01+-rl" in code order.
struct PauliSnapshot {
  std::vector<std::uint8_t> codes;
  std::size_t n_qubits() const { return codes.size(); }
  PauliBasis basis(std::size_t q) const { return static_cast<PauliBasis>(codes[q] >> 1); }
  int outcome(std::size_t q) const { return codes[q] & 1; }
};

// How tr(Z_i rho_hat) is evaluated when qubit i was not measured in Z.
// TensorFactor is the exact inverse-channel value (0). SignOfOutcome reads
// the outcome sign in any basis, which for diagonal states is the fair
// +-3 coin used in the attack analysis.
enum class ZValueModel { TensorFactor, SignOfOutcome };

PauliSnapshot pauli_snapshot(const LazyBitstring& sample, std::size_t n_qubits, Rng& rng);
PauliSnapshot pauli_snapshot(const DiagonalState& state, Rng& rng);
PauliSnapshot pauli_snapshot(const DenseState& state, Rng& rng);
// Born distribution over all 6^n snapshot codes of a dense n-qubit state,
// indexed by pauli_code().
std::vector<double> pauli_snapshot_distribution(const DenseState& state);

double snapshot_expectation(const PauliSnapshot& snap, const Observable& obs,
                            ZValueModel model = ZValueModel::TensorFactor);
// Base-6 integer code, qubit 0 most significant.
std::uint64_t pauli_code(const PauliSnapshot& snap);
PauliSnapshot pauli_from_code(std::uint64_t code, std::size_t n_qubits);
// Snapshot matrix tensor_j (3 |s_j><s_j| - I).
Mat pauli_snapshot_matrix(const PauliSnapshot& snap);

std::string encode_pauli(const PauliSnapshot& snap);
PauliSnapshot decode_pauli(const std::string& line);

struct PovmSnapshot {
  Vec v;
  std::size_t dim() const { return static_cast<std::size_t>(v.size()); }
  Mat implied() const;
  double value(const Mat& obs) const;
};

// Rejection sampler for the density d <v|rho|v> dv. The eigendecomposition
// is computed once so repeated draws are cheap.
class PovmSampler {
 public:
  explicit PovmSampler(const DenseState& state, std::size_t proposal_budget = 10000);
  Vec sample_vector(Rng& rng) const;
  PovmSnapshot sample(Rng& rng) const { return PovmSnapshot{sample_vector(rng)}; }
  std::size_t dim() const { return d_; }
  double lambda_max() const { return lambda_max_; }

 private:
  std::size_t d_;
  std::size_t budget_;
  double lambda_max_;
  Mat half_;  // rho = half_ * half_^dagger restricted to the support
};

PovmSnapshot povm_snapshot(const DenseState& state, Rng& rng);

struct PauliDataset {
  std::vector<PauliSnapshot> snaps;
  std::uint64_t state_seed = 0;
  std::size_t size() const { return snaps.size(); }
};

struct PovmDataset {
  std::size_t d = 0;
  std::vector<Vec> snaps;
  std::uint64_t state_seed = 0;
  std::size_t size() const { return snaps.size(); }
};

PauliDataset make_pauli_dataset(const DenseState& state, std::size_t count, std::uint64_t seed);
PauliDataset make_pauli_dataset(const DiagonalState& state, std::size_t count, std::uint64_t seed);
PovmDataset make_povm_dataset(const DenseState& state, std::size_t count, std::uint64_t seed);

std::vector<double> snapshot_values(const PauliDataset& ds, const Observable& obs,
                                    ZValueModel model = ZValueModel::TensorFactor);
std::vector<double> snapshot_values(const PovmDataset& ds, const Mat& obs);
// Straight-line reference for snapshot_values on POVM data.
std::vector<double> snapshot_values_serial(const PovmDataset& ds, const Mat& obs);

double empirical_mean(const PauliDataset& ds, const Observable& obs, ZValueModel model = ZValueModel::TensorFactor);
double empirical_mean(const PovmDataset& ds, const Observable& obs);

// Lower-middle element on even length.
double median_lower(std::vector<double> values);
std::vector<double> batch_means(const std::vector<double>& values, std::size_t K);
double median_of_means(const std::vector<double>& values, std::size_t K);
double median_of_means(const PauliDataset& ds, const Observable& obs, std::size_t K,
                       ZValueModel model = ZValueModel::TensorFactor);
double median_of_means(const PovmDataset& ds, const Observable& obs, std::size_t K);

double shadow_norm_bound(const Observable& obs, Primitive primitive);
double spectral_norm(const Mat& m);

// Exact sufficient statistic for linear shadow queries: per batch the sum
// of |v><v| over the batch's snapshots. Values of truncated queries can be
// recovered only when truncation provably never binds.
struct PovmSketch {
  std::size_t d = 0;
  std::size_t batch_size = 0;
  std::vector<Mat> batch_sums;
  std::size_t count() const { return batch_size * batch_sums.size(); }
  double mean(const Mat& obs) const;
  std::vector<double> batch_means(const Mat& obs) const;
};

// Batch k is drawn from the stream derive_seed(seed, {k}); OpenMP spreads
// batches across threads without changing any value.
PovmSketch build_povm_sketch(const PovmSampler& sampler, std::size_t batches, std::size_t batch_size,
                             std::uint64_t seed);
PovmSketch build_povm_sketch_serial(const PovmSampler& sampler, std::size_t batches, std::size_t batch_size,
                                    std::uint64_t seed);
PovmSketch sketch_from_dataset(const PovmDataset& ds, std::size_t batches);

// Binary block: little-endian u32 magic, u32 d, u64 count, then
// count * d pairs of f64 (re, im).
inline constexpr std::uint32_t kPovmMagic = 0x56505351;  // "QSPV"
void write_povm_block(std::ostream& os, const PovmDataset& ds);
PovmDataset read_povm_block(std::istream& is);
void write_pauli_lines(std::ostream& os, const PauliDataset& ds);
PauliDataset read_pauli_lines(std::istream& is);

}  // namespace qadapt
