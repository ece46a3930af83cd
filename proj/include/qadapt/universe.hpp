#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/rng.hpp"
#include "qadapt/shadows.hpp"
#include "qadapt/state.hpp"

namespace qadapt {

// A finite family of classical snapshots addressed by integer codes that
// fit in m_bits. Each code x carries an unbiased snapshot matrix rho_x, so
// a query O has the value table f(x) = tr(O rho_x).
class ShadowUniverse {
 public:
  virtual ~ShadowUniverse() = default;
  virtual std::size_t size() const = 0;
  virtual std::size_t m_bits() const = 0;
  virtual std::size_t dim() const = 0;
  // Probability of observing each code when measuring `state`.
  virtual std::vector<double> born(const DenseState& state) const = 0;
  virtual std::vector<double> values(const Mat& obs) const = 0;
  virtual Mat snapshot_matrix(std::size_t code) const = 0;
};

// Random-Pauli snapshots of n qubits; code = pauli_code() (base 6).
class PauliUniverse : public ShadowUniverse {
 public:
  explicit PauliUniverse(std::size_t n_qubits);
  std::size_t size() const override { return size_; }
  std::size_t m_bits() const override;
  std::size_t dim() const override { return std::size_t{1} << n_; }
  std::vector<double> born(const DenseState& state) const override;
  std::vector<double> values(const Mat& obs) const override;
  Mat snapshot_matrix(std::size_t code) const override;
  std::size_t n_qubits() const { return n_; }

 private:
  std::size_t n_;
  std::size_t size_;
};

// Measurement in one of the D+1 mutually unbiased bases of q qubits
// (D = 2^q), built from the trace form of GF(2^q). The full set is a
// 2-design, so rho_x = (D+1)|v_x><v_x| - I is unbiased. Code = b*D + k for
// basis b and outcome k.
class MubUniverse : public ShadowUniverse {
 public:
  explicit MubUniverse(std::size_t q_qubits);
  std::size_t size() const override { return vectors_.size(); }
  std::size_t m_bits() const override;
  std::size_t dim() const override { return D_; }
  std::vector<double> born(const DenseState& state) const override;
  std::vector<double> values(const Mat& obs) const override;
  Mat snapshot_matrix(std::size_t code) const override;
  const Vec& vector(std::size_t code) const { return vectors_[code]; }
  // Shared instance per q; construction is deterministic.
  static std::shared_ptr<const MubUniverse> get(std::size_t q_qubits);

 private:
  std::size_t q_;
  std::size_t D_;
  std::vector<Vec> vectors_;
};

struct CodeHistogram {
  std::shared_ptr<const ShadowUniverse> universe;
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;
};

// Exact multinomial draw of `count` snapshot codes from the Born law, via
// sequential conditional binomials.
CodeHistogram sample_histogram(std::shared_ptr<const ShadowUniverse> universe, const DenseState& state,
                               std::uint64_t count, Rng& rng);
CodeHistogram histogram_from_dataset(std::shared_ptr<const PauliUniverse> universe, const PauliDataset& ds);

}  // namespace qadapt
