#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/observable.hpp"
#include "qadapt/rng.hpp"

namespace qadapt {

class DiagonalModel;

// One computational-basis sample. Only base bits are stored; any further
// coordinate is computed on demand by the owning model.
class LazyBitstring {
 public:
  LazyBitstring(std::shared_ptr<const DiagonalModel> model, std::vector<std::uint8_t> base)
      : model_(std::move(model)), base_(std::move(base)) {}
  bool bit(std::size_t coordinate) const;
  const std::vector<std::uint8_t>& base_bits() const { return base_; }
  std::size_t width() const;

 private:
  std::shared_ptr<const DiagonalModel> model_;
  std::vector<std::uint8_t> base_;
};

// A classical distribution over bitstrings with exact Z-type marginals.
class DiagonalModel {
 public:
  virtual ~DiagonalModel() = default;
  // Number of addressable coordinates.
  virtual std::size_t width() const = 0;
  virtual std::vector<std::uint8_t> sample_base(Rng& rng) const = 0;
  virtual bool bit(const std::vector<std::uint8_t>& base, std::size_t coordinate) const = 0;
  // Exact E[(-1)^{sum of bits over support}].
  virtual double z_expectation(const std::vector<std::size_t>& support) const = 0;
};

// Independent bits with P(bit_i = 1) = p_i.
class ProductBitModel : public DiagonalModel {
 public:
  explicit ProductBitModel(std::vector<double> p_one);
  static std::shared_ptr<ProductBitModel> uniform(std::size_t n);
  std::size_t width() const override { return p_.size(); }
  std::vector<std::uint8_t> sample_base(Rng& rng) const override;
  bool bit(const std::vector<std::uint8_t>& base, std::size_t coordinate) const override;
  double z_expectation(const std::vector<std::size_t>& support) const override;

 private:
  std::vector<double> p_;
};

struct DiagonalState {
  std::shared_ptr<const DiagonalModel> model;
  std::size_t n_qubits() const { return model->width(); }
};

struct DenseState {
  Mat rho;
  std::size_t dim() const { return static_cast<std::size_t>(rho.rows()); }
  // log2 of the dimension; throws if not a power of two.
  std::size_t n_qubits() const;
};

using QuantumState = std::variant<DiagonalState, DenseState>;

// Validates the density-matrix invariants.
DenseState make_dense_state(const Mat& rho);
DenseState pure_state(const Vec& psi);
DenseState maximally_mixed(std::size_t dim);
DenseState basis_state(std::size_t dim, std::size_t index);
Vec haar_vector(std::size_t dim, Rng& rng);
// Random mixed state of the given rank: normalized W W^dagger with Gaussian W.
DenseState random_state(std::size_t dim, std::size_t rank, Rng& rng);

LazyBitstring sample_bitstring(const DiagonalState& state, Rng& rng);

double expectation(const QuantumState& state, const Observable& obs);
double expectation(const DenseState& state, const Observable& obs);
double expectation(const DiagonalState& state, const Observable& obs);
// Reference implementation of expectation for dense states via the
// eigenbasis of rho: sum_k lambda_k <e_k|O|e_k>.
double expectation_eigenbasis(const DenseState& state, const Observable& obs);

}  // namespace qadapt
