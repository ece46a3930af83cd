#include "qadapt/state.hpp"

#include <cmath>

namespace qadapt {

bool LazyBitstring::bit(std::size_t coordinate) const { return model_->bit(base_, coordinate); }
std::size_t LazyBitstring::width() const { return model_->width(); }

ProductBitModel::ProductBitModel(std::vector<double> p_one) : p_(std::move(p_one)) {
  for (double p : p_)
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidState, "bit probability outside [0,1]");
}

std::shared_ptr<ProductBitModel> ProductBitModel::uniform(std::size_t n) {
  return std::make_shared<ProductBitModel>(std::vector<double>(n, 0.5));
}

std::vector<std::uint8_t> ProductBitModel::sample_base(Rng& rng) const {
  std::vector<std::uint8_t> out(p_.size());
  for (std::size_t i = 0; i < p_.size(); ++i) out[i] = uniform01(rng) < p_[i] ? 1 : 0;
  return out;
}

bool ProductBitModel::bit(const std::vector<std::uint8_t>& base, std::size_t coordinate) const {
  if (coordinate >= base.size()) throw Error(ErrorKind::DimensionMismatch, "coordinate out of range");
  return base[coordinate] != 0;
}

double ProductBitModel::z_expectation(const std::vector<std::size_t>& support) const {
  double e = 1.0;
  for (std::size_t q : support) {
    if (q >= p_.size()) throw Error(ErrorKind::DimensionMismatch, "coordinate out of range");
    e *= 1.0 - 2.0 * p_[q];
  }
  return e;
}

std::size_t DenseState::n_qubits() const {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim()) ++n;
  if ((std::size_t{1} << n) != dim()) throw Error(ErrorKind::DimensionMismatch, "dimension is not a power of two");
  return n;
}

DenseState make_dense_state(const Mat& rho) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) throw Error(ErrorKind::InvalidState, "density matrix must be square");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw Error(ErrorKind::InvalidState, "density matrix is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kTraceTol || std::abs(rho.trace().imag()) > kTraceTol)
    throw Error(ErrorKind::InvalidState, "density matrix trace differs from 1");
  Mat h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kPsdTol) throw Error(ErrorKind::InvalidState, "density matrix is not PSD");
  return DenseState{h};
}

DenseState pure_state(const Vec& psi) {
  Vec v = psi / psi.norm();
  return make_dense_state(v * v.adjoint());
}

DenseState maximally_mixed(std::size_t dim) {
  return DenseState{Mat::Identity(dim, dim) / static_cast<double>(dim)};
}

DenseState basis_state(std::size_t dim, std::size_t index) {
  Mat m = Mat::Zero(dim, dim);
  m(index, index) = 1.0;
  return DenseState{m};
}

Vec haar_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    double re = g(rng);
    double im = g(rng);
    v(i) = cplx(re, im);
  }
  return v / v.norm();
}

DenseState random_state(std::size_t dim, std::size_t rank, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat w(dim, rank);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < rank; ++c) {
      double re = g(rng);
      double im = g(rng);
      w(r, c) = cplx(re, im);
    }
  Mat rho = w * w.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint());
  return DenseState{rho};
}

LazyBitstring sample_bitstring(const DiagonalState& state, Rng& rng) {
  return LazyBitstring(state.model, state.model->sample_base(rng));
}

double expectation(const DenseState& state, const Observable& obs) {
  const std::size_t d = state.dim();
  double value = std::visit(overloaded{
                                [&](const RankOneProjector& r) {
                                  if (static_cast<std::size_t>(r.psi.size()) != d)
                                    throw Error(ErrorKind::DimensionMismatch, "projector dimension");
                                  return (r.psi.adjoint() * state.rho * r.psi)(0, 0).real();
                                },
                                [&](const HermitianDense& h) {
                                  if (static_cast<std::size_t>(h.matrix.rows()) != d)
                                    throw Error(ErrorKind::DimensionMismatch, "matrix dimension");
                                  return trace_product(h.matrix, state.rho);
                                },
                                [&](const auto& other) {
                                  Mat o = to_dense(Observable(other), d);
                                  return trace_product(o, state.rho);
                                },
                            },
                            obs);
  return value;
}

double expectation_eigenbasis(const DenseState& state, const Observable& obs) {
  Eigen::SelfAdjointEigenSolver<Mat> es(state.rho);
  Mat o = to_dense(obs, state.dim());
  double total = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    Vec e = es.eigenvectors().col(k);
    total += es.eigenvalues()(k) * (e.adjoint() * o * e)(0, 0).real();
  }
  return total;
}

double expectation(const DiagonalState& state, const Observable& obs) {
  return std::visit(overloaded{
                        [&](const SingleQubitZ& z) { return state.model->z_expectation({z.index}); },
                        [&](const ZParity& z) { return state.model->z_expectation(z.support); },
                        [&](const PauliString& p) {
                          std::vector<std::size_t> s;
                          for (std::size_t q = 0; q < p.symbols.size(); ++q) {
                            if (p.symbols[q] == 'Z') s.push_back(q);
                            else if (p.symbols[q] != 'I')
                              throw Error(ErrorKind::NonDiagonalObservableOnDiagonalState, "X or Y symbol");
                          }
                          return state.model->z_expectation(s);
                        },
                        [&](const auto&) -> double {
                          throw Error(ErrorKind::NonDiagonalObservableOnDiagonalState,
                                      "dense observables need a dense state");
                        },
                    },
                    obs);
}

double expectation(const QuantumState& state, const Observable& obs) {
  return std::visit([&](const auto& s) { return expectation(s, obs); }, state);
}

}  // namespace qadapt
