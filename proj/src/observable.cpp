#include "qadapt/observable.hpp"

#include <algorithm>
#include <sstream>

namespace qadapt {

ZParity make_zparity(std::vector<std::size_t> support) {
  std::sort(support.begin(), support.end());
  if (std::adjacent_find(support.begin(), support.end()) != support.end())
    throw Error(ErrorKind::InvalidObservable, "ZParity support has duplicates");
  return ZParity{std::move(support)};
}

ZParity make_zparity_from_bits(const std::vector<std::uint8_t>& mask) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s.push_back(i);
  return ZParity{std::move(s)};
}

PauliString make_pauli(const std::string& symbols) {
  for (char c : symbols)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      throw Error(ErrorKind::InvalidObservable, "Pauli symbol must be one of IXYZ");
  return PauliString{symbols};
}

RankOneProjector make_projector(const Vec& psi) {
  if (std::abs(psi.norm() - 1.0) > kUnitNormTol)
    throw Error(ErrorKind::InvalidObservable, "projector vector must have unit norm");
  return RankOneProjector{psi};
}

HermitianDense make_hermitian_any_norm(const Mat& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorKind::InvalidObservable, "matrix must be square and non-empty");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw Error(ErrorKind::InvalidObservable, "matrix is not Hermitian");
  Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return HermitianDense{h, es.eigenvalues(), es.eigenvectors()};
}

HermitianDense make_hermitian(const Mat& m) {
  HermitianDense h = make_hermitian_any_norm(m);
  if (h.w.cwiseAbs().maxCoeff() > 1.0 + kSpectralSlack)
    throw Error(ErrorKind::InvalidObservable, "spectral norm exceeds 1");
  return h;
}

std::size_t locality(const Observable& obs) {
  return std::visit(overloaded{
                        [](const SingleQubitZ&) -> std::size_t { return 1; },
                        [](const ZParity& z) -> std::size_t { return z.support.size(); },
                        [](const PauliString& p) -> std::size_t {
                          return static_cast<std::size_t>(
                              std::count_if(p.symbols.begin(), p.symbols.end(), [](char c) { return c != 'I'; }));
                        },
                        [](const RankOneProjector& r) -> std::size_t {
                          std::size_t n = 0;
                          while ((std::size_t{1} << n) < static_cast<std::size_t>(r.psi.size())) ++n;
                          return n;
                        },
                        [](const HermitianDense& h) -> std::size_t {
                          std::size_t n = 0;
                          while ((std::size_t{1} << n) < static_cast<std::size_t>(h.matrix.rows())) ++n;
                          return n;
                        },
                    },
                    obs);
}

bool is_diagonal(const Observable& obs) {
  return std::visit(overloaded{
                        [](const SingleQubitZ&) { return true; },
                        [](const ZParity&) { return true; },
                        [](const PauliString& p) {
                          return std::all_of(p.symbols.begin(), p.symbols.end(),
                                             [](char c) { return c == 'I' || c == 'Z'; });
                        },
                        [](const RankOneProjector&) { return false; },
                        [](const HermitianDense&) { return false; },
                    },
                    obs);
}

bool is_identity(const Observable& obs) {
  return std::visit(overloaded{
                        [](const SingleQubitZ&) { return false; },
                        [](const ZParity& z) { return z.support.empty(); },
                        [](const PauliString& p) {
                          return std::all_of(p.symbols.begin(), p.symbols.end(), [](char c) { return c == 'I'; });
                        },
                        [](const RankOneProjector&) { return false; },
                        [](const HermitianDense& h) {
                          Mat id = Mat::Identity(h.matrix.rows(), h.matrix.cols());
                          return (h.matrix - id).cwiseAbs().maxCoeff() < kHermitianTol;
                        },
                    },
                    obs);
}

Mat pauli_matrix(char symbol) {
  Mat m(2, 2);
  const cplx i(0.0, 1.0);
  switch (symbol) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw Error(ErrorKind::InvalidObservable, "unknown Pauli symbol");
  }
  return m;
}

Mat pauli_string_matrix(const std::string& symbols) {
  Mat out = Mat::Identity(1, 1);
  for (char c : symbols) {
    Mat p = pauli_matrix(c);
    Mat next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index col = 0; col < out.cols(); ++col) next.block(2 * r, 2 * col, 2, 2) = out(r, col) * p;
    out = std::move(next);
  }
  return out;
}

namespace {
std::size_t qubits_for(std::size_t dim) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < dim) ++n;
  if ((std::size_t{1} << n) != dim) throw Error(ErrorKind::DimensionMismatch, "dimension is not a power of two");
  return n;
}

Mat diagonal_parity(const std::vector<std::size_t>& support, std::size_t dim) {
  std::size_t n = qubits_for(dim);
  Mat m = Mat::Zero(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) {
    int parity = 0;
    for (std::size_t q : support) {
      if (q >= n) throw Error(ErrorKind::DimensionMismatch, "observable qubit out of range");
      parity ^= static_cast<int>((x >> (n - 1 - q)) & 1U);
    }
    m(x, x) = parity ? -1.0 : 1.0;
  }
  return m;
}
}  // namespace

Mat to_dense(const Observable& obs, std::size_t dim) {
  return std::visit(overloaded{
                        [&](const SingleQubitZ& z) { return diagonal_parity({z.index}, dim); },
                        [&](const ZParity& z) { return diagonal_parity(z.support, dim); },
                        [&](const PauliString& p) {
                          if ((std::size_t{1} << p.symbols.size()) != dim)
                            throw Error(ErrorKind::DimensionMismatch, "Pauli string length vs dimension");
                          return pauli_string_matrix(p.symbols);
                        },
                        [&](const RankOneProjector& r) -> Mat {
                          if (static_cast<std::size_t>(r.psi.size()) != dim)
                            throw Error(ErrorKind::DimensionMismatch, "projector dimension");
                          return r.psi * r.psi.adjoint();
                        },
                        [&](const HermitianDense& h) -> Mat {
                          if (static_cast<std::size_t>(h.matrix.rows()) != dim)
                            throw Error(ErrorKind::DimensionMismatch, "matrix dimension");
                          return h.matrix;
                        },
                    },
                    obs);
}

std::string describe(const Observable& obs) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const SingleQubitZ& z) { os << "Z_" << z.index; },
                 [&](const ZParity& z) {
                   os << "Zparity[";
                   for (std::size_t k = 0; k < z.support.size(); ++k) os << (k ? " " : "") << z.support[k];
                   os << "]";
                 },
                 [&](const PauliString& p) { os << p.symbols; },
                 [&](const RankOneProjector& r) { os << "projector(d=" << r.psi.size() << ")"; },
                 [&](const HermitianDense& h) { os << "hermitian(d=" << h.matrix.rows() << ")"; },
             },
             obs);
  return os.str();
}

}  // namespace qadapt
