#include "qadapt/universe.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace qadapt {

namespace {

std::size_t bits_for(std::size_t count) {
  std::size_t m = 0;
  while ((std::size_t{1} << m) < count) ++m;
  return m;
}

Vec single_eigenstate(std::uint8_t code) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  Vec v(2);
  switch (code) {
    case 0: v << 1.0, 0.0; break;
    case 1: v << 0.0, 1.0; break;
    case 2: v << s, s; break;
    case 3: v << s, -s; break;
    case 4: v << s, s * i; break;
    default: v << s, -s * i; break;
  }
  return v;
}

}  // namespace

PauliUniverse::PauliUniverse(std::size_t n_qubits) : n_(n_qubits), size_(1) {
  if (n_qubits == 0 || n_qubits > 7) throw Error(ErrorKind::UniverseTooLarge, "Pauli universe supports 1..7 qubits");
  for (std::size_t q = 0; q < n_; ++q) size_ *= 6;
}

std::size_t PauliUniverse::m_bits() const { return bits_for(size_); }

std::vector<double> PauliUniverse::born(const DenseState& state) const {
  if (state.dim() != dim()) throw Error(ErrorKind::DimensionMismatch, "state vs universe dimension");
  return pauli_snapshot_distribution(state);
}

Mat PauliUniverse::snapshot_matrix(std::size_t code) const { return pauli_snapshot_matrix(pauli_from_code(code, n_)); }

std::vector<double> PauliUniverse::values(const Mat& obs) const {
  const std::size_t d = dim();
  if (static_cast<std::size_t>(obs.rows()) != d) throw Error(ErrorKind::DimensionMismatch, "query dimension");
  // Per-qubit factor tables a[c](r, s) of (3|e_c><e_c| - I).
  Mat factor[6];
  for (std::uint8_t c = 0; c < 6; ++c) {
    Vec e = single_eigenstate(c);
    factor[c] = 3.0 * e * e.adjoint() - Mat::Identity(2, 2);
  }
  std::vector<double> out(size_);
  std::vector<std::uint8_t> codes(n_);
  for (std::size_t x = 0; x < size_; ++x) {
    std::size_t rem = x;
    for (std::size_t q = n_; q-- > 0;) {
      codes[q] = static_cast<std::uint8_t>(rem % 6);
      rem /= 6;
    }
    // tr(O A) = sum_{r,s} O(r,s) A(s,r) with A(s,r) a product over qubits.
    cplx total = 0.0;
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t s = 0; s < d; ++s) {
        cplx a = 1.0;
        for (std::size_t q = 0; q < n_; ++q) {
          const std::size_t sb = (s >> (n_ - 1 - q)) & 1U;
          const std::size_t rb = (r >> (n_ - 1 - q)) & 1U;
          a *= factor[codes[q]](static_cast<Eigen::Index>(sb), static_cast<Eigen::Index>(rb));
        }
        total += obs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) * a;
      }
    out[x] = total.real();
  }
  return out;
}

namespace {

// Irreducible polynomials over GF(2), bit k = coefficient of x^k.
std::uint32_t irreducible(std::size_t q) {
  static const std::uint32_t table[] = {0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83};
  return table[q];
}

std::uint32_t gf_mul(std::uint32_t a, std::uint32_t b, std::size_t q) {
  std::uint32_t r = 0;
  const std::uint32_t poly = irreducible(q);
  while (b) {
    if (b & 1U) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a & (1U << q)) a ^= poly;
  }
  return r;
}

int gf_trace(std::uint32_t z, std::size_t q) {
  std::uint32_t t = 0;
  std::uint32_t p = z;
  for (std::size_t k = 0; k < q; ++k) {
    t ^= p;
    p = gf_mul(p, p, q);
  }
  return static_cast<int>(t & 1U);
}

// Hermitian Pauli i^{a.b} X^a Z^b on q qubits, qubit 0 most significant in
// the basis index and bit 0 of a, b.
Mat pauli_xz(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t q = a.size();
  const std::size_t D = std::size_t{1} << q;
  int ab = 0;
  for (std::size_t j = 0; j < q; ++j) ab += a[j] * b[j];
  cplx phase = 1.0;
  for (int k = 0; k < (ab % 4); ++k) phase *= cplx(0.0, 1.0);
  Mat m = Mat::Zero(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  for (std::size_t col = 0; col < D; ++col) {
    // Z^b acts first on |col>, then X^a flips bits.
    int zsign = 0;
    std::size_t row = col;
    for (std::size_t j = 0; j < q; ++j) {
      const std::size_t bit = (col >> (q - 1 - j)) & 1U;
      if (b[j] && bit) zsign ^= 1;
      if (a[j]) row ^= std::size_t{1} << (q - 1 - j);
    }
    m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = phase * (zsign ? -1.0 : 1.0);
  }
  return m;
}

std::vector<Vec> joint_eigenbasis(const std::vector<Mat>& gens, std::size_t D) {
  const std::size_t q = gens.size();
  std::vector<Vec> basis;
  Vec probe(static_cast<Eigen::Index>(D));
  for (std::size_t r = 0; r < D; ++r) {
    const double t = static_cast<double>(r);
    probe(static_cast<Eigen::Index>(r)) = std::polar(1.0 + 0.013 * t, 0.37 * t * (t + 1.0));
  }
  for (std::size_t s = 0; s < D; ++s) {
    auto project = [&](Vec u) {
      for (std::size_t i = 0; i < q; ++i) {
        const double sign = ((s >> i) & 1U) ? -1.0 : 1.0;
        u = 0.5 * (u + sign * (gens[i] * u));
      }
      return u;
    };
    Vec u = project(probe);
    for (std::size_t r = 0; u.norm() < 1e-6 && r < D; ++r) {
      Vec e = Vec::Zero(static_cast<Eigen::Index>(D));
      e(static_cast<Eigen::Index>(r)) = 1.0;
      u = project(e);
    }
    basis.push_back(u / u.norm());
  }
  return basis;
}

}  // namespace

MubUniverse::MubUniverse(std::size_t q_qubits) : q_(q_qubits), D_(std::size_t{1} << q_qubits) {
  if (q_qubits == 0 || q_qubits > 7) throw Error(ErrorKind::UniverseTooLarge, "MUB universe supports 1..7 qubits");
  // Basis 0: computational basis (the Lagrangian {(0|b)}).
  for (std::size_t k = 0; k < D_; ++k) {
    Vec e = Vec::Zero(static_cast<Eigen::Index>(D_));
    e(static_cast<Eigen::Index>(k)) = 1.0;
    vectors_.push_back(e);
  }
  // Bases 1..D: Lagrangians {(a | M_t a)} with M_t(i,j) = Tr(t x^i x^j).
  for (std::uint32_t t = 0; t < D_; ++t) {
    std::vector<Mat> gens;
    for (std::size_t i = 0; i < q_; ++i) {
      std::vector<int> a(q_, 0), b(q_, 0);
      a[i] = 1;
      for (std::size_t j = 0; j < q_; ++j)
        b[j] = gf_trace(gf_mul(gf_mul(t, 1U << i, q_), 1U << j, q_), q_);
      gens.push_back(pauli_xz(a, b));
    }
    for (Vec& v : joint_eigenbasis(gens, D_)) vectors_.push_back(std::move(v));
  }
}

std::size_t MubUniverse::m_bits() const { return bits_for(vectors_.size()); }

std::vector<double> MubUniverse::born(const DenseState& state) const {
  if (state.dim() != D_) throw Error(ErrorKind::DimensionMismatch, "state vs universe dimension");
  std::vector<double> p(vectors_.size());
  const double w = 1.0 / static_cast<double>(D_ + 1);
  for (std::size_t x = 0; x < vectors_.size(); ++x)
    p[x] = w * std::max(0.0, vectors_[x].dot(state.rho * vectors_[x]).real());
  return p;
}

std::vector<double> MubUniverse::values(const Mat& obs) const {
  if (static_cast<std::size_t>(obs.rows()) != D_) throw Error(ErrorKind::DimensionMismatch, "query dimension");
  std::vector<double> out(vectors_.size());
  const double tr = obs.trace().real();
  const double scale = static_cast<double>(D_ + 1);
  for (std::size_t x = 0; x < vectors_.size(); ++x) out[x] = scale * vectors_[x].dot(obs * vectors_[x]).real() - tr;
  return out;
}

Mat MubUniverse::snapshot_matrix(std::size_t code) const {
  const Vec& v = vectors_.at(code);
  return static_cast<double>(D_ + 1) * v * v.adjoint() - Mat::Identity(static_cast<Eigen::Index>(D_), static_cast<Eigen::Index>(D_));
}

std::shared_ptr<const MubUniverse> MubUniverse::get(std::size_t q_qubits) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const MubUniverse>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q_qubits);
  if (it != cache.end()) return it->second;
  auto u = std::make_shared<const MubUniverse>(q_qubits);
  cache.emplace(q_qubits, u);
  return u;
}

CodeHistogram sample_histogram(std::shared_ptr<const ShadowUniverse> universe, const DenseState& state,
                               std::uint64_t count, Rng& rng) {
  std::vector<double> p = universe->born(state);
  double mass = 0.0;
  for (double x : p) mass += x;
  CodeHistogram h;
  h.universe = std::move(universe);
  h.counts.assign(p.size(), 0);
  h.total = count;
  std::uint64_t left = count;
  double left_mass = mass;
  for (std::size_t x = 0; x < p.size() && left > 0; ++x) {
    if (x + 1 == p.size() || left_mass <= 0.0) {
      h.counts[x] = left;
      left = 0;
      break;
    }
    const double prob = std::clamp(p[x] / left_mass, 0.0, 1.0);
    const std::uint64_t c = std::binomial_distribution<std::uint64_t>(left, prob)(rng);
    h.counts[x] = c;
    left -= c;
    left_mass -= p[x];
  }
  return h;
}

CodeHistogram histogram_from_dataset(std::shared_ptr<const PauliUniverse> universe, const PauliDataset& ds) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  CodeHistogram h;
  h.counts.assign(universe->size(), 0);
  for (const PauliSnapshot& s : ds.snaps) {
    if (s.n_qubits() != universe->n_qubits()) throw Error(ErrorKind::DimensionMismatch, "snapshot width");
    ++h.counts[pauli_code(s)];
  }
  h.total = ds.size();
  h.universe = std::move(universe);
  return h;
}

}  // namespace qadapt
