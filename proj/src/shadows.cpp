#include "qadapt/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qadapt {

namespace {

constexpr char kPauliAlphabet[6] = {'0', '1', '+', '-', 'r', 'l'};

// Single-qubit eigenstate for code 2*basis+outcome.
Vec eigenstate(std::uint8_t code) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  Vec v(2);
  switch (code) {
    case 0: v << 1.0, 0.0; break;
    case 1: v << 0.0, 1.0; break;
    case 2: v << s, s; break;
    case 3: v << s, -s; break;
    case 4: v << s, s * i; break;
    case 5: v << s, -s * i; break;
    default: throw Error(ErrorKind::MalformedSnapshot, "code outside 0..5");
  }
  return v;
}

Vec product_vector(const std::vector<std::uint8_t>& codes) {
  Vec out = Vec::Ones(1);
  for (std::uint8_t c : codes) {
    Vec e = eigenstate(c);
    Vec next(out.size() * 2);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
      next(2 * k) = out(k) * e(0);
      next(2 * k + 1) = out(k) * e(1);
    }
    out = std::move(next);
  }
  return out;
}

char basis_symbol(PauliBasis b) {
  switch (b) {
    case PauliBasis::Z: return 'Z';
    case PauliBasis::X: return 'X';
    case PauliBasis::Y: return 'Y';
  }
  return 'Z';
}

// Tensor-factor value of a Pauli product given per-qubit symbols.
double pauli_product_value(const PauliSnapshot& snap, const std::string& symbols, ZValueModel model) {
  if (symbols.size() != snap.n_qubits()) throw Error(ErrorKind::DimensionMismatch, "Pauli length vs snapshot");
  double value = 1.0;
  for (std::size_t q = 0; q < symbols.size(); ++q) {
    char s = symbols[q];
    if (s == 'I') continue;
    double sign = snap.outcome(q) ? -1.0 : 1.0;
    if (model == ZValueModel::SignOfOutcome || basis_symbol(snap.basis(q)) == s) value *= 3.0 * sign;
    else return 0.0;
  }
  return value;
}

double z_support_value(const PauliSnapshot& snap, const std::vector<std::size_t>& support, ZValueModel model) {
  double value = 1.0;
  for (std::size_t q : support) {
    if (q >= snap.n_qubits()) throw Error(ErrorKind::DimensionMismatch, "Z index outside snapshot");
    double sign = snap.outcome(q) ? -1.0 : 1.0;
    if (model == ZValueModel::SignOfOutcome || snap.basis(q) == PauliBasis::Z) value *= 3.0 * sign;
    else return 0.0;
  }
  return value;
}

std::size_t choose_basis(Rng& rng) { return std::uniform_int_distribution<std::size_t>(0, 2)(rng); }

}  // namespace

PauliSnapshot pauli_snapshot(const LazyBitstring& sample, std::size_t n_qubits, Rng& rng) {
  PauliSnapshot snap;
  snap.codes.resize(n_qubits);
  for (std::size_t q = 0; q < n_qubits; ++q) {
    std::size_t b = choose_basis(rng);
    int outcome = b == 0 ? (sample.bit(q) ? 1 : 0) : (fair_coin(rng) ? 1 : 0);
    snap.codes[q] = static_cast<std::uint8_t>(2 * b + outcome);
  }
  return snap;
}

PauliSnapshot pauli_snapshot(const DiagonalState& state, Rng& rng) {
  LazyBitstring s = sample_bitstring(state, rng);
  return pauli_snapshot(s, state.n_qubits(), rng);
}

PauliSnapshot pauli_snapshot(const DenseState& state, Rng& rng) {
  const std::size_t n = state.n_qubits();
  std::vector<std::uint8_t> bases(n);
  for (std::size_t q = 0; q < n; ++q) bases[q] = static_cast<std::uint8_t>(choose_basis(rng));
  // Outcome string b has probability <psi_b|rho|psi_b> with psi_b the product
  // of the basis eigenvectors selected by b.
  const std::size_t d = state.dim();
  std::vector<double> probs(d);
  std::vector<std::uint8_t> codes(n);
  for (std::size_t b = 0; b < d; ++b) {
    for (std::size_t q = 0; q < n; ++q) codes[q] = static_cast<std::uint8_t>(2 * bases[q] + ((b >> (n - 1 - q)) & 1U));
    Vec psi = product_vector(codes);
    probs[b] = std::max(0.0, (psi.adjoint() * state.rho * psi)(0, 0).real());
  }
  std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
  std::size_t b = pick(rng);
  PauliSnapshot snap;
  snap.codes.resize(n);
  for (std::size_t q = 0; q < n; ++q) snap.codes[q] = static_cast<std::uint8_t>(2 * bases[q] + ((b >> (n - 1 - q)) & 1U));
  return snap;
}

std::vector<double> pauli_snapshot_distribution(const DenseState& state) {
  const std::size_t n = state.n_qubits();
  std::size_t total = 1;
  for (std::size_t q = 0; q < n; ++q) total *= 6;
  std::vector<double> p(total);
  const double basis_weight = std::pow(3.0, -static_cast<double>(n));
  for (std::uint64_t code = 0; code < total; ++code) {
    PauliSnapshot s = pauli_from_code(code, n);
    Vec psi = product_vector(s.codes);
    p[code] = basis_weight * std::max(0.0, (psi.adjoint() * state.rho * psi)(0, 0).real());
  }
  return p;
}

double snapshot_expectation(const PauliSnapshot& snap, const Observable& obs, ZValueModel model) {
  return std::visit(overloaded{
                        [&](const SingleQubitZ& z) { return z_support_value(snap, {z.index}, model); },
                        [&](const ZParity& z) { return z_support_value(snap, z.support, model); },
                        [&](const PauliString& p) { return pauli_product_value(snap, p.symbols, model); },
                        [&](const auto& dense) -> double {
                          if (snap.n_qubits() > 10)
                            throw Error(ErrorKind::NonLocalObservable, "dense observable on a wide snapshot");
                          Mat o = to_dense(Observable(dense), std::size_t{1} << snap.n_qubits());
                          return trace_product(o, pauli_snapshot_matrix(snap));
                        },
                    },
                    obs);
}

std::uint64_t pauli_code(const PauliSnapshot& snap) {
  std::uint64_t code = 0;
  for (std::uint8_t c : snap.codes) code = code * 6 + c;
  return code;
}

PauliSnapshot pauli_from_code(std::uint64_t code, std::size_t n_qubits) {
  PauliSnapshot s;
  s.codes.resize(n_qubits);
  for (std::size_t q = n_qubits; q-- > 0;) {
    s.codes[q] = static_cast<std::uint8_t>(code % 6);
    code /= 6;
  }
  return s;
}

Mat pauli_snapshot_matrix(const PauliSnapshot& snap) {
  Mat out = Mat::Identity(1, 1);
  for (std::uint8_t c : snap.codes) {
    Vec e = eigenstate(c);
    Mat f = 3.0 * e * e.adjoint() - Mat::Identity(2, 2);
    Mat next(out.rows() * 2, out.cols() * 2);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
      for (Eigen::Index col = 0; col < out.cols(); ++col) next.block(2 * r, 2 * col, 2, 2) = out(r, col) * f;
    out = std::move(next);
  }
  return out;
}

std::string encode_pauli(const PauliSnapshot& snap) {
  std::string s(snap.codes.size(), '0');
  for (std::size_t q = 0; q < snap.codes.size(); ++q) {
    if (snap.codes[q] > 5) throw Error(ErrorKind::MalformedSnapshot, "code outside 0..5");
    s[q] = kPauliAlphabet[snap.codes[q]];
  }
  return s;
}

PauliSnapshot decode_pauli(const std::string& line) {
  PauliSnapshot snap;
  snap.codes.reserve(line.size());
  for (char c : line) {
    const char* hit = std::find(std::begin(kPauliAlphabet), std::end(kPauliAlphabet), c);
    if (hit == std::end(kPauliAlphabet)) throw Error(ErrorKind::MalformedSnapshot, "unknown snapshot symbol");
    snap.codes.push_back(static_cast<std::uint8_t>(hit - std::begin(kPauliAlphabet)));
  }
  return snap;
}

Mat PovmSnapshot::implied() const {
  const auto d = static_cast<double>(v.size());
  return (d + 1.0) * v * v.adjoint() - Mat::Identity(v.size(), v.size());
}

double PovmSnapshot::value(const Mat& obs) const {
  const auto d = static_cast<double>(v.size());
  return (d + 1.0) * (v.adjoint() * obs * v)(0, 0).real() - obs.trace().real();
}

PovmSampler::PovmSampler(const DenseState& state, std::size_t proposal_budget)
    : d_(state.dim()), budget_(proposal_budget) {
  if (d_ > 1024) throw Error(ErrorKind::DimensionTooLarge, "uniform POVM sampling is limited to d <= 2^10");
  Eigen::SelfAdjointEigenSolver<Mat> es(state.rho);
  lambda_max_ = es.eigenvalues().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) > 1e-14) keep.push_back(k);
  half_.resize(static_cast<Eigen::Index>(d_), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    half_.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(es.eigenvalues()(keep[c]));
}

Vec PovmSampler::sample_vector(Rng& rng) const {
  for (std::size_t attempt = 0; attempt < budget_; ++attempt) {
    Vec v = haar_vector(d_, rng);
    double overlap = (half_.adjoint() * v).squaredNorm();
    if (uniform01(rng) * lambda_max_ < overlap) return v;
  }
  throw Error(ErrorKind::RejectionBudgetExceeded, "no acceptance within the proposal budget");
}

PovmSnapshot povm_snapshot(const DenseState& state, Rng& rng) { return PovmSampler(state).sample(rng); }

PauliDataset make_pauli_dataset(const DenseState& state, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  PauliDataset ds;
  ds.state_seed = seed;
  ds.snaps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ds.snaps.push_back(pauli_snapshot(state, rng));
  return ds;
}

PauliDataset make_pauli_dataset(const DiagonalState& state, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  PauliDataset ds;
  ds.state_seed = seed;
  ds.snaps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ds.snaps.push_back(pauli_snapshot(state, rng));
  return ds;
}

PovmDataset make_povm_dataset(const DenseState& state, std::size_t count, std::uint64_t seed) {
  PovmSampler sampler(state);
  Rng rng(seed);
  PovmDataset ds;
  ds.d = state.dim();
  ds.state_seed = seed;
  ds.snaps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ds.snaps.push_back(sampler.sample_vector(rng));
  return ds;
}

std::vector<double> snapshot_values(const PauliDataset& ds, const Observable& obs, ZValueModel model) {
  std::vector<double> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = snapshot_expectation(ds.snaps[i], obs, model);
  return out;
}

std::vector<double> snapshot_values(const PovmDataset& ds, const Mat& obs) {
  const auto n = static_cast<std::int64_t>(ds.size());
  const double scale = static_cast<double>(ds.d) + 1.0;
  const double tr = obs.trace().real();
  std::vector<double> out(ds.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const Vec& v = ds.snaps[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = scale * v.dot(obs * v).real() - tr;
  }
  return out;
}

std::vector<double> snapshot_values_serial(const PovmDataset& ds, const Mat& obs) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const Vec& v : ds.snaps) out.push_back(PovmSnapshot{v}.value(obs));
  return out;
}

namespace {
double mean_of(const std::vector<double>& v) {
  if (v.empty()) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}
}  // namespace

double empirical_mean(const PauliDataset& ds, const Observable& obs, ZValueModel model) {
  return mean_of(snapshot_values(ds, obs, model));
}

double empirical_mean(const PovmDataset& ds, const Observable& obs) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  return mean_of(snapshot_values(ds, to_dense(obs, ds.d)));
}

double median_lower(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "median of nothing");
  std::size_t mid = (values.size() - 1) / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  return values[mid];
}

std::vector<double> batch_means(const std::vector<double>& values, std::size_t K) {
  if (values.empty()) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  if (K == 0 || values.size() % K != 0) throw Error(ErrorKind::IndivisibleBatching, "dataset size not divisible by K");
  const std::size_t n = values.size() / K;
  std::vector<double> means(K);
  for (std::size_t k = 0; k < K; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += values[k * n + i];
    means[k] = s / static_cast<double>(n);
  }
  return means;
}

double median_of_means(const std::vector<double>& values, std::size_t K) {
  return median_lower(batch_means(values, K));
}

double median_of_means(const PauliDataset& ds, const Observable& obs, std::size_t K, ZValueModel model) {
  return median_of_means(snapshot_values(ds, obs, model), K);
}

double median_of_means(const PovmDataset& ds, const Observable& obs, std::size_t K) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  return median_of_means(snapshot_values(ds, to_dense(obs, ds.d)), K);
}

double spectral_norm(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double shadow_norm_bound(const Observable& obs, Primitive primitive) {
  if (is_identity(obs)) return 0.0;
  if (primitive == Primitive::Pauli) {
    return std::visit(overloaded{
                          [](const SingleQubitZ&) { return 4.0; },
                          [](const ZParity& z) { return std::pow(4.0, static_cast<double>(z.support.size())); },
                          [&](const PauliString&) { return std::pow(4.0, static_cast<double>(locality(obs))); },
                          [&](const auto&) -> double {
                            throw Error(ErrorKind::UnsupportedPair, "Pauli primitive needs a local observable");
                          },
                      },
                      obs);
  }
  return std::visit(overloaded{
                        [](const RankOneProjector&) { return 3.0; },
                        [](const HermitianDense& h) { return 3.0 * h.w.squaredNorm(); },
                        [](const PauliString& p) { return 3.0 * std::pow(2.0, static_cast<double>(p.symbols.size())); },
                        [](const auto&) -> double {
                          throw Error(ErrorKind::UnsupportedPair, "POVM primitive needs a Frobenius-bounded observable");
                        },
                    },
                    obs);
}

double PovmSketch::mean(const Mat& obs) const {
  if (batch_sums.empty()) throw Error(ErrorKind::EmptyDataset, "empty sketch");
  Mat total = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const Mat& s : batch_sums) total += s;
  const double tr_os = (obs.cwiseProduct(total.transpose())).sum().real();
  return (static_cast<double>(d) + 1.0) * tr_os / static_cast<double>(count()) - obs.trace().real();
}

std::vector<double> PovmSketch::batch_means(const Mat& obs) const {
  if (batch_sums.empty()) throw Error(ErrorKind::EmptyDataset, "empty sketch");
  std::vector<double> out;
  out.reserve(batch_sums.size());
  const double tr = obs.trace().real();
  for (const Mat& s : batch_sums) {
    const double tr_os = (obs.cwiseProduct(s.transpose())).sum().real();
    out.push_back((static_cast<double>(d) + 1.0) * tr_os / static_cast<double>(batch_size) - tr);
  }
  return out;
}

namespace {
Mat sketch_batch(const PovmSampler& sampler, std::size_t batch_size, std::uint64_t seed, std::size_t k) {
  Rng rng(derive_seed(seed, {k}));
  const auto d = static_cast<Eigen::Index>(sampler.dim());
  Mat sum = Mat::Zero(d, d);
  for (std::size_t i = 0; i < batch_size; ++i) {
    Vec v = sampler.sample_vector(rng);
    sum.noalias() += v * v.adjoint();
  }
  return sum;
}
}  // namespace

PovmSketch build_povm_sketch(const PovmSampler& sampler, std::size_t batches, std::size_t batch_size,
                             std::uint64_t seed) {
  PovmSketch sk;
  sk.d = sampler.dim();
  sk.batch_size = batch_size;
  sk.batch_sums.resize(batches);
  const auto nb = static_cast<std::int64_t>(batches);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < nb; ++k)
    sk.batch_sums[static_cast<std::size_t>(k)] = sketch_batch(sampler, batch_size, seed, static_cast<std::size_t>(k));
  return sk;
}

PovmSketch build_povm_sketch_serial(const PovmSampler& sampler, std::size_t batches, std::size_t batch_size,
                                    std::uint64_t seed) {
  PovmSketch sk;
  sk.d = sampler.dim();
  sk.batch_size = batch_size;
  for (std::size_t k = 0; k < batches; ++k) sk.batch_sums.push_back(sketch_batch(sampler, batch_size, seed, k));
  return sk;
}

PovmSketch sketch_from_dataset(const PovmDataset& ds, std::size_t batches) {
  if (ds.size() == 0) throw Error(ErrorKind::EmptyDataset, "no snapshots");
  if (batches == 0 || ds.size() % batches != 0) throw Error(ErrorKind::IndivisibleBatching, "size not divisible");
  PovmSketch sk;
  sk.d = ds.d;
  sk.batch_size = ds.size() / batches;
  const auto d = static_cast<Eigen::Index>(ds.d);
  for (std::size_t k = 0; k < batches; ++k) {
    Mat sum = Mat::Zero(d, d);
    for (std::size_t i = 0; i < sk.batch_size; ++i) {
      const Vec& v = ds.snaps[k * sk.batch_size + i];
      sum.noalias() += v * v.adjoint();
    }
    sk.batch_sums.push_back(std::move(sum));
  }
  return sk;
}

namespace {
template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  // The block format is little-endian; this build targets little-endian hosts.
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw Error(ErrorKind::MalformedSnapshot, "truncated block");
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}
}  // namespace

void write_povm_block(std::ostream& os, const PovmDataset& ds) {
  put_le<std::uint32_t>(os, kPovmMagic);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ds.d));
  put_le<std::uint64_t>(os, static_cast<std::uint64_t>(ds.size()));
  for (const Vec& v : ds.snaps)
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      put_le<double>(os, v(i).real());
      put_le<double>(os, v(i).imag());
    }
}

PovmDataset read_povm_block(std::istream& is) {
  if (get_le<std::uint32_t>(is) != kPovmMagic) throw Error(ErrorKind::MalformedSnapshot, "bad magic");
  PovmDataset ds;
  ds.d = get_le<std::uint32_t>(is);
  const auto count = get_le<std::uint64_t>(is);
  ds.snaps.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Vec v(static_cast<Eigen::Index>(ds.d));
    for (std::size_t i = 0; i < ds.d; ++i) {
      double re = get_le<double>(is);
      double im = get_le<double>(is);
      v(static_cast<Eigen::Index>(i)) = cplx(re, im);
    }
    ds.snaps.push_back(std::move(v));
  }
  return ds;
}

void write_pauli_lines(std::ostream& os, const PauliDataset& ds) {
  for (const PauliSnapshot& s : ds.snaps) os << encode_pauli(s) << '\n';
}

PauliDataset read_pauli_lines(std::istream& is) {
  PauliDataset ds;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ds.snaps.push_back(decode_pauli(line));
  }
  return ds;
}

}  // namespace qadapt
