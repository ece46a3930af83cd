#include "qadapt/subspace.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <optional>

namespace qadapt {

Subspace::Subspace(std::size_t dim, std::size_t cap) : dim_(dim), cap_(cap) {}

Subspace::Projection Subspace::project(const Vec& psi) const {
  if (static_cast<std::size_t>(psi.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "vector vs subspace");
  Projection p;
  p.coords = Vec(static_cast<Eigen::Index>(basis_.size()));
  Vec residual = psi;
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    p.coords(static_cast<Eigen::Index>(i)) = basis_[i].dot(psi);
    residual -= p.coords(static_cast<Eigen::Index>(i)) * basis_[i];
  }
  p.perp_norm = residual.norm();
  return p;
}

Vec Subspace::project_vector(const Vec& psi) const {
  Vec out = Vec::Zero(static_cast<Eigen::Index>(dim_));
  for (const Vec& phi : basis_) out += phi.dot(psi) * phi;
  return out;
}

std::size_t Subspace::extend(const std::vector<Vec>& states) {
  std::size_t added = 0;
  for (const Vec& psi : states) {
    if (static_cast<std::size_t>(psi.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "vector vs subspace");
    raw_.push_back(psi);
    Vec r = psi;
    // Two Gram-Schmidt passes keep the basis orthonormal to machine precision.
    for (int pass = 0; pass < 2; ++pass)
      for (const Vec& phi : basis_) r -= phi.dot(r) * phi;
    const double norm = r.norm();
    if (norm <= kGramSchmidtCutoff) continue;
    if (basis_.size() >= cap_) throw Error(ErrorKind::CapExceeded, "subspace cap reached");
    basis_.push_back(r / norm);
    ++added;
  }
  return added;
}

Mat Subspace::basis_matrix() const {
  Mat phi(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(basis_.size()));
  for (std::size_t i = 0; i < basis_.size(); ++i) phi.col(static_cast<Eigen::Index>(i)) = basis_[i];
  return phi;
}

Mat Subspace::compress(const Mat& A) const {
  const Mat phi = basis_matrix();
  return phi.adjoint() * A * phi;
}

Mat Subspace::sandwich(const Mat& A) const {
  const Mat phi = basis_matrix();
  const Mat P = phi * phi.adjoint();
  return P * A * P;
}

Mat pad_operator(const Mat& op, std::size_t D) {
  Mat out = Mat::Zero(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D));
  out.topLeftCorner(op.rows(), op.cols()) = op;
  return out;
}

PaddedState pad_state(const Subspace& sub, const DenseState& state) {
  if (sub.k() == 0) throw Error(ErrorKind::InvalidState, "padding needs a non-empty subspace");
  if (state.dim() != sub.dim()) throw Error(ErrorKind::DimensionMismatch, "state vs subspace");
  Mat rho_s = sub.compress(state.rho);
  rho_s = 0.5 * (rho_s + rho_s.adjoint()).eval();
  const double tr = rho_s.trace().real();
  if (tr > 1.0 + 1e-9) throw Error(ErrorKind::NegativeResidualTrace, "compressed trace exceeds one");
  std::size_t D = 1;
  while (D < sub.k() + 1) D <<= 1;
  PaddedState out;
  out.k = sub.k();
  out.residual = std::max(0.0, 1.0 - tr);
  Mat rho = pad_operator(rho_s, D);
  rho(static_cast<Eigen::Index>(sub.k()), static_cast<Eigen::Index>(sub.k())) = out.residual;
  out.rho = DenseState{rho};
  return out;
}

TeacherResult ExactTeacher::check(const Mat& obs, double guess) {
  const double truth = trace_product(obs, state_.rho);
  TeacherResult r;
  if (std::abs(truth - guess) > tolerance_) {
    r.verdict = TeacherVerdict::Mistake;
    r.correction = truth;
  }
  return r;
}

double ExactTomograph::estimate(const Mat& op_coords) {
  if (op_coords.rows() == 0) return 0.0;
  return trace_product(op_coords, rho_s_);
}

void PmwTomograph::restart(const Subspace& sub) {
  if (session_) total_updates_ += session_->updates();
  session_.reset();
  D_ = 1;
  if (sub.k() == 0) return;
  const PaddedState pad = pad_state(sub, state_);
  D_ = pad.rho.dim();
  std::size_t q = 0;
  while ((std::size_t{1} << q) < D_) ++q;
  Rng rng = make_rng(seed_, {restarts_});
  CodeHistogram hist = sample_histogram(MubUniverse::get(q), pad.rho, cfg_.samples, rng);
  session_.emplace(std::move(hist), cfg_.pmw, derive_seed(seed_, {restarts_, 1}));
  ++restarts_;
}

double PmwTomograph::estimate(const Mat& op_coords) {
  if (!session_ || op_coords.rows() == 0) return 0.0;
  return session_->answer(pad_operator(op_coords, D_));
}

std::size_t MistakeLedger::heavy_directions(double eps) const {
  return static_cast<std::size_t>(
      std::count_if(added_direction_mass.begin(), added_direction_mass.end(), [eps](double m) { return m > eps; }));
}

std::size_t single_rank_mistake_cap(double eps) { return static_cast<std::size_t>(std::floor(256.0 / (9.0 * eps * eps) + 1e-9)); }

std::size_t low_rank_mistake_cap(std::size_t R, double eps) {
  const double r = static_cast<double>(R);
  return static_cast<std::size_t>(std::floor(256.0 * r * r / (9.0 * eps * eps) + 1e-9));
}

namespace {

// A query after the variant-specific preprocessing: the full operator, the
// operator the teacher verifies, the eigenvectors that may enter S, and the
// eigenvalue mass dropped by truncation. Rank-one queries also keep their
// vector so the transcript can skip an eigendecomposition.
struct Prepared {
  Mat full;
  std::optional<Vec> rank_one;
  Mat checked;
  std::vector<Vec> directions;
  double discarded = 0.0;
};

double quad(const DenseState& state, const Vec& v) { return v.dot(state.rho * v).real(); }

template <class Prepare>
LearnerResult run_core(const DenseState& state, std::size_t M, Prepare&& prepare, double gap_min, std::size_t cap,
                       const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph) {
  LearnerResult out;
  out.ledger.cap = cap;
  Subspace sub(state.dim());
  tomograph.restart(sub);
  std::vector<double> answers;
  for (std::size_t round = 0; round < M; ++round) {
    Prepared q = prepare(round, answers, sub, out.ledger);
    const Mat coords = sub.compress(q.checked);
    const double est = tomograph.estimate(coords);
    const TeacherResult verdict = teacher.check(q.checked, est);
    const double truth = trace_product(q.full, state.rho);
    LedgerRow row;
    row.round = round;
    row.discarded = q.discarded;
    double answer = est;
    if (verdict.verdict == TeacherVerdict::Mistake) {
      row.mistake = true;
      ++out.ledger.mistake_count;
      double gap = 0.0;
      for (const Vec& v : q.directions) gap = std::max(gap, std::abs(quad(state, v) - quad(state, sub.project_vector(v))));
      row.gap_witness = gap;
      if (!(gap > gap_min)) ++out.ledger.gap_breaches;
      const std::size_t before = sub.k();
      sub.extend(q.directions);
      for (std::size_t i = before; i < sub.k(); ++i) out.ledger.added_direction_mass.push_back(quad(state, sub.basis()[i]));
      tomograph.restart(sub);
      answer = verdict.correction;
      if (out.ledger.mistake_count > cap && cfg.throw_on_cap)
        throw Error(ErrorKind::MistakeBudgetExceeded, "mistake count passed the analytic cap");
    }
    row.k_after = sub.k();
    row.answer = answer;
    row.truth = truth;
    row.error = std::abs(answer - truth);
    out.max_error = std::max(out.max_error, row.error);
    out.ledger.rows.push_back(row);
    out.transcript.record(q.rank_one ? Observable{RankOneProjector{*q.rank_one}}
                                     : Observable{make_hermitian_any_norm(q.full)},
                          answer, truth);
    answers.push_back(answer);
  }
  out.final_k = sub.k();
  return out;
}

void check_hermitian(const Mat& O, std::size_t d) {
  if (static_cast<std::size_t>(O.rows()) != d || O.rows() != O.cols())
    throw Error(ErrorKind::DimensionMismatch, "query dimension");
  if ((O - O.adjoint()).norm() > kHermitianTol * std::max(1.0, O.norm()))
    throw Error(ErrorKind::InvalidObservable, "query is not Hermitian");
}

}  // namespace

LearnerResult run_single_rank(const DenseState& state, std::size_t M, const VecStream& queries,
                              const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph) {
  const std::size_t cap = cfg.mistake_cap ? cfg.mistake_cap : single_rank_mistake_cap(cfg.eps);
  auto prepare = [&](std::size_t round, const std::vector<double>& answers, const Subspace&, MistakeLedger&) {
    Vec psi = queries(round, answers);
    if (static_cast<std::size_t>(psi.size()) != state.dim()) throw Error(ErrorKind::DimensionMismatch, "query dimension");
    const double n = psi.norm();
    if (std::abs(n - 1.0) > kUnitNormTol) throw Error(ErrorKind::InvalidObservable, "projector vector must be unit norm");
    psi /= n;
    Prepared p;
    p.full = psi * psi.adjoint();
    p.checked = p.full;
    p.directions = {psi};
    p.rank_one = psi;
    return p;
  };
  return run_core(state, M, prepare, 3.0 * cfg.eps / 16.0, cap, cfg, teacher, tomograph);
}

LearnerResult run_bounded_frobenius(const DenseState& state, std::size_t M, const MatStream& queries,
                                    const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph) {
  const double gap = 3.0 * cfg.eps * cfg.eps / (32.0 * cfg.B);
  const std::size_t cap = cfg.mistake_cap ? cfg.mistake_cap : static_cast<std::size_t>(std::floor(1.0 / (gap * gap) + 1e-9));
  const double max_retained = 4.0 * cfg.B / (cfg.eps * cfg.eps);
  auto prepare = [&](std::size_t round, const std::vector<double>& answers, const Subspace&, MistakeLedger& ledger) {
    Mat O = queries(round, answers);
    check_hermitian(O, state.dim());
    if (trace_product(O, O) > cfg.B * (1.0 + 1e-9)) throw Error(ErrorKind::InvalidObservable, "tr(O^2) exceeds B");
    Eigen::SelfAdjointEigenSolver<Mat> es(O);
    Prepared p;
    p.full = O;
    p.checked = Mat::Zero(O.rows(), O.cols());
    for (Eigen::Index j = 0; j < O.rows(); ++j) {
      const double w = es.eigenvalues()(j);
      const Vec v = es.eigenvectors().col(j);
      if (std::abs(w) > cfg.eps / 2.0) {
        p.checked += w * v * v.adjoint();
        p.directions.push_back(v);
      } else {
        p.discarded += std::abs(w) * quad(state, v);
      }
    }
    if (static_cast<double>(p.directions.size()) > max_retained) ++ledger.retained_breaches;
    return p;
  };
  return run_core(state, M, prepare, gap, cap, cfg, teacher, tomograph);
}

LearnerResult run_low_rank(const DenseState& state, std::size_t M, const MatStream& queries,
                           const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph) {
  const std::size_t R = std::max<std::size_t>(cfg.R, 1);
  const std::size_t cap = cfg.mistake_cap ? cfg.mistake_cap : low_rank_mistake_cap(R, cfg.eps);
  auto prepare = [&](std::size_t round, const std::vector<double>& answers, const Subspace& sub, MistakeLedger& ledger) {
    Mat O = queries(round, answers);
    check_hermitian(O, state.dim());
    Eigen::SelfAdjointEigenSolver<Mat> es(O);
    Prepared p;
    p.full = O;
    p.checked = O;
    for (Eigen::Index j = 0; j < O.rows(); ++j)
      if (std::abs(es.eigenvalues()(j)) > 1e-10) p.directions.push_back(es.eigenvectors().col(j));
    if (p.directions.size() > R) ++ledger.rank_breaches;
    if (sub.k() > 0) {
      Eigen::SelfAdjointEigenSolver<Mat> ps(sub.compress(O), Eigen::EigenvaluesOnly);
      std::size_t rank = 0;
      for (Eigen::Index j = 0; j < ps.eigenvalues().size(); ++j)
        if (std::abs(ps.eigenvalues()(j)) > 1e-9) ++rank;
      if (rank > R) ++ledger.rank_breaches;
    }
    return p;
  };
  return run_core(state, M, prepare, 3.0 * cfg.eps / (16.0 * static_cast<double>(R)), cap, cfg, teacher, tomograph);
}

}  // namespace qadapt
