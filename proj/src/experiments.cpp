#include "qadapt/experiments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace qadapt {

Mat random_hermitian(std::size_t d, double frobenius_sq, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Mat G(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < G.rows(); ++r)
    for (Eigen::Index c = 0; c < G.cols(); ++c) G(r, c) = cplx(g(rng), g(rng));
  Mat H = 0.5 * (G + G.adjoint());
  return H * std::sqrt(frobenius_sq) / H.norm();
}

PauliString random_pauli(std::size_t n, Rng& rng) {
  static const char symbols[4] = {'I', 'X', 'Y', 'Z'};
  std::string s(n, 'I');
  while (s == std::string(n, 'I'))
    for (char& c : s) c = symbols[rng() % 4];
  return PauliString{s};
}

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace

// ------------------------------------------------------------ attack

AttackResult exp_attack(const AttackExpConfig& cfg, std::uint64_t seed) {
  return attack_experiment(cfg.N, cfg.M_list, cfg.runs, seed, cfg.params);
}

CsvTable attack_table(const AttackResult& r, std::uint64_t seed) {
  CsvTable t;
  t.header = {"M", "N", "runs", "mode", "error_mean", "error_std", "seed"};
  for (const AttackRecord& rec : r.records) {
    t.rows.push_back({std::to_string(rec.M), std::to_string(rec.N), std::to_string(rec.runs), "adaptive",
                      format_double(rec.adaptive_error_mean), format_double(rec.adaptive_error_std),
                      std::to_string(seed)});
    t.rows.push_back({std::to_string(rec.M), std::to_string(rec.N), std::to_string(rec.runs), "nonadaptive",
                      format_double(rec.nonadaptive_error_mean), format_double(rec.nonadaptive_error_std),
                      std::to_string(seed)});
  }
  return t;
}

std::vector<double> exp_attack_errors(std::size_t N, std::size_t M, std::size_t runs, std::uint64_t seed,
                                      const AttackParams& params) {
  std::vector<double> errors(runs);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t r = 0; r < runs; ++r) {
    Rng rng = make_rng(seed, {M, r, 0});
    errors[r] = run_adaptive_attack(N, M, rng, params).adaptive_error;
  }
  return errors;
}

// ------------------------------------------------------------ dp median

std::vector<DpMedianTrial> exp_dp_median(const DpMedianExpConfig& cfg, std::uint64_t seed) {
  std::vector<DpMedianTrial> out(cfg.trials);
  const DenseState state = maximally_mixed(std::size_t{1} << cfg.n_qubits);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const PauliDataset ds = make_pauli_dataset(state, cfg.K * cfg.batch_size, derive_seed(seed, {t, 0}));
    DpMedianSession session = DpMedianSession::over(ds, cfg.K, cfg.median, derive_seed(seed, {t, 1}));
    out[t].answer = session.answer(Observable{SingleQubitZ{0}});
    out[t].truth = 0.0;
  }
  return out;
}

// ------------------------------------------------------------ POVM concentration

double concentration_bound(double tau, double B) {
  return 2.0 * std::exp(-tau * tau / (16.0 * B + 4.0 * std::sqrt(B) * tau));
}

ConcentrationResult exp_povm_concentration(const ConcentrationConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0});
  const DenseState state = pure_state(haar_vector(cfg.d, rng));
  const Mat O = random_hermitian(cfg.d, cfg.B, rng);
  const double truth = trace_product(O, state.rho);
  const PovmDataset ds = make_povm_dataset(state, cfg.samples, derive_seed(seed, {1}));
  const std::vector<double> values = snapshot_values(ds, O);
  ConcentrationResult r;
  r.frobenius_sq = trace_product(O, O);
  r.taus = cfg.taus;
  std::vector<std::size_t> exceed(cfg.taus.size(), 0);
  double s2 = 0.0, s4 = 0.0, s8 = 0.0;
  for (double v : values) {
    const double x = v - truth;
    for (std::size_t k = 0; k < cfg.taus.size(); ++k)
      if (std::abs(x) >= cfg.taus[k]) ++exceed[k];
    const double x2 = x * x;
    s2 += x2;
    s4 += x2 * x2;
    s8 += x2 * x2 * x2 * x2;
  }
  const double n = static_cast<double>(values.size());
  for (std::size_t k = 0; k < cfg.taus.size(); ++k) {
    r.tails.push_back(static_cast<double>(exceed[k]) / n);
    r.tail_bounds.push_back(concentration_bound(cfg.taus[k], cfg.B));
  }
  r.m2 = s2 / n;
  r.m4 = s4 / n;
  r.m2_se = std::sqrt(std::max(0.0, s4 / n - r.m2 * r.m2) / n);
  r.m4_se = std::sqrt(std::max(0.0, s8 / n - r.m4 * r.m4) / n);
  r.m2_bound = 2.0 * 4.0 * cfg.B;
  r.m4_bound = 24.0 * (4.0 * cfg.B) * (4.0 * cfg.B);
  return r;
}

// ------------------------------------------------------------ truncation bias

std::vector<BiasResult> exp_truncation_bias(const BiasConfig& cfg, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0});
  const DenseState state = random_state(cfg.d, 2, rng);
  const Mat O = random_hermitian(cfg.d, cfg.B, rng);
  const double trO = O.trace().real();
  const PovmSampler sampler(state);
  constexpr std::size_t kChunk = 10000;
  const std::size_t chunks = (cfg.samples + kChunk - 1) / kChunk;
  const std::size_t E = cfg.eps_list.size();
  std::vector<double> T(E);
  for (std::size_t e = 0; e < E; ++e) T[e] = threshold_T(cfg.B, cfg.eps_list[e]);
  // Per chunk: sum and sum of squares of (o - s) per eps, max |o|, truncation count.
  std::vector<std::vector<double>> sums(chunks, std::vector<double>(2 * E + 1, 0.0));
  std::vector<std::vector<std::size_t>> counts(chunks, std::vector<std::size_t>(E, 0));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t c = 0; c < chunks; ++c) {
    Rng r = make_rng(seed, {1, c});
    const std::size_t n = std::min(kChunk, cfg.samples - c * kChunk);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec v = sampler.sample_vector(r);
      const double o = static_cast<double>(cfg.d + 1) * v.dot(O * v).real() - trO;
      sums[c][2 * E] = std::max(sums[c][2 * E], std::abs(o));
      for (std::size_t e = 0; e < E; ++e) {
        const double diff = o - truncate_value(o, T[e]);
        sums[c][2 * e] += diff;
        sums[c][2 * e + 1] += diff * diff;
        if (diff != 0.0) ++counts[c][e];
      }
    }
  }
  std::vector<BiasResult> out(E);
  const double n = static_cast<double>(cfg.samples);
  for (std::size_t e = 0; e < E; ++e) {
    double s = 0.0, s2 = 0.0, mx = 0.0;
    std::size_t cnt = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      s += sums[c][2 * e];
      s2 += sums[c][2 * e + 1];
      mx = std::max(mx, sums[c][2 * E]);
      cnt += counts[c][e];
    }
    out[e].eps = cfg.eps_list[e];
    out[e].T = T[e];
    out[e].bias = s / n;
    out[e].bias_se = std::sqrt(std::max(0.0, s2 / n - (s / n) * (s / n)) / n);
    out[e].max_abs_value = mx;
    out[e].truncated = cnt;
  }
  return out;
}

// ------------------------------------------------------------ threshold contract

namespace {

// PSD effect with eigenvalues in [0, 1] and tr(O^2) <= B.
Mat random_effect(std::size_t d, double B, Rng& rng) {
  const Mat G = random_hermitian(d, 1.0, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  RVec lam(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = uniform01(rng);
  const double f = lam.squaredNorm();
  if (f > B) lam *= std::sqrt(B / f);
  return es.eigenvectors() * lam.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

std::vector<ThresholdStream> exp_threshold_contract(const ThresholdExpConfig& cfg, std::uint64_t seed) {
  std::vector<ThresholdStream> out(cfg.streams);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < cfg.streams; ++t) {
    Rng rng = make_rng(seed, {t, 0});
    const DenseState state = random_state(cfg.d, 3, rng);
    const PovmSampler sampler(state);
    auto sketch = std::make_shared<const PovmSketch>(
        build_povm_sketch_serial(sampler, cfg.batches, cfg.samples / cfg.batches, derive_seed(seed, {t, 1})));
    ShadowThresholdSearch search(ShadowSource{sketch}, ThresholdConfig{cfg.eps, cfg.B, cfg.ell, cfg.noise, cfg.noise},
                                 derive_seed(seed, {t, 2}));
    ThresholdStream& s = out[t];
    Mat O;
    double truth = 0.0, theta = 0.0;
    bool fresh = true;
    for (std::size_t q = 0; q < cfg.M; ++q) {
      if (fresh) {
        O = random_effect(cfg.d, cfg.B, rng);
        truth = trace_product(O, state.rho);
        const double offset = uniform01(rng) < 0.85 ? uniform(rng, 0.0, 1.0) : uniform(rng, -0.5, 0.0);
        theta = std::clamp(truth + offset, 0.0, 1.0);
      }
      const SvAnswer a = search.submit(ThresholdQuery{Observable{make_hermitian_any_norm(O)}, theta});
      ++s.queries;
      if (a == SvAnswer::Yes && truth > theta) ++s.clause1;
      if (a == SvAnswer::No && truth <= theta - cfg.eps) ++s.clause2;
      if (search.budget().halted) break;
      // Probe downwards after a Yes, move on after a No.
      fresh = a == SvAnswer::No || uniform01(rng) < 0.5;
      if (!fresh) theta = std::clamp(theta - 0.1, 0.0, 1.0);
    }
    s.no_count = search.budget().no_count;
    s.halted = search.budget().halted;
    bool threw = false;
    if (s.halted) {
      try {
        search.submit(ThresholdQuery{Observable{make_hermitian_any_norm(O)}, theta});
      } catch (const Error& e) {
        threw = e.kind() == ErrorKind::Halted;
      }
      s.halting_exact = threw && s.no_count == cfg.ell + 1;
    } else {
      s.halting_exact = s.no_count <= cfg.ell;
    }
  }
  return out;
}

// ------------------------------------------------------------ closeness teacher

std::vector<TeacherTrial> exp_teacher(const TeacherExpConfig& cfg, std::uint64_t seed) {
  std::vector<TeacherTrial> out(cfg.trials);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Rng rng = make_rng(seed, {t, 0});
    const DenseState state = random_state(cfg.d, 2, rng);
    const Vec psi = haar_vector(cfg.d, rng);
    const Mat O = psi * psi.adjoint();
    const double truth = trace_product(O, state.rho);
    const PovmSampler sampler(state);
    auto sketch = std::make_shared<const PovmSketch>(
        build_povm_sketch_serial(sampler, cfg.batches, cfg.samples / cfg.batches, derive_seed(seed, {t, 1})));
    TeacherConfig tc;
    tc.eps = cfg.eps;
    tc.B = 1.0;
    tc.ell = 10;
    tc.threshold_noise = cfg.noise;
    tc.query_noise = cfg.noise;
    ClosenessTeacher teacher(sketch, tc, derive_seed(seed, {t, 2}));
    const double guess = truth + (fair_coin(rng) ? 2.0 : -2.0) * cfg.eps;
    const TeacherResult r = teacher.check(O, guess);
    out[t].flagged = r.verdict == TeacherVerdict::Mistake;
    out[t].correction_error = out[t].flagged ? std::abs(r.correction - truth) : std::abs(guess - truth);
  }
  return out;
}

// ------------------------------------------------------------ subspace learner

namespace {

Vec normalized(const Vec& v) { return v / v.norm(); }

// Rank-one adversary that mirrors the learner's subspace. Among candidates
// that still force a mistake it picks the one with the smallest gap, so that
// each mistake teaches the learner as little as possible.
struct MirrorAdversary {
  const DenseState* state;
  Subspace mirror;
  Eigen::SelfAdjointEigenSolver<Mat> eig;
  Rng rng;
  double tolerance;

  Mat Pperp;
  Mat outside;  // heaviest eigenvectors of rho restricted outside the mirror

  MirrorAdversary(const DenseState& s, double tol, std::uint64_t seed)
      : state(&s), mirror(s.dim()), eig(s.rho), rng(seed), tolerance(tol) {
    refresh();
  }

  void refresh() {
    const auto D = static_cast<Eigen::Index>(state->dim());
    const Mat phi = mirror.basis_matrix();
    Pperp = Mat::Identity(D, D) - phi * phi.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(Pperp * state->rho * Pperp);
    outside = es.eigenvectors().rightCols(4);
  }

  double gap(const Vec& psi) const {
    const Vec ps = mirror.project_vector(psi);
    return std::abs(psi.dot(state->rho * psi).real() - ps.dot(state->rho * ps).real());
  }

  Vec next() {
    const std::size_t d = state->dim();
    const auto D = static_cast<Eigen::Index>(d);
    const Mat phi = mirror.basis_matrix();
    std::vector<Vec> cands;
    cands.push_back(haar_vector(d, rng));
    for (int k = 0; k < 24; ++k) {
      // Random in-span part plus a scaled out-of-span part leaning on the
      // heaviest directions rho still has outside the span.
      Vec in = mirror.k() ? Vec(phi * haar_vector(mirror.k(), rng)) : Vec::Zero(D);
      Vec out = Vec::Zero(D);
      for (Eigen::Index j = 0; j < outside.cols(); ++j)
        out += cplx(uniform(rng, -1, 1), uniform(rng, -1, 1)) * outside.col(j);
      out += 0.2 * Pperp * haar_vector(d, rng);
      out.normalize();
      const double t = uniform01(rng);
      cands.push_back(normalized(std::sqrt(1.0 - t) * in + std::sqrt(t) * out));
    }
    std::size_t best = 0, lightest = cands.size();
    double best_gap = -1.0, light_gap = 2.0;
    for (std::size_t c = 0; c < cands.size(); ++c) {
      const double g = gap(cands[c]);
      if (g > best_gap) {
        best_gap = g;
        best = c;
      }
      if (g > tolerance && g < light_gap) {
        light_gap = g;
        lightest = c;
      }
    }
    const std::size_t pick = lightest < cands.size() ? lightest : best;
    const Vec psi = cands[pick];
    if (gap(psi) > tolerance) {
      mirror.extend({psi});
      refresh();
    }
    return psi;
  }
};

}  // namespace

std::vector<MistakeBoundRun> exp_mistake_bound(const MistakeBoundConfig& cfg, std::uint64_t seed) {
  std::vector<MistakeBoundRun> out(cfg.seeds);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    Rng rng = make_rng(seed, {s, 0});
    const DenseState state = random_state(cfg.d, cfg.state_rank, rng);
    const double tol = 3.0 * cfg.eps / 4.0;
    ExactTomograph student(state);
    ExactTeacher teacher(state, tol);
    MirrorAdversary adv(state, tol, derive_seed(seed, {s, 1}));
    LearnerConfig lc;
    lc.eps = cfg.eps;
    lc.throw_on_cap = false;
    const LearnerResult r = run_single_rank(
        state, cfg.M, [&adv](std::size_t, const std::vector<double>&) { return adv.next(); }, lc, teacher, student);
    out[s].mistakes = r.ledger.mistake_count;
    out[s].cap = r.ledger.cap;
    out[s].heavy = r.ledger.heavy_directions(cfg.eps);
    out[s].final_k = r.final_k;
    out[s].gap_breaches = r.ledger.gap_breaches;
  }
  return out;
}

std::vector<LearnerRun> exp_learner(const LearnerExpConfig& cfg, std::uint64_t seed) {
  std::vector<LearnerRun> out(cfg.seeds);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    Rng rng = make_rng(seed, {s, 0});
    const DenseState state = random_state(cfg.d, cfg.state_rank, rng);
    const PovmSampler sampler(state);
    auto sketch = std::make_shared<const PovmSketch>(build_povm_sketch_serial(
        sampler, cfg.teacher_batches, cfg.teacher_samples / cfg.teacher_batches, derive_seed(seed, {s, 1})));
    TeacherConfig tc;
    tc.eps = cfg.eps / 2.0;
    tc.B = cfg.B;
    tc.ell = cfg.teacher_ell;
    tc.threshold_noise = cfg.teacher_noise;
    tc.query_noise = cfg.teacher_noise;
    ShadowTeacher teacher(sketch, tc, derive_seed(seed, {s, 2}));
    PmwTomographConfig pc;
    pc.samples = cfg.pmw_samples;
    pc.pmw.alpha = 3.0 * cfg.eps / 16.0;
    pc.pmw.threshold_noise = cfg.pmw_noise;
    pc.pmw.gate_noise = cfg.pmw_noise;
    pc.pmw.answer_noise = cfg.pmw_noise;
    pc.pmw.max_updates = 4 * cfg.M;
    PmwTomograph tomograph(state, pc, derive_seed(seed, {s, 3}));

    Eigen::SelfAdjointEigenSolver<Mat> eig(state.rho);
    Rng adv = make_rng(seed, {s, 4});
    Mat last;
    auto stream = [&](std::size_t round, const std::vector<double>& answers) -> Mat {
      const std::size_t d = cfg.d;
      // Follow up on large answers with a sign-flipped, perturbed copy;
      // otherwise draw fresh directions leaning on rho's heavy eigenvectors.
      if (round > 0 && std::abs(answers.back()) > 0.2 && uniform01(adv) < 0.5) {
        Mat O = -last + random_hermitian(d, 0.05, adv);
        const double f = trace_product(O, O);
        if (f > cfg.B) O *= std::sqrt(cfg.B / f);
        return last = O;
      }
      if (round > 0 && uniform01(adv) < 0.1) return last;
      const std::size_t k = 1 + adv() % 4;
      std::vector<Vec> dirs;
      for (std::size_t j = 0; j < k + 1; ++j) {
        Vec v = 0.5 * haar_vector(d, adv);
        for (Eigen::Index e = static_cast<Eigen::Index>(d) - 1; e >= static_cast<Eigen::Index>(d - cfg.state_rank); --e)
          v += cplx(uniform(adv, -1, 1), uniform(adv, -1, 1)) * eig.eigenvectors().col(e);
        dirs.push_back(v);
      }
      Subspace basis(d);
      basis.extend(dirs);
      Mat O = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
      double f = 0.0;
      for (std::size_t j = 0; j < basis.k(); ++j) {
        // The last direction carries a small weight that truncation drops.
        const double w = j + 1 == basis.k() ? uniform(adv, -0.1, 0.1) : uniform(adv, -1.0, 1.0);
        O += w * basis.basis()[j] * basis.basis()[j].adjoint();
        f += w * w;
      }
      if (f > cfg.B) O *= std::sqrt(cfg.B / f);
      return last = O;
    };
    LearnerConfig lc;
    lc.eps = cfg.eps;
    lc.B = cfg.B;
    lc.throw_on_cap = false;
    try {
      const LearnerResult r = run_bounded_frobenius(state, cfg.M, stream, lc, teacher, tomograph);
      out[s].completed = true;
      out[s].mistakes = r.ledger.mistake_count;
      out[s].final_k = r.final_k;
      out[s].gap_breaches = r.ledger.gap_breaches;
      out[s].retained_breaches = r.ledger.retained_breaches;
      out[s].max_error = r.max_error;
      for (const LedgerRow& row : r.ledger.rows) out[s].max_discarded = std::max(out[s].max_discarded, row.discarded);
    } catch (const Error& e) {
      out[s].completed = false;
      out[s].failure = e.what();
    }
  }
  return out;
}

// ------------------------------------------------------------ PMW

std::vector<PmwRun> exp_pmw(const PmwExpConfig& cfg, std::uint64_t seed) {
  std::vector<PmwRun> out(cfg.seeds);
  auto universe = std::make_shared<const PauliUniverse>(cfg.n_qubits);
  const std::size_t d = universe->dim();
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    Rng rng = make_rng(seed, {s, 0});
    const DenseState state = random_state(d, 1 + rng() % 2, rng);
    const std::vector<double> born = universe->born(state);
    Rng data_rng = make_rng(seed, {s, 1});
    PmwSession session(sample_histogram(universe, state, cfg.samples, data_rng), cfg.pmw, derive_seed(seed, {s, 2}));
    Rng adv = make_rng(seed, {s, 3});
    std::vector<std::pair<Mat, double>> paulis;  // asked Pauli queries and their answers
    Mat previous;
    double previous_answer = 0.0;
    bool previous_updated = true;
    PmwRun& run = out[s];
    try {
      for (std::size_t q = 0; q < cfg.M; ++q) {
        const double u = uniform01(adv);
        Mat O;
        bool is_pauli = false, is_repeat = false;
        if (q > 0 && u < 0.15) {
          O = previous;
          is_repeat = true;
        } else if (u < 0.55 || paulis.size() < 4) {
          O = pauli_string_matrix(random_pauli(cfg.n_qubits, adv).symbols);
          is_pauli = true;
        } else if (u < 0.75) {
          // Single-qubit observable on a random qubit.
          const std::size_t target = adv() % cfg.n_qubits;
          Mat local = random_hermitian(2, 1.0, adv);
          local /= std::max(1.0, local.cwiseAbs().maxCoeff() * 2.0);
          O = Mat::Identity(1, 1);
          for (std::size_t k = 0; k < cfg.n_qubits; ++k) {
            const Mat f = k == target ? local : Mat::Identity(2, 2);
            Mat next(O.rows() * 2, O.cols() * 2);
            for (Eigen::Index a = 0; a < O.rows(); ++a)
              for (Eigen::Index b = 0; b < O.cols(); ++b) next.block(2 * a, 2 * b, 2, 2) = O(a, b) * f;
            O = next;
          }
        } else {
          // Aggregate the asked Paulis with the largest answers, signed by
          // their answers, in the style of Freedman's attack.
          std::vector<std::size_t> idx(paulis.size());
          for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
          std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(paulis[a].second) > std::abs(paulis[b].second);
          });
          const std::size_t k = std::min<std::size_t>(idx.size(), 2 + adv() % 6);
          O = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
          for (std::size_t i = 0; i < k; ++i) O += (paulis[idx[i]].second >= 0 ? 1.0 : -1.0) * paulis[idx[i]].first;
          O /= static_cast<double>(k);
        }
        const std::vector<double> f = universe->values(O);
        double truth = 0.0;
        for (std::size_t x = 0; x < f.size(); ++x) truth += born[x] * f[x];
        const std::size_t before = session.updates();
        const double a = session.answer_values(f);
        const bool updated = session.updates() != before;
        // Two consecutive lazy answers to the same query come from the same
        // hypothesis and must agree exactly.
        if (is_repeat && !updated && !previous_updated && a != previous_answer) ++run.repeat_mismatches;
        previous_updated = updated;
        run.max_error = std::max(run.max_error, std::abs(a - truth));
        if (is_pauli) paulis.emplace_back(O, a);
        previous = O;
        previous_answer = a;
      }
      run.completed = true;
    } catch (const Error&) {
      run.completed = false;
    }
    run.updates = session.updates();
    run.answered = session.answered();
    run.eps_spent = session.epsilon_spent();
  }
  return out;
}

// ------------------------------------------------------------ IFPC

std::vector<IfpcRun> exp_ifpc(const IfpcExpConfig& cfg, std::uint64_t seed) {
  std::vector<IfpcRun> out(cfg.seeds);
  const std::size_t M = static_cast<std::size_t>(std::ceil(cfg.c * static_cast<double>(cfg.N * cfg.N)));
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    BaselineTracingCode code(cfg.code);
    AttackConfig ac;
    ac.N = cfg.N;
    ac.d = cfg.d;
    ac.M = M;
    ac.stop_on_force = cfg.stop_on_force;
    const std::uint64_t trial_seed = derive_seed(seed, {s});
    const AttackOutcome o = cfg.pauli ? run_pauli_attack(empirical_mean_pauli(), code, ac, trial_seed)
                                      : run_local_attack(empirical_mean_local(), code, ac, trial_seed);
    IfpcRun& r = out[s];
    r.forced = o.forced;
    r.forced_round = o.forced_round;
    r.forced_on_probe = o.forced_on_probe;
    r.probe_forced_round = o.probe_forced_round;
    r.rounds = o.game.rounds;
    r.colluders = o.game.colluders.size();
    for (std::size_t i : o.game.accused)
      if (std::binary_search(o.game.colluders.begin(), o.game.colluders.end(), i)) ++r.accused_colluders;
    r.psi = o.game.psi;
    r.theta = o.game.theta;
    r.reaccusations = o.game.reaccusations;
    r.qubits = o.qubits;
  }
  return out;
}

// ------------------------------------------------------------ Pauli-Bell

std::vector<BellRun> exp_pauli_bell(const BellExpConfig& cfg, std::uint64_t seed) {
  std::vector<BellRun> out(cfg.seeds);
  const std::size_t d = std::size_t{1} << cfg.n_qubits;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    Rng rng = make_rng(seed, {s, 0});
    const DenseState state = random_state(d, 1 + rng() % 2, rng);
    SqConfig sq;
    sq.C = 1.0;
    sq.sigma = cfg.sigma;
    sq.max_queries = cfg.M;
    AdaptivePauliMechanism mech(state, cfg.bell_samples, sq, derive_seed(seed, {s, 1}));
    Rng adv = make_rng(seed, {s, 2});
    PauliString prev = random_pauli(cfg.n_qubits, adv);
    double prev_answer = 0.0;
    BellRun& run = out[s];
    for (std::size_t q = 0; q < cfg.M; ++q) {
      PauliString p;
      const double u = uniform01(adv);
      if (q > 0 && u < 0.1) {
        p = prev;
      } else if (q > 0 && std::abs(prev_answer) > 0.2 && u < 0.6) {
        // Explore the neighbourhood of a strong answer.
        p = prev;
        static const char symbols[4] = {'I', 'X', 'Y', 'Z'};
        do {
          p.symbols[adv() % cfg.n_qubits] = symbols[adv() % 4];
        } while (p.symbols == std::string(cfg.n_qubits, 'I'));
      } else {
        p = random_pauli(cfg.n_qubits, adv);
      }
      const double a = mech.answer(p);
      const double truth = expectation(state, Observable{p});
      run.max_error = std::max(run.max_error, std::abs(a - truth));
      ++run.queries;
      prev = p;
      prev_answer = a;
    }
    // Exact unbiasedness over every Pauli string.
    const std::vector<double> dist = bell_distribution(state);
    const std::size_t total = std::size_t{1} << (2 * cfg.n_qubits);
    static const char symbols[4] = {'I', 'X', 'Y', 'Z'};
    for (std::size_t code = 0; code < total; ++code) {
      std::string sym(cfg.n_qubits, 'I');
      std::size_t c = code;
      for (std::size_t k = cfg.n_qubits; k-- > 0;) {
        sym[k] = symbols[c & 3U];
        c >>= 2;
      }
      const PauliString p{sym};
      const double t = expectation(state, Observable{p});
      double e = 0.0;
      for (std::size_t o = 0; o < dist.size(); ++o) e += dist[o] * q_p(bell_from_code(o, cfg.n_qubits), p);
      run.max_unbiased_gap = std::max(run.max_unbiased_gap, std::abs(e - t * t));
    }
  }
  return out;
}

}  // namespace qadapt
