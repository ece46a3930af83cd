#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "qadapt/common.hpp"
#include "qadapt/mechanisms.hpp"
#include "qadapt/state.hpp"
#include "qadapt/threshold.hpp"
#include "qadapt/transcript.hpp"

namespace qadapt {

// Orthonormal basis grown by Gram-Schmidt in insertion order. Coordinates
// are always taken in the current basis, which is a prefix of every later
// basis.
class Subspace {
 public:
  explicit Subspace(std::size_t dim, std::size_t cap = std::numeric_limits<std::size_t>::max());

  struct Projection {
    Vec coords;        // k coordinates in the basis
    double perp_norm;  // norm of the component outside the span
  };
  Projection project(const Vec& psi) const;
  // Full-space vector P_S psi.
  Vec project_vector(const Vec& psi) const;
  // Appends the residual of each state whose norm exceeds the cutoff;
  // returns how many basis vectors were added.
  std::size_t extend(const std::vector<Vec>& states);
  // Phi^dagger A Phi as a k x k matrix.
  Mat compress(const Mat& A) const;
  // P_S A P_S in the full space.
  Mat sandwich(const Mat& A) const;

  std::size_t dim() const { return dim_; }
  std::size_t k() const { return basis_.size(); }
  std::size_t cap() const { return cap_; }
  const std::vector<Vec>& basis() const { return basis_; }
  const std::vector<Vec>& raw_states() const { return raw_; }
  Mat basis_matrix() const;

 private:
  std::size_t dim_;
  std::size_t cap_;
  std::vector<Vec> basis_;
  std::vector<Vec> raw_;
};

struct PaddedState {
  DenseState rho;        // dimension 2^ceil(log2(k+1))
  std::size_t k = 0;
  double residual = 0.0; // 1 - tr(rho_S), stored in diagonal slot k
};

PaddedState pad_state(const Subspace& sub, const DenseState& state);
// Embed a k x k operator into the top-left block of a D x D zero matrix.
Mat pad_operator(const Mat& op, std::size_t D);

class TeacherOracle {
 public:
  virtual ~TeacherOracle() = default;
  virtual TeacherResult check(const Mat& obs, double guess) = 0;
};

// Closeness check through shadow threshold search on a POVM sketch.
class ShadowTeacher : public TeacherOracle {
 public:
  ShadowTeacher(std::shared_ptr<const PovmSketch> sketch, TeacherConfig cfg, std::uint64_t seed)
      : teacher_(std::move(sketch), cfg, seed) {}
  TeacherResult check(const Mat& obs, double guess) override { return teacher_.check(obs, guess); }
  const ClosenessTeacher& inner() const { return teacher_; }

 private:
  ClosenessTeacher teacher_;
};

// Flags a mistake exactly when |truth - guess| > tolerance and corrects
// with the truth.
class ExactTeacher : public TeacherOracle {
 public:
  ExactTeacher(DenseState state, double tolerance) : state_(std::move(state)), tolerance_(tolerance) {}
  TeacherResult check(const Mat& obs, double guess) override;

 private:
  DenseState state_;
  double tolerance_;
};

class TomographOracle {
 public:
  virtual ~TomographOracle() = default;
  virtual void restart(const Subspace& sub) = 0;
  // Estimate of tr(O_S rho_S) for an operator in subspace coordinates.
  virtual double estimate(const Mat& op_coords) = 0;
};

class ExactTomograph : public TomographOracle {
 public:
  explicit ExactTomograph(DenseState state) : state_(std::move(state)) {}
  void restart(const Subspace& sub) override { rho_s_ = sub.compress(state_.rho); }
  double estimate(const Mat& op_coords) override;

 private:
  DenseState state_;
  Mat rho_s_;
};

struct PmwTomographConfig {
  std::uint64_t samples = 10000000;
  PmwConfig pmw;
};

// PMW over the mutually-unbiased-basis universe of the padded state,
// re-instantiated with fresh samples on every restart.
class PmwTomograph : public TomographOracle {
 public:
  PmwTomograph(DenseState state, PmwTomographConfig cfg, std::uint64_t seed)
      : state_(std::move(state)), cfg_(cfg), seed_(seed) {}
  void restart(const Subspace& sub) override;
  double estimate(const Mat& op_coords) override;
  std::size_t restarts() const { return restarts_; }
  std::size_t total_updates() const { return total_updates_ + (session_ ? session_->updates() : 0); }

 private:
  DenseState state_;
  PmwTomographConfig cfg_;
  std::uint64_t seed_;
  std::size_t restarts_ = 0;
  std::size_t total_updates_ = 0;
  std::size_t D_ = 1;
  std::optional<PmwSession> session_;
};

struct LedgerRow {
  std::size_t round = 0;
  bool mistake = false;
  std::size_t k_after = 0;
  double gap_witness = 0.0;
  double answer = 0.0;
  double truth = 0.0;
  double error = 0.0;
  double discarded = 0.0;  // sum over dropped eigenpairs of |w| <psi|rho|psi>
};

struct MistakeLedger {
  std::size_t mistake_count = 0;
  std::size_t cap = 0;
  std::vector<double> added_direction_mass;  // <phi|rho|phi> of every new basis vector
  std::size_t gap_breaches = 0;              // mistakes without the required gap witness
  std::size_t rank_breaches = 0;
  std::size_t retained_breaches = 0;
  std::vector<LedgerRow> rows;
  // Lemma E.3 count: added directions heavier than eps.
  std::size_t heavy_directions(double eps) const;
};

struct LearnerResult {
  Transcript transcript;
  MistakeLedger ledger;
  std::size_t final_k = 0;
  double max_error = 0.0;
};

struct LearnerConfig {
  double eps = 0.3;
  double B = 4.0;
  std::size_t R = 1;
  std::size_t mistake_cap = 0;  // 0 = the analytic cap for the variant
  bool throw_on_cap = true;     // MistakeBudgetExceeded when the cap is passed
};

// Adaptive streams see the round index and all answers so far.
using VecStream = std::function<Vec(std::size_t round, const std::vector<double>& answers)>;
using MatStream = std::function<Mat(std::size_t round, const std::vector<double>& answers)>;

std::size_t single_rank_mistake_cap(double eps);
std::size_t low_rank_mistake_cap(std::size_t R, double eps);

LearnerResult run_single_rank(const DenseState& state, std::size_t M, const VecStream& queries,
                              const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph);
LearnerResult run_bounded_frobenius(const DenseState& state, std::size_t M, const MatStream& queries,
                                    const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph);
LearnerResult run_low_rank(const DenseState& state, std::size_t M, const MatStream& queries,
                           const LearnerConfig& cfg, TeacherOracle& teacher, TomographOracle& tomograph);

}  // namespace qadapt
