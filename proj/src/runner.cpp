#include "qadapt/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "qadapt/experiments.hpp"

namespace qadapt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorKind::ConfigError, what); }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  if (v.empty() || v[0] == '-') config_error(key + ": expected a non-negative integer, got '" + v + "'");
  std::size_t pos = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &pos);
  } catch (const std::exception&) {
    config_error(key + ": expected a non-negative integer, got '" + v + "'");
  }
  if (pos != v.size()) config_error(key + ": expected a non-negative integer, got '" + v + "'");
  return static_cast<std::size_t>(x);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    config_error(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(x)) config_error(key + ": expected a number, got '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  config_error(key + ": expected true or false, got '" + v + "'");
}

// Binds configuration keys to typed fields. Overrides are applied as keys
// are registered; every registered key is recorded in canonical form for
// hashing and for the summary.
class Binder {
 public:
  explicit Binder(std::map<std::string, std::string> overrides) : overrides_(std::move(overrides)) {}

  void add(const std::string& key, std::size_t& v) {
    if (auto o = take(key)) v = parse_size(key, *o);
    effective_[key] = std::to_string(v);
  }
  void add(const std::string& key, double& v) {
    if (auto o = take(key)) v = parse_double(key, *o);
    effective_[key] = format_double(v);
  }
  void add(const std::string& key, bool& v) {
    if (auto o = take(key)) v = parse_bool(key, *o);
    effective_[key] = v ? "true" : "false";
  }
  void add(const std::string& key, std::string& v, const std::vector<std::string>& allowed) {
    if (auto o = take(key)) v = *o;
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) config_error(key + ": unsupported value '" + v + "'");
    effective_[key] = v;
  }
  void add(const std::string& key, std::vector<std::size_t>& v) {
    if (auto o = take(key)) {
      v.clear();
      for (const std::string& part : split(*o, ',')) v.push_back(parse_size(key, part));
      if (v.empty()) config_error(key + ": empty list");
    }
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    effective_[key] = s;
  }
  void add(const std::string& key, std::vector<double>& v) {
    if (auto o = take(key)) {
      v.clear();
      for (const std::string& part : split(*o, ',')) v.push_back(parse_double(key, part));
      if (v.empty()) config_error(key + ": empty list");
    }
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    effective_[key] = s;
  }

  void finish() const {
    if (!overrides_.empty()) config_error("unknown key '" + overrides_.begin()->first + "'");
  }
  const std::map<std::string, std::string>& effective() const { return effective_; }

 private:
  std::optional<std::string> take(const std::string& key) {
    auto it = overrides_.find(key);
    if (it == overrides_.end()) return std::nullopt;
    std::string v = it->second;
    overrides_.erase(it);
    return v;
  }

  std::map<std::string, std::string> overrides_;
  std::map<std::string, std::string> effective_;
};

void require(bool ok, const std::string& what) {
  if (!ok) config_error(what);
}

Criterion criterion(const std::string& name, double value, const std::string& rel, double threshold) {
  Criterion c{name, value, rel, threshold, false};
  if (rel == ">=") c.pass = value >= threshold;
  else if (rel == "<=") c.pass = value <= threshold;
  else if (rel == "<") c.pass = value < threshold;
  else c.pass = value == threshold;
  return c;
}

// Mean and sample standard deviation of every numeric column.
nlohmann::ordered_json column_stats(const CsvTable& t, const std::vector<std::string>& skip) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (std::find(skip.begin(), skip.end(), t.header[c]) != skip.end()) continue;
    std::vector<double> xs;
    bool numeric = !t.rows.empty();
    for (const auto& row : t.rows) {
      char* end = nullptr;
      const double x = std::strtod(row[c].c_str(), &end);
      if (row[c].empty() || *end != '\0') {
        numeric = false;
        break;
      }
      xs.push_back(x);
    }
    if (!numeric) continue;
    double m = 0.0, s = 0.0;
    mean_std(xs, m, s);
    out[t.header[c]] = {{"mean", m}, {"std", s}};
  }
  return out;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

template <class T>
double fraction(const std::vector<T>& xs, const std::function<bool(const T&)>& pred) {
  if (xs.empty()) return 0.0;
  return static_cast<double>(std::count_if(xs.begin(), xs.end(), pred)) / static_cast<double>(xs.size());
}

struct Outcome {
  CsvTable data;
  std::vector<Criterion> criteria;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

using Job = std::function<Outcome(Binder&, std::uint64_t seed, bool dry)>;

// ------------------------------------------------------------ jobs

Outcome job_attack(Binder& b, std::uint64_t seed, bool dry) {
  AttackExpConfig cfg;
  b.add("N", cfg.N);
  b.add("M_list", cfg.M_list);
  b.add("trials", cfg.runs);
  b.add("threshold_multiplier", cfg.params.threshold_multiplier);
  std::string rule = "strict-majority";
  b.add("majority_rule", rule, {"strict-majority", "any-positive"});
  cfg.params.rule = rule == "strict-majority" ? MajorityRule::StrictMajority : MajorityRule::AnyPositive;
  require(cfg.N > 0 && cfg.runs > 0, "N and trials must be positive");
  Outcome o;
  if (dry) return o;
  const AttackResult r = exp_attack(cfg, seed);
  o.data = attack_table(r, seed);
  const AttackRecord& last = r.records.back();
  double worst_nonadaptive = 0.0, worst_sep = 1e300;
  for (const AttackRecord& rec : r.records) {
    worst_nonadaptive = std::max(worst_nonadaptive, rec.nonadaptive_error_mean);
    if (rec.M >= 800) {
      const double sd = std::sqrt(rec.adaptive_error_std * rec.adaptive_error_std +
                                  rec.nonadaptive_error_std * rec.nonadaptive_error_std);
      worst_sep = std::min(worst_sep, (rec.adaptive_error_mean - rec.nonadaptive_error_mean) - sd);
    }
  }
  o.criteria.push_back(criterion("adaptive_mean_at_largest_M", last.adaptive_error_mean, ">=", 0.9));
  o.criteria.push_back(criterion("max_nonadaptive_mean", worst_nonadaptive, "<=", 0.3));
  if (worst_sep < 1e300) o.criteria.push_back(criterion("min_separation_minus_sigma_M_ge_800", worst_sep, ">=", 0.0));
  return o;
}

Outcome job_dp_median(Binder& b, std::uint64_t seed, bool dry) {
  DpMedianExpConfig cfg;
  b.add("n_qubits", cfg.n_qubits);
  b.add("K", cfg.K);
  b.add("batch_size", cfg.batch_size);
  b.add("trials", cfg.trials);
  b.add("accuracy", cfg.median.accuracy);
  b.add("grid_fraction", cfg.median.grid_fraction);
  b.add("eps_dp_per_query", cfg.median.eps_dp_per_query);
  require(cfg.K > 0 && cfg.batch_size > 0 && cfg.trials > 0, "K, batch_size and trials must be positive");
  Outcome o;
  if (dry) return o;
  const auto trials = exp_dp_median(cfg, seed);
  o.data.header = {"trial", "answer", "truth", "error"};
  for (std::size_t t = 0; t < trials.size(); ++t)
    o.data.rows.push_back({fmt(t), fmt(trials[t].answer), fmt(trials[t].truth), fmt(std::abs(trials[t].answer - trials[t].truth))});
  const double acc = cfg.median.accuracy;
  o.criteria.push_back(criterion("fraction_within_accuracy",
                                 fraction<DpMedianTrial>(trials, [acc](const DpMedianTrial& t) { return std::abs(t.answer - t.truth) <= acc; }),
                                 ">=", 0.95));
  return o;
}

Outcome job_pmw(Binder& b, std::uint64_t seed, bool dry) {
  PmwExpConfig cfg;
  b.add("n_qubits", cfg.n_qubits);
  b.add("samples", cfg.samples);
  b.add("M", cfg.M);
  b.add("trials", cfg.seeds);
  b.add("alpha", cfg.pmw.alpha);
  b.add("threshold", cfg.pmw.threshold);
  b.add("threshold_noise", cfg.pmw.threshold_noise);
  b.add("gate_noise", cfg.pmw.gate_noise);
  b.add("answer_noise", cfg.pmw.answer_noise);
  b.add("max_updates", cfg.pmw.max_updates);
  require(cfg.n_qubits >= 1 && cfg.n_qubits <= 3, "n_qubits must be 1..3 for the Pauli universe");
  require(cfg.seeds > 0 && cfg.samples > 0, "trials and samples must be positive");
  Outcome o;
  if (dry) return o;
  const auto runs = exp_pmw(cfg, seed);
  o.data.header = {"trial", "max_error", "eps_spent", "updates", "answered", "repeat_mismatches", "completed"};
  std::size_t mismatches = 0;
  for (std::size_t t = 0; t < runs.size(); ++t) {
    const PmwRun& r = runs[t];
    o.data.rows.push_back({fmt(t), fmt(r.max_error), fmt(r.eps_spent), fmt(r.updates), fmt(r.answered),
                           fmt(r.repeat_mismatches), fmt(r.completed)});
    mismatches += r.repeat_mismatches;
  }
  const double a = cfg.pmw.alpha;
  o.criteria.push_back(criterion("fraction_all_within_alpha",
                                 fraction<PmwRun>(runs, [a](const PmwRun& r) { return r.completed && r.max_error <= a; }), ">=", 0.95));
  o.criteria.push_back(criterion("lazy_repeat_mismatches", static_cast<double>(mismatches), "==", 0.0));
  return o;
}

Outcome job_threshold(Binder& b, std::uint64_t seed, bool dry) {
  std::string variant = "contract";
  b.add("variant", variant, {"contract", "teacher"});
  Outcome o;
  if (variant == "contract") {
    ThresholdExpConfig cfg;
    b.add("d", cfg.d);
    b.add("B", cfg.B);
    b.add("eps", cfg.eps);
    b.add("ell", cfg.ell);
    b.add("M", cfg.M);
    b.add("trials", cfg.streams);
    b.add("samples", cfg.samples);
    b.add("batches", cfg.batches);
    b.add("noise", cfg.noise);
    require(cfg.batches > 0 && cfg.samples % cfg.batches == 0, "samples must be a positive multiple of batches");
    require(cfg.streams > 0 && cfg.eps > 0.0, "trials and eps must be positive");
    if (dry) return o;
    const auto streams = exp_threshold_contract(cfg, seed);
    o.data.header = {"trial", "queries", "no_count", "clause1", "clause2", "halted", "halting_exact"};
    std::size_t violations = 0, inexact = 0;
    for (std::size_t t = 0; t < streams.size(); ++t) {
      const ThresholdStream& s = streams[t];
      o.data.rows.push_back({fmt(t), fmt(s.queries), fmt(s.no_count), fmt(s.clause1), fmt(s.clause2), fmt(s.halted),
                             fmt(s.halting_exact)});
      violations += s.clause1 + s.clause2;
      inexact += !s.halting_exact;
    }
    o.criteria.push_back(criterion("clause_violations", static_cast<double>(violations), "==", 0.0));
    o.criteria.push_back(criterion("streams_with_inexact_halting", static_cast<double>(inexact), "==", 0.0));
  } else {
    TeacherExpConfig cfg;
    b.add("d", cfg.d);
    b.add("eps", cfg.eps);
    b.add("samples", cfg.samples);
    b.add("batches", cfg.batches);
    b.add("trials", cfg.trials);
    b.add("noise", cfg.noise);
    require(cfg.batches > 0 && cfg.samples % cfg.batches == 0, "samples must be a positive multiple of batches");
    require(cfg.trials > 0 && cfg.eps > 0.0, "trials and eps must be positive");
    if (dry) return o;
    const auto trials = exp_teacher(cfg, seed);
    o.data.header = {"trial", "flagged", "correction_error"};
    for (std::size_t t = 0; t < trials.size(); ++t)
      o.data.rows.push_back({fmt(t), fmt(trials[t].flagged), fmt(trials[t].correction_error)});
    const double tol = cfg.eps / 4.0;
    o.criteria.push_back(criterion(
        "fraction_flagged_and_corrected",
        fraction<TeacherTrial>(trials, [tol](const TeacherTrial& t) { return t.flagged && t.correction_error <= tol; }), ">=", 0.95));
  }
  return o;
}

Outcome job_subspace(Binder& b, std::uint64_t seed, bool dry) {
  std::string variant = "frobenius";
  b.add("variant", variant, {"frobenius", "mistake-bound"});
  Outcome o;
  if (variant == "mistake-bound") {
    MistakeBoundConfig cfg;
    b.add("d", cfg.d);
    b.add("eps", cfg.eps);
    b.add("M", cfg.M);
    b.add("trials", cfg.seeds);
    b.add("state_rank", cfg.state_rank);
    require(cfg.state_rank >= 1 && cfg.state_rank <= cfg.d, "state_rank must be in 1..d");
    require(cfg.seeds > 0 && cfg.eps > 0.0, "trials and eps must be positive");
    if (dry) return o;
    const auto runs = exp_mistake_bound(cfg, seed);
    o.data.header = {"trial", "mistakes", "cap", "heavy", "final_k", "gap_breaches"};
    std::size_t worst = 0, heavy = 0, breaches = 0;
    for (std::size_t t = 0; t < runs.size(); ++t) {
      const MistakeBoundRun& r = runs[t];
      o.data.rows.push_back({fmt(t), fmt(r.mistakes), fmt(r.cap), fmt(r.heavy), fmt(r.final_k), fmt(r.gap_breaches)});
      worst = std::max(worst, r.mistakes);
      heavy = std::max(heavy, r.heavy);
      breaches += r.gap_breaches;
    }
    o.criteria.push_back(criterion("max_mistakes", static_cast<double>(worst), "<=",
                                   static_cast<double>(single_rank_mistake_cap(cfg.eps))));
    o.criteria.push_back(criterion("max_heavy_directions", static_cast<double>(heavy), "<=", std::floor(1.0 / cfg.eps + 1e-9)));
    o.criteria.push_back(criterion("gap_breaches", static_cast<double>(breaches), "==", 0.0));
  } else {
    LearnerExpConfig cfg;
    b.add("d", cfg.d);
    b.add("B", cfg.B);
    b.add("eps", cfg.eps);
    b.add("M", cfg.M);
    b.add("trials", cfg.seeds);
    b.add("state_rank", cfg.state_rank);
    b.add("teacher_samples", cfg.teacher_samples);
    b.add("teacher_batches", cfg.teacher_batches);
    b.add("teacher_ell", cfg.teacher_ell);
    b.add("teacher_noise", cfg.teacher_noise);
    b.add("pmw_samples", cfg.pmw_samples);
    b.add("pmw_noise", cfg.pmw_noise);
    require(cfg.state_rank >= 1 && cfg.state_rank <= cfg.d, "state_rank must be in 1..d");
    require(cfg.teacher_batches > 0 && cfg.teacher_samples % cfg.teacher_batches == 0,
            "teacher_samples must be a positive multiple of teacher_batches");
    require(cfg.seeds > 0 && cfg.eps > 0.0 && cfg.B > 0.0, "trials, eps and B must be positive");
    if (dry) return o;
    const auto runs = exp_learner(cfg, seed);
    o.data.header = {"trial", "mistakes", "final_k", "max_error", "max_discarded", "gap_breaches", "retained_breaches",
                     "completed", "failure"};
    for (std::size_t t = 0; t < runs.size(); ++t) {
      const LearnerRun& r = runs[t];
      o.data.rows.push_back({fmt(t), fmt(r.mistakes), fmt(r.final_k), fmt(r.max_error), fmt(r.max_discarded),
                             fmt(r.gap_breaches), fmt(r.retained_breaches), fmt(r.completed), r.failure});
    }
    const double eps = cfg.eps;
    o.criteria.push_back(criterion("fraction_all_within_eps",
                                   fraction<LearnerRun>(runs, [eps](const LearnerRun& r) { return r.completed && r.max_error <= eps; }),
                                   ">=", 0.9));
  }
  return o;
}

Outcome job_ifpc(Binder& b, std::uint64_t seed, bool dry, bool pauli) {
  IfpcExpConfig cfg;
  cfg.pauli = pauli;
  b.add("N", cfg.N);
  b.add("d", cfg.d);
  b.add("c", cfg.c);
  b.add("trials", cfg.seeds);
  b.add("stop_on_force", cfg.stop_on_force);
  b.add("probe_probability", cfg.code.probe_probability);
  b.add("cutoff", cfg.code.cutoff);
  b.add("threshold_factor", cfg.code.threshold_factor);
  require(cfg.N >= 1 && cfg.d >= 1 && cfg.c > 0.0 && cfg.seeds > 0, "N, d, c and trials must be positive");
  require(!pauli || cfg.d <= 100000, "d too large for the Pauli variant");
  Outcome o;
  if (dry) return o;
  const auto runs = exp_ifpc(cfg, seed);
  o.data.header = {"trial", "forced", "forced_round", "forced_on_probe", "probe_forced_round", "rounds", "colluders",
                   "accused_colluders", "psi", "theta", "reaccusations", "qubits"};
  for (std::size_t t = 0; t < runs.size(); ++t) {
    const IfpcRun& r = runs[t];
    o.data.rows.push_back({fmt(t), fmt(r.forced), fmt(r.forced_round), fmt(r.forced_on_probe), fmt(r.probe_forced_round),
                           fmt(r.rounds), fmt(r.colluders), fmt(r.accused_colluders), fmt(r.psi), fmt(r.theta),
                           fmt(r.reaccusations), fmt(r.qubits)});
  }
  o.criteria.push_back(criterion("fraction_forced", fraction<IfpcRun>(runs, [](const IfpcRun& r) { return r.forced; }), ">=", 0.9));
  std::size_t psi_max = 0;
  for (const IfpcRun& r : runs) psi_max = std::max(psi_max, r.psi);
  o.extra["fraction_forced_on_probe"] = fraction<IfpcRun>(runs, [](const IfpcRun& r) { return r.forced_on_probe; });
  o.extra["fraction_tracing_majority"] =
      fraction<IfpcRun>(runs, [](const IfpcRun& r) { return 2 * r.accused_colluders > r.colluders; });
  o.extra["max_false_accusations"] = psi_max;
  o.extra["rounds_M"] = static_cast<std::size_t>(std::ceil(cfg.c * static_cast<double>(cfg.N * cfg.N)));
  return o;
}

Outcome job_povm(Binder& b, std::uint64_t seed, bool dry) {
  ConcentrationConfig cc;
  BiasConfig bc;
  b.add("d", cc.d);
  b.add("B", cc.B);
  b.add("samples", cc.samples);
  b.add("taus", cc.taus);
  b.add("bias_d", bc.d);
  b.add("bias_B", bc.B);
  b.add("bias_eps", bc.eps_list);
  b.add("bias_samples", bc.samples);
  std::size_t reps = 1;
  b.add("trials", reps);
  require(cc.d >= 2 && bc.d >= 2 && cc.samples > 0 && bc.samples > 0 && reps > 0, "dimensions, samples and trials must be positive");
  Outcome o;
  if (dry) return o;
  o.data.header = {"trial", "quantity", "param", "value", "se", "bound"};
  bool tails_ok = true, m2_ok = true, m4_ok = true;
  double worst_bias_ratio = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const std::uint64_t s = derive_seed(seed, {r});
    const ConcentrationResult c = exp_povm_concentration(cc, derive_seed(s, {0}));
    for (std::size_t k = 0; k < c.taus.size(); ++k) {
      o.data.rows.push_back({fmt(r), "tail", fmt(c.taus[k]), fmt(c.tails[k]), "", fmt(c.tail_bounds[k])});
      tails_ok = tails_ok && c.tails[k] < c.tail_bounds[k];
    }
    o.data.rows.push_back({fmt(r), "moment2", "2", fmt(c.m2), fmt(c.m2_se), fmt(c.m2_bound)});
    o.data.rows.push_back({fmt(r), "moment4", "4", fmt(c.m4), fmt(c.m4_se), fmt(c.m4_bound)});
    m2_ok = m2_ok && c.m2 <= c.m2_bound + 3.0 * c.m2_se;
    m4_ok = m4_ok && c.m4 <= c.m4_bound + 3.0 * c.m4_se;
    for (const BiasResult& br : exp_truncation_bias(bc, derive_seed(s, {1}))) {
      o.data.rows.push_back({fmt(r), "truncation_bias", fmt(br.eps), fmt(br.bias), fmt(br.bias_se), fmt(br.eps / 3.0)});
      const double slack = br.eps / 3.0 + 5.0 * br.bias_se;
      worst_bias_ratio = std::max(worst_bias_ratio, std::abs(br.bias) / slack);
    }
  }
  o.criteria.push_back(criterion("tails_below_bound", tails_ok ? 1.0 : 0.0, "==", 1.0));
  o.criteria.push_back(criterion("moment2_within_bound_3se", m2_ok ? 1.0 : 0.0, "==", 1.0));
  o.criteria.push_back(criterion("moment4_within_bound_3se", m4_ok ? 1.0 : 0.0, "==", 1.0));
  o.criteria.push_back(criterion("bias_over_eps3_plus_5se", worst_bias_ratio, "<=", 1.0));
  return o;
}

Outcome job_bell(Binder& b, std::uint64_t seed, bool dry) {
  BellExpConfig cfg;
  b.add("n_qubits", cfg.n_qubits);
  b.add("bell_samples", cfg.bell_samples);
  b.add("sigma", cfg.sigma);
  b.add("M", cfg.M);
  b.add("trials", cfg.seeds);
  double eps = 0.15;
  b.add("eps", eps);
  require(cfg.n_qubits >= 1 && cfg.n_qubits <= 5, "n_qubits must be 1..5");
  require(cfg.bell_samples > 0 && cfg.seeds > 0 && cfg.sigma > 0.0, "bell_samples, trials and sigma must be positive");
  Outcome o;
  if (dry) return o;
  const auto runs = exp_pauli_bell(cfg, seed);
  o.data.header = {"trial", "max_error", "max_unbiased_gap", "queries"};
  double gap = 0.0;
  for (std::size_t t = 0; t < runs.size(); ++t) {
    o.data.rows.push_back({fmt(t), fmt(runs[t].max_error), fmt(runs[t].max_unbiased_gap), fmt(runs[t].queries)});
    gap = std::max(gap, runs[t].max_unbiased_gap);
  }
  o.criteria.push_back(criterion("fraction_all_within_eps",
                                 fraction<BellRun>(runs, [eps](const BellRun& r) { return r.max_error <= eps; }), ">=", 0.95));
  o.criteria.push_back(criterion("max_unbiasedness_gap", gap, "<=", 1e-9));
  return o;
}

const std::map<std::string, Job>& jobs() {
  static const std::map<std::string, Job> table = {
      {"attack", job_attack},
      {"dp-median", job_dp_median},
      {"pmw", job_pmw},
      {"threshold", job_threshold},
      {"subspace", job_subspace},
      {"ifpc-local", [](Binder& b, std::uint64_t s, bool dry) { return job_ifpc(b, s, dry, false); }},
      {"ifpc-pauli", [](Binder& b, std::uint64_t s, bool dry) { return job_ifpc(b, s, dry, true); }},
      {"povm-concentration", job_povm},
      {"pauli-bell", job_bell},
  };
  return table;
}

void add_provenance(CsvTable& t, std::uint64_t seed, const std::string& hash) {
  const std::vector<std::pair<std::string, std::string>> cols = {
      {"seed", std::to_string(seed)}, {"build_id", build_id()}, {"config_hash", hash}};
  for (const auto& [name, value] : cols) {
    if (t.has(name)) continue;
    t.header.push_back(name);
    for (auto& row : t.rows) row.push_back(value);
  }
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) config_error("cannot write " + tmp.string());
    os << content;
    if (!os) config_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::map<std::string, std::string> parse_config(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) config_error("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) config_error("line " + std::to_string(lineno) + ": empty key");
    if (!out.emplace(key, value).second) config_error("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) config_error("cannot read config file " + path);
  return parse_config(is);
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"attack",     "dp-median",  "pmw",
                                               "threshold",  "subspace",   "ifpc-local",
                                               "ifpc-pauli", "povm-concentration", "pauli-bell"};
  return ids;
}

bool is_experiment_id(const std::string& id) { return jobs().count(id) != 0; }

std::map<std::string, std::string> experiment_defaults(const std::string& id) {
  if (!is_experiment_id(id)) config_error("unknown experiment '" + id + "'");
  Binder b({});
  jobs().at(id)(b, 0, true);
  return b.effective();
}

std::string config_hash(const std::string& id, const std::map<std::string, std::string>& effective) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(id);
  feed("\n");
  for (const auto& [k, v] : effective) feed(k + "=" + v + "\n");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunResult run_experiment(const RunSpec& spec) {
  if (!is_experiment_id(spec.id)) config_error("unknown experiment '" + spec.id + "'");
  std::map<std::string, std::string> overrides = spec.overrides;
  if (spec.trials > 0) overrides["trials"] = std::to_string(spec.trials);
  const Job& job = jobs().at(spec.id);

  // Validate everything before doing any work.
  Binder check(overrides);
  job(check, spec.seed, true);
  check.finish();

  Binder b(overrides);
  Outcome o = job(b, spec.seed, false);
  std::map<std::string, std::string> effective = b.effective();
  effective["seed"] = std::to_string(spec.seed);
  const std::string hash = config_hash(spec.id, effective);

  RunResult r;
  r.data = std::move(o.data);
  add_provenance(r.data, spec.seed, hash);
  r.criteria = std::move(o.criteria);
  r.pass = std::all_of(r.criteria.begin(), r.criteria.end(), [](const Criterion& c) { return c.pass; });

  nlohmann::ordered_json& s = r.summary;
  s["experiment"] = spec.id;
  s["seed"] = spec.seed;
  s["build_id"] = build_id();
  s["config_hash"] = hash;
  s["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : effective) s["config"][k] = v;
  s["metrics"] = column_stats(r.data, {"trial", "seed", "build_id", "config_hash"});
  if (!o.extra.empty()) s["extra"] = o.extra;
  s["criteria"] = nlohmann::ordered_json::array();
  for (const Criterion& c : r.criteria)
    s["criteria"].push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}, {"pass", c.pass}});
  s["pass"] = r.pass;
  return r;
}

void write_outputs(const RunResult& result, const std::string& id, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) config_error("cannot create output directory " + dir);
  const std::filesystem::path base(dir);
  write_atomically(base / (id + ".csv"), to_csv(result.data));
  write_atomically(base / (id + "_summary.json"), result.summary.dump(2) + "\n");
}

}  // namespace qadapt
