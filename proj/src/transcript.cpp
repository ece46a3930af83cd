#include "qadapt/transcript.hpp"

#include <cmath>

#include "qadapt/common.hpp"

namespace qadapt {

AccuracyReport evaluate_accuracy(const Transcript& transcript, double eps) {
  if (transcript.rounds.empty()) throw Error(ErrorKind::EmptyTranscript, "no rounds to score");
  AccuracyReport r;
  for (const Round& round : transcript.rounds) r.max_error = std::max(r.max_error, std::abs(round.truth - round.answer));
  r.violated = r.max_error > eps;
  return r;
}

void MechanismConfig::validate() const {
  if (N < 1 || M < 1 || R < 1 || K < 1 || d_users < 1 || m_bits < 1)
    throw Error(ErrorKind::ConfigError, "counts must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::ConfigError, "eps must lie in (0,1)");
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::ConfigError, "delta must lie in (0,1)");
}

}  // namespace qadapt
