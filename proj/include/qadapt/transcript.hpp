#pragma once

#include <cstddef>
#include <vector>

#include "qadapt/observable.hpp"

namespace qadapt {

struct Round {
  Observable query;
  double answer = 0.0;
  double truth = 0.0;
};

struct Transcript {
  std::vector<Round> rounds;
  void record(Observable query, double answer, double truth) {
    rounds.push_back(Round{std::move(query), answer, truth});
  }
  std::size_t size() const { return rounds.size(); }
};

struct AccuracyReport {
  double max_error = 0.0;
  bool violated = false;
};

AccuracyReport evaluate_accuracy(const Transcript& transcript, double eps);

// Flat parameter bundle shared by the mechanisms. Not every field matters
// to every mechanism; validate() checks only the universal invariants.
struct MechanismConfig {
  std::size_t N = 1000;
  std::size_t M = 100;
  double eps = 0.1;
  double delta = 0.05;
  double B = 1.0;
  std::size_t R = 1;
  std::size_t ell = 10;
  std::size_t K = 1;
  std::uint64_t seed = 1;
  std::size_t d_users = 1;
  std::size_t m_bits = 8;
  void validate() const;
};

}  // namespace qadapt
