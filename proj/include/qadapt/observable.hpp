#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qadapt/common.hpp"

namespace qadapt {

// Qubit j of a dense state is bit (n - 1 - j) of the basis index, so the
// leftmost Pauli symbol acts on the most significant bit.

struct SingleQubitZ {
  std::size_t index = 0;
};

struct ZParity {
  std::vector<std::size_t> support;  // sorted, no duplicates
};

struct PauliString {
  std::string symbols;  // over {I, X, Y, Z}
};

struct RankOneProjector {
  Vec psi;
};

struct HermitianDense {
  Mat matrix;
  RVec w;      // eigenvalues, ascending
  Mat vecs;    // column j is the eigenvector for w(j)
};

using Observable = std::variant<SingleQubitZ, ZParity, PauliString, RankOneProjector, HermitianDense>;

ZParity make_zparity(std::vector<std::size_t> support);
ZParity make_zparity_from_bits(const std::vector<std::uint8_t>& mask);
PauliString make_pauli(const std::string& symbols);
RankOneProjector make_projector(const Vec& psi);
// Validates Hermiticity and the spectral-norm bound, caches the eigendecomposition.
HermitianDense make_hermitian(const Mat& m);
// Same without the norm bound, for bounded-Frobenius queries.
HermitianDense make_hermitian_any_norm(const Mat& m);

// Number of qubits the observable touches non-trivially; dense payloads
// report every qubit of their dimension.
std::size_t locality(const Observable& obs);
bool is_diagonal(const Observable& obs);
bool is_identity(const Observable& obs);
// Dense matrix form for an n-qubit (dimension 2^n) or dimension-d system.
Mat to_dense(const Observable& obs, std::size_t dim);
std::string describe(const Observable& obs);

Mat pauli_matrix(char symbol);
// Kronecker product of the symbols, leftmost symbol most significant.
Mat pauli_string_matrix(const std::string& symbols);

}  // namespace qadapt
