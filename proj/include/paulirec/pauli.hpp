#pragma once

#include <compare>
#include <complex>
#include <cstdint>

#include <Eigen/Core>

namespace paulirec {

/// An n-qubit Pauli observable P_1 ⊗ ... ⊗ P_n in the symplectic (x, z) mask
/// encoding. Bit (n-1-k) of each mask belongs to tensor factor k, so factor 0
/// (the leftmost factor) owns the most significant bit, matching the binary
/// expansion of dense row/column indices. Per factor, (x, z) selects
/// I:(0,0), X:(1,0), Y:(1,1), Z:(0,1), with Y represented as i·X·Z so that
/// every label is exactly Hermitian and squares to the identity.
struct PauliLabel {
  int n = 0;
  std::uint64_t x_mask = 0;
  std::uint64_t z_mask = 0;

  friend auto operator<=>(const PauliLabel&, const PauliLabel&) = default;
};

/// Bijection [0, 4^n) -> labels. Base-4 digit k of the index (digit 0 most
/// significant) selects {0:I, 1:X, 2:Y, 3:Z} for tensor factor k.
/// Throws std::invalid_argument for n outside [1, 31] or index >= 4^n.
PauliLabel make_label(int n, std::uint64_t index);

/// Inverse of make_label.
std::uint64_t label_index(const PauliLabel& label);

inline bool is_identity(const PauliLabel& label) {
  return label.x_mask == 0 && label.z_mask == 0;
}

/// Dense 2^n x 2^n matrix of the observable. One nonzero per row/column,
/// each in {±1, ±i}. Intended for n <= 12.
Eigen::MatrixXcd dense_matrix(const PauliLabel& label);

/// Tr(P† M) in O(d) arithmetic using the one-nonzero-per-column structure.
/// For Hermitian M the imaginary part is at rounding level.
std::complex<double> pauli_expectation(const PauliLabel& label, const Eigen::MatrixXcd& m);

/// Symplectic commutation test: true iff popcount(a.x & b.z) + popcount(a.z & b.x)
/// is even. Agrees with the dense commutator.
bool commutes(const PauliLabel& a, const PauliLabel& b);

}  // namespace paulirec
