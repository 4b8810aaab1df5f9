#pragma once

#include <cstdint>
#include <vector>

#include "paulirec/matrices.hpp"
#include "paulirec/pauli.hpp"

namespace paulirec {

/// The linear map taking a d x d matrix X to the m scaled coefficients
/// (d/sqrt(m)) Tr(S_i† X) against the normalized observables S_i = P_i/sqrt(d),
/// where the P_i are the stored labels. Normalized so that the expectation of
/// the normal operator over uniform label draws is the identity. Duplicate
/// labels are allowed (sampling with replacement) and kept as-is.
class SamplingOperator {
 public:
  /// m labels drawn iid uniformly from [0, 4^n).
  static SamplingOperator draw(int n, int m, std::uint64_t seed);

  /// m labels drawn iid uniformly, rejecting duplicates (requires m <= 4^n).
  static SamplingOperator draw_distinct(int n, int m, std::uint64_t seed);

  /// All 4^n labels exactly once; the resulting map is an isometry. n <= 8.
  static SamplingOperator full_basis(int n);

  /// Explicit ordered label list; all labels must share the same qubit count.
  static SamplingOperator from_labels(std::vector<PauliLabel> labels);

  int n() const { return n_; }
  Eigen::Index dim() const { return Eigen::Index{1} << n_; }
  int m() const { return static_cast<int>(labels_.size()); }
  const std::vector<PauliLabel>& labels() const { return labels_; }
  double scale() const;  // d/sqrt(m)

  bool has_duplicate_labels() const;

  /// Stable FNV-1a hash of (n, m, label indices); identifies the operator in
  /// result files.
  std::uint64_t fingerprint() const;

  /// Forward map. Input must be Hermitian (within roundoff); the output is
  /// dropped to its real part after checking the imaginary residue.
  RealVector forward(const Matrix& x) const;

  /// Adjoint map y -> (d/sqrt(m)) sum_i y_i S_i. Exactly Hermitian for real y.
  Matrix adjoint_map(const RealVector& y) const;

  /// adjoint(forward(X)) fused in one pass: (d^2/m) sum_i S_i Tr(S_i† X).
  Matrix normal_apply(const Matrix& x) const;

  struct Preimage {
    Matrix matrix;
    /// True when ‖y‖_2 <= sqrt(d/m), in which case ‖matrix‖_* <= 1.
    bool nuclear_bound_certified = false;
  };

  /// X = (sqrt(m)/d) sum_i y_i S_i, which satisfies forward(X) = y whenever
  /// the labels are distinct (throws otherwise).
  Preimage nnq_preimage(const RealVector& y) const;

 private:
  SamplingOperator(int n, std::vector<PauliLabel> labels);

  int n_ = 0;
  std::vector<PauliLabel> labels_;
};

}  // namespace paulirec
