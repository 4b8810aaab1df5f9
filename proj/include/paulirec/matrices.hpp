#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Core>

namespace paulirec {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

// Schatten norms (1, 2, infinity).
double nuclear_norm(const Matrix& m);
double frobenius_norm(const Matrix& m);
double operator_norm(const Matrix& m);

// Hilbert-Schmidt inner product Tr(A† B).
Complex hs_inner(const Matrix& a, const Matrix& b);

struct unchecked_t {
  explicit unchecked_t() = default;
};
inline constexpr unchecked_t unchecked{};

/// A d x d complex matrix validated to be Hermitian within
/// ‖M − M†‖_F <= 1e-10 ‖M‖_F, then stored exactly symmetrized.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Matrix m);
  HermitianMatrix(Matrix m, unchecked_t);  // symmetrizes, skips the check

  const Matrix& mat() const { return mat_; }
  Eigen::Index dim() const { return mat_.rows(); }

 private:
  Matrix mat_;
};

/// Hermitian, eigenvalues >= -1e-10, trace within 1e-10 of 1.
class DensityMatrix : public HermitianMatrix {
 public:
  explicit DensityMatrix(Matrix m);
  DensityMatrix(Matrix m, unchecked_t);  // caller guarantees physicality
};

/// Split into the best rank-r part (largest singular values) and the tail.
/// head + tail reproduces the input exactly and Tr(head† tail) = 0.
struct SpectralSplit {
  HermitianMatrix head;
  HermitianMatrix tail;
  int r = 0;
};

/// Keeps the r largest singular values in the head. For degenerate magnitudes
/// the head keeps the first r in the decomposition's descending-|eigenvalue|
/// order (stable; the split is then one of the equally valid choices).
SpectralSplit spectral_split(const HermitianMatrix& m, int r);

/// Wishart state GG†/Tr(GG†) from a d x r complex Gaussian factor G.
/// Rank exactly r almost surely; bit-identical output for equal seeds.
DensityMatrix random_rank_r_state(Eigen::Index d, int r, std::uint64_t seed);

/// Random Hermitian X with rank <= r and ‖X‖_F = 1, hence
/// ‖X‖_* <= sqrt(r) ‖X‖_F. Sampling domain for the isometry-constant search.
HermitianMatrix random_u2_element(Eigen::Index d, int r, std::uint64_t seed);

}  // namespace paulirec
