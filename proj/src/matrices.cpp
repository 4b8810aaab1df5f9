#include "paulirec/matrices.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "paulirec/rng.hpp"

namespace paulirec {

namespace {

Eigen::VectorXd singular_values(const Matrix& m) {
  if (m.rows() <= 32 && m.cols() <= 32)
    return Eigen::JacobiSVD<Matrix>(m).singularValues();
  return Eigen::BDCSVD<Matrix>(m).singularValues();
}

Matrix gaussian_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& eng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(eng);
      const double im = normal(eng);
      g(r, c) = Complex(re, im);
    }
  return g;
}

}  // namespace

double nuclear_norm(const Matrix& m) { return singular_values(m).sum(); }

double frobenius_norm(const Matrix& m) { return m.norm(); }

double operator_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return singular_values(m)(0);
}

Complex hs_inner(const Matrix& a, const Matrix& b) {
  return (a.adjoint() * b).trace();
}

HermitianMatrix::HermitianMatrix(Matrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("HermitianMatrix: matrix must be square");
  const double scale = m.norm();
  const double asym = (m - m.adjoint()).norm();
  if (asym > 1e-10 * std::max(scale, 1e-300))
    throw std::invalid_argument("HermitianMatrix: input is not Hermitian within tolerance");
  mat_ = 0.5 * (m + m.adjoint());
}

HermitianMatrix::HermitianMatrix(Matrix m, unchecked_t) {
  mat_ = 0.5 * (m + m.adjoint());
}

DensityMatrix::DensityMatrix(Matrix m) : HermitianMatrix(std::move(m)) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
  if (std::abs(mat().trace().real() - 1.0) > 1e-10 || std::abs(mat().trace().imag()) > 1e-10)
    throw std::invalid_argument("DensityMatrix: trace is not 1 within tolerance");
}

DensityMatrix::DensityMatrix(Matrix m, unchecked_t) : HermitianMatrix(std::move(m), unchecked) {}

SpectralSplit spectral_split(const HermitianMatrix& m, int r) {
  const Eigen::Index d = m.dim();
  if (r < 0 || r > d) throw std::invalid_argument("spectral_split: r out of [0, d]");
  if (r == 0) {
    return SpectralSplit{HermitianMatrix(Matrix::Zero(d, d), unchecked),
                         HermitianMatrix(m.mat(), unchecked), 0};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat());
  const Eigen::VectorXd evals = es.eigenvalues();
  std::vector<int> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(evals(a)) > std::abs(evals(b));
  });
  Matrix head = Matrix::Zero(d, d);
  for (int k = 0; k < r; ++k) {
    const int i = order[static_cast<size_t>(k)];
    head.noalias() += evals(i) * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
  }
  Matrix tail = m.mat() - head;
  return SpectralSplit{HermitianMatrix(std::move(head), unchecked),
                       HermitianMatrix(std::move(tail), unchecked), r};
}

DensityMatrix random_rank_r_state(Eigen::Index d, int r, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_rank_r_state: d must be positive");
  if (r < 1 || r > d) throw std::invalid_argument("random_rank_r_state: r out of [1, d]");
  auto eng = make_engine(seed);
  const Matrix g = gaussian_complex(d, r, eng);
  Matrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(std::move(m), unchecked);
}

HermitianMatrix random_u2_element(Eigen::Index d, int r, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_u2_element: d must be positive");
  if (r < 1 || r > d) throw std::invalid_argument("random_u2_element: r out of [1, d]");
  auto eng = make_engine(seed);
  const Matrix g = gaussian_complex(d, r, eng);
  Eigen::HouseholderQR<Matrix> qr(g);
  const Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd weights(r);
  for (int i = 0; i < r; ++i) weights(i) = normal(eng);
  const double norm = weights.norm();
  if (norm < 1e-300) weights.setOnes();  // measure-zero fallback
  Matrix x = q * (weights / weights.norm()).asDiagonal() * q.adjoint();
  return HermitianMatrix(std::move(x), unchecked);
}

}  // namespace paulirec
