#include "paulirec/pauli.hpp"

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "paulirec/matrices.hpp"
#include "paulirec/rng.hpp"

using namespace paulirec;
using oracles::pauli_dense_oracle;

namespace {

Eigen::MatrixXcd random_hermitian(Eigen::Index d, std::uint64_t seed) {
  auto eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXcd m(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = Complex(normal(eng), normal(eng));
  return 0.5 * (m + m.adjoint());
}

}  // namespace

TEST_CASE("make_label special cases") {
  const PauliLabel id1 = make_label(1, 0);
  CHECK(id1.x_mask == 0);
  CHECK(id1.z_mask == 0);
  CHECK(is_identity(id1));

  const PauliLabel y = make_label(1, 2);
  Eigen::MatrixXcd expected(2, 2);
  expected << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  CHECK((dense_matrix(y) - expected).norm() == doctest::Approx(0.0).epsilon(1e-15));

  const PauliLabel z = make_label(1, 3);
  Eigen::MatrixXcd zd(2, 2);
  zd << 1, 0, 0, -1;
  CHECK((dense_matrix(z) - zd).norm() == doctest::Approx(0.0).epsilon(1e-15));

  // digits (1, 3) -> X ⊗ Z
  const PauliLabel xz = make_label(2, 7);
  CHECK((dense_matrix(xz) - pauli_dense_oracle(2, 7)).norm() < 1e-14);

  CHECK_THROWS_AS(make_label(1, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_label(0, 0), std::invalid_argument);
}

TEST_CASE("make_label is a bijection and matches the Kronecker oracle") {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t i = 0; i < count; ++i) {
      const PauliLabel label = make_label(n, i);
      CHECK(label_index(label) == i);
      CHECK((dense_matrix(label) - pauli_dense_oracle(n, i)).norm() < 1e-14);
    }
  }
}

TEST_CASE("dense matrices are Hermitian, unitary, traceless unless identity") {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    const Eigen::Index d = Eigen::Index{1} << n;
    for (std::uint64_t i = 0; i < count; ++i) {
      const PauliLabel label = make_label(n, i);
      const Eigen::MatrixXcd p = dense_matrix(label);
      CHECK((p - p.adjoint()).norm() == 0.0);
      CHECK((p * p - Eigen::MatrixXcd::Identity(d, d)).norm() == 0.0);
      if (i == 0)
        CHECK(p.trace().real() == doctest::Approx(static_cast<double>(d)));
      else
        CHECK(std::abs(p.trace()) == 0.0);
    }
  }
}

TEST_CASE("dense matrices have operator norm exactly 1") {
  for (std::uint64_t i : {1ULL, 6ULL, 11ULL, 14ULL}) {
    const Eigen::MatrixXcd p = dense_matrix(make_label(2, i));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(p);
    CHECK(svd.singularValues().maxCoeff() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(svd.singularValues().minCoeff() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("normalized basis is orthonormal") {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    const double d = static_cast<double>(Eigen::Index{1} << n);
    std::vector<Eigen::MatrixXcd> dense;
    dense.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) dense.push_back(dense_matrix(make_label(n, i)));
    for (std::uint64_t i = 0; i < count; ++i)
      for (std::uint64_t j = i; j < count; ++j) {
        const Complex inner = (dense[i].adjoint() * dense[j]).trace() / d;
        if (i == j)
          CHECK(std::abs(inner - 1.0) < 1e-12);
        else
          CHECK(std::abs(inner) < 1e-12);
      }
  }
}

TEST_CASE("expectation kernel examples") {
  Eigen::MatrixXcd rho(2, 2);
  rho << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
  CHECK(pauli_expectation(make_label(1, 0), rho).real() == doctest::Approx(1.0));

  Eigen::MatrixXcd ground(2, 2);
  ground << 1, 0, 0, 0;
  CHECK(pauli_expectation(make_label(1, 3), ground).real() == doctest::Approx(1.0));

  const Eigen::MatrixXcd mixed = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK(std::abs(pauli_expectation(make_label(1, 1), mixed)) < 1e-15);

  CHECK_THROWS_AS(pauli_expectation(make_label(2, 5), rho), std::invalid_argument);
}

TEST_CASE("expectation kernel agrees with the dense trace") {
  std::mt19937_64 pick(2024);
  for (int n = 1; n <= 3; ++n) {
    const Eigen::Index d = Eigen::Index{1} << n;
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (int rep = 0; rep < 40; ++rep) {
      const Eigen::MatrixXcd m = random_hermitian(d, pick());
      const std::uint64_t idx = pick() % count;
      const PauliLabel label = make_label(n, idx);
      const Complex fast = pauli_expectation(label, m);
      const Complex dense = (pauli_dense_oracle(n, idx).adjoint() * m).trace();
      CHECK(std::abs(fast - dense) <= 1e-12 * (1.0 + std::abs(dense)));
      CHECK(std::abs(fast.imag()) <= 1e-12 * (1.0 + std::abs(fast)));
    }
  }
}

TEST_CASE("commutation matches the dense commutator exhaustively") {
  for (int n = 1; n <= 2; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    for (std::uint64_t i = 0; i < count; ++i)
      for (std::uint64_t j = 0; j < count; ++j) {
        const bool fast = commutes(make_label(n, i), make_label(n, j));
        const bool dense = oracles::commute_dense(pauli_dense_oracle(n, i), pauli_dense_oracle(n, j));
        CHECK(fast == dense);
      }
  }
  // spot checks at n = 3
  std::mt19937_64 pick(7);
  for (int rep = 0; rep < 200; ++rep) {
    const std::uint64_t i = pick() % 64;
    const std::uint64_t j = pick() % 64;
    CHECK(commutes(make_label(3, i), make_label(3, j)) ==
          oracles::commute_dense(pauli_dense_oracle(3, i), pauli_dense_oracle(3, j)));
  }
}

TEST_CASE("commutation special cases") {
  const PauliLabel x = make_label(1, 1);
  const PauliLabel y = make_label(1, 2);
  CHECK(commutes(x, x));
  CHECK_FALSE(commutes(x, y));
  const PauliLabel zz = make_label(2, 15);  // Z ⊗ Z
  const PauliLabel xx = make_label(2, 5);   // X ⊗ X
  CHECK(commutes(zz, xx));
  CHECK_THROWS_AS(commutes(x, zz), std::invalid_argument);
}
