#include "paulirec/pauli.hpp"

#include <bit>
#include <stdexcept>

namespace paulirec {

namespace {

using Complex = std::complex<double>;

// i^k for k = popcount(x & z) mod 4; the per-factor Y = i·X·Z phases combine
// into this single global factor.
Complex phase_for(const PauliLabel& label) {
  static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[std::popcount(label.x_mask & label.z_mask) & 3];
}

int parity(std::uint64_t bits) { return std::popcount(bits) & 1; }

void check_n(int n) {
  if (n < 1 || n > 31) throw std::invalid_argument("PauliLabel: qubit count must be in [1, 31]");
}

}  // namespace

PauliLabel make_label(int n, std::uint64_t index) {
  check_n(n);
  if (n < 32 && index >= (std::uint64_t{1} << (2 * n)))
    throw std::invalid_argument("make_label: index out of range [0, 4^n)");
  PauliLabel label;
  label.n = n;
  for (int b = 0; b < n; ++b) {
    const std::uint64_t digit = (index >> (2 * b)) & 3;
    // digit -> (x, z): I:(0,0) X:(1,0) Y:(1,1) Z:(0,1)
    const std::uint64_t x = (digit == 1 || digit == 2) ? 1 : 0;
    const std::uint64_t z = (digit == 2 || digit == 3) ? 1 : 0;
    label.x_mask |= x << b;
    label.z_mask |= z << b;
  }
  return label;
}

std::uint64_t label_index(const PauliLabel& label) {
  check_n(label.n);
  std::uint64_t index = 0;
  for (int b = 0; b < label.n; ++b) {
    const std::uint64_t x = (label.x_mask >> b) & 1;
    const std::uint64_t z = (label.z_mask >> b) & 1;
    std::uint64_t digit = 0;
    if (x && !z) digit = 1;
    if (x && z) digit = 2;
    if (!x && z) digit = 3;
    index |= digit << (2 * b);
  }
  return index;
}

Eigen::MatrixXcd dense_matrix(const PauliLabel& label) {
  check_n(label.n);
  const Eigen::Index d = Eigen::Index{1} << label.n;
  const Complex phase = phase_for(label);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index col = 0; col < d; ++col) {
    const auto c = static_cast<std::uint64_t>(col);
    const auto row = static_cast<Eigen::Index>(c ^ label.x_mask);
    out(row, col) = parity(c & label.z_mask) ? -phase : phase;
  }
  return out;
}

std::complex<double> pauli_expectation(const PauliLabel& label, const Eigen::MatrixXcd& m) {
  check_n(label.n);
  const Eigen::Index d = Eigen::Index{1} << label.n;
  if (m.rows() != d || m.cols() != d)
    throw std::invalid_argument("pauli_expectation: matrix dimension does not match 2^n");
  // Tr(P M) = sum_c P(c ^ x, c) * M(c, c ^ x); one term per column.
  Complex acc{0, 0};
  for (Eigen::Index col = 0; col < d; ++col) {
    const auto c = static_cast<std::uint64_t>(col);
    const auto row = static_cast<Eigen::Index>(c ^ label.x_mask);
    const Complex v = m(col, row);
    acc += parity(c & label.z_mask) ? -v : v;
  }
  return phase_for(label) * acc;
}

bool commutes(const PauliLabel& a, const PauliLabel& b) {
  if (a.n != b.n) throw std::invalid_argument("commutes: labels have different qubit counts");
  return ((std::popcount(a.x_mask & b.z_mask) + std::popcount(a.z_mask & b.x_mask)) & 1) == 0;
}

}  // namespace paulirec
