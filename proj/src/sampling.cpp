#include "paulirec/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>

#include "paulirec/rng.hpp"

namespace paulirec {

namespace {

int parity(std::uint64_t bits) { return std::popcount(bits) & 1; }

Complex label_phase(const PauliLabel& label) {
  static const Complex table[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return table[std::popcount(label.x_mask & label.z_mask) & 3];
}

// out += coeff * P for the structured observable P: one write per column.
void accumulate_label(Matrix& out, const PauliLabel& label, Complex coeff) {
  const Eigen::Index d = out.rows();
  const Complex base = coeff * label_phase(label);
  for (Eigen::Index col = 0; col < d; ++col) {
    const auto c = static_cast<std::uint64_t>(col);
    const auto row = static_cast<Eigen::Index>(c ^ label.x_mask);
    out(row, col) += parity(c & label.z_mask) ? -base : base;
  }
}

}  // namespace

SamplingOperator::SamplingOperator(int n, std::vector<PauliLabel> labels)
    : n_(n), labels_(std::move(labels)) {
  if (n_ < 1 || n_ > 31) throw std::invalid_argument("SamplingOperator: qubit count out of range");
  if (labels_.empty()) throw std::invalid_argument("SamplingOperator: need at least one label");
  for (const auto& label : labels_)
    if (label.n != n_)
      throw std::invalid_argument("SamplingOperator: labels disagree on qubit count");
}

SamplingOperator SamplingOperator::draw(int n, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("SamplingOperator::draw: m must be >= 1");
  auto eng = make_engine(seed);
  std::uniform_int_distribution<std::uint64_t> uniform(0, (std::uint64_t{1} << (2 * n)) - 1);
  std::vector<PauliLabel> labels;
  labels.reserve(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) labels.push_back(make_label(n, uniform(eng)));
  return SamplingOperator(n, std::move(labels));
}

SamplingOperator SamplingOperator::draw_distinct(int n, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("SamplingOperator::draw_distinct: m must be >= 1");
  if (n > 16 || static_cast<std::uint64_t>(m) > (std::uint64_t{1} << (2 * n)))
    throw std::invalid_argument("SamplingOperator::draw_distinct: m exceeds 4^n");
  auto eng = make_engine(seed);
  std::uniform_int_distribution<std::uint64_t> uniform(0, (std::uint64_t{1} << (2 * n)) - 1);
  std::set<std::uint64_t> seen;
  std::vector<PauliLabel> labels;
  labels.reserve(static_cast<size_t>(m));
  while (labels.size() < static_cast<size_t>(m)) {
    const std::uint64_t idx = uniform(eng);
    if (seen.insert(idx).second) labels.push_back(make_label(n, idx));
  }
  return SamplingOperator(n, std::move(labels));
}

SamplingOperator SamplingOperator::full_basis(int n) {
  if (n < 1 || n > 8) throw std::invalid_argument("SamplingOperator::full_basis: n must be in [1, 8]");
  const std::uint64_t count = std::uint64_t{1} << (2 * n);
  std::vector<PauliLabel> labels;
  labels.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) labels.push_back(make_label(n, i));
  return SamplingOperator(n, std::move(labels));
}

SamplingOperator SamplingOperator::from_labels(std::vector<PauliLabel> labels) {
  if (labels.empty()) throw std::invalid_argument("SamplingOperator::from_labels: empty label list");
  const int n = labels.front().n;
  return SamplingOperator(n, std::move(labels));
}

double SamplingOperator::scale() const {
  return static_cast<double>(dim()) / std::sqrt(static_cast<double>(m()));
}

bool SamplingOperator::has_duplicate_labels() const {
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (const auto& label : labels_)
    if (!seen.insert({label.x_mask, label.z_mask}).second) return true;
  return false;
}

std::uint64_t SamplingOperator::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto absorb = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  absorb(static_cast<std::uint64_t>(n_));
  absorb(labels_.size());
  for (const auto& label : labels_) absorb(label_index(label));
  return h;
}

RealVector SamplingOperator::forward(const Matrix& x) const {
  const Eigen::Index d = dim();
  if (x.rows() != d || x.cols() != d)
    throw std::invalid_argument("SamplingOperator::forward: dimension mismatch");
  // (d/sqrt(m)) Tr(S_i† X) = sqrt(d/m) Tr(P_i X)
  const double coeff = std::sqrt(static_cast<double>(d) / m());
  RealVector y(m());
  double max_im = 0.0;
  double max_re = 0.0;
  for (int i = 0; i < m(); ++i) {
    const Complex e = coeff * pauli_expectation(labels_[static_cast<size_t>(i)], x);
    y(i) = e.real();
    max_im = std::max(max_im, std::abs(e.imag()));
    max_re = std::max(max_re, std::abs(e.real()));
  }
  if (max_im > 1e-8 * std::max(1.0, max_re))
    throw std::invalid_argument("SamplingOperator::forward: input is not Hermitian (imaginary residue)");
  return y;
}

Matrix SamplingOperator::adjoint_map(const RealVector& y) const {
  if (y.size() != m()) throw std::invalid_argument("SamplingOperator::adjoint_map: length mismatch");
  const Eigen::Index d = dim();
  const double coeff = std::sqrt(static_cast<double>(d) / m());
  Matrix out = Matrix::Zero(d, d);
  for (int i = 0; i < m(); ++i)
    accumulate_label(out, labels_[static_cast<size_t>(i)], Complex(coeff * y(i), 0.0));
  return out;
}

Matrix SamplingOperator::normal_apply(const Matrix& x) const {
  const Eigen::Index d = dim();
  if (x.rows() != d || x.cols() != d)
    throw std::invalid_argument("SamplingOperator::normal_apply: dimension mismatch");
  // (d^2/m) sum_i S_i Tr(S_i† X) = (d/m) sum_i P_i Tr(P_i X)
  const double coeff = static_cast<double>(d) / m();
  Matrix out = Matrix::Zero(d, d);
  for (const auto& label : labels_)
    accumulate_label(out, label, coeff * pauli_expectation(label, x));
  return out;
}

SamplingOperator::Preimage SamplingOperator::nnq_preimage(const RealVector& y) const {
  if (y.size() != m()) throw std::invalid_argument("SamplingOperator::nnq_preimage: length mismatch");
  if (has_duplicate_labels())
    throw std::invalid_argument("SamplingOperator::nnq_preimage: labels must be distinct");
  const Eigen::Index d = dim();
  // (sqrt(m)/d) sum_i y_i S_i
  const double coeff = std::sqrt(static_cast<double>(m())) / (static_cast<double>(d) * std::sqrt(static_cast<double>(d)));
  Preimage result;
  result.matrix = Matrix::Zero(d, d);
  for (int i = 0; i < m(); ++i)
    accumulate_label(result.matrix, labels_[static_cast<size_t>(i)], Complex(coeff * y(i), 0.0));
  const double radius = std::sqrt(static_cast<double>(d) / m());
  result.nuclear_bound_certified = y.norm() <= radius * (1.0 + 1e-12);
  return result;
}

}  // namespace paulirec
