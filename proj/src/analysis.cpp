#include "paulirec/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "paulirec/rng.hpp"

namespace paulirec {

namespace {

double deviation(const SamplingOperator& op, const Matrix& x) {
  return std::abs(op.forward(x).squaredNorm() - x.squaredNorm());
}

// Rank-r truncation by |eigenvalue| plus Frobenius renormalization; the
// retraction of the ascent iteration.
Matrix retract_rank_r(const Matrix& m, int r) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd evals = es.eigenvalues();
  const Eigen::Index d = m.rows();
  std::vector<int> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(evals(a)) > std::abs(evals(b));
  });
  Matrix out = Matrix::Zero(d, d);
  double sq = 0.0;
  for (int k = 0; k < r && k < d; ++k) {
    const int i = order[static_cast<size_t>(k)];
    out.noalias() += evals(i) * (es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint());
    sq += evals(i) * evals(i);
  }
  if (sq < 1e-300) return out;  // caller restarts from a fresh sample
  return out / std::sqrt(sq);
}

}  // namespace

double delta_from_epsilon(double eps) {
  if (eps < 0.0) throw std::invalid_argument("delta_from_epsilon: eps must be >= 0");
  if (eps >= 1.0) return std::numeric_limits<double>::quiet_NaN();
  return 1.0 - std::sqrt(1.0 - eps);
}

RipEstimate rip_epsilon_sampled(const SamplingOperator& op, int r, int num_samples,
                                std::uint64_t seed) {
  if (num_samples < 1) throw std::invalid_argument("rip_epsilon_sampled: need >= 1 sample");
  const Eigen::Index d = op.dim();
  double best = 0.0;
  for (int j = 0; j < num_samples; ++j) {
    const HermitianMatrix x = random_u2_element(d, r, mix_seed(seed, static_cast<std::uint64_t>(j)));
    best = std::max(best, deviation(op, x.mat()));
  }
  return RipEstimate{best, r, RipMethod::sampled, num_samples};
}

RipEstimate rip_epsilon_ascent(const SamplingOperator& op, int r, int restarts,
                               std::uint64_t seed) {
  if (restarts < 1) throw std::invalid_argument("rip_epsilon_ascent: need >= 1 restart");
  const Eigen::Index d = op.dim();
  constexpr int kMaxSteps = 200;
  double best = 0.0;
  int evals = 0;
  for (int j = 0; j < restarts; ++j) {
    Matrix x = random_u2_element(d, r, mix_seed(seed, static_cast<std::uint64_t>(j))).mat();
    double gain = op.forward(x).squaredNorm() - x.squaredNorm();
    double obj = std::abs(gain);
    ++evals;
    double step = 0.1;
    for (int it = 0; it < kMaxSteps && step > 1e-10; ++it) {
      // gradient of <X, (A*A - I) X> is 2 (A*A - I) X
      const Matrix grad = op.normal_apply(x) - x;
      const double direction = gain >= 0.0 ? 1.0 : -1.0;
      const Matrix cand = retract_rank_r(x + (2.0 * step * direction) * grad, r);
      const double cand_gain = op.forward(cand).squaredNorm() - cand.squaredNorm();
      ++evals;
      if (std::abs(cand_gain) > obj * (1.0 + 1e-12) + 1e-15) {
        x = cand;
        gain = cand_gain;
        obj = std::abs(cand_gain);
        step = std::min(step * 1.5, 10.0);
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, obj);
  }
  return RipEstimate{best, r, RipMethod::local_ascent, evals};
}

ErrorReport error_report(const HermitianMatrix& m, const HermitianMatrix& m_hat, int r,
                         double sigma, const BoundConstants& constants) {
  const Eigen::Index d = m.dim();
  if (m_hat.dim() != d) throw std::invalid_argument("error_report: dimension mismatch");
  if (r < 0 || r > d) throw std::invalid_argument("error_report: r out of [0, d]");
  if (sigma < 0.0) throw std::invalid_argument("error_report: sigma must be >= 0");

  ErrorReport report;
  report.constants_used = constants;
  const Matrix diff = m_hat.mat() - m.mat();
  report.nuclear_error = nuclear_norm(diff);
  report.frobenius_error = diff.norm();

  const SpectralSplit split = spectral_split(m, r);
  const double tail_nuclear = nuclear_norm(split.tail.mat());
  report.bound_rhs_noiseless = constants.c0_noiseless * tail_nuclear;
  const double dd = static_cast<double>(d);
  if (r > 0)
    report.bound_rhs_gaussian = constants.c0 * std::sqrt(r * dd) * sigma +
                                constants.c1 * tail_nuclear / std::sqrt(static_cast<double>(r));
  else
    report.bound_rhs_gaussian = constants.c1 == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();

  Eigen::SelfAdjointEigenSolver<Matrix> es(m.mat(), Eigen::EigenvaluesOnly);
  Eigen::VectorXd sv = es.eigenvalues().cwiseAbs();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
  const double log6 = std::pow(std::log(dd), 6);
  double head_sq = 0.0;
  double tail_sq = 0.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s2 = sv(i) * sv(i);
    if (i < r)
      head_sq += std::min(s2, dd * sigma * sigma);
    else
      tail_sq += s2;
  }
  report.bound_rhs_tail = constants.c0 * head_sq + constants.c2 * log6 * tail_sq;

  report.exact_recovery_regime = tail_nuclear <= 1e-12 && sigma == 0.0;
  return report;
}

bool all_commute(std::span<const PauliLabel> labels) {
  for (size_t i = 0; i + 1 < labels.size(); ++i)
    for (size_t j = i + 1; j < labels.size(); ++j)
      if (!commutes(labels[i], labels[j])) return false;
  return true;
}

double commuting_fraction(int n, int m, int trials, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("commuting_fraction: m must be >= 1");
  if (trials < 1) throw std::invalid_argument("commuting_fraction: trials must be >= 1");
  auto eng = make_engine(seed);
  std::uniform_int_distribution<std::uint64_t> uniform(0, (std::uint64_t{1} << (2 * n)) - 1);
  std::vector<PauliLabel> labels(static_cast<size_t>(m));
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    for (auto& label : labels) label = make_label(n, uniform(eng));
    if (all_commute(labels)) ++hits;
  }
  return static_cast<double>(hits) / trials;
}

double commuting_fraction_exhaustive(int n, int m) {
  if (m < 1) throw std::invalid_argument("commuting_fraction_exhaustive: m must be >= 1");
  const std::uint64_t base = std::uint64_t{1} << (2 * n);
  double total_count = std::pow(static_cast<double>(base), m);
  if (total_count > 1e7)
    throw std::invalid_argument("commuting_fraction_exhaustive: enumeration too large");
  std::vector<std::uint64_t> digits(static_cast<size_t>(m), 0);
  std::vector<PauliLabel> labels(static_cast<size_t>(m));
  std::uint64_t hits = 0;
  std::uint64_t total = 0;
  while (true) {
    for (int i = 0; i < m; ++i) labels[static_cast<size_t>(i)] = make_label(n, digits[static_cast<size_t>(i)]);
    if (all_commute(labels)) ++hits;
    ++total;
    int pos = 0;
    while (pos < m) {
      if (++digits[static_cast<size_t>(pos)] < base) break;
      digits[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == m) break;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace paulirec
