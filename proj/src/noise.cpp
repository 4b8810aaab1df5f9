#include "paulirec/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "paulirec/rng.hpp"

namespace paulirec {

namespace {

// Physical expectations p_i = Tr(P_i M), checked against [-1, 1].
RealVector physical_expectations(const SamplingOperator& op, const Matrix& m) {
  RealVector p(op.m());
  for (int i = 0; i < op.m(); ++i) {
    const Complex e = pauli_expectation(op.labels()[static_cast<size_t>(i)], m);
    if (std::abs(e.real()) > 1.0 + 1e-8)
      throw std::invalid_argument("measure_shots: Pauli expectation outside [-1, 1]");
    p(i) = std::clamp(e.real(), -1.0, 1.0);
  }
  return p;
}

}  // namespace

MeasurementRecord measure_exact(const SamplingOperator& op, const HermitianMatrix& m) {
  return MeasurementRecord{op.forward(m.mat()), NoiseModel::exact(), 0};
}

MeasurementRecord measure_gaussian(const SamplingOperator& op, const HermitianMatrix& m,
                                   double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("measure_gaussian: sigma must be >= 0");
  RealVector y = op.forward(m.mat());
  if (sigma > 0.0) {
    auto eng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += normal(eng);
  }
  return MeasurementRecord{std::move(y), NoiseModel::gaussian(sigma), seed};
}

MeasurementRecord measure_shots(const SamplingOperator& op, const DensityMatrix& m,
                                long long t, std::uint64_t seed) {
  if (t < 1) throw std::invalid_argument("measure_shots: shot count must be >= 1");
  const RealVector p = physical_expectations(op, m.mat());
  auto eng = make_engine(seed);
  // d/sqrt(m) / sqrt(d): empirical mean -> forward scale
  const double coeff = std::sqrt(static_cast<double>(op.dim()) / op.m());
  RealVector y(op.m());
  for (int i = 0; i < op.m(); ++i) {
    const double prob_plus = 0.5 * (1.0 + p(i));
    std::binomial_distribution<long long> binom(t, prob_plus);
    const long long plus = binom(eng);
    const double p_hat = 2.0 * static_cast<double>(plus) / static_cast<double>(t) - 1.0;
    y(i) = coeff * p_hat;
  }
  return MeasurementRecord{std::move(y), NoiseModel::shot_count(t), seed};
}

double shot_noise_sigma_equiv(const SamplingOperator& op, const DensityMatrix& m, long long t) {
  if (t < 1) throw std::invalid_argument("shot_noise_sigma_equiv: shot count must be >= 1");
  const RealVector p = physical_expectations(op, m.mat());
  const double mean_var = (1.0 - p.array().square()).mean();
  const double d_over_m = static_cast<double>(op.dim()) / op.m();
  return std::sqrt(d_over_m * std::max(mean_var, 0.0) / static_cast<double>(t));
}

}  // namespace paulirec
