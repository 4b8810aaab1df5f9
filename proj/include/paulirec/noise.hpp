#pragma once

#include <cstdint>

#include "paulirec/matrices.hpp"
#include "paulirec/sampling.hpp"

namespace paulirec {

enum class NoiseKind { exact, gaussian, shots };

struct NoiseModel {
  NoiseKind kind = NoiseKind::exact;
  double sigma = 0.0;       // gaussian only
  long long shots = 0;      // shots only

  static NoiseModel exact() { return {NoiseKind::exact, 0.0, 0}; }
  static NoiseModel gaussian(double sigma) { return {NoiseKind::gaussian, sigma, 0}; }
  static NoiseModel shot_count(long long t) { return {NoiseKind::shots, 0.0, t}; }
};

struct MeasurementRecord {
  RealVector y;
  NoiseModel model;
  std::uint64_t seed = 0;
};

/// y = forward(M), no noise.
MeasurementRecord measure_exact(const SamplingOperator& op, const HermitianMatrix& m);

/// y = forward(M) + z with z iid real N(0, sigma^2).
MeasurementRecord measure_gaussian(const SamplingOperator& op, const HermitianMatrix& m,
                                   double sigma, std::uint64_t seed);

/// Finite-shot simulation: per setting i, average t iid ±1 outcomes with mean
/// p_i = Tr(P_i M) and map the empirical mean onto the forward scale,
/// y_i = (d/sqrt(m)) p̂_i / sqrt(d). Throws if any p_i leaves [-1, 1] by more
/// than 1e-8 (non-physical state).
MeasurementRecord measure_shots(const SamplingOperator& op, const DensityMatrix& m,
                                long long t, std::uint64_t seed);

/// Gaussian noise level that matches the average per-entry shot variance:
/// sigma_eff = sqrt((d/m) * mean_i(1 - p_i^2) / t). Bridge for comparing the
/// two noise models; approximate by construction.
double shot_noise_sigma_equiv(const SamplingOperator& op, const DensityMatrix& m, long long t);

}  // namespace paulirec
