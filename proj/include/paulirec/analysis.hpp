#pragma once

#include <cstdint>
#include <span>

#include "paulirec/matrices.hpp"
#include "paulirec/pauli.hpp"
#include "paulirec/sampling.hpp"

namespace paulirec {

enum class RipMethod { sampled, local_ascent };

/// Empirical lower bound on sup |‖A(X)‖² − ‖X‖_F²| over unit-Frobenius
/// Hermitian X with rank <= r.
struct RipEstimate {
  double epsilon_hat = 0.0;
  int r = 0;
  RipMethod method = RipMethod::sampled;
  int samples_used = 0;
};

/// Inverse of eps = 2 delta − delta²: the isometry constant implied by an
/// observed deviation. NaN for eps >= 1.
double delta_from_epsilon(double eps);

/// Max deviation over num_samples random rank-<=r unit-Frobenius Hermitian
/// draws. Draw j uses the sub-seed mix(seed, j).
RipEstimate rip_epsilon_sampled(const SamplingOperator& op, int r, int num_samples,
                                std::uint64_t seed);

/// Projected gradient ascent of the deviation over the same set, restarted
/// from the draws mix(seed, j) for j < restarts; each restart only ever
/// improves on its starting sample, so paired with rip_epsilon_sampled on the
/// same seed the ascent estimate dominates.
RipEstimate rip_epsilon_ascent(const SamplingOperator& op, int r, int restarts,
                               std::uint64_t seed);

struct BoundConstants {
  double c0_noiseless = 1.0;  // nuclear-norm bound, noiseless data
  double c0 = 1.0;            // Frobenius bound, sqrt(rd) sigma term
  double c1 = 1.0;            // Frobenius bound, tail term
  double c2 = 1.0;            // squared-Frobenius tail bound, log^6 d term
};

struct ErrorReport {
  double nuclear_error = 0.0;
  double frobenius_error = 0.0;
  /// c0_noiseless ‖M_c‖_*
  double bound_rhs_noiseless = 0.0;
  /// c0 sqrt(rd) sigma + c1 ‖M_c‖_* / sqrt(r)
  double bound_rhs_gaussian = 0.0;
  /// c0 Σ_{i<=r} min(σ_i², d σ²) + c2 (ln d)^6 Σ_{i>r} σ_i²; compares against
  /// the squared Frobenius error.
  double bound_rhs_tail = 0.0;
  /// ‖M_c‖_* vanishes and sigma = 0: exact recovery is the expected regime.
  bool exact_recovery_regime = false;
  BoundConstants constants_used;
};

ErrorReport error_report(const HermitianMatrix& m, const HermitianMatrix& m_hat, int r,
                         double sigma, const BoundConstants& constants = {});

/// True iff every pair commutes (symplectic test). Singleton and empty sets
/// are trivially commuting.
bool all_commute(std::span<const PauliLabel> labels);

/// Fraction of `trials` iid uniform m-draws (with replacement) that are fully
/// commuting.
double commuting_fraction(int n, int m, int trials, std::uint64_t seed);

/// Exact fraction over all (4^n)^m ordered draws. Guarded to small cases.
double commuting_fraction_exhaustive(int n, int m);

}  // namespace paulirec
