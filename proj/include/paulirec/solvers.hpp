#pragma once

#include <vector>

#include "paulirec/matrices.hpp"
#include "paulirec/sampling.hpp"

namespace paulirec {

enum class StepRule { fixed, backtracking };

struct SolverConfig {
  int max_iters = 5000;
  double rel_tol = 1e-7;          // stop when ‖X_{k+1}-X_k‖_F / max(1, ‖X_{k+1}‖_F) < rel_tol
  StepRule step_rule = StepRule::fixed;
  bool restart = true;            // reset acceleration when the objective increases
  bool psd_project = false;       // project the final estimate onto density matrices
  bool record_trace = false;      // fill RecoveryResult::objective_trace
};

struct RecoveryResult {
  HermitianMatrix estimate;
  int iterations = 0;
  bool converged = false;
  double final_objective = 0.0;
  /// ‖A*(y − A(estimate))‖ in operator norm (the selector constraint quantity).
  double residual_operator_norm = 0.0;
  /// Regularized least squares: Frobenius distance of 0 from the subdifferential
  /// of the objective at the estimate. Constrained solver: final primal residual.
  double optimality_residual = 0.0;
  /// Per-iteration objective values, recorded when config.record_trace is set.
  std::vector<double> objective_trace;
};

/// Singular-value soft threshold: M = UΣV† -> U max(Σ − tau, 0) V†.
/// The proximal operator of tau‖·‖_*.
Matrix svt_prox(const Matrix& m, double tau);

/// Clip singular values to min(σ_i, lam): projection onto {‖X‖ <= lam}.
Matrix operator_norm_project(const Matrix& m, double lam);

/// Power iteration estimate of ‖A*A‖ (the gradient Lipschitz constant of
/// ½‖A(X)−y‖²). Deterministic: the start point is seeded from the operator
/// fingerprint. Rayleigh quotients are non-decreasing in the iteration count.
double estimate_lipschitz(const SamplingOperator& op, int iters = 50);

/// Eigenvalue clip to >= 0 followed by trace renormalization. Throws if the
/// clipped matrix is numerically zero.
DensityMatrix psd_project(const HermitianMatrix& m);

/// argmin_X ½‖A(X) − y‖² + mu ‖X‖_* by accelerated proximal gradient with
/// singular-value soft thresholding. mu must be positive.
RecoveryResult lasso(const SamplingOperator& op, const RealVector& y, double mu,
                     const SolverConfig& config = {});

/// argmin_X ‖X‖_* subject to ‖A*(y − A(X))‖ <= lam, by linearized operator
/// splitting with singular-value clipping onto the constraint set. For lam = 0
/// feasibility is enforced down to a small floor scaled by rel_tol.
RecoveryResult dantzig(const SamplingOperator& op, const RealVector& y, double lam,
                       const SolverConfig& config = {});

}  // namespace paulirec
