// Acceptance suite: quantitative desk-scale checks of the full pipeline.
// Each criterion prints one PASS/FAIL line; the exit code is the number of
// failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "paulirec/experiment.hpp"
#include "paulirec/rng.hpp"

using namespace paulirec;
namespace fs = std::filesystem;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure(message);
}

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4g", v);
  return buffer;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix random_hermitian(Eigen::Index d, std::uint64_t seed) {
  auto eng = make_engine(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(d, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < d; ++r) m(r, c) = Complex(normal(eng), normal(eng));
  return 0.5 * (m + m.adjoint());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read back " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --------------------------------------------------------------------------
// 1. basis orthonormality and the O(d) expectation kernel

void criterion_basis() {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    const double d = static_cast<double>(Eigen::Index{1} << n);
    std::vector<Matrix> dense;
    for (std::uint64_t i = 0; i < count; ++i) dense.push_back(dense_matrix(make_label(n, i)));
    for (std::uint64_t i = 0; i < count; ++i)
      for (std::uint64_t j = i; j < count; ++j) {
        const Complex inner = (dense[i].adjoint() * dense[j]).trace() / d;
        const double target = i == j ? 1.0 : 0.0;
        require(std::abs(inner - target) <= 1e-12,
                "orthonormality violated at n=" + std::to_string(n));
      }
  }
  std::mt19937_64 pick(20260809);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + static_cast<int>(pick() % 3);
    const Eigen::Index d = Eigen::Index{1} << n;
    const std::uint64_t idx = pick() % (std::uint64_t{1} << (2 * n));
    const Matrix m = random_hermitian(d, pick());
    const Complex fast = pauli_expectation(make_label(n, idx), m);
    const Complex dense = (oracles::pauli_dense_oracle(n, idx).adjoint() * m).trace();
    require(std::abs(fast - dense) <= 1e-12 * (1.0 + std::abs(dense)),
            "expectation kernel disagrees with the dense trace");
  }
}

// --------------------------------------------------------------------------
// 2. full-basis isometry and vanishing deviation estimates

void criterion_parseval() {
  std::mt19937_64 pick(31415);
  for (int n = 1; n <= 4; ++n) {
    const SamplingOperator full = SamplingOperator::full_basis(n);
    const Eigen::Index d = full.dim();
    for (int rep = 0; rep < 25; ++rep) {
      const Matrix x = random_hermitian(d, pick());
      const double lhs = full.forward(x).norm();
      const double rhs = x.norm();
      require(std::abs(lhs - rhs) <= 1e-12 * (1.0 + rhs), "full basis is not an isometry");
    }
    const int r = std::min<int>(2, static_cast<int>(d));
    require(rip_epsilon_sampled(full, r, 25, pick()).epsilon_hat <= 1e-8,
            "sampled deviation estimate nonzero on the full basis");
    require(rip_epsilon_ascent(full, r, 2, pick()).epsilon_hat <= 1e-8,
            "ascent deviation estimate nonzero on the full basis");
  }
}

// --------------------------------------------------------------------------
// 3. adjoint identity

void criterion_adjoint() {
  std::mt19937_64 pick(27182);
  for (int n : {2, 3, 4}) {
    const Eigen::Index d = Eigen::Index{1} << n;
    const SamplingOperator a = SamplingOperator::draw(n, 3 * static_cast<int>(d), pick());
    for (int rep = 0; rep < 34; ++rep) {
      const Matrix x = random_hermitian(d, pick());
      RealVector y(a.m());
      auto eng = make_engine(pick());
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < a.m(); ++i) y(i) = normal(eng);
      const double lhs = a.forward(x).dot(y);
      const double rhs = hs_inner(a.adjoint_map(y), x).real();
      require(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)), "adjoint identity violated");
    }
  }
}

// --------------------------------------------------------------------------
// 4. noiseless recovery of 50 states through one fixed operator

void criterion_universal_recovery() {
  ExperimentConfig config = parse_config_text(R"({
    "schema_version": 1,
    "n": 4, "r": 1, "m": 128, "trials": 50, "master_seed": 424242,
    "universal_operator": true,
    "noise": {"model": "exact"},
    "solver": {"kind": "lasso", "mu": 1e-6},
    "solver_options": {"max_iters": 30000}
  })",
                                               Command::recover);
  RunOptions options;
  options.jobs = 4;
  const std::vector<ResultRow> rows = run_recovery(config, Command::recover, options);
  int hits = 0;
  std::uint64_t fingerprint = rows.front().op_fingerprint;
  for (const ResultRow& row : rows) {
    require(row.op_fingerprint == fingerprint, "operator differs between trials");
    if (row.status == "ok" && row.frobenius_error < 1e-3) ++hits;
  }
  require(hits >= 45, "only " + std::to_string(hits) + "/50 states recovered below 1e-3");
}

// --------------------------------------------------------------------------
// 5. gaussian-noise scaling at mu = 16 sqrt(d) sigma

void criterion_gaussian_scaling() {
  const std::vector<double> sigmas = {1e-3, 2e-3, 4e-3};
  std::vector<double> medians;
  for (double sigma : sigmas) {
    char text[512];
    std::snprintf(text, sizeof(text), R"({
      "schema_version": 1,
      "n": 4, "r": 1, "m": 192, "trials": 20, "master_seed": 505,
      "noise": {"model": "gaussian", "sigma": %.17g},
      "solver": {"kind": "lasso", "mu": %.17g}
    })",
                  sigma, 16.0 * 4.0 * sigma);
    const ExperimentConfig config = parse_config_text(text, Command::recover);
    RunOptions options;
    options.jobs = 4;
    const std::vector<ResultRow> rows = run_recovery(config, Command::recover, options);
    std::vector<double> errs;
    for (const ResultRow& row : rows) errs.push_back(row.frobenius_error);
    medians.push_back(median(errs));
  }
  std::string summary;
  for (size_t i = 0; i < medians.size(); ++i)
    summary += (i ? ", " : "") + num(medians[i]) + " @ sigma=" + num(sigmas[i]);
  for (size_t i = 1; i < medians.size(); ++i) {
    const double ratio = medians[i] / medians[i - 1];
    require(ratio >= 1.4 && ratio <= 2.6,
            "consecutive-sigma error ratio " + num(ratio) + " outside [1.4, 2.6] (" + summary + ")");
  }
  for (size_t i = 0; i < medians.size(); ++i) {
    const double budget = 10.0 * std::sqrt(1.0 * 16.0) * sigmas[i];
    require(medians[i] <= budget, "median error " + num(medians[i]) + " exceeds 10*sqrt(rd)*sigma = " +
                                      num(budget) + " at sigma=" + num(sigmas[i]) +
                                      " (estimator bias at mu = 16*sqrt(d)*sigma is ~16*sqrt(rd)*sigma, "
                                      "solver optimality residual < 1e-8)");
  }
}

// --------------------------------------------------------------------------
// 6. noiseless nuclear-norm error against the spectral tail

void criterion_tail_bound() {
  const ExperimentConfig config = parse_config_text(R"({
    "schema_version": 1,
    "n": 4, "r": 1, "m": 192, "trials": 20, "master_seed": 606,
    "state": {"kind": "spiked", "spike_weight": 0.9},
    "noise": {"model": "exact"},
    "solver": {"kind": "dantzig", "lambda": 0.0}
  })",
                                                    Command::recover);
  RunOptions options;
  options.jobs = 4;
  const std::vector<ResultRow> rows = run_recovery(config, Command::recover, options);
  std::vector<double> ratios;
  for (const ResultRow& row : rows) {
    require(row.status == "ok", "trial failed");
    ratios.push_back(row.nuclear_error / row.bound_noiseless);  // bound column is ||M_c||_* at c=1
  }
  const double med = median(ratios);
  require(med <= 10.0, "median nuclear error / tail nuclear norm = " + num(med) + " exceeds 10");
}

// --------------------------------------------------------------------------
// 7. preimage construction on the alpha-sphere

void criterion_preimage() {
  const ExperimentConfig config = parse_config_text(
      R"({"schema_version": 1, "n": 3, "m": 32, "vectors": 100, "master_seed": 3})", Command::nnq);
  RunOptions options;
  const NnqOutcome outcome = run_nnq(config, options);
  require(outcome.vectors_checked == 100, "wrong number of vectors checked");
  require(outcome.max_nuclear <= 1.0 + 1e-10,
          "preimage nuclear norm " + num(outcome.max_nuclear) + " exceeds 1 + 1e-10");
  require(outcome.max_residual <= 1e-10,
          "preimage residual " + num(outcome.max_residual) + " exceeds 1e-10");
}

// --------------------------------------------------------------------------
// 8. objective agreement with slow derivative-free oracles at d = 2

void criterion_solver_oracle() {
  const SamplingOperator full = SamplingOperator::full_basis(1);
  std::vector<oracles::Matrix> observables;  // S_i = P_i / sqrt(2); d/sqrt(m) = 1
  for (std::uint64_t i = 0; i < 4; ++i)
    observables.push_back(oracles::pauli_dense_oracle(1, i) / std::sqrt(2.0));

  std::mt19937_64 pick(818);
  for (int rep = 0; rep < 10; ++rep) {
    const DensityMatrix m = random_rank_r_state(2, 1 + static_cast<int>(pick() % 2), pick());
    const double sigma = 1e-3 * (1.0 + static_cast<double>(pick() % 5));
    const MeasurementRecord rec = measure_gaussian(full, m, sigma, pick());
    const double mu = 0.03 + 0.03 * static_cast<double>(pick() % 8);

    SolverConfig config;
    config.rel_tol = 1e-12;
    config.max_iters = 20000;
    const RecoveryResult res = lasso(full, rec.y, mu, config);

    auto smooth = [&](const Matrix& x) {
      double acc = 0.0;
      for (size_t i = 0; i < observables.size(); ++i) {
        const double coeff = (observables[i].adjoint() * x).trace().real();
        const double diff = coeff - rec.y(static_cast<Eigen::Index>(i));
        acc += diff * diff;
      }
      return 0.5 * acc;
    };
    auto smooth_grad = [&](const Matrix& x) {
      Matrix g = Matrix::Zero(2, 2);
      for (size_t i = 0; i < observables.size(); ++i) {
        const double coeff = (observables[i].adjoint() * x).trace().real();
        g += (coeff - rec.y(static_cast<Eigen::Index>(i))) * observables[i];
      }
      return g;
    };
    auto objective = [&](const Matrix& x) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(x);
      return smooth(x) + mu * es.eigenvalues().cwiseAbs().sum();
    };
    const double grid = oracles::minimize_hermitian2x2(objective, Eigen::Vector4d::Zero(), 1.0, 80);
    const double sub = oracles::subgradient_descent_objective(smooth, smooth_grad, mu, 2, 1000000, 0.05);
    const double oracle = std::min(grid, sub);
    require(std::abs(res.final_objective - oracle) <= 1e-5 * oracle,
            "objective " + num(res.final_objective) + " vs oracle " + num(oracle) +
                " differs by more than 1e-5 relative");
  }
}

// --------------------------------------------------------------------------
// 9. sampled deviation decreases with the number of settings

void criterion_deviation_monotonicity() {
  std::vector<double> medians;
  for (int m : {32, 64, 128, 224}) {
    std::vector<double> eps;
    for (int draw = 0; draw < 10; ++draw) {
      const auto cell = static_cast<std::uint64_t>(m);
      const auto k = static_cast<std::uint64_t>(draw);
      const SamplingOperator a =
          SamplingOperator::draw(4, m, derive_seed(909, seed_stream::op, cell, k));
      eps.push_back(
          rip_epsilon_sampled(a, 2, 150, derive_seed(909, seed_stream::rip_sampled, cell, k))
              .epsilon_hat);
    }
    medians.push_back(median(eps));
  }
  for (size_t i = 1; i < medians.size(); ++i)
    require(medians[i] < medians[i - 1],
            "median deviation not strictly decreasing: " + num(medians[i - 1]) + " -> " + num(medians[i]));
}

// --------------------------------------------------------------------------
// 10. commutation diagnostics

void criterion_commutation() {
  // exhaustive n = 1, m = 2 fraction, cross-checked against dense commutators
  int commuting = 0;
  for (std::uint64_t i = 0; i < 4; ++i)
    for (std::uint64_t j = 0; j < 4; ++j)
      if (oracles::commute_dense(oracles::pauli_dense_oracle(1, i), oracles::pauli_dense_oracle(1, j)))
        ++commuting;
  const double dense_fraction = commuting / 16.0;
  const double fraction = commuting_fraction_exhaustive(1, 2);
  require(fraction == dense_fraction,
          "exhaustive fraction disagrees with the dense-commutator enumeration");
  require(fraction == 7.0 / 16.0, "exhaustive commuting fraction is " + num(fraction) + " (= " +
                                      std::to_string(commuting) + "/16 by dense-commutator enumeration; "
                                      "equal non-identity pairs commute), not the nominal 7/16");
  require(commuting_fraction(4, 32, 10000, 53) < 1e-2, "random 32-subsets at n=4 commute too often");
}

// --------------------------------------------------------------------------
// 11. finite-shot noise model

void criterion_shot_noise() {
  // binomial variance at p = 0
  const SamplingOperator x_only = SamplingOperator::from_labels({make_label(1, 1)});
  Matrix half = 0.5 * Matrix::Identity(2, 2);
  const DensityMatrix mixed(half, unchecked);
  const long long t = 10000;
  const int reps = 1000;
  const double unscale = std::sqrt(2.0);  // d/sqrt(m)/sqrt(d) at d=2, m=1
  double sum_sq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    const MeasurementRecord rec = measure_shots(x_only, mixed, t, 100 + static_cast<std::uint64_t>(rep));
    const double p_hat = rec.y(0) / unscale;
    sum_sq += p_hat * p_hat;
  }
  const double var = sum_sq / reps;
  require(std::abs(var - 1.0 / static_cast<double>(t)) <= 0.10 / static_cast<double>(t),
          "empirical p-hat variance " + num(var) + " misses 1/t by more than 10%");

  // recovery error equivalence against the matched gaussian level
  std::vector<double> shot_err;
  std::vector<double> gauss_err;
  const long long t_big = 100000;
  for (int trial = 0; trial < 15; ++trial) {
    const auto s = static_cast<std::uint64_t>(trial);
    const SamplingOperator a = SamplingOperator::draw(4, 192, derive_seed(717, seed_stream::op, 0, s));
    const DensityMatrix m = random_rank_r_state(16, 1, derive_seed(717, seed_stream::state, 0, s));
    const double sig_eff = shot_noise_sigma_equiv(a, m, t_big);
    const double mu = 16.0 * 4.0 * sig_eff;
    const MeasurementRecord shot = measure_shots(a, m, t_big, derive_seed(717, seed_stream::noise, 0, s));
    const MeasurementRecord gauss =
        measure_gaussian(a, m, sig_eff, derive_seed(717, seed_stream::noise, 1, s));
    shot_err.push_back((lasso(a, shot.y, mu).estimate.mat() - m.mat()).norm());
    gauss_err.push_back((lasso(a, gauss.y, mu).estimate.mat() - m.mat()).norm());
  }
  const double ratio = median(shot_err) / median(gauss_err);
  require(ratio >= 0.5 && ratio <= 2.0,
          "shot/gaussian median error ratio " + num(ratio) + " outside [0.5, 2]");
}

// --------------------------------------------------------------------------
// 12. byte-identical reruns of every command

void criterion_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "paulirec_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto path = [&](const std::string& name) { return (dir / name).string(); };

  auto twice = [&](const std::function<void(const std::string&)>& run, const std::string& name) {
    run(path(name + "_1"));
    run(path(name + "_2"));
    require(slurp(path(name + "_1")) == slurp(path(name + "_2")),
            name + " reruns are not byte-identical");
    if (fs::exists(path(name + "_1") + ".meta.json"))
      require(slurp(path(name + "_1") + ".meta.json") == slurp(path(name + "_2") + ".meta.json"),
              name + " sidecar reruns are not byte-identical");
  };

  const ExperimentConfig recover = parse_config_text(R"({
    "schema_version": 1, "n": 2, "r": 1, "m": 12, "trials": 3, "master_seed": 99,
    "noise": {"model": "gaussian", "sigma": 1e-3},
    "solver": {"kind": "lasso", "mu": 0.02},
    "solver_options": {"max_iters": 1500}
  })",
                                                     Command::recover);
  twice([&](const std::string& out) {
    RunOptions options;
    options.out_path = out;
    options.jobs = 3;
    run_recovery(recover, Command::recover, options);
  },
        "recover.csv");

  const ExperimentConfig rip = parse_config_text(R"({
    "schema_version": 1, "n": 2, "m_values": [6, 12], "r_values": [1],
    "operator_draws": 2, "samples": 20, "restarts": 2, "master_seed": 12
  })",
                                                 Command::rip);
  twice([&](const std::string& out) {
    RunOptions options;
    options.out_path = out;
    options.jobs = 2;
    run_rip(rip, options);
  },
        "rip.csv");

  const ExperimentConfig nnq = parse_config_text(
      R"({"schema_version": 1, "n": 2, "m": 8, "vectors": 20, "master_seed": 5})", Command::nnq);
  twice([&](const std::string& out) {
    RunOptions options;
    options.out_path = out;
    run_nnq(nnq, options);
  },
        "nnq.csv");

  const ExperimentConfig state = parse_config_text(
      R"({"schema_version": 1, "n": 2, "r": 2, "master_seed": 7})", Command::state_gen);
  twice([&](const std::string& out) {
    RunOptions options;
    options.out_path = out;
    run_state_gen(state, options);
  },
        "state.json");

  const ExperimentConfig op = parse_config_text(
      R"({"schema_version": 1, "n": 2, "m": 10, "master_seed": 8, "distinct": true})",
      Command::op_gen);
  twice([&](const std::string& out) {
    RunOptions options;
    options.out_path = out;
    run_op_gen(op, options);
  },
        "op.json");

  fs::remove_all(dir);
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<void()> body;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "basis orthonormality and O(d) expectation kernel", 10, criterion_basis},
      {2, "full-basis isometry and vanishing deviation estimates", 30, criterion_parseval},
      {3, "adjoint identity on random operators", 10, criterion_adjoint},
      {4, "noiseless recovery of 50 states via one fixed operator", 300, criterion_universal_recovery},
      {5, "gaussian-noise error scaling at mu = 16 sqrt(d) sigma", 600, criterion_gaussian_scaling},
      {6, "noiseless nuclear error against the spectral tail", 300, criterion_tail_bound},
      {7, "preimage construction on the alpha-sphere", 10, criterion_preimage},
      {8, "solver objective matches derivative-free oracles", 120, criterion_solver_oracle},
      {9, "sampled deviation decreases with the setting count", 300, criterion_deviation_monotonicity},
      {10, "commutation diagnostics", 30, criterion_commutation},
      {11, "finite-shot noise model", 300, criterion_shot_noise},
      {12, "byte-identical command reruns", 60, criterion_reproducibility},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& err) {
      error = err.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && elapsed > criterion.budget_seconds)
      error = "runtime " + num(elapsed) + " s exceeds the " + num(criterion.budget_seconds) +
              " s budget";
    if (error.empty()) {
      std::printf("[PASS] %2d. %s (%.1f s)\n", criterion.id, criterion.name.c_str(), elapsed);
    } else {
      std::printf("[FAIL] %2d. %s (%.1f s): %s\n", criterion.id, criterion.name.c_str(), elapsed,
                  error.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
