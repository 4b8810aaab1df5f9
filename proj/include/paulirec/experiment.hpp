#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "paulirec/analysis.hpp"
#include "paulirec/noise.hpp"
#include "paulirec/solvers.hpp"

namespace paulirec {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Command { recover, sweep, rip, nnq, state_gen, op_gen };

enum class SolverKind { lasso, dantzig };
enum class StateKind { rank_r, spiked };
enum class OperatorKind { draw, full_basis, file };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::exact;
  double sigma = 0.0;
  long long shots = 0;
};

struct SolverSpec {
  SolverKind kind = SolverKind::lasso;
  double value = 0.0;  // mu or lambda
};

struct StateSpec {
  StateKind kind = StateKind::rank_r;
  double spike_weight = 0.9;  // spiked: weight of the rank-1 part, rest is I/d
};

struct OperatorSpec {
  OperatorKind kind = OperatorKind::draw;
  std::string path;  // file kind only
};

/// One ranged field of a sweep; field is one of "m", "r", "sigma", "t".
struct SweepRange {
  std::string field;
  std::vector<double> values;
};

struct ExperimentConfig {
  int schema_version = 1;
  int n = 0;
  int r = 1;
  int m = 0;
  int trials = 1;
  std::uint64_t master_seed = 0;
  bool universal_operator = false;  // one operator shared by all trials of a cell
  StateSpec state;
  OperatorSpec op;
  NoiseSpec noise;
  SolverSpec solver;
  SolverConfig solver_options;
  BoundConstants constants;

  std::vector<SweepRange> sweep;  // sweep command only, ordered by field name

  // rip command
  std::vector<int> rip_m_values;
  std::vector<int> rip_r_values;
  int rip_operator_draws = 10;
  int rip_samples = 200;
  int rip_restarts = 10;

  // nnq command
  int nnq_vectors = 100;
  bool nnq_inject_duplicate = false;

  // op-gen command
  bool op_gen_distinct = false;
};

/// Parse and validate a config file for the given command. Unknown keys,
/// missing required keys, and out-of-range values raise ConfigError.
ExperimentConfig parse_config_text(const std::string& json_text, Command command);
ExperimentConfig load_config(const std::string& path, Command command);

struct RunOptions {
  std::string out_path;  // CSV (or JSON for generators); sidecar at out_path + ".meta.json"
  int jobs = 1;
  bool verbose = false;
  std::ostream* log = nullptr;  // verbose messages; defaults to std::cerr
};

struct ResultRow {
  long cell = 0;
  long trial = 0;
  int n = 0;
  int r = 0;
  int m = 0;
  double noise_param = 0.0;
  double sigma_bound = 0.0;
  std::uint64_t state_seed = 0;
  std::uint64_t op_seed = 0;
  std::uint64_t noise_seed = 0;
  std::uint64_t op_fingerprint = 0;
  std::string status = "ok";
  bool converged = false;
  int iterations = 0;
  double frobenius_error = 0.0;
  double nuclear_error = 0.0;
  double operator_error = 0.0;
  double bound_noiseless = 0.0;
  double bound_gaussian = 0.0;
  double bound_tail = 0.0;
  double residual_opnorm = 0.0;
  double objective = 0.0;
  double wall_ms = 0.0;  // verbose log only; kept out of result files for reproducibility
};

/// recover / sweep. Returns the rows it wrote.
std::vector<ResultRow> run_recovery(const ExperimentConfig& config, Command command,
                                    const RunOptions& options);

void run_rip(const ExperimentConfig& config, const RunOptions& options);

struct NnqOutcome {
  double max_nuclear = 0.0;
  double max_residual = 0.0;
  int vectors_checked = 0;
};

/// Throws ContractViolation if any preimage misses its certificate.
NnqOutcome run_nnq(const ExperimentConfig& config, const RunOptions& options);

void run_state_gen(const ExperimentConfig& config, const RunOptions& options);
void run_op_gen(const ExperimentConfig& config, const RunOptions& options);

/// Operator file round-trip (the op-gen format).
void save_operator(const SamplingOperator& op, std::uint64_t seed, bool distinct,
                   const std::string& path);
SamplingOperator load_operator(const std::string& path);

}  // namespace paulirec
