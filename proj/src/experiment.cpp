#include "paulirec/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "paulirec/rng.hpp"

namespace paulirec {

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// strict JSON access

class StrictObject {
 public:
  StrictObject(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& get(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return obj_.at(key);
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  // Throws if the file contains keys this command does not understand.
  void done() const {
    for (const auto& item : obj_.items())
      if (!seen_.contains(item.key()))
        throw ConfigError(where_ + ": unknown key '" + item.key() + "'");
  }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

long long as_integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<long long>();
}

int as_positive_int(const json& j, const std::string& where) {
  const long long v = as_integer(j, where);
  if (v < 1 || v > (1LL << 30)) throw ConfigError(where + ": must be a positive integer");
  return static_cast<int>(v);
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

// ---------------------------------------------------------------------------
// config sections

NoiseSpec parse_noise(const json& j) {
  StrictObject obj(j, "noise");
  const std::string model = as_string(obj.get("model"), "noise.model");
  NoiseSpec spec;
  if (model == "exact") {
    spec.kind = NoiseKind::exact;
  } else if (model == "gaussian") {
    spec.kind = NoiseKind::gaussian;
    spec.sigma = as_number(obj.get("sigma"), "noise.sigma");
    if (spec.sigma < 0.0) throw ConfigError("noise.sigma: must be >= 0");
  } else if (model == "shots") {
    spec.kind = NoiseKind::shots;
    spec.shots = as_integer(obj.get("t"), "noise.t");
    if (spec.shots < 1) throw ConfigError("noise.t: must be >= 1");
  } else {
    throw ConfigError("noise.model: expected exact, gaussian, or shots");
  }
  obj.done();
  return spec;
}

SolverSpec parse_solver(const json& j) {
  StrictObject obj(j, "solver");
  const std::string kind = as_string(obj.get("kind"), "solver.kind");
  SolverSpec spec;
  if (kind == "lasso") {
    spec.kind = SolverKind::lasso;
    spec.value = as_number(obj.get("mu"), "solver.mu");
    if (spec.value <= 0.0) throw ConfigError("solver.mu: must be > 0");
  } else if (kind == "dantzig") {
    spec.kind = SolverKind::dantzig;
    spec.value = as_number(obj.get("lambda"), "solver.lambda");
    if (spec.value < 0.0) throw ConfigError("solver.lambda: must be >= 0");
  } else {
    throw ConfigError("solver.kind: expected lasso or dantzig");
  }
  obj.done();
  return spec;
}

StateSpec parse_state(const json& j) {
  StrictObject obj(j, "state");
  const std::string kind = as_string(obj.get("kind"), "state.kind");
  StateSpec spec;
  if (kind == "rank_r") {
    spec.kind = StateKind::rank_r;
  } else if (kind == "spiked") {
    spec.kind = StateKind::spiked;
    spec.spike_weight = as_number(obj.get("spike_weight"), "state.spike_weight");
    if (spec.spike_weight < 0.0 || spec.spike_weight > 1.0)
      throw ConfigError("state.spike_weight: must be in [0, 1]");
  } else {
    throw ConfigError("state.kind: expected rank_r or spiked");
  }
  obj.done();
  return spec;
}

OperatorSpec parse_operator(const json& j) {
  StrictObject obj(j, "operator");
  const std::string kind = as_string(obj.get("kind"), "operator.kind");
  OperatorSpec spec;
  if (kind == "draw") {
    spec.kind = OperatorKind::draw;
  } else if (kind == "full_basis") {
    spec.kind = OperatorKind::full_basis;
  } else if (kind == "file") {
    spec.kind = OperatorKind::file;
    spec.path = as_string(obj.get("path"), "operator.path");
  } else {
    throw ConfigError("operator.kind: expected draw, full_basis, or file");
  }
  obj.done();
  return spec;
}

SolverConfig parse_solver_options(const json& j) {
  StrictObject obj(j, "solver_options");
  SolverConfig options;
  if (const json* v = obj.find("max_iters")) options.max_iters = as_positive_int(*v, "solver_options.max_iters");
  if (const json* v = obj.find("rel_tol")) {
    options.rel_tol = as_number(*v, "solver_options.rel_tol");
    if (options.rel_tol <= 0.0) throw ConfigError("solver_options.rel_tol: must be > 0");
  }
  if (const json* v = obj.find("step_rule")) {
    const std::string rule = as_string(*v, "solver_options.step_rule");
    if (rule == "fixed")
      options.step_rule = StepRule::fixed;
    else if (rule == "backtracking")
      options.step_rule = StepRule::backtracking;
    else
      throw ConfigError("solver_options.step_rule: expected fixed or backtracking");
  }
  if (const json* v = obj.find("restart")) {
    if (!v->is_boolean()) throw ConfigError("solver_options.restart: expected a boolean");
    options.restart = v->get<bool>();
  }
  if (const json* v = obj.find("psd_project")) {
    if (!v->is_boolean()) throw ConfigError("solver_options.psd_project: expected a boolean");
    options.psd_project = v->get<bool>();
  }
  obj.done();
  return options;
}

BoundConstants parse_constants(const json& j) {
  StrictObject obj(j, "bound_constants");
  BoundConstants constants;
  auto grab = [&](const char* key, double& slot) {
    if (const json* v = obj.find(key)) {
      slot = as_number(*v, std::string("bound_constants.") + key);
      if (slot < 0.0) throw ConfigError(std::string("bound_constants.") + key + ": must be >= 0");
    }
  };
  grab("c0_noiseless", constants.c0_noiseless);
  grab("c0", constants.c0);
  grab("c1", constants.c1);
  grab("c2", constants.c2);
  obj.done();
  return constants;
}

std::vector<SweepRange> parse_sweep(const json& j) {
  StrictObject obj(j, "sweep");
  static const std::vector<std::string> allowed = {"m", "r", "sigma", "t"};
  std::vector<SweepRange> ranges;
  for (const std::string& field : allowed) {  // alphabetical: m, r, sigma, t
    if (const json* v = obj.find(field)) {
      if (!v->is_array() || v->empty())
        throw ConfigError("sweep." + field + ": expected a non-empty array");
      SweepRange range;
      range.field = field;
      for (const auto& entry : *v) {
        if (field == "sigma") {
          const double value = as_number(entry, "sweep.sigma");
          if (value < 0.0) throw ConfigError("sweep.sigma: values must be >= 0");
          range.values.push_back(value);
        } else {
          const long long value = as_integer(entry, "sweep." + field);
          if (value < 1) throw ConfigError("sweep." + field + ": values must be >= 1");
          range.values.push_back(static_cast<double>(value));
        }
      }
      ranges.push_back(std::move(range));
    }
  }
  obj.done();
  if (ranges.empty()) throw ConfigError("sweep: declare at least one ranged field (m, r, sigma, t)");
  return ranges;
}

std::uint64_t parse_seed(const json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const long long v = j.get<long long>();
    if (v < 0) throw ConfigError(where + ": must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  throw ConfigError(where + ": expected an unsigned integer");
}

// ---------------------------------------------------------------------------
// output formatting: all numbers printed via fixed formats so repeated runs
// are byte-identical

std::string fmt_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string fmt_hex(std::uint64_t v) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + p.parent_path().string());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open output file " + path);
  return out;
}

void write_sidecar(const std::string& out_path, const json& body) {
  std::ofstream side = open_output(out_path + ".meta.json");
  side << body.dump(2) << "\n";
  if (!side) throw IoError("failed writing sidecar for " + out_path);
}

void parallel_for(int count, int jobs, const std::function<void(int)>& work) {
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (int i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(jobs));
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
    });
  for (auto& worker : pool) worker.join();
}

struct Cell {
  int m = 0;
  int r = 0;
  NoiseSpec noise;
};

// Cartesian product of the sweep ranges over the base config; fields in
// alphabetical order, last field fastest.
std::vector<Cell> resolve_cells(const ExperimentConfig& config) {
  Cell base{config.m, config.r, config.noise};
  std::vector<Cell> cells{base};
  for (const SweepRange& range : config.sweep) {
    std::vector<Cell> expanded;
    expanded.reserve(cells.size() * range.values.size());
    for (const Cell& cell : cells)
      for (const double value : range.values) {
        Cell next = cell;
        if (range.field == "m") {
          next.m = static_cast<int>(value);
        } else if (range.field == "r") {
          next.r = static_cast<int>(value);
        } else if (range.field == "sigma") {
          if (next.noise.kind != NoiseKind::gaussian)
            throw ConfigError("sweep.sigma requires the gaussian noise model");
          next.noise.sigma = value;
        } else {  // t
          if (next.noise.kind != NoiseKind::shots)
            throw ConfigError("sweep.t requires the shots noise model");
          next.noise.shots = static_cast<long long>(value);
        }
        expanded.push_back(next);
      }
    cells = std::move(expanded);
  }
  return cells;
}

DensityMatrix make_state(const StateSpec& spec, Eigen::Index d, int r, std::uint64_t seed) {
  if (spec.kind == StateKind::rank_r) return random_rank_r_state(d, r, seed);
  const DensityMatrix spike = random_rank_r_state(d, 1, seed);
  Matrix mixed = spec.spike_weight * spike.mat() +
                 (1.0 - spec.spike_weight) * Matrix::Identity(d, d) / static_cast<double>(d);
  return DensityMatrix(std::move(mixed), unchecked);
}

SamplingOperator make_operator(const OperatorSpec& spec, int n, int m, std::uint64_t seed) {
  switch (spec.kind) {
    case OperatorKind::draw: return SamplingOperator::draw(n, m, seed);
    case OperatorKind::full_basis: return SamplingOperator::full_basis(n);
    case OperatorKind::file: {
      SamplingOperator op = load_operator(spec.path);
      if (op.n() != n) throw ConfigError("operator file qubit count disagrees with config n");
      if (op.m() != m) throw ConfigError("operator file setting count disagrees with the cell m");
      return op;
    }
  }
  throw ConfigError("unreachable operator kind");
}

std::string noise_name(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::exact: return "exact";
    case NoiseKind::gaussian: return "gaussian";
    default: return "shots";
  }
}

json config_to_json(const ExperimentConfig& config, Command command) {
  json j;
  j["schema_version"] = config.schema_version;
  j["master_seed"] = config.master_seed;
  if (command == Command::recover || command == Command::sweep) {
    j["n"] = config.n;
    j["r"] = config.r;
    j["m"] = config.m;
    j["trials"] = config.trials;
    j["universal_operator"] = config.universal_operator;
    j["noise"]["model"] = noise_name(config.noise.kind);
    if (config.noise.kind == NoiseKind::gaussian) j["noise"]["sigma"] = config.noise.sigma;
    if (config.noise.kind == NoiseKind::shots) j["noise"]["t"] = config.noise.shots;
    j["solver"]["kind"] = config.solver.kind == SolverKind::lasso ? "lasso" : "dantzig";
    if (config.solver.kind == SolverKind::lasso)
      j["solver"]["mu"] = config.solver.value;
    else
      j["solver"]["lambda"] = config.solver.value;
    j["state"]["kind"] = config.state.kind == StateKind::rank_r ? "rank_r" : "spiked";
    if (config.state.kind == StateKind::spiked) j["state"]["spike_weight"] = config.state.spike_weight;
    j["operator"]["kind"] = config.op.kind == OperatorKind::draw        ? "draw"
                            : config.op.kind == OperatorKind::full_basis ? "full_basis"
                                                                         : "file";
    if (config.op.kind == OperatorKind::file) j["operator"]["path"] = config.op.path;
    j["solver_options"]["max_iters"] = config.solver_options.max_iters;
    j["solver_options"]["rel_tol"] = config.solver_options.rel_tol;
    j["solver_options"]["step_rule"] =
        config.solver_options.step_rule == StepRule::fixed ? "fixed" : "backtracking";
    j["solver_options"]["restart"] = config.solver_options.restart;
    j["solver_options"]["psd_project"] = config.solver_options.psd_project;
    j["bound_constants"]["c0_noiseless"] = config.constants.c0_noiseless;
    j["bound_constants"]["c0"] = config.constants.c0;
    j["bound_constants"]["c1"] = config.constants.c1;
    j["bound_constants"]["c2"] = config.constants.c2;
    if (command == Command::sweep) {
      for (const auto& range : config.sweep) j["sweep"][range.field] = range.values;
    }
  }
  if (command == Command::rip) {
    j["n"] = config.n;
    j["m_values"] = config.rip_m_values;
    j["r_values"] = config.rip_r_values;
    j["operator_draws"] = config.rip_operator_draws;
    j["samples"] = config.rip_samples;
    j["restarts"] = config.rip_restarts;
    j["operator"]["kind"] = config.op.kind == OperatorKind::draw ? "draw" : "full_basis";
  }
  if (command == Command::nnq) {
    j["n"] = config.n;
    j["m"] = config.m;
    j["vectors"] = config.nnq_vectors;
    j["inject_duplicate"] = config.nnq_inject_duplicate;
  }
  return j;
}

constexpr const char* kRecoveryHeader =
    "cell,trial,n,d,r,m,noise,noise_param,sigma_bound,solver,solver_param,state_kind,"
    "op_fingerprint,state_seed,op_seed,noise_seed,status,converged,iterations,"
    "frobenius_error,nuclear_error,operator_error,bound_noiseless,bound_gaussian,"
    "bound_tail,residual_opnorm,objective";

void write_recovery_row(std::ostream& out, const ExperimentConfig& config, const ResultRow& row) {
  out << row.cell << ',' << row.trial << ',' << row.n << ',' << (Eigen::Index{1} << row.n) << ','
      << row.r << ',' << row.m << ',' << noise_name(config.noise.kind) << ','
      << fmt_double(row.noise_param) << ',' << fmt_double(row.sigma_bound) << ','
      << (config.solver.kind == SolverKind::lasso ? "lasso" : "dantzig") << ','
      << fmt_double(config.solver.value) << ','
      << (config.state.kind == StateKind::rank_r ? "rank_r" : "spiked") << ','
      << fmt_hex(row.op_fingerprint) << ',' << row.state_seed << ',' << row.op_seed << ','
      << row.noise_seed << ',' << row.status << ',' << (row.converged ? 1 : 0) << ','
      << row.iterations << ',' << fmt_double(row.frobenius_error) << ','
      << fmt_double(row.nuclear_error) << ',' << fmt_double(row.operator_error) << ','
      << fmt_double(row.bound_noiseless) << ',' << fmt_double(row.bound_gaussian) << ','
      << fmt_double(row.bound_tail) << ',' << fmt_double(row.residual_opnorm) << ','
      << fmt_double(row.objective) << '\n';
}

}  // namespace

// ---------------------------------------------------------------------------
// config parsing

ExperimentConfig parse_config_text(const std::string& json_text, Command command) {
  json parsed;
  try {
    parsed = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  StrictObject obj(parsed, "config");
  ExperimentConfig config;

  const long long version = as_integer(obj.get("schema_version"), "schema_version");
  if (version != 1) throw ConfigError("schema_version: only version 1 is supported");
  config.schema_version = 1;
  config.master_seed = parse_seed(obj.get("master_seed"), "master_seed");

  config.n = as_positive_int(obj.get("n"), "n");
  if (config.n > 16) throw ConfigError("n: at most 16 qubits");

  auto check_full_basis_n = [&] {
    if (config.op.kind == OperatorKind::full_basis && config.n > 8)
      throw ConfigError("operator.kind full_basis requires n <= 8");
  };

  switch (command) {
    case Command::recover:
    case Command::sweep: {
      config.r = as_positive_int(obj.get("r"), "r");
      config.m = as_positive_int(obj.get("m"), "m");
      config.trials = as_positive_int(obj.get("trials"), "trials");
      config.noise = parse_noise(obj.get("noise"));
      config.solver = parse_solver(obj.get("solver"));
      if (const json* v = obj.find("state")) config.state = parse_state(*v);
      if (const json* v = obj.find("operator")) config.op = parse_operator(*v);
      check_full_basis_n();
      if (const json* v = obj.find("solver_options")) config.solver_options = parse_solver_options(*v);
      if (const json* v = obj.find("bound_constants")) config.constants = parse_constants(*v);
      if (const json* v = obj.find("universal_operator")) {
        if (!v->is_boolean()) throw ConfigError("universal_operator: expected a boolean");
        config.universal_operator = v->get<bool>();
      }
      if (command == Command::sweep) {
        config.sweep = parse_sweep(obj.get("sweep"));
        if (config.op.kind == OperatorKind::file)
          for (const auto& range : config.sweep)
            if (range.field == "m") throw ConfigError("sweep.m cannot be combined with a file operator");
      }
      if (config.r > (1 << config.n)) throw ConfigError("r: exceeds the dimension 2^n");
      break;
    }
    case Command::rip: {
      const json& mv = obj.get("m_values");
      if (!mv.is_array() || mv.empty()) throw ConfigError("m_values: expected a non-empty array");
      for (const auto& v : mv) config.rip_m_values.push_back(as_positive_int(v, "m_values"));
      const json& rv = obj.get("r_values");
      if (!rv.is_array() || rv.empty()) throw ConfigError("r_values: expected a non-empty array");
      for (const auto& v : rv) config.rip_r_values.push_back(as_positive_int(v, "r_values"));
      config.rip_operator_draws = as_positive_int(obj.get("operator_draws"), "operator_draws");
      config.rip_samples = as_positive_int(obj.get("samples"), "samples");
      config.rip_restarts = as_positive_int(obj.get("restarts"), "restarts");
      if (const json* v = obj.find("operator")) {
        config.op = parse_operator(*v);
        if (config.op.kind == OperatorKind::file)
          throw ConfigError("operator.kind: rip supports draw or full_basis");
      }
      check_full_basis_n();
      if (config.op.kind == OperatorKind::full_basis)
        for (int m : config.rip_m_values)
          if (static_cast<std::uint64_t>(m) != (std::uint64_t{1} << (2 * config.n)))
            throw ConfigError("m_values: full_basis cells must use m = 4^n");
      for (int r : config.rip_r_values)
        if (r > (1 << config.n)) throw ConfigError("r_values: entry exceeds the dimension 2^n");
      break;
    }
    case Command::nnq: {
      config.m = as_positive_int(obj.get("m"), "m");
      config.nnq_vectors = as_positive_int(obj.get("vectors"), "vectors");
      if (const json* v = obj.find("inject_duplicate")) {
        if (!v->is_boolean()) throw ConfigError("inject_duplicate: expected a boolean");
        config.nnq_inject_duplicate = v->get<bool>();
      }
      if (static_cast<std::uint64_t>(config.m) > (std::uint64_t{1} << (2 * config.n)))
        throw ConfigError("m: distinct labels require m <= 4^n");
      break;
    }
    case Command::state_gen: {
      config.r = as_positive_int(obj.get("r"), "r");
      if (const json* v = obj.find("state")) config.state = parse_state(*v);
      if (config.r > (1 << config.n)) throw ConfigError("r: exceeds the dimension 2^n");
      break;
    }
    case Command::op_gen: {
      config.m = as_positive_int(obj.get("m"), "m");
      if (const json* v = obj.find("operator")) {
        config.op = parse_operator(*v);
        if (config.op.kind == OperatorKind::file)
          throw ConfigError("operator.kind: op-gen supports draw or full_basis");
      }
      check_full_basis_n();
      if (const json* v = obj.find("distinct")) {
        if (!v->is_boolean()) throw ConfigError("distinct: expected a boolean");
        config.op_gen_distinct = v->get<bool>();
      }
      if (config.op_gen_distinct &&
          static_cast<std::uint64_t>(config.m) > (std::uint64_t{1} << (2 * config.n)))
        throw ConfigError("m: distinct labels require m <= 4^n");
      break;
    }
  }
  obj.done();
  return config;
}

ExperimentConfig load_config(const std::string& path, Command command) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), command);
}

// ---------------------------------------------------------------------------
// recover / sweep

std::vector<ResultRow> run_recovery(const ExperimentConfig& config, Command command,
                                    const RunOptions& options) {
  const std::vector<Cell> cells = resolve_cells(config);
  const Eigen::Index d = Eigen::Index{1} << config.n;
  const int trials = config.trials;
  const int total = static_cast<int>(cells.size()) * trials;
  std::vector<ResultRow> rows(static_cast<size_t>(total));

  std::optional<SamplingOperator> file_op;
  if (config.op.kind == OperatorKind::file) {
    file_op = load_operator(config.op.path);
    if (file_op->n() != config.n)
      throw ConfigError("operator file qubit count disagrees with config n");
    for (const Cell& cell : cells)
      if (cell.m != file_op->m())
        throw ConfigError("operator file setting count disagrees with the cell m");
  }

  std::mutex log_mutex;
  std::ostream* log = options.log ? options.log : &std::cerr;

  auto run_one = [&](int index) {
    const int cell_idx = index / trials;
    const int trial = index % trials;
    const Cell& cell = cells[static_cast<size_t>(cell_idx)];
    ResultRow& row = rows[static_cast<size_t>(index)];
    row.cell = cell_idx;
    row.trial = trial;
    row.n = config.n;
    row.r = cell.r;
    row.m = cell.m;
    row.noise_param = cell.noise.kind == NoiseKind::gaussian ? cell.noise.sigma
                      : cell.noise.kind == NoiseKind::shots
                          ? static_cast<double>(cell.noise.shots)
                          : 0.0;
    const auto c = static_cast<std::uint64_t>(cell_idx);
    const auto t = static_cast<std::uint64_t>(trial);
    row.state_seed = derive_seed(config.master_seed, seed_stream::state, c, t);
    row.op_seed = derive_seed(config.master_seed, seed_stream::op, c,
                              config.universal_operator ? 0 : t);
    row.noise_seed = derive_seed(config.master_seed, seed_stream::noise, c, t);

    const auto start = std::chrono::steady_clock::now();
    try {
      const DensityMatrix state = make_state(config.state, d, cell.r, row.state_seed);
      const SamplingOperator op =
          file_op.has_value() ? *file_op : make_operator(config.op, config.n, cell.m, row.op_seed);
      row.op_fingerprint = op.fingerprint();

      MeasurementRecord record;
      switch (cell.noise.kind) {
        case NoiseKind::exact:
          record = measure_exact(op, state);
          row.sigma_bound = 0.0;
          break;
        case NoiseKind::gaussian:
          record = measure_gaussian(op, state, cell.noise.sigma, row.noise_seed);
          row.sigma_bound = cell.noise.sigma;
          break;
        case NoiseKind::shots:
          record = measure_shots(op, state, cell.noise.shots, row.noise_seed);
          row.sigma_bound = shot_noise_sigma_equiv(op, state, cell.noise.shots);
          break;
      }

      const RecoveryResult result =
          config.solver.kind == SolverKind::lasso
              ? lasso(op, record.y, config.solver.value, config.solver_options)
              : dantzig(op, record.y, config.solver.value, config.solver_options);

      const ErrorReport report =
          error_report(state, result.estimate, cell.r, row.sigma_bound, config.constants);
      row.converged = result.converged;
      row.iterations = result.iterations;
      row.frobenius_error = report.frobenius_error;
      row.nuclear_error = report.nuclear_error;
      row.operator_error = operator_norm(result.estimate.mat() - state.mat());
      row.bound_noiseless = report.bound_rhs_noiseless;
      row.bound_gaussian = report.bound_rhs_gaussian;
      row.bound_tail = report.bound_rhs_tail;
      row.residual_opnorm = result.residual_operator_norm;
      row.objective = result.final_objective;
      row.status = "ok";
    } catch (const std::exception& err) {
      row.status = "error";
      row.converged = false;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.frobenius_error = row.nuclear_error = row.operator_error = nan;
      row.bound_noiseless = row.bound_gaussian = row.bound_tail = nan;
      row.residual_opnorm = row.objective = nan;
      if (options.verbose) {
        std::lock_guard<std::mutex> guard(log_mutex);
        *log << "trial " << cell_idx << "/" << trial << " failed: " << err.what() << "\n";
      }
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (options.verbose) {
      std::lock_guard<std::mutex> guard(log_mutex);
      *log << "cell " << cell_idx << " trial " << trial << " status=" << row.status
           << " frob=" << row.frobenius_error << " iters=" << row.iterations
           << " wall_ms=" << row.wall_ms << "\n";
    }
  };

  parallel_for(total, options.jobs, run_one);

  if (!options.out_path.empty()) {
    std::ofstream out = open_output(options.out_path);
    out << kRecoveryHeader << '\n';
    for (const ResultRow& row : rows) write_recovery_row(out, config, row);
    if (!out) throw IoError("failed writing " + options.out_path);
    out.close();

    json side;
    side["schema_version"] = 1;
    side["command"] = command == Command::recover ? "recover" : "sweep";
    side["config"] = config_to_json(config, command);
    json columns = json::array();
    {
      std::stringstream header(kRecoveryHeader);
      std::string column;
      while (std::getline(header, column, ',')) columns.push_back(column);
    }
    side["columns"] = columns;
    json cell_list = json::array();
    for (size_t i = 0; i < cells.size(); ++i) {
      json c;
      c["cell"] = i;
      c["m"] = cells[i].m;
      c["r"] = cells[i].r;
      if (cells[i].noise.kind == NoiseKind::gaussian) c["sigma"] = cells[i].noise.sigma;
      if (cells[i].noise.kind == NoiseKind::shots) c["t"] = cells[i].noise.shots;
      if (config.universal_operator)
        c["op_fingerprint"] = fmt_hex(rows[i * static_cast<size_t>(trials)].op_fingerprint);
      cell_list.push_back(c);
    }
    side["cells"] = cell_list;
    write_sidecar(options.out_path, side);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// rip

void run_rip(const ExperimentConfig& config, const RunOptions& options) {
  struct RipRow {
    int cell;
    int draw;
    int r;
    int m;
    std::uint64_t op_seed;
    std::uint64_t fingerprint;
    RipEstimate sampled;
    RipEstimate ascent;
  };
  struct RipCell {
    int r;
    int m;
  };
  std::vector<RipCell> cells;
  for (int r : config.rip_r_values)
    for (int m : config.rip_m_values) cells.push_back({r, m});

  const int per_cell = config.rip_operator_draws;
  const int total = static_cast<int>(cells.size()) * per_cell;
  std::vector<RipRow> rows(static_cast<size_t>(total));

  parallel_for(total, options.jobs, [&](int index) {
    const int cell_idx = index / per_cell;
    const int draw = index % per_cell;
    const RipCell& cell = cells[static_cast<size_t>(cell_idx)];
    RipRow& row = rows[static_cast<size_t>(index)];
    row.cell = cell_idx;
    row.draw = draw;
    row.r = cell.r;
    row.m = cell.m;
    const auto c = static_cast<std::uint64_t>(cell_idx);
    const auto k = static_cast<std::uint64_t>(draw);
    row.op_seed = derive_seed(config.master_seed, seed_stream::op, c, k);
    const SamplingOperator op = config.op.kind == OperatorKind::full_basis
                                    ? SamplingOperator::full_basis(config.n)
                                    : SamplingOperator::draw(config.n, cell.m, row.op_seed);
    row.fingerprint = op.fingerprint();
    row.sampled = rip_epsilon_sampled(op, cell.r, config.rip_samples,
                                      derive_seed(config.master_seed, seed_stream::rip_sampled, c, k));
    row.ascent = rip_epsilon_ascent(op, cell.r, config.rip_restarts,
                                    derive_seed(config.master_seed, seed_stream::rip_ascent, c, k));
  });

  std::ofstream out = open_output(options.out_path);
  out << "cell,draw,n,d,r,m,op_seed,op_fingerprint,method,samples_used,epsilon_hat,delta_hat\n";
  for (const RipRow& row : rows) {
    for (const RipEstimate* est : {&row.sampled, &row.ascent}) {
      out << row.cell << ',' << row.draw << ',' << config.n << ',' << (Eigen::Index{1} << config.n)
          << ',' << row.r << ',' << row.m << ',' << row.op_seed << ',' << fmt_hex(row.fingerprint)
          << ',' << (est->method == RipMethod::sampled ? "sampled" : "local_ascent") << ','
          << est->samples_used << ',' << fmt_double(est->epsilon_hat) << ','
          << fmt_double(delta_from_epsilon(est->epsilon_hat)) << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + options.out_path);
  out.close();

  json side;
  side["schema_version"] = 1;
  side["command"] = "rip";
  side["config"] = config_to_json(config, Command::rip);
  write_sidecar(options.out_path, side);
}

// ---------------------------------------------------------------------------
// nnq

NnqOutcome run_nnq(const ExperimentConfig& config, const RunOptions& options) {
  const std::uint64_t op_seed = derive_seed(config.master_seed, seed_stream::op, 0, 0);
  SamplingOperator op = SamplingOperator::draw_distinct(config.n, config.m, op_seed);
  if (config.nnq_inject_duplicate) {
    std::vector<PauliLabel> labels = op.labels();
    if (labels.size() < 2) throw ConfigError("inject_duplicate needs m >= 2");
    labels[1] = labels[0];
    op = SamplingOperator::from_labels(std::move(labels));
  }

  const double radius = std::sqrt(static_cast<double>(op.dim()) / op.m());
  NnqOutcome outcome;
  std::ofstream out;
  const bool writing = !options.out_path.empty();
  if (writing) {
    out = open_output(options.out_path);
    out << "sample,norm_y,nuclear_norm,residual,certified\n";
  }

  std::string failure;
  for (int j = 0; j < config.nnq_vectors; ++j) {
    RealVector y = RealVector::Zero(op.m());
    if (j > 0) {  // sample 0 is the zero vector
      auto eng = make_engine(derive_seed(config.master_seed, seed_stream::nnq, 0,
                                         static_cast<std::uint64_t>(j)));
      std::normal_distribution<double> normal(0.0, 1.0);
      for (int i = 0; i < op.m(); ++i) y(i) = normal(eng);
      y *= radius / y.norm();
    }
    SamplingOperator::Preimage pre;
    try {
      pre = op.nnq_preimage(y);
    } catch (const std::invalid_argument& err) {
      throw ContractViolation(std::string("preimage precondition failed: ") + err.what());
    }
    const double nuc = nuclear_norm(pre.matrix);
    const double residual = (op.forward(pre.matrix) - y).norm();
    outcome.max_nuclear = std::max(outcome.max_nuclear, nuc);
    outcome.max_residual = std::max(outcome.max_residual, residual);
    ++outcome.vectors_checked;
    if (writing)
      out << j << ',' << fmt_double(y.norm()) << ',' << fmt_double(nuc) << ','
          << fmt_double(residual) << ',' << (pre.nuclear_bound_certified ? 1 : 0) << '\n';
    if (failure.empty()) {
      if (nuc > 1.0 + 1e-10) failure = "preimage nuclear norm exceeds 1";
      if (residual > 1e-10) failure = "preimage does not reproduce y";
      if (!pre.nuclear_bound_certified) failure = "certificate missing on the alpha-sphere";
    }
  }
  if (writing) {
    if (!out) throw IoError("failed writing " + options.out_path);
    out.close();
    json side;
    side["schema_version"] = 1;
    side["command"] = "nnq";
    side["config"] = config_to_json(config, Command::nnq);
    side["op_fingerprint"] = fmt_hex(op.fingerprint());
    write_sidecar(options.out_path, side);
  }
  if (!failure.empty()) throw ContractViolation(failure);
  return outcome;
}

// ---------------------------------------------------------------------------
// generators and operator files

void run_state_gen(const ExperimentConfig& config, const RunOptions& options) {
  const Eigen::Index d = Eigen::Index{1} << config.n;
  const std::uint64_t seed = derive_seed(config.master_seed, seed_stream::state, 0, 0);
  const DensityMatrix state = make_state(config.state, d, config.r, seed);
  json j;
  j["schema_version"] = 1;
  j["kind"] = "density_matrix";
  j["n"] = config.n;
  j["d"] = d;
  j["r"] = config.r;
  j["seed"] = seed;
  j["state_kind"] = config.state.kind == StateKind::rank_r ? "rank_r" : "spiked";
  json entries = json::array();
  for (Eigen::Index row = 0; row < d; ++row)
    for (Eigen::Index col = 0; col < d; ++col) {
      entries.push_back(json::array({state.mat()(row, col).real(), state.mat()(row, col).imag()}));
    }
  j["entries"] = entries;
  std::ofstream out = open_output(options.out_path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + options.out_path);
}

void save_operator(const SamplingOperator& op, std::uint64_t seed, bool distinct,
                   const std::string& path) {
  json j;
  j["schema_version"] = 1;
  j["kind"] = "sampling_operator";
  j["n"] = op.n();
  j["m"] = op.m();
  j["seed"] = seed;
  j["distinct"] = distinct;
  json labels = json::array();
  for (const auto& label : op.labels()) labels.push_back(label_index(label));
  j["labels"] = labels;
  j["fingerprint"] = fmt_hex(op.fingerprint());
  std::ofstream out = open_output(path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

SamplingOperator load_operator(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open operator file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("operator file is not valid JSON: ") + err.what());
  }
  if (!j.is_object() || j.value("kind", "") != "sampling_operator")
    throw ConfigError("operator file: expected kind = sampling_operator");
  if (j.value("schema_version", 0) != 1) throw ConfigError("operator file: unsupported schema_version");
  const int n = j.value("n", 0);
  if (n < 1 || n > 16) throw ConfigError("operator file: bad qubit count");
  if (!j.contains("labels") || !j.at("labels").is_array() || j.at("labels").empty())
    throw ConfigError("operator file: missing labels");
  std::vector<PauliLabel> labels;
  for (const auto& v : j.at("labels")) {
    if (!v.is_number_integer()) throw ConfigError("operator file: labels must be integers");
    labels.push_back(make_label(n, v.get<std::uint64_t>()));
  }
  return SamplingOperator::from_labels(std::move(labels));
}

void run_op_gen(const ExperimentConfig& config, const RunOptions& options) {
  const std::uint64_t seed = derive_seed(config.master_seed, seed_stream::op, 0, 0);
  SamplingOperator op =
      config.op.kind == OperatorKind::full_basis ? SamplingOperator::full_basis(config.n)
      : config.op_gen_distinct                   ? SamplingOperator::draw_distinct(config.n, config.m, seed)
                                                 : SamplingOperator::draw(config.n, config.m, seed);
  save_operator(op, seed, config.op_gen_distinct || config.op.kind == OperatorKind::full_basis,
                options.out_path);
}

}  // namespace paulirec
