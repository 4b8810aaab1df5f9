#include "paulirec/cli.hpp"

#include <iostream>

#include <CLI11.hpp>

#include "paulirec/experiment.hpp"

namespace paulirec::cli {

namespace {

struct SharedFlags {
  std::string config_path;
  std::string out_path;
  int jobs = 1;
  bool verbose = false;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void attach_flags(CLI::App* cmd, SharedFlags& flags, bool out_required) {
  cmd->add_option("--config", flags.config_path, "config file (JSON)")->required();
  auto* out = cmd->add_option("--out", flags.out_path, "output file path");
  if (out_required) out->required();
  cmd->add_option("--jobs", flags.jobs, "concurrent trials")->check(CLI::Range(1, 512));
  cmd->add_option("--seed", flags.seed, "override master_seed from the config");
  cmd->add_flag("--verbose", flags.verbose, "per-trial progress on stderr");
}

int dispatch(Command command, const SharedFlags& flags) {
  ExperimentConfig config = load_config(flags.config_path, command);
  if (flags.seed_given) config.master_seed = flags.seed;
  RunOptions options;
  options.out_path = flags.out_path;
  options.jobs = flags.jobs;
  options.verbose = flags.verbose;
  options.log = &std::cerr;

  switch (command) {
    case Command::recover:
    case Command::sweep:
      run_recovery(config, command, options);
      break;
    case Command::rip:
      run_rip(config, options);
      break;
    case Command::nnq: {
      const NnqOutcome outcome = run_nnq(config, options);
      std::cout << "checked " << outcome.vectors_checked
                << " vectors: max nuclear norm = " << outcome.max_nuclear
                << ", max residual = " << outcome.max_residual << "\n";
      break;
    }
    case Command::state_gen:
      run_state_gen(config, options);
      break;
    case Command::op_gen:
      run_op_gen(config, options);
      break;
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"low-rank matrix recovery from random Pauli measurements"};
  app.require_subcommand(1);

  struct Entry {
    Command command;
    SharedFlags flags;
    CLI::App* sub;
  };
  std::vector<Entry> entries;
  entries.push_back({Command::recover, {}, app.add_subcommand("recover", "measure and reconstruct states over repeated trials")});
  entries.push_back({Command::sweep, {}, app.add_subcommand("sweep", "recover over a grid of m / r / sigma / t values")});
  entries.push_back({Command::rip, {}, app.add_subcommand("rip", "estimate isometry deviations of sampled operators")});
  entries.push_back({Command::nnq, {}, app.add_subcommand("nnq", "verify the preimage construction on the alpha-sphere")});
  entries.push_back({Command::state_gen, {}, app.add_subcommand("state-gen", "write a random density matrix to a file")});
  entries.push_back({Command::op_gen, {}, app.add_subcommand("op-gen", "write a sampling operator to a file")});

  for (auto& entry : entries) {
    const bool out_required = entry.command != Command::nnq;
    attach_flags(entry.sub, entry.flags, out_required);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& err) {
    if (err.get_exit_code() == 0) {  // --help
      std::cout << app.help() << std::flush;
      return 0;
    }
    std::cerr << err.what() << "\n";
    return 1;
  }

  try {
    for (auto& entry : entries)
      if (entry.sub->parsed()) {
        entry.flags.seed_given = entry.sub->count("--seed") > 0;
        return dispatch(entry.command, entry.flags);
      }
    std::cerr << "no subcommand given\n";
    return 1;
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 1;
  } catch (const ContractViolation& err) {
    std::cerr << "contract violation: " << err.what() << "\n";
    return 2;
  } catch (const IoError& err) {
    std::cerr << "i/o error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

}  // namespace paulirec::cli
