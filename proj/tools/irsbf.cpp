// Command line front end: Monte Carlo experiment sweeps, single-instance
// convergence traces, and channel fixture dumps.

#include "irsbf/channel.hpp"
#include "irsbf/sim.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace irsbf;

struct InstanceFlags {
  int clusters = 3;
  int bs_antennas = 8;
  int irs_elements = 30;
  double noise_dbm = -80;
  double rate_center = 4;
  double rate_edge = 4;
  std::string case_label = "II";
  int levels = 0;  // >0 forces case III with that level count
  bool no_irs = false;
  std::uint64_t seed = 1;

  SystemConfig config() const {
    SystemConfig config;
    config.clusters = clusters;
    config.bs_antennas = bs_antennas;
    config.irs_elements = irs_elements;
    config.noise_power = dbm_to_watt(noise_dbm);
    config.set_uniform_rates(rate_center, rate_edge);
    config.reflection_case = levels > 0 ? ReflectionCase::discrete(levels)
                                        : reflection_case_from_label(case_label);
    config.irs_enabled = !no_irs;
    config.validate();
    return config;
  }
};

void add_instance_flags(CLI::App* cmd, InstanceFlags& flags) {
  cmd->add_option("-K,--clusters", flags.clusters, "number of user clusters");
  cmd->add_option("-N,--antennas", flags.bs_antennas, "BS antenna count");
  cmd->add_option("-M,--elements", flags.irs_elements, "IRS element count");
  cmd->add_option("--noise-dbm", flags.noise_dbm, "noise power [dBm]");
  cmd->add_option("--rate-center", flags.rate_center, "central-user rate target [bit/s/Hz]");
  cmd->add_option("--rate-edge", flags.rate_edge, "edge-user rate target [bit/s/Hz]");
  cmd->add_option("--case", flags.case_label, "reflection case: I, II, or III:<levels>");
  cmd->add_option("--levels", flags.levels, "phase levels (forces case III)");
  cmd->add_flag("--no-irs", flags.no_irs, "disable the reflected path");
  cmd->add_option("--seed", flags.seed, "channel seed");
}

int run_command(const std::string& file, const std::string& out, int trials_override,
                std::uint64_t seed_override, bool have_seed, int threads) {
  std::ifstream is(file);
  if (!is) {
    std::cerr << "cannot open experiment file: " << file << "\n";
    return 2;
  }
  ExperimentSpec spec = parse_experiment_file(is);
  if (trials_override > 0) spec.trials = trials_override;
  if (have_seed) spec.master_seed = seed_override;
  if (threads > 0) spec.threads = threads;

  const ResultTable table = run_experiment(spec);
  if (out.empty())
    emit_csv(table, std::cout);
  else
    emit_csv(table, out);

  for (const auto& row : table.rows)
    if (row.empty) {
      std::cerr << "cell " << row.sweep_value << "/" << row.solver << ": all trials failed\n";
      return 1;
    }
  return 0;
}

int trace_command(const InstanceFlags& flags, const std::string& solver_label,
                  const std::string& out) {
  const SystemConfig config = flags.config();
  const ChannelRealization channels = generate(config, flags.seed);
  const SolverKind solver = solver_from_name(solver_label);

  RunResult result;
  bool branch_tags = false;
  if (solver == SolverKind::Admm || solver == SolverKind::AdmmNoIrs) {
    SystemConfig run_config = config;
    run_config.irs_enabled = config.irs_enabled && solver == SolverKind::Admm;
    result = run_admm(run_config, channels);
  } else {
    SystemConfig run_config = config;
    run_config.irs_enabled = config.irs_enabled && solver == SolverKind::Zf;
    result = run_zf(run_config, channels);
    branch_tags = true;
  }

  if (out.empty())
    result.trace.to_csv(std::cout, branch_tags);
  else
    emit_trace(result.trace, out, branch_tags);

  std::cerr << "status: " << run_status_name(result.status) << ", iterations: "
            << result.iterations << ", power: " << result.solution.total_power << " W\n";
  return result.status == RunStatus::Converged ? 0 : 1;
}

int channels_command(const InstanceFlags& flags, const std::string& out) {
  const SystemConfig config = flags.config();
  const ChannelRealization channels = generate(config, flags.seed);
  if (out.empty()) {
    write_channels(std::cout, channels);
  } else {
    std::ofstream os(out);
    if (!os) {
      std::cerr << "cannot open for writing: " << out << "\n";
      return 2;
    }
    write_channels(os, channels);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint transmit/reflect beamforming power-minimization simulator"};
  app.require_subcommand(1);

  // run
  std::string experiment_file, run_out;
  int trials_override = 0, threads = 0;
  std::uint64_t seed_override = 0;
  auto* run = app.add_subcommand("run", "run an experiment file and emit the result table");
  run->add_option("file", experiment_file, "experiment file")->required();
  run->add_option("--out", run_out, "output CSV path (default: stdout)");
  run->add_option("--trials", trials_override, "override the trial count");
  auto* seed_opt = run->add_option("--seed", seed_override, "override the master seed");
  run->add_option("--threads", threads, "worker threads (default: hardware)");

  // trace
  InstanceFlags trace_flags;
  std::string trace_solver = "ADMM", trace_out;
  auto* trace = app.add_subcommand("trace", "single instance with per-iteration trace");
  add_instance_flags(trace, trace_flags);
  trace->add_option("--solver", trace_solver, "ADMM, ZF, ADMM-noIRS, or ZF-noIRS");
  trace->add_option("--out", trace_out, "output CSV path (default: stdout)");

  // channels
  InstanceFlags channel_flags;
  std::string channels_out;
  auto* channels = app.add_subcommand("channels", "dump one channel realization as text");
  add_instance_flags(channels, channel_flags);
  channels->add_option("--out", channels_out, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return run_command(experiment_file, run_out, trials_override, seed_override,
                         seed_opt->count() > 0, threads);
    if (trace->parsed()) return trace_command(trace_flags, trace_solver, trace_out);
    if (channels->parsed()) return channels_command(channel_flags, channels_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
