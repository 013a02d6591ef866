#pragma once

#include "irsbf/admm.hpp"
#include "irsbf/channel.hpp"
#include "irsbf/system.hpp"
#include "irsbf/trace.hpp"
#include "irsbf/zf.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace irsbf {

enum class SweepAxis { IrsElements, BsAntennas, RateCenter, ReflectionCase };
enum class SolverKind { Admm, Zf, AdmmNoIrs, ZfNoIrs };

std::string solver_name(SolverKind kind);
SolverKind solver_from_name(const std::string& name);
std::string axis_name(SweepAxis axis);
std::string reflection_case_label(const ReflectionCase& reflection);
ReflectionCase reflection_case_from_label(const std::string& label);

struct ExperimentSpec {
  SystemConfig base;
  ChannelGeometry geometry = ChannelGeometry::defaults();

  SweepAxis axis = SweepAxis::IrsElements;
  std::vector<Scalar> values;               // numeric axes
  std::vector<ReflectionCase> case_values;  // ReflectionCase axis

  std::vector<SolverKind> solvers;
  int trials = 100;
  std::uint64_t master_seed = 1;

  AdmmParams admm;
  ZfParams zf;
  int threads = 0;  // 0: hardware concurrency

  std::size_t sweep_size() const {
    return axis == SweepAxis::ReflectionCase ? case_values.size() : values.size();
  }
  // Base config with sweep point `index` and solver variant applied.
  SystemConfig config_at(std::size_t index, SolverKind solver) const;
  std::string sweep_label(std::size_t index) const;
  void validate() const;
};

struct TrialResult {
  bool ok = false;  // converged and feasible
  RunStatus status = RunStatus::Failed;
  Scalar power = 0;
  int iterations = 0;
  Scalar wall_ms = 0;
};

// One (sweep value, solver) cell: per-trial channel seeds are derived from
// the master seed by trial index alone, so every solver and sweep value
// sees the same realizations (paired comparisons).
std::vector<TrialResult> run_cell(const SystemConfig& config, const ChannelGeometry& geometry,
                                  SolverKind solver, int trials, std::uint64_t master_seed,
                                  const AdmmParams& admm_params, const ZfParams& zf_params,
                                  int threads);

struct ResultRow {
  std::string sweep_value;
  std::string solver;
  bool empty = false;  // every trial of the cell failed
  Scalar mean_power_w = 0;
  Scalar std_power_w = 0;
  Scalar feasibility_rate = 0;
  Scalar mean_iterations = 0;
  Scalar mean_wall_ms = 0;
};

struct ResultTable {
  std::string axis;
  std::vector<ResultRow> rows;  // full sweep x solver grid, sweep-major
};

ResultTable run_experiment(const ExperimentSpec& spec);

// CSV with a fixed header, 9 significant digits, one trailing newline.
// Empty cells render as empty strings. emit_* overloads taking a path
// surface I/O failures with the path in the message.
void emit_csv(const ResultTable& table, std::ostream& os);
void emit_csv(const ResultTable& table, const std::string& path);
void emit_trace(const SolverTrace& trace, const std::string& path, bool with_branch_tags);
ResultTable parse_result_csv(std::istream& is);

// Key-value experiment file with exactly one "sweep <axis> = v1, v2, ..."
// line. Keys: clusters, bs_antennas, irs_elements, noise_dbm, rate_center,
// rate_edge, case, trials, seed, solvers, epsilon, max_iterations, threads.
ExperimentSpec parse_experiment_file(std::istream& is);

}  // namespace irsbf
