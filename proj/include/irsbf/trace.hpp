#pragma once

#include "irsbf/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace irsbf {

enum class RunStatus { Converged, NotConverged, Failed, Infeasible };

std::string run_status_name(RunStatus status);

struct TraceRow {
  int iteration = 0;
  Scalar total_power_w = 0;
  std::optional<Scalar> consensus_residual;  // consensus solvers only
  Scalar min_slack = 0;
  Scalar wall_ms = 0;
  std::string branch_tags;  // per-cluster edge branch tags, ";"-separated
};

// Per-iteration convergence record. The CSV layout is
//   iteration,total_power_w,consensus_residual,min_slack,wall_ms[,branch_tags]
// with empty fields for values a solver does not produce and 9 significant
// digits for reals. wall_ms is the only nondeterministic column.
struct SolverTrace {
  std::vector<TraceRow> rows;
  std::string note;

  void to_csv(std::ostream& os, bool with_branch_tags) const;
};

}  // namespace irsbf
