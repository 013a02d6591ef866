#include "irsbf/trace.hpp"

#include <cstdio>
#include <ostream>

namespace irsbf {

std::string run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::NotConverged: return "NotConverged";
    case RunStatus::Failed: return "Failed";
    case RunStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

void SolverTrace::to_csv(std::ostream& os, bool with_branch_tags) const {
  auto fmt = [](Scalar v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  os << "iteration,total_power_w,consensus_residual,min_slack,wall_ms";
  if (with_branch_tags) os << ",branch_tags";
  os << '\n';
  for (const auto& row : rows) {
    os << row.iteration << ',' << fmt(row.total_power_w) << ','
       << (row.consensus_residual ? fmt(*row.consensus_residual) : std::string()) << ','
       << fmt(row.min_slack) << ',' << fmt(row.wall_ms);
    if (with_branch_tags) os << ',' << row.branch_tags;
    os << '\n';
  }
}

}  // namespace irsbf
