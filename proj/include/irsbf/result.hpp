#pragma once

#include "irsbf/model.hpp"
#include "irsbf/trace.hpp"

namespace irsbf {

// Common output of the joint-design solvers.
struct RunResult {
  BeamformingSolution solution;
  SolverTrace trace;
  RunStatus status = RunStatus::Failed;
  int iterations = 0;
};

}  // namespace irsbf
