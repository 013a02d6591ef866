#pragma once

#include "irsbf/channel.hpp"
#include "irsbf/conic.hpp"
#include "irsbf/model.hpp"
#include "irsbf/result.hpp"
#include "irsbf/system.hpp"
#include "irsbf/trace.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace irsbf {

struct AdmmParams {
  // Scaled-dual penalty. With indicator-style objectives every subproblem of
  // the splitting is invariant to it, so it only documents the Lagrangian;
  // see run_admm.
  Scalar xi = 1;
  Scalar epsilon = 1e-3;  // outer precision on max(consensus, relative power change)
  int max_outer_iterations = 100;

  Scalar subproblem_tol = 1e-8;
  int subproblem_max_iter = 200;
  Scalar infeasible_slack_penalty = 1e3;
  Scalar audit_tol = 1e-4;

  void validate() const {
    if (!(xi > 0) || !(epsilon > 0)) throw std::invalid_argument("admm params must be positive");
  }
};

// Iterate of the consensus splitting. w stacks the 2K beamformers as
// [w_{1,c}; w_{1,e}; ...; w_{K,c}; w_{K,e}]; u holds the three auxiliary
// scalars per cluster.
struct AdmmState {
  CVec phi;     // constraint-side copy of the reflection vector
  CVec varphi;  // feasible-set-side copy
  CVec lambda;  // scaled dual for phi = varphi
  CVec w;       // stacked, 2KN
  std::vector<std::array<Complex, 3>> u;
  int iteration = 0;
};

inline Eigen::Index w_offset(const SystemConfig& config, int k, int i) {
  return static_cast<Eigen::Index>(2 * k + i) * config.bs_antennas;
}

// Rate targets mapped to SINR thresholds tau = 2^r - 1. j indexes the three
// per-cluster constraints: 0 = center rate, 1 = edge rate at the edge user,
// 2 = edge rate at the central user (SIC stage).
struct RateConstraintTransform {
  VecX tau_center, tau_edge;

  explicit RateConstraintTransform(const SystemConfig& config);
  Scalar tau(int k, int j) const { return j == 0 ? tau_center[k] : tau_edge[k]; }
};

// Left side of the auxiliary-variable rate constraint (k, j) at the given
// point: 2 Re{u^H hhat^H w_target} - |u|^2 beta, where beta collects noise,
// intra-cluster leakage and inter-cluster interference for that constraint.
// Direct evaluation; the oracle checked by the coefficient builders.
Scalar evaluate_surrogate_lhs(const SystemConfig& config, const ChannelRealization& channels,
                              int k, int j, const CVec& phi, const CVec& w, Complex u);

// Quadratic-form data of one phi-side constraint:
//   2 Re{mu^H conj(phi)} + phi^T Upsilon conj(phi) <= e
struct PhiConstraint {
  CVec mu;
  CMat upsilon;
  Scalar e = 0;
};

// Quadratic-form data of one w-side constraint:
//   w^H Psi w + 2 Re{rho^H w} <= e_hat
struct WConstraint {
  CMat psi;  // block diagonal, zero blocks on cluster k's own slots
  CVec rho;
  Scalar e_hat = 0;
};

struct ConstraintCoeffs {
  std::vector<std::array<PhiConstraint, 3>> phi_part;  // per cluster
  std::vector<std::array<WConstraint, 3>> w_part;      // per cluster
};

// Coefficients of the phi-subproblem at (w, u) of `state`.
ConstraintCoeffs build_phi_coeffs(const AdmmState& state, const ChannelRealization& channels,
                                  const SystemConfig& config);
// Coefficients of the w-subproblem at (phi, u) of `state` (phi already
// updated this iteration).
ConstraintCoeffs build_w_coeffs(const AdmmState& state, const ChannelRealization& channels,
                                const SystemConfig& config);

struct SubproblemInfeasible : std::runtime_error {
  SubproblemInfeasible(char step, int iteration);
  char step;  // 'p' or 'w'
  int iteration;
};

// Proximal step: nearest phi to varphi - lambda satisfying all 3K cones.
CVec update_phi(const AdmmState& state, const ConstraintCoeffs& coeffs, const AdmmParams& params);

// Minimum-norm stacked w satisfying all 3K cones.
CVec update_w(const AdmmState& state, const ConstraintCoeffs& coeffs, const AdmmParams& params);

// Slack-penalized variant used by the infeasibility recovery policy.
CVec update_w_softened(const AdmmState& state, const ConstraintCoeffs& coeffs,
                       const AdmmParams& params);

// Closed-form maximizers of the three surrogates per cluster.
std::vector<std::array<Complex, 3>> update_u(const SystemConfig& config,
                                             const ChannelRealization& channels, const CVec& phi,
                                             const CVec& w);

// lambda + phi - varphi.
CVec update_lambda(const AdmmState& state);

// Algorithm: alternate phi (SOCP), w (SOCP), u (closed form), varphi
// (projection onto the reflection set), lambda, until
// max(||phi - varphi||, relative power change) < epsilon. The returned
// solution carries the feasible-set copy varphi with the beamformers
// re-solved once against it, so the reported iterate satisfies the audited
// constraints rather than the consensus approximation.
RunResult run_admm(const SystemConfig& config, const ChannelRealization& channels,
                   const AdmmParams& params = {});

}  // namespace irsbf
