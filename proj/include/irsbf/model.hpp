#pragma once

#include "irsbf/channel.hpp"
#include "irsbf/system.hpp"
#include "irsbf/types.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace irsbf {

// Joint design output: per-user transmit beamformers and the reflection
// coefficient vector, with derived power and achieved rates.
struct BeamformingSolution {
  std::vector<std::array<CVec, 2>> w;  // per cluster [center, edge], length N each
  CVec phi;                            // length M; ignored when irs is disabled

  Scalar total_power = 0;                    // sum of ||w||^2 [W]
  std::vector<std::array<Scalar, 2>> rates;  // achieved [bit/s/Hz]
};

Scalar total_power(const BeamformingSolution& solution);

// Composite channel h_hat = (g^H Phi H + h^H)^H for one user. An empty phi
// (size 0) drops the reflected path entirely.
CVec effective_channel(const CVec& phi, const CMat& H, const CVec& g, const CVec& h);

// All 2K effective channels under `config` (honors irs_enabled).
std::vector<std::array<CVec, 2>> effective_channels(const SystemConfig& config,
                                                    const ChannelRealization& channels,
                                                    const CVec& phi);

// Inter-cluster interference power received by user (k, i).
Scalar interference_zeta(const SystemConfig& config, const ChannelRealization& channels,
                         const BeamformingSolution& solution, int k, int i);

// SINR of the edge user decoding its own symbol.
Scalar sinr_edge(const SystemConfig& config, const ChannelRealization& channels,
                 const BeamformingSolution& solution, int k);
// SINR of the central user decoding the edge user's symbol (SIC stage).
Scalar sinr_center_decoding_edge(const SystemConfig& config, const ChannelRealization& channels,
                                 const BeamformingSolution& solution, int k);
// SINR of the central user decoding its own symbol after perfect SIC.
Scalar sinr_center(const SystemConfig& config, const ChannelRealization& channels,
                   const BeamformingSolution& solution, int k);

// Nearest point of the configured reflection feasible set, elementwise.
// BoxModulus keeps interior points and radially projects the rest;
// UnitModulus keeps the phase; DiscretePhase additionally snaps the phase to
// the nearest of the `levels` grid points (ties rounded away from zero on
// the level index). A zero entry maps to 1 under the unit-modulus cases.
CVec project_reflection(const CVec& z, const ReflectionCase& reflection);

// Distance-to-set membership slack for one reflection coefficient: positive
// inside the box case, 0/-distance otherwise. Feasible iff >= -tol.
Scalar membership_slack(Complex phi_m, const ReflectionCase& reflection);

struct FeasibilityReport {
  VecX center_rate_slack;  // per cluster, achieved - target [bit/s/Hz]
  VecX edge_rate_slack;    // per cluster, uses min of the two edge-symbol SINRs
  VecX reflect_slack;      // per element; empty when irs is disabled
  Scalar tolerance = 1e-4;
  bool feasible = false;

  Scalar min_slack() const;
  // One header line and one data row, same value rendering as the sim CSVs.
  void to_csv(std::ostream& os) const;
};

// Constraint audit of a candidate solution; rate slacks in bit/s/Hz,
// reflection membership in modulus distance.
FeasibilityReport audit(const SystemConfig& config, const ChannelRealization& channels,
                        const BeamformingSolution& solution, Scalar tol = 1e-4);

// Fills total_power and rates from the model.
void finalize_solution(const SystemConfig& config, const ChannelRealization& channels,
                       BeamformingSolution& solution);

}  // namespace irsbf
