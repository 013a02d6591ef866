#pragma once

#include "irsbf/types.hpp"

#include <stdexcept>

namespace irsbf {

// Feasible set of the reflection coefficients, per element:
//   BoxModulus:    |phi_m| <= 1, free phase        (continuous amplitude + phase)
//   UnitModulus:   |phi_m| = 1, free phase
//   DiscretePhase: |phi_m| = 1, phase on a uniform grid of `levels` points
struct ReflectionCase {
  enum class Kind { BoxModulus, UnitModulus, DiscretePhase };

  Kind kind = Kind::UnitModulus;
  int levels = 2;  // DiscretePhase only

  static ReflectionCase box() { return {Kind::BoxModulus, 0}; }
  static ReflectionCase unit_modulus() { return {Kind::UnitModulus, 0}; }
  static ReflectionCase discrete(int levels) {
    if (levels < 2) throw std::invalid_argument("DiscretePhase needs at least 2 levels");
    return {Kind::DiscretePhase, levels};
  }
};

// Static description of one downlink instance: a 2K-user network with K
// clusters of one central and one cell-edge user each.
struct SystemConfig {
  int bs_antennas = 8;    // N
  int irs_elements = 30;  // M
  int clusters = 3;       // K

  Scalar noise_power = 1e-11;  // sigma^2 [W]
  VecX rate_center;            // r_{k,c} [bit/s/Hz], size K
  VecX rate_edge;              // r_{k,e} [bit/s/Hz], size K

  ReflectionCase reflection_case = ReflectionCase::unit_modulus();
  bool irs_enabled = true;  // false: reflected path removed entirely

  void set_uniform_rates(Scalar rc, Scalar re) {
    rate_center = VecX::Constant(clusters, rc);
    rate_edge = VecX::Constant(clusters, re);
  }

  void validate() const {
    if (bs_antennas < 1 || irs_elements < 1 || clusters < 1)
      throw std::invalid_argument("system dimensions must be positive");
    if (!(noise_power > 0)) throw std::invalid_argument("noise power must be positive");
    if (rate_center.size() != clusters || rate_edge.size() != clusters)
      throw std::invalid_argument("rate target vectors must have one entry per cluster");
    if ((rate_center.array() < 0).any() || (rate_edge.array() < 0).any())
      throw std::invalid_argument("rate targets must be nonnegative");
    if (reflection_case.kind == ReflectionCase::Kind::DiscretePhase && reflection_case.levels < 2)
      throw std::invalid_argument("DiscretePhase needs at least 2 levels");
  }
};

}  // namespace irsbf
