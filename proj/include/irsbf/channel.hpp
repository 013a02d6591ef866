#pragma once

#include "irsbf/rng.hpp"
#include "irsbf/system.hpp"
#include "irsbf/types.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace irsbf {

inline constexpr int kCenter = 0;
inline constexpr int kEdge = 1;

// Distance-dependent amplitude prefactor C0 * d^-alpha applied to the
// unit-variance small-scale fading. Note this is an amplitude (not power)
// multiplier: the per-entry received power scales with its square.
struct PathLossSpec {
  Scalar reference_gain = 1e-3;  // C0, linear gain at 1 m
  Scalar distance = 1;           // [m]
  Scalar exponent = 2.5;
};

Scalar pathloss_gain(const PathLossSpec& spec);

// Within-cluster correlation of the small-scale fading between the central
// and cell-edge user of a cluster; clusters are mutually uncorrelated.
struct CorrelationSpec {
  Scalar rho_direct = 0.9;   // corr(h_{k,c}, h_{k,e})
  Scalar rho_reflect = 0.9;  // corr(g_{k,c}, g_{k,e})
};

// Path-loss geometry for every link class. The same distances apply to all
// clusters; index [kCenter]/[kEdge] distinguishes the two users of a cluster.
struct ChannelGeometry {
  PathLossSpec bs_irs;                      // H
  std::array<PathLossSpec, 2> irs_user;     // g_{k,i}
  std::array<PathLossSpec, 2> bs_user;      // h_{k,i}
  CorrelationSpec correlation;

  // K = 3 network of the reference experiments: C0 = -30 dB, BS-IRS 30 m at
  // exponent 2.5, IRS-user 50/70 m at 2.5, BS-user 50/80 m at 3.5.
  static ChannelGeometry defaults();
};

// One Monte Carlo draw of all links.
struct ChannelRealization {
  CMat H;                                // M x N, BS -> IRS
  std::vector<std::array<CVec, 2>> g;    // per cluster, M, IRS -> user
  std::vector<std::array<CVec, 2>> h;    // per cluster, N, BS -> user

  int clusters() const { return static_cast<int>(h.size()); }
};

// Two length-n vectors of i.i.d. CN(0,1) entries with elementwise
// correlation coefficient rho: b = rho * a + sqrt(1 - rho^2) * e.
std::pair<CVec, CVec> correlated_gaussian_pair(Eigen::Index length, Scalar rho, GaussianStream& rng);

// Draws one realization. Deterministic in (config, geometry, seed).
//
// Stream-splitting rule: every link has its own substream derived from the
// master seed, so enlarging K leaves the draws of existing clusters
// untouched. Stream ids: 0 = H; cluster k >= 0 uses 1+4k .. 4+4k for
// {h base, h innovation, g base, g innovation}. Within a stream the draws
// are indexed by entry position (H by (row, col)), so growing M or N
// extends a realization rather than re-dealing it; dimension sweeps stay
// seed-paired.
ChannelRealization generate(const SystemConfig& config, const ChannelGeometry& geometry,
                            std::uint64_t seed);
ChannelRealization generate(const SystemConfig& config, std::uint64_t seed);

// Columnar text fixture format: one complex entry per cell, rendered as
// "re+imj" (17 significant digits), cells separated by a single space.
// Layout: a header line "channels K <K> N <N> M <M>", then block "H" with M
// rows, then per cluster blocks "h <k> c|e" and "g <k> c|e" of one row each.
void write_channels(std::ostream& os, const ChannelRealization& ch);
ChannelRealization read_channels(std::istream& is);

}  // namespace irsbf
