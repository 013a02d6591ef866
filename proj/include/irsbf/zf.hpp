#pragma once

#include "irsbf/channel.hpp"
#include "irsbf/model.hpp"
#include "irsbf/result.hpp"
#include "irsbf/system.hpp"
#include "irsbf/trace.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace irsbf {

struct ZfParams {
  Scalar epsilon = 1e-3;  // relative power change between outer iterations
  int max_outer_iterations = 50;

  int fixed_point_max_iter = 2000;
  Scalar fixed_point_tol = 1e-9;  // max phase change per element

  int theta_grid_points = 1024;
  Scalar theta_refine_tol = 1e-6;

  Scalar audit_tol = 1e-4;
};

struct ZfInfeasible : std::runtime_error {
  ZfInfeasible(int cluster, const std::string& what);
  int cluster;
};

// Orthonormal basis of the null space of the other clusters' effective
// channels: U_k^H h_hat_{j,i} = 0 for all j != k. The basis spans the
// trailing singular directions; with full-rank channels its width is
// N - 2K + 2, and it widens when the stacked channel matrix is
// rank-deficient. Requires N >= 2K - 1.
CMat null_space_basis(const std::vector<std::array<CVec, 2>>& h_hat, int k);

// Reduced-space center beam meeting |h_bar^H w|^2 = tau sigma^2 with
// equality at minimum norm: sqrt(tau) sigma h_bar / ||h_bar||^2.
CVec solve_w_center(const CVec& h_bar_c, Scalar tau_c, Scalar sigma2);

enum class EdgeBeamBranch { Psd, Nsd, Indefinite };

char edge_branch_tag(EdgeBeamBranch branch);

struct EdgeBeamResult {
  CVec w;
  EdgeBeamBranch classification;  // sign pattern of b_e b_e^H - b_c b_c^H
  EdgeBeamBranch chosen;          // branch that produced w
};

// Reduced-space edge beam: minimum-norm point meeting the two quadratic
// lower bounds derived from the edge rate at both receivers. The rank-2
// difference matrix classifies which constraint set is active; the
// two-active case runs a one-dimensional phase search (grid plus
// golden-section refinement).
EdgeBeamResult solve_w_edge(const CVec& h_bar_e, const CVec& h_bar_c, const CVec& w_bar_c,
                            Scalar tau_e, Scalar sigma2, int theta_grid_points = 1024,
                            Scalar refine_tol = 1e-6);

// Data of the received-power maximization over the reflection vector:
// sum_{k,j} |phi^T varpi_{k,j} + varsigma_{k,j}|^2 as the quadratic form
// phi_tilde^H Omega phi_tilde + constant over phi_tilde = [conj(phi); 1].
struct ReflectionObjective {
  CMat omega;  // (M+1) x (M+1) Hermitian, zero lower-right entry
  std::vector<std::array<CVec, 3>> varpi;
  std::vector<std::array<Complex, 3>> varsigma;
};

ReflectionObjective reflection_objective(const ChannelRealization& channels,
                                         const std::vector<std::array<CVec, 2>>& w);

struct FixedPointResult {
  CVec phi_tilde;  // last entry normalized to 1
  int iterations = 0;
  Scalar objective = 0;
  int restarts = 0;  // diagonal shifts applied to restore monotonicity
};

// Elementwise phase-alignment iteration x <- (Omega x) ./ |Omega x|. The
// quadratic form is non-decreasing for PSD Omega; if a decrease is ever
// observed the matrix is shifted by |lambda_min| I (identical maximizer on
// the unit-modulus set) and the iteration restarts. Zero entries of
// Omega x keep their previous value.
FixedPointResult fixed_point_phi(const CMat& omega, const CVec& phi0, int max_iter, Scalar tol);

// Nearest phase-grid point per element, phases quantized to multiples of
// 2 pi / levels.
CVec quantize_phi(const CVec& phi_star, int levels);

// Alternates closed-form per-cluster beams in the interference null spaces
// with the fixed-point reflection update until the total power stabilizes.
// The returned beams are the ones designed for the returned phi.
RunResult run_zf(const SystemConfig& config, const ChannelRealization& channels,
                 const ZfParams& params = {});

}  // namespace irsbf
