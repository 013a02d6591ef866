// Consensus-ADMM solver for the joint transmit/reflect beamforming power
// minimization. The rate constraints are replaced by their auxiliary-scalar
// surrogates (quadratic in each block), which makes the phi- and w-updates
// second-order cone programs; the reflection-set copy is handled by exact
// elementwise projection and a scaled dual ascent step.

#include "irsbf/admm.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace irsbf {

RateConstraintTransform::RateConstraintTransform(const SystemConfig& config) {
  config.validate();
  tau_center.resize(config.clusters);
  tau_edge.resize(config.clusters);
  // expm1 keeps tau exact near zero rates.
  for (int k = 0; k < config.clusters; ++k) {
    tau_center[k] = std::expm1(config.rate_center[k] * std::log(Scalar(2)));
    tau_edge[k] = std::expm1(config.rate_edge[k] * std::log(Scalar(2)));
  }
}

namespace {

using EffectiveChannels = std::vector<std::array<CVec, 2>>;

CVec w_block(const SystemConfig& config, const CVec& w, int k, int i) {
  return w.segment(w_offset(config, k, i), config.bs_antennas);
}

Scalar zeta_stacked(const SystemConfig& config, const EffectiveChannels& h_hat, const CVec& w,
                    int k, int i) {
  Scalar zeta = 0;
  for (int j = 0; j < config.clusters; ++j) {
    if (j == k) continue;
    zeta += std::norm(h_hat[k][i].dot(w_block(config, w, j, kCenter))) +
            std::norm(h_hat[k][i].dot(w_block(config, w, j, kEdge)));
  }
  return zeta;
}

// (channel user index, beam target index) of constraint j in {0,1,2}.
constexpr int constraint_channel_user(int j) { return j == 1 ? kEdge : kCenter; }
constexpr int constraint_beam_user(int j) { return j == 0 ? kCenter : kEdge; }

Scalar surrogate_lhs(const SystemConfig& config, const EffectiveChannels& h_hat, int k, int j,
                     const CVec& w, Complex u) {
  const CVec& ch = h_hat[k][constraint_channel_user(j)];
  const Complex num = ch.dot(w_block(config, w, k, constraint_beam_user(j)));
  Scalar beta = config.noise_power + zeta_stacked(config, h_hat, w, k, constraint_channel_user(j));
  if (j == 1 || j == 2) beta += std::norm(ch.dot(w_block(config, w, k, kCenter)));
  return 2 * std::real(std::conj(u) * num) - std::norm(u) * beta;
}

}  // namespace

Scalar evaluate_surrogate_lhs(const SystemConfig& config, const ChannelRealization& channels,
                              int k, int j, const CVec& phi, const CVec& w, Complex u) {
  if (j < 0 || j > 2 || k < 0 || k >= config.clusters)
    throw std::out_of_range("constraint index out of range");
  return surrogate_lhs(config, effective_channels(config, channels, phi), k, j, w, u);
}

ConstraintCoeffs build_phi_coeffs(const AdmmState& state, const ChannelRealization& channels,
                                  const SystemConfig& config) {
  const int K = config.clusters;
  const Eigen::Index M = config.irs_elements;
  if (state.w.size() != Eigen::Index(2 * K) * config.bs_antennas || state.phi.size() != M)
    throw std::invalid_argument("admm state does not match the configuration");
  const RateConstraintTransform taus(config);
  const Scalar sigma2 = config.noise_power;

  // Other-cluster beam Gram matrices Sigma_k and their center-augmented
  // variants; psi collects the constant direct-link interference.
  std::vector<CMat> sigma(K, CMat::Zero(config.bs_antennas, config.bs_antennas));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      const CVec wc = w_block(config, state.w, j, kCenter);
      const CVec we = w_block(config, state.w, j, kEdge);
      sigma[k] += wc * wc.adjoint() + we * we.adjoint();
    }

  ConstraintCoeffs coeffs;
  coeffs.phi_part.resize(K);
  for (int k = 0; k < K; ++k) {
    const CVec wc = w_block(config, state.w, k, kCenter);
    std::array<Scalar, 2> psi{};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < K; ++j) {
        if (j == k) continue;
        psi[i] += std::norm(channels.h[k][i].dot(w_block(config, state.w, j, kCenter))) +
                  std::norm(channels.h[k][i].dot(w_block(config, state.w, j, kEdge)));
      }
    }
    const CMat sigma_hat = wc * wc.adjoint() + sigma[k];

    for (int j = 0; j < 3; ++j) {
      const int ch_user = constraint_channel_user(j);
      const CVec& g = channels.g[k][ch_user];
      const CVec& h = channels.h[k][ch_user];
      const CVec wt = w_block(config, state.w, k, constraint_beam_user(j));
      const Complex u = state.u[k][j];
      const Scalar u2 = std::norm(u);
      const CMat b_kj = g.conjugate().asDiagonal() * channels.H;  // G_{k,i} H
      const CMat& gram = (j == 0) ? sigma[k] : sigma_hat;
      const Scalar psi_const = (j == 0) ? psi[kCenter]
                                        : psi[ch_user] + std::norm(h.dot(wc));

      PhiConstraint& pc = coeffs.phi_part[k][j];
      pc.mu = u2 * (b_kj * (gram * h)) - std::conj(u) * (b_kj * wt);
      pc.upsilon = u2 * (b_kj * gram * b_kj.adjoint());
      pc.e = 2 * std::real(std::conj(u) * h.dot(wt)) - taus.tau(k, j) - u2 * (sigma2 + psi_const);
    }
  }
  return coeffs;
}

ConstraintCoeffs build_w_coeffs(const AdmmState& state, const ChannelRealization& channels,
                                const SystemConfig& config) {
  const int K = config.clusters;
  const int N = config.bs_antennas;
  const RateConstraintTransform taus(config);
  const EffectiveChannels h_hat = effective_channels(config, channels, state.phi);

  ConstraintCoeffs coeffs;
  coeffs.w_part.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < 3; ++j) {
      const CVec& ch = h_hat[k][constraint_channel_user(j)];
      const Complex u = state.u[k][j];
      const Scalar u2 = std::norm(u);
      const CMat v = ch * ch.adjoint();

      WConstraint& wc = coeffs.w_part[k][j];
      wc.psi = CMat::Zero(Eigen::Index(2 * K) * N, Eigen::Index(2 * K) * N);
      for (int slot = 0; slot < 2 * K; ++slot) {
        const bool own_center = slot == 2 * k;
        const bool own_edge = slot == 2 * k + 1;
        // The decoded beam slot never interferes with itself; for j = 0 the
        // center beam is the numerator term, for j in {1,2} it sits in the
        // denominator and keeps its block.
        const bool zero_block = (j == 0) ? (own_center || own_edge) : own_edge;
        if (!zero_block)
          wc.psi.block(Eigen::Index(slot) * N, Eigen::Index(slot) * N, N, N) = u2 * v;
      }
      wc.rho = CVec::Zero(Eigen::Index(2 * K) * N);
      wc.rho.segment(w_offset(config, k, constraint_beam_user(j)), N) = -u * ch;
      wc.e_hat = -taus.tau(k, j) - u2 * config.noise_power;
    }
  }
  return coeffs;
}

SubproblemInfeasible::SubproblemInfeasible(char step_, int iteration_)
    : std::runtime_error(std::string("admm subproblem infeasible at step '") + step_ +
                         "', iteration " + std::to_string(iteration_)),
      step(step_),
      iteration(iteration_) {}

namespace {

// Hyperbolic rewriting of q(x) <= e with q(x) = ||Sx||^2 + 2 p.x:
//   || [S x; (1-e)/2 + p.x] || <= (1+e)/2 - p.x
// A constraint whose quadratic data vanishes reads 0 <= e: vacuous when
// e >= 0 (dropped, keeping the remaining cones strictly feasible) and
// structurally infeasible otherwise (kept as the ray constraint e >= 0 so
// the solver produces the certificate).
void append_quadratic_cone(std::vector<SocCone>& cones, const MatX& lift, const VecX& p,
                           Scalar e) {
  const Eigen::Index rows = lift.rows(), n = lift.cols();
  if (lift.isZero(0) && p.isZero(0)) {
    if (e >= 0) return;
    SocCone ray;
    ray.A.resize(0, n);
    ray.b.resize(0);
    ray.c = VecX::Zero(n);
    ray.d = e;
    cones.push_back(std::move(ray));
    return;
  }
  SocCone cone;
  cone.A.resize(rows + 1, n);
  cone.A.topRows(rows) = lift;
  cone.A.row(rows) = p.transpose();
  cone.b = VecX::Zero(rows + 1);
  cone.b[rows] = (1 - e) / 2;
  cone.c = -p;
  cone.d = (1 + e) / 2;
  cones.push_back(std::move(cone));
}

std::vector<SocCone> phi_cones(const ConstraintCoeffs& coeffs) {
  std::vector<SocCone> cones;
  for (const auto& cluster : coeffs.phi_part)
    for (const auto& pc : cluster) {
      const CMat root = psd_sqrt(pc.upsilon);
      VecX p(2 * pc.mu.size());
      p.head(pc.mu.size()) = pc.mu.real();
      p.tail(pc.mu.size()) = -pc.mu.imag();
      append_quadratic_cone(cones, realify_matrix_conj(root), p, pc.e);
    }
  return cones;
}

// The minimum-power beams can be many orders of magnitude above unity
// (amplitude path loss squared), which starves the interior-point method of
// precision. The subproblem is solved in w = scale * x with scale chosen so
// the linear terms can reach their bounds near ||x|| = 1.
Scalar w_variable_scale(const ConstraintCoeffs& coeffs) {
  Scalar scale = 1;
  for (const auto& cluster : coeffs.w_part)
    for (const auto& wc : cluster) {
      const Scalar rho_norm = wc.rho.norm();
      if (rho_norm > 0) scale = std::max(scale, std::abs(wc.e_hat) / (2 * rho_norm));
    }
  return scale;
}

std::vector<SocCone> w_cones(const ConstraintCoeffs& coeffs, int clusters, int antennas,
                             Scalar scale) {
  std::vector<SocCone> cones;
  const Eigen::Index dim = Eigen::Index(2 * clusters) * antennas;
  for (const auto& cluster : coeffs.w_part)
    for (const auto& wc : cluster) {
      CMat root = CMat::Zero(dim, dim);
      for (int slot = 0; slot < 2 * clusters; ++slot) {
        const auto block = wc.psi.block(Eigen::Index(slot) * antennas, Eigen::Index(slot) * antennas,
                                        antennas, antennas);
        if (block.cwiseAbs().maxCoeff() > 0)
          root.block(Eigen::Index(slot) * antennas, Eigen::Index(slot) * antennas, antennas,
                     antennas) = psd_sqrt(block);
      }
      append_quadratic_cone(cones, scale * realify_matrix(root),
                            scale * complex_to_real(wc.rho), wc.e_hat);
    }
  return cones;
}

CVec solve_socp_or_throw(const SocpProblem& problem, const AdmmParams& params, char step,
                         int iteration) {
  const SocpSolution sol = solve(problem, params.subproblem_tol, params.subproblem_max_iter);
  if (sol.status == SolveStatus::Infeasible) throw SubproblemInfeasible(step, iteration);
  if (sol.status != SolveStatus::Optimal) {
    // A stall at the floating-point floor still yields a usable step when
    // the iterate is near-optimal and keeps every cone; the outer loop only
    // needs subproblem accuracy well below its own precision.
    const bool near_optimal = sol.status == SolveStatus::MaxIterations &&
                              sol.x.size() == problem.dim() && sol.kkt.primal <= 1e-6 &&
                              sol.kkt.dual <= 1e-6 && sol.kkt.gap <= 1e-5;
    bool cones_ok = near_optimal;
    if (near_optimal)
      for (const auto& cone : problem.cones)
        if (cone_slack(cone, sol.x) < -1e-6) {
          cones_ok = false;
          break;
        }
    if (!cones_ok) throw std::runtime_error("conic solver failed in the admm inner step");
  }
  return real_to_complex(sol.x);
}

}  // namespace

CVec update_phi(const AdmmState& state, const ConstraintCoeffs& coeffs, const AdmmParams& params) {
  SocpProblem problem;
  problem.target = complex_to_real(CVec(state.varphi - state.lambda));
  problem.cones = phi_cones(coeffs);

  // The proximal point of a feasible target is the target itself; common at
  // consensus, where the solve would otherwise grind on a zero objective.
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  for (const auto& cone : problem.cones)
    worst = std::min(worst, cone_slack(cone, problem.target));
  if (worst >= -1e-9) return real_to_complex(problem.target);

  return solve_socp_or_throw(problem, params, 'p', state.iteration);
}

CVec update_w(const AdmmState& state, const ConstraintCoeffs& coeffs, const AdmmParams& params) {
  const int clusters = static_cast<int>(coeffs.w_part.size());
  const Eigen::Index dim = coeffs.w_part.at(0)[0].rho.size();
  const int antennas = static_cast<int>(dim) / (2 * clusters);
  Scalar scale = w_variable_scale(coeffs);

  SocpProblem problem;
  problem.target = VecX::Zero(2 * dim);
  problem.cones = w_cones(coeffs, clusters, antennas, scale);

  // Pilot solve at loose precision to measure the true solution magnitude,
  // then the precise solve on O(1) variables.
  const SocpSolution pilot = solve(problem, 1e-3, 60);
  if (pilot.status == SolveStatus::Infeasible) throw SubproblemInfeasible('w', state.iteration);
  if (pilot.x.size() == 2 * dim) {
    const Scalar norm = pilot.x.norm();
    if (std::isfinite(norm) && norm > 0) {
      scale *= std::max<Scalar>(norm, 0.05);
      problem.cones = w_cones(coeffs, clusters, antennas, scale);
    }
  }
  return scale * solve_socp_or_throw(problem, params, 'w', state.iteration);
}

CVec update_w_softened(const AdmmState& state, const ConstraintCoeffs& coeffs,
                       const AdmmParams& params) {
  (void)state;
  const int clusters = static_cast<int>(coeffs.w_part.size());
  const Eigen::Index nw = 2 * coeffs.w_part.at(0)[0].rho.size();  // realified beam variables
  const int N = static_cast<int>(nw) / (4 * clusters);
  const Scalar scale = w_variable_scale(coeffs);
  std::vector<SocCone> base = w_cones(coeffs, clusters, N, scale);
  const Eigen::Index n_slack = static_cast<Eigen::Index>(base.size());
  const Eigen::Index dim = nw + 1 + n_slack;  // [w; t; slacks]

  ConicProgram program;
  program.f = VecX::Zero(dim);
  program.f[nw] = 1;
  program.f.tail(n_slack).setConstant(params.infeasible_slack_penalty);

  SocCone epigraph;
  epigraph.A.setZero(nw, dim);
  epigraph.A.leftCols(nw).setIdentity();
  epigraph.b = VecX::Zero(nw);
  epigraph.c = VecX::Zero(dim);
  epigraph.c[nw] = 1;
  program.cones.push_back(std::move(epigraph));

  for (Eigen::Index i = 0; i < n_slack; ++i) {
    // Relaxing e -> e + s turns the hyperbolic rows into affine functions of
    // the slack as well.
    const SocCone& src = base[static_cast<std::size_t>(i)];
    SocCone cone;
    cone.A.setZero(src.A.rows(), dim);
    cone.A.leftCols(nw) = src.A;
    cone.A(src.A.rows() - 1, nw + 1 + i) = -0.5;
    cone.b = src.b;
    cone.c = VecX::Zero(dim);
    cone.c.head(nw) = src.c;
    cone.c[nw + 1 + i] = 0.5;
    cone.d = src.d;
    program.cones.push_back(std::move(cone));

    SocCone nonneg;
    nonneg.A.resize(0, dim);
    nonneg.b.resize(0);
    nonneg.c = VecX::Zero(dim);
    nonneg.c[nw + 1 + i] = 1;
    nonneg.d = 0;
    program.cones.push_back(std::move(nonneg));
  }

  const SocpSolution sol = solve_conic(program, params.subproblem_tol, params.subproblem_max_iter);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("slack-penalized w step failed");
  return scale * real_to_complex(VecX(sol.x.head(nw)));
}

std::vector<std::array<Complex, 3>> update_u(const SystemConfig& config,
                                             const ChannelRealization& channels, const CVec& phi,
                                             const CVec& w) {
  const EffectiveChannels h_hat = effective_channels(config, channels, phi);
  std::vector<std::array<Complex, 3>> u(config.clusters);
  for (int k = 0; k < config.clusters; ++k) {
    const CVec wc = w_block(config, w, k, kCenter);
    const CVec we = w_block(config, w, k, kEdge);
    const Scalar zc = zeta_stacked(config, h_hat, w, k, kCenter);
    const Scalar ze = zeta_stacked(config, h_hat, w, k, kEdge);
    const CVec& hc = h_hat[k][kCenter];
    const CVec& he = h_hat[k][kEdge];
    u[k][0] = hc.dot(wc) / (config.noise_power + zc);
    u[k][1] = he.dot(we) / (config.noise_power + std::norm(he.dot(wc)) + ze);
    u[k][2] = hc.dot(we) / (config.noise_power + std::norm(hc.dot(wc)) + zc);
  }
  return u;
}

CVec update_lambda(const AdmmState& state) { return state.lambda + state.phi - state.varphi; }

namespace {

Scalar min_surrogate_slack(const SystemConfig& config, const EffectiveChannels& h_hat,
                           const RateConstraintTransform& taus, const CVec& w,
                           const std::vector<std::array<Complex, 3>>& u) {
  Scalar worst = std::numeric_limits<Scalar>::infinity();
  for (int k = 0; k < config.clusters; ++k)
    for (int j = 0; j < 3; ++j)
      worst = std::min(worst, surrogate_lhs(config, h_hat, k, j, w, u[k][j]) - taus.tau(k, j));
  return worst;
}

// Matched-filter beams scaled to hit the single-user SNR targets; the seed
// for the initial u.
CVec matched_filter_w(const SystemConfig& config, const EffectiveChannels& h_hat,
                      const RateConstraintTransform& taus) {
  CVec w = CVec::Zero(Eigen::Index(2 * config.clusters) * config.bs_antennas);
  for (int k = 0; k < config.clusters; ++k)
    for (int i = 0; i < 2; ++i) {
      const CVec& ch = h_hat[k][i];
      const Scalar nrm2 = ch.squaredNorm();
      if (nrm2 <= 0) continue;
      const Scalar tau = (i == kCenter) ? taus.tau_center[k] : taus.tau_edge[k];
      w.segment(w_offset(config, k, i), config.bs_antennas) =
          std::sqrt(tau * config.noise_power / nrm2) * ch / std::sqrt(nrm2);
    }
  return w;
}

}  // namespace

RunResult run_admm(const SystemConfig& config, const ChannelRealization& channels,
                   const AdmmParams& params) {
  config.validate();
  params.validate();
  const RateConstraintTransform taus(config);
  const int K = config.clusters;
  const Eigen::Index M = config.irs_elements;
  const bool irs = config.irs_enabled;
  const auto t0 = std::chrono::steady_clock::now();
  auto wall_ms = [&t0] {
    return std::chrono::duration<Scalar, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  RunResult result;
  AdmmState state;
  state.phi = irs ? CVec::Ones(M) : CVec();
  state.varphi = state.phi;
  state.lambda = irs ? CVec::Zero(M) : CVec();
  state.w = CVec::Zero(Eigen::Index(2 * K) * config.bs_antennas);

  auto record = [&](Scalar power, Scalar consensus) {
    TraceRow row;
    row.iteration = state.iteration;
    row.total_power_w = power;
    if (irs) row.consensus_residual = consensus;
    row.min_slack = min_surrogate_slack(config, effective_channels(config, channels, state.phi),
                                        taus, state.w, state.u);
    row.wall_ms = wall_ms();
    result.trace.rows.push_back(std::move(row));
  };

  auto fail = [&](const char* note) {
    result.trace.note = note;
    result.status = RunStatus::Failed;
    result.iterations = state.iteration;
    result.solution.phi = irs ? state.varphi : CVec();
    result.solution.w.assign(K, {CVec::Zero(config.bs_antennas), CVec::Zero(config.bs_antennas)});
    return result;
  };

  // Initialization: u seeded from matched filters, then one w solve and the
  // closed-form u at that w.
  try {
    state.u = update_u(config, channels, state.phi,
                       matched_filter_w(config, effective_channels(config, channels, state.phi),
                                        taus));
    const ConstraintCoeffs coeffs = build_w_coeffs(state, channels, config);
    try {
      state.w = update_w(state, coeffs, params);
    } catch (const SubproblemInfeasible&) {
      state.w = update_w_softened(state, coeffs, params);
    }
    state.u = update_u(config, channels, state.phi, state.w);
  } catch (const std::runtime_error&) {
    return fail("initialization failed");
  }

  Scalar prev_power = state.w.squaredNorm();
  record(prev_power, irs ? (state.phi - state.varphi).norm() : 0);

  bool converged = false;
  int consecutive_infeasible = 0;
  for (int v = 1; v <= params.max_outer_iterations; ++v) {
    state.iteration = v;
    bool clean = true;
    try {
      if (irs) state.phi = update_phi(state, build_phi_coeffs(state, channels, config), params);
      const ConstraintCoeffs coeffs = build_w_coeffs(state, channels, config);
      try {
        state.w = update_w(state, coeffs, params);
      } catch (const SubproblemInfeasible&) {
        clean = false;
        if (++consecutive_infeasible >= 2) return fail("repeated infeasible w subproblem");
        state.w = update_w_softened(state, coeffs, params);
      }
      state.u = update_u(config, channels, state.phi, state.w);
    } catch (const SubproblemInfeasible&) {
      // Infeasible phi step: restore surrogate feasibility through a relaxed
      // w solve at the unchanged phi, then continue.
      clean = false;
      if (++consecutive_infeasible >= 2) return fail("repeated infeasible subproblem");
      try {
        state.w = update_w_softened(state, build_w_coeffs(state, channels, config), params);
        state.u = update_u(config, channels, state.phi, state.w);
      } catch (const std::runtime_error&) {
        return fail("infeasibility recovery failed");
      }
    } catch (const std::runtime_error&) {
      return fail("conic solver failure");
    }
    if (clean) consecutive_infeasible = 0;

    Scalar consensus = 0;
    if (irs) {
      state.varphi = project_reflection(CVec(state.phi + state.lambda), config.reflection_case);
      state.lambda = update_lambda(state);
      consensus = (state.phi - state.varphi).norm();
    }
    const Scalar power = state.w.squaredNorm();
    const Scalar power_change = std::abs(power - prev_power) / std::max<Scalar>(prev_power, 1);
    record(power, consensus);
    prev_power = power;
    if (std::max(irs ? consensus : 0, power_change) < params.epsilon) {
      converged = true;
      break;
    }
  }

  // Final iterate: report the feasible-set copy and re-solve the beams once
  // against it, so the audited constraints hold at the returned pair.
  if (irs) {
    state.phi = state.varphi;
    state.u = update_u(config, channels, state.phi, state.w);
    const ConstraintCoeffs coeffs = build_w_coeffs(state, channels, config);
    try {
      state.w = update_w(state, coeffs, params);
    } catch (const SubproblemInfeasible&) {
      try {
        state.w = update_w_softened(state, coeffs, params);
      } catch (const std::runtime_error&) {
        return fail("final polish failed");
      }
    } catch (const std::runtime_error&) {
      return fail("final polish failed");
    }
  }

  result.solution.phi = irs ? state.varphi : CVec();
  result.solution.w.resize(K);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < 2; ++i) result.solution.w[k][i] = w_block(config, state.w, k, i);
  finalize_solution(config, channels, result.solution);
  result.iterations = state.iteration;

  const FeasibilityReport report = audit(config, channels, result.solution, params.audit_tol);
  result.status = (converged && report.feasible) ? RunStatus::Converged : RunStatus::NotConverged;
  return result;
}

}  // namespace irsbf
