// Zero-forcing joint design: per-cluster beams restricted to the null space
// of every other cluster's effective channels (closed form per cluster),
// alternated with a fixed-point phase-alignment update of the reflection
// vector that maximizes the sum received signal power.

#include "irsbf/zf.hpp"

#include "irsbf/admm.hpp"  // RateConstraintTransform

#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>

namespace irsbf {

ZfInfeasible::ZfInfeasible(int cluster_, const std::string& what_)
    : std::runtime_error(what_), cluster(cluster_) {}

char edge_branch_tag(EdgeBeamBranch branch) {
  switch (branch) {
    case EdgeBeamBranch::Psd: return 'P';
    case EdgeBeamBranch::Nsd: return 'N';
    case EdgeBeamBranch::Indefinite: return 'I';
  }
  return '?';
}

CMat null_space_basis(const std::vector<std::array<CVec, 2>>& h_hat, int k) {
  const int K = static_cast<int>(h_hat.size());
  if (k < 0 || k >= K) throw std::out_of_range("cluster index out of range");
  const Eigen::Index n = h_hat[0][0].size();
  if (n < 2 * K - 1)
    throw std::invalid_argument("null_space_basis: needs at least 2K-1 antennas");
  if (K == 1) return CMat::Identity(n, n);

  CMat stacked(n, 2 * (K - 1));
  Eigen::Index col = 0;
  for (int j = 0; j < K; ++j) {
    if (j == k) continue;
    stacked.col(col++) = h_hat[j][kEdge];
    stacked.col(col++) = h_hat[j][kCenter];
  }

  Eigen::JacobiSVD<CMat> svd(stacked, Eigen::ComputeFullU);
  const VecX sv = svd.singularValues();
  const Scalar cutoff = (sv.size() ? sv[0] : Scalar(0)) * 1e-10;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  return svd.matrixU().rightCols(n - rank);
}

CVec solve_w_center(const CVec& h_bar_c, Scalar tau_c, Scalar sigma2) {
  if (tau_c == 0) return CVec::Zero(h_bar_c.size());
  const Scalar nrm2 = h_bar_c.squaredNorm();
  if (!(nrm2 > 0)) throw ZfInfeasible(-1, "center user unreachable after nulling");
  return std::sqrt(tau_c * sigma2) / nrm2 * h_bar_c;
}

namespace {

struct ThetaObjective {
  // f(theta) of the two-active combining formula and the search objective
  // |E + (b_e^H b_c) f(theta)|^2.
  Scalar E, C;
  Complex c_ce;  // b_c^H b_e

  Complex f(Scalar theta) const {
    const Complex rot = std::polar(Scalar(1), theta);
    const Complex den = rot * C - std::conj(c_ce);
    if (std::abs(den) < 1e-300) return {std::numeric_limits<Scalar>::infinity(), 0};
    return (E - rot * c_ce) / den;
  }

  Scalar value(Scalar theta) const {
    const Complex ft = f(theta);
    if (!std::isfinite(ft.real()) || !std::isfinite(ft.imag())) return -1;
    return std::norm(E + std::conj(c_ce) * ft);
  }
};

Scalar golden_section_max(const ThetaObjective& obj, Scalar lo, Scalar hi, Scalar tol) {
  const Scalar inv_phi = (std::sqrt(Scalar(5)) - 1) / 2;
  Scalar a = lo, b = hi;
  Scalar x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  Scalar f1 = obj.value(x1), f2 = obj.value(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = obj.value(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = obj.value(x1);
    }
  }
  return (a + b) / 2;
}

}  // namespace

EdgeBeamResult solve_w_edge(const CVec& h_bar_e, const CVec& h_bar_c, const CVec& w_bar_c,
                            Scalar tau_e, Scalar sigma2, int theta_grid_points,
                            Scalar refine_tol) {
  EdgeBeamResult result;
  if (tau_e == 0) {
    result.w = CVec::Zero(h_bar_e.size());
    result.classification = result.chosen = EdgeBeamBranch::Psd;
    return result;
  }
  const CVec b_e =
      h_bar_e / std::sqrt(tau_e * (sigma2 + std::norm(h_bar_e.dot(w_bar_c))));
  const CVec b_c =
      h_bar_c / std::sqrt(tau_e * (sigma2 + std::norm(h_bar_c.dot(w_bar_c))));
  const Scalar E = b_e.squaredNorm(), C = b_c.squaredNorm();
  if (!(E > 0) || !(C > 0)) throw ZfInfeasible(-1, "edge user unreachable after nulling");

  // Classification of b_e b_e^H - b_c b_c^H on its two-dimensional column
  // space: express b_c against the orthonormal pair (b_e/||b_e||, residual).
  const CVec q1 = b_e / std::sqrt(E);
  const Complex r = q1.dot(b_c);
  const Scalar gamma = std::sqrt(std::max<Scalar>(0, C - std::norm(r)));
  Eigen::Matrix2cd d2;
  d2(0, 0) = E - std::norm(r);
  d2(0, 1) = -r * gamma;
  d2(1, 0) = -std::conj(r) * gamma;
  d2(1, 1) = -gamma * gamma;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(d2);
  const Scalar thr = 1e-10 * (E + C);
  const Scalar lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
  if (lo >= -thr)
    result.classification = EdgeBeamBranch::Psd;
  else if (hi <= thr)
    result.classification = EdgeBeamBranch::Nsd;
  else
    result.classification = EdgeBeamBranch::Indefinite;

  const Complex c_ec = b_e.dot(b_c);  // b_e^H b_c
  constexpr Scalar kFeas = 1 - 1e-9;

  // Candidate beams: each single constraint active at minimum norm, plus the
  // two-active combining direction. The smallest feasible one is optimal.
  Scalar best_norm2 = std::numeric_limits<Scalar>::infinity();
  auto consider = [&](const CVec& w, EdgeBeamBranch branch) {
    if (std::norm(b_e.dot(w)) < kFeas || std::norm(b_c.dot(w)) < kFeas) return;
    const Scalar n2 = w.squaredNorm();
    if (n2 < best_norm2) {
      best_norm2 = n2;
      result.w = w;
      result.chosen = branch;
    }
  };

  consider(b_c / C, EdgeBeamBranch::Psd);
  consider(b_e / E, EdgeBeamBranch::Nsd);

  const Scalar gram_det = E * C - std::norm(c_ec);
  if (gram_det > 1e-12 * E * C) {
    const ThetaObjective obj{E, C, std::conj(c_ec)};
    const int points = std::max(8, theta_grid_points);
    Scalar best_theta = 0, best_val = -1;
    for (int i = 0; i < points; ++i) {
      const Scalar theta = 2 * kPi * i / points;
      const Scalar val = obj.value(theta);
      if (val > best_val) {
        best_val = val;
        best_theta = theta;
      }
    }
    const Scalar step = 2 * kPi / points;
    const Scalar theta =
        golden_section_max(obj, best_theta - step, best_theta + step, refine_tol);
    const CVec d = b_e + obj.f(theta) * b_c;
    const Scalar binding = std::min(std::abs(b_e.dot(d)), std::abs(b_c.dot(d)));
    if (binding > 0) consider(d / binding, EdgeBeamBranch::Indefinite);
  }

  if (!std::isfinite(best_norm2)) throw ZfInfeasible(-1, "no feasible edge beam candidate");
  return result;
}

ReflectionObjective reflection_objective(const ChannelRealization& channels,
                                         const std::vector<std::array<CVec, 2>>& w) {
  const int K = static_cast<int>(w.size());
  const Eigen::Index m = channels.H.rows();
  ReflectionObjective out;
  out.omega = CMat::Zero(m + 1, m + 1);
  out.varpi.resize(K);
  out.varsigma.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < 3; ++j) {
      const int user = (j == 1) ? kEdge : kCenter;
      const CVec& beam = w[k][(j == 0) ? kCenter : kEdge];
      const CVec varpi = channels.g[k][user].conjugate().cwiseProduct(channels.H * beam);
      const Complex varsigma = channels.h[k][user].dot(beam);
      out.varpi[k][j] = varpi;
      out.varsigma[k][j] = varsigma;
      out.omega.topLeftCorner(m, m) += varpi * varpi.adjoint();
      out.omega.block(0, m, m, 1) += varpi * std::conj(varsigma);
      out.omega.block(m, 0, 1, m) += varsigma * varpi.adjoint();
    }
  }
  return out;
}

namespace {

CVec unit_modulus_or_one(const CVec& v) {
  CVec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Scalar mag = std::abs(v[i]);
    out[i] = mag > 0 ? v[i] / mag : Complex(1, 0);
  }
  return out;
}

}  // namespace

FixedPointResult fixed_point_phi(const CMat& omega, const CVec& phi0, int max_iter, Scalar tol) {
  if (omega.rows() != omega.cols() || omega.rows() != phi0.size())
    throw std::invalid_argument("fixed_point_phi: dimension mismatch");
  FixedPointResult result;
  CMat work = omega;
  CVec x = unit_modulus_or_one(phi0);
  Scalar obj = std::real(x.dot(work * x));

  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    const CVec y = work * x;
    CVec next(x.size());
    Scalar phase_change = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Scalar mag = std::abs(y[i]);
      next[i] = mag > 0 ? y[i] / mag : x[i];
      phase_change = std::max(phase_change, std::abs(std::arg(next[i] * std::conj(x[i]))));
    }
    const Scalar next_obj = std::real(next.dot(work * next));
    if (next_obj < obj - 1e-9 * std::max<Scalar>(1, std::abs(obj)) && result.restarts == 0) {
      // A decrease means the matrix is not PSD; shift the diagonal (constant
      // offset on the unit-modulus set) and restart.
      const Eigen::SelfAdjointEigenSolver<CMat> es(work);
      const Scalar shift = std::max<Scalar>(0, -es.eigenvalues().minCoeff());
      work.diagonal().array() += shift;
      ++result.restarts;
      x = unit_modulus_or_one(phi0);
      obj = std::real(x.dot(work * x));
      iter = 0;
      continue;
    }
    x = next;
    obj = next_obj;
    if (phase_change < tol) break;
  }

  const Complex last = x[x.size() - 1];
  if (std::abs(last) < 1e-12) throw std::runtime_error("degenerate fixed point normalization");
  result.phi_tilde = x / last;
  result.iterations = iter;
  result.objective = std::real(result.phi_tilde.dot(omega * result.phi_tilde));
  return result;
}

CVec quantize_phi(const CVec& phi_star, int levels) {
  return project_reflection(phi_star, ReflectionCase::discrete(levels));
}

RunResult run_zf(const SystemConfig& config, const ChannelRealization& channels,
                 const ZfParams& params) {
  config.validate();
  const int K = config.clusters;
  const int N = config.bs_antennas;
  if (N < 2 * K - 1)
    throw std::invalid_argument("zero-forcing needs at least 2K-1 antennas");
  const RateConstraintTransform taus(config);
  const bool irs = config.irs_enabled;
  const auto t0 = std::chrono::steady_clock::now();
  auto wall_ms = [&t0] {
    return std::chrono::duration<Scalar, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  RunResult result;
  CVec phi = irs ? CVec::Ones(config.irs_elements) : CVec();
  std::vector<std::array<CVec, 2>> w(K);
  std::vector<std::array<CVec, 2>> w_bar(K);

  Scalar prev_power = std::numeric_limits<Scalar>::infinity();
  bool converged = false;
  int outer = 0;
  try {
    for (outer = 1; outer <= params.max_outer_iterations; ++outer) {
      if (outer > 1 && irs) {
        const ReflectionObjective obj = reflection_objective(channels, w);
        CVec x0(config.irs_elements + 1);
        x0.head(config.irs_elements) = phi.conjugate();
        x0[config.irs_elements] = 1;
        const FixedPointResult fp =
            fixed_point_phi(obj.omega, x0, params.fixed_point_max_iter, params.fixed_point_tol);
        if (fp.restarts > 0) result.trace.note = "fixed point restarted with diagonal shift";
        phi = fp.phi_tilde.head(config.irs_elements).conjugate();
        if (config.reflection_case.kind == ReflectionCase::Kind::DiscretePhase)
          phi = quantize_phi(phi, config.reflection_case.levels);
      }

      const auto h_hat = effective_channels(config, channels, phi);
      std::string tags;
      Scalar power = 0;
      for (int k = 0; k < K; ++k) {
        try {
          const CMat basis = null_space_basis(h_hat, k);
          const CVec h_bar_c = basis.adjoint() * h_hat[k][kCenter];
          const CVec h_bar_e = basis.adjoint() * h_hat[k][kEdge];
          w_bar[k][kCenter] = solve_w_center(h_bar_c, taus.tau_center[k], config.noise_power);
          const EdgeBeamResult edge =
              solve_w_edge(h_bar_e, h_bar_c, w_bar[k][kCenter], taus.tau_edge[k],
                           config.noise_power, params.theta_grid_points, params.theta_refine_tol);
          w_bar[k][kEdge] = edge.w;
          w[k][kCenter] = basis * w_bar[k][kCenter];
          w[k][kEdge] = basis * w_bar[k][kEdge];
          if (!tags.empty()) tags += ';';
          tags += edge_branch_tag(edge.chosen);
        } catch (const ZfInfeasible& err) {
          throw ZfInfeasible(k, err.what());
        }
        power += w_bar[k][kCenter].squaredNorm() + w_bar[k][kEdge].squaredNorm();
      }

      BeamformingSolution candidate;
      candidate.w = w;
      candidate.phi = phi;
      const FeasibilityReport report = audit(config, channels, candidate, params.audit_tol);

      TraceRow row;
      row.iteration = outer;
      row.total_power_w = power;
      row.min_slack = std::min(report.center_rate_slack.minCoeff(),
                               report.edge_rate_slack.minCoeff());
      row.wall_ms = wall_ms();
      row.branch_tags = tags;
      result.trace.rows.push_back(std::move(row));

      if (std::abs(power - prev_power) / std::max<Scalar>(prev_power, 1) < params.epsilon) {
        converged = true;
        break;
      }
      prev_power = power;
    }
  } catch (const ZfInfeasible& err) {
    result.status = RunStatus::Infeasible;
    result.iterations = outer;
    result.trace.note = "infeasible in cluster " + std::to_string(err.cluster) + ": " + err.what();
    result.solution.phi = phi;
    result.solution.w.assign(K, {CVec::Zero(N), CVec::Zero(N)});
    return result;
  }

  result.solution.w = std::move(w);
  result.solution.phi = std::move(phi);
  finalize_solution(config, channels, result.solution);
  result.iterations = std::min(outer, params.max_outer_iterations);

  const FeasibilityReport report = audit(config, channels, result.solution, params.audit_tol);
  result.status = (converged && report.feasible) ? RunStatus::Converged : RunStatus::NotConverged;
  return result;
}

}  // namespace irsbf
