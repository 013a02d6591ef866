// Dense primal-dual interior-point solver for second-order cone programs.
//
// Standard conic form:  min f.x  s.t.  G x + s = h,  s in K,
// where K is a product of second-order cones (dimension 1 = nonnegative
// ray). The solver runs on the homogeneous self-dual embedding with
// Nesterov-Todd scaling and a Mehrotra predictor-corrector step, so primal
// infeasibility is detected through a separating certificate instead of
// divergence. Each iteration factors the Schur complement G' W^-2 G
// (Cholesky) and applies one pass of iterative refinement to the KKT solve.

#include "irsbf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irsbf {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

struct ConeLayout {
  int offset;
  int dim;  // rows of the cone block, >= 1
};

// Jordan product u o v on one cone block.
void jordan_prod(const VecX& u, const VecX& v, VecX& out) {
  out.resize(u.size());
  out[0] = u.dot(v);
  if (u.size() > 1) out.tail(u.size() - 1) = u[0] * v.tail(v.size() - 1) + v[0] * u.tail(u.size() - 1);
}

// Solves u o w = v for w (u in the cone interior).
VecX jordan_div(const VecX& u, const VecX& v) {
  const Eigen::Index d = u.size();
  VecX w(d);
  if (d == 1) {
    w[0] = v[0] / u[0];
    return w;
  }
  const Scalar det = u[0] * u[0] - u.tail(d - 1).squaredNorm();
  const Scalar w0 = (u[0] * v[0] - u.tail(d - 1).dot(v.tail(d - 1))) / det;
  w[0] = w0;
  w.tail(d - 1) = (v.tail(d - 1) - w0 * u.tail(d - 1)) / u[0];
  return w;
}

// Nesterov-Todd scaling point of one cone: W = eta * Wbar with
// Wbar = 2 wbar wbar' - J up to a symmetric square root; wbar is stored in
// hyperbolic-normalized form (wbar0^2 - ||wbar1||^2 = 1).
struct NtScaling {
  VecX wbar;
  Scalar eta = 1;

  void identity(int dim) {
    wbar = VecX::Zero(dim);
    wbar[0] = 1;
    eta = 1;
  }

  bool compute(const VecX& s, const VecX& z) {
    const Eigen::Index d = s.size();
    Scalar ds = s[0] * s[0], dz = z[0] * z[0];
    if (d > 1) {
      ds -= s.tail(d - 1).squaredNorm();
      dz -= z.tail(d - 1).squaredNorm();
    }
    if (!(ds > 0) || !(dz > 0) || !(s[0] > 0) || !(z[0] > 0)) return false;
    const Scalar a = std::sqrt(ds), b = std::sqrt(dz);
    const VecX sb = s / a, zb = z / b;
    const Scalar gamma = std::sqrt((1 + sb.dot(zb)) / 2);
    wbar.resize(d);
    wbar[0] = (sb[0] + zb[0]) / (2 * gamma);
    if (d > 1) wbar.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2 * gamma);
    eta = std::sqrt(a / b);
    return true;
  }

  // W u
  VecX apply(const VecX& u) const {
    const Eigen::Index d = u.size();
    VecX r(d);
    if (d == 1) {
      r[0] = eta * wbar[0] * u[0];
      return r;
    }
    const Scalar wtu = wbar.tail(d - 1).dot(u.tail(d - 1));
    r[0] = wbar[0] * u[0] + wtu;
    r.tail(d - 1) = u.tail(d - 1) + (u[0] + wtu / (1 + wbar[0])) * wbar.tail(d - 1);
    return eta * r;
  }

  // W^-1 u
  VecX apply_inv(const VecX& u) const {
    const Eigen::Index d = u.size();
    VecX r(d);
    if (d == 1) {
      r[0] = u[0] / (eta * wbar[0]);
      return r;
    }
    const Scalar wtu = wbar.tail(d - 1).dot(u.tail(d - 1));
    r[0] = wbar[0] * u[0] - wtu;
    r.tail(d - 1) = u.tail(d - 1) + (-u[0] + wtu / (1 + wbar[0])) * wbar.tail(d - 1);
    return r / eta;
  }

  // W^2 u = eta^2 (2 wbar (wbar.u) - J u)
  VecX apply_sq(const VecX& u) const {
    const Eigen::Index d = u.size();
    VecX ju(d);
    ju[0] = u[0];
    if (d > 1) ju.tail(d - 1) = -u.tail(d - 1);
    return eta * eta * (2 * wbar.dot(u) * wbar - ju);
  }

  // W^-2 u = eta^-2 (2 v (v.u) - J u), v = J wbar
  VecX apply_sq_inv(const VecX& u) const {
    const Eigen::Index d = u.size();
    VecX v = wbar;
    if (d > 1) v.tail(d - 1) = -v.tail(d - 1);
    VecX ju(d);
    ju[0] = u[0];
    if (d > 1) ju.tail(d - 1) = -u.tail(d - 1);
    return (2 * v.dot(u) * v - ju) / (eta * eta);
  }
};

// Largest alpha >= 0 with u + alpha du in the cone for all steps up to it.
Scalar step_to_boundary(const VecX& u, const VecX& du) {
  const Eigen::Index d = u.size();
  Scalar a2 = du[0] * du[0], a1 = u[0] * du[0], a0 = u[0] * u[0];
  if (d > 1) {
    a2 -= du.tail(d - 1).squaredNorm();
    a1 -= u.tail(d - 1).dot(du.tail(d - 1));
    a0 -= u.tail(d - 1).squaredNorm();
  }
  a0 = std::max(a0, Scalar(0));
  // Smallest positive root of a0 + 2 a1 t + a2 t^2.
  if (std::abs(a2) < 1e-300) {
    if (a1 >= 0) return kInf;
    return a0 / (-2 * a1);
  }
  const Scalar disc = a1 * a1 - a2 * a0;
  if (disc < 0) return a2 > 0 ? kInf : Scalar(0);
  const Scalar sq = std::sqrt(disc);
  const Scalar tmp = -(a1 + (a1 >= 0 ? sq : -sq));
  Scalar r1 = tmp / a2;
  Scalar r2 = (tmp != 0) ? a0 / tmp : kInf;
  if (r1 > r2) std::swap(r1, r2);
  if (r1 > 0) return r1;
  if (r2 > 0) return r2;
  return kInf;
}

Scalar ray_step(Scalar u, Scalar du) { return du < 0 ? -u / du : kInf; }

struct Embedding {
  VecX f, h;
  MatX G;
  std::vector<ConeLayout> cones;
  Eigen::Index n = 0, m = 0;
};

class HsdeSolver {
 public:
  explicit HsdeSolver(const Embedding& e, Scalar tol, int max_iter)
      : e_(e), tol_(tol), max_iter_(max_iter) {}

  SocpSolution run() {
    const Eigen::Index n = e_.n, m = e_.m;
    const int p = static_cast<int>(e_.cones.size());
    hnorm_ = std::max<Scalar>(1, e_.h.norm());
    fnorm_ = std::max<Scalar>(1, e_.f.norm());

    // Constant part of the Schur complement: per cone G_i' J G_i.
    pj_.reserve(p);
    for (const auto& c : e_.cones) {
      const auto Gi = e_.G.middleRows(c.offset, c.dim);
      MatX pji = Gi.row(0).transpose() * Gi.row(0);
      if (c.dim > 1) pji.noalias() -= Gi.bottomRows(c.dim - 1).transpose() * Gi.bottomRows(c.dim - 1);
      pj_.push_back(std::move(pji));
    }

    scalings_.resize(p);
    for (int i = 0; i < p; ++i) scalings_[i].identity(e_.cones[i].dim);

    SocpSolution sol;
    if (!initial_point()) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }

    // Best iterate by worst KKT metric, returned when the iteration stalls
    // at the precision floor instead of reaching tol.
    VecX best_x;
    KktResiduals best_kkt;
    Scalar best_metric = kInf;
    int best_iter = 0;

    VecX lambda(m);
    for (int iter = 0; iter <= max_iter_; ++iter) {
      // Residuals of the embedding.
      VecX res_x = e_.G.transpose() * z_ + e_.f * tau_;
      VecX res_z = s_ + e_.G * x_ - e_.h * tau_;
      const Scalar res_t = kappa_ + e_.f.dot(x_) + e_.h.dot(z_);

      // Unscaled optimality metrics.
      const Scalar pres = (e_.G * (x_ / tau_) + s_ / tau_ - e_.h).norm() / hnorm_;
      const Scalar dres = (e_.G.transpose() * (z_ / tau_) + e_.f).norm() / fnorm_;
      const Scalar pobj = e_.f.dot(x_) / tau_;
      const Scalar dobj = -e_.h.dot(z_) / tau_;
      const Scalar gap_abs = s_.dot(z_) / (tau_ * tau_);
      const Scalar relgap = gap_abs / std::max<Scalar>({1, std::abs(pobj), std::abs(dobj)});

      if (std::getenv("IRSBF_CONIC_VERBOSE"))
        std::fprintf(stderr, "it %3d pres %.2e dres %.2e gap %.2e relgap %.2e tau %.2e kap %.2e\n",
                     iter, pres, dres, gap_abs, relgap, tau_, kappa_);

      if (pres <= tol_ && dres <= tol_ && (gap_abs <= tol_ || relgap <= tol_)) {
        sol.x = x_ / tau_;
        sol.status = SolveStatus::Optimal;
        sol.objective = pobj;
        sol.kkt = {pres, dres, relgap};
        sol.iterations = iter;
        return sol;
      }

      const Scalar metric = std::max({pres, dres, std::min(gap_abs, relgap)});
      if (std::isfinite(metric) && metric < best_metric) {
        best_metric = metric;
        best_x = x_ / tau_;
        best_kkt = {pres, dres, relgap};
        best_iter = iter;
      }
      if (iter - best_iter > 15) break;  // stalled at the precision floor

      // Infeasibility certificates.
      const Scalar hz = e_.h.dot(z_);
      if (hz < 0) {
        const Scalar pinf = (e_.G.transpose() * z_).norm() * hnorm_ / (-hz);
        if (pinf <= tol_) {
          sol.status = SolveStatus::Infeasible;
          sol.kkt = {pres, dres, relgap};
          sol.iterations = iter;
          return sol;
        }
      }
      const Scalar fx = e_.f.dot(x_);
      if (fx < 0) {
        const Scalar dinf = (e_.G * x_ + s_).norm() * fnorm_ / (-fx);
        if (dinf <= tol_) {
          // Unbounded primal; not producible by the problem family here.
          sol.status = SolveStatus::NumericalFailure;
          sol.iterations = iter;
          return sol;
        }
      }

      if (iter == max_iter_) break;

      const Scalar mu = (s_.dot(z_) + tau_ * kappa_) / (p + 1);
      if (!(mu > 0) || !std::isfinite(mu)) break;

      // NT scalings and the scaled point lambda = W z = W^-T s.
      bool scaling_ok = true;
      for (int i = 0; i < p; ++i) {
        const auto& c = e_.cones[i];
        if (!scalings_[i].compute(s_.segment(c.offset, c.dim), z_.segment(c.offset, c.dim))) {
          scaling_ok = false;
          break;
        }
        lambda.segment(c.offset, c.dim) = scalings_[i].apply(z_.segment(c.offset, c.dim));
      }
      if (!scaling_ok || !factor_schur()) break;

      // Solve for the tau elimination pair once per iteration.
      VecX x1(n), z1(m);
      solve_kkt(-e_.f, e_.h, x1, z1);
      const Scalar denom = e_.f.dot(x1) + e_.h.dot(z1) - kappa_ / tau_;

      // --- Affine (predictor) direction.
      VecX dsb_aff = -lambda;  // lambda \ (-lambda o lambda)
      VecX dx_a(n), dz_a(m), ds_a(m);
      Scalar dtau_a, dkappa_a;
      assemble_direction(res_x, res_z, res_t, dsb_aff, -tau_ * kappa_, Scalar(1), x1, z1, denom,
                         dx_a, dz_a, ds_a, dtau_a, dkappa_a);

      Scalar alpha_aff = std::min<Scalar>(1, max_step(dz_a, ds_a, dtau_a, dkappa_a));
      const Scalar mu_aff = ((s_ + alpha_aff * ds_a).dot(z_ + alpha_aff * dz_a) +
                             (tau_ + alpha_aff * dtau_a) * (kappa_ + alpha_aff * dkappa_a)) /
                            (p + 1);
      Scalar sigma = std::pow(std::max<Scalar>(0, mu_aff / mu), 3);
      sigma = std::min<Scalar>(1, sigma);

      // --- Combined (corrector) direction.
      VecX ds_target(m);
      for (int i = 0; i < p; ++i) {
        const auto& c = e_.cones[i];
        const VecX lam = lambda.segment(c.offset, c.dim);
        VecX ll, corr;
        jordan_prod(lam, lam, ll);
        const VecX wi_ds = scalings_[i].apply_inv(ds_a.segment(c.offset, c.dim));
        const VecX w_dz = scalings_[i].apply(dz_a.segment(c.offset, c.dim));
        jordan_prod(wi_ds, w_dz, corr);
        VecX rhs = -ll - corr;
        rhs[0] += sigma * mu;
        ds_target.segment(c.offset, c.dim) = jordan_div(lam, rhs);
      }
      const Scalar dkappa_rhs = -tau_ * kappa_ - dtau_a * dkappa_a + sigma * mu;

      VecX dx(n), dz(m), ds(m);
      Scalar dtau, dkappa;
      assemble_direction(res_x, res_z, res_t, ds_target, dkappa_rhs, 1 - sigma, x1, z1, denom, dx,
                         dz, ds, dtau, dkappa);

      Scalar alpha = std::min<Scalar>(1, Scalar(0.99) * max_step(dz, ds, dtau, dkappa));
      if (!(alpha > 1e-11) || !std::isfinite(alpha)) break;

      x_ += alpha * dx;
      z_ += alpha * dz;
      s_ += alpha * ds;
      tau_ += alpha * dtau;
      kappa_ += alpha * dkappa;

      // The embedding is homogeneous; renormalizing to tau = 1 keeps the
      // iterate magnitudes centered without changing the ray.
      if (tau_ > 0 && std::isfinite(tau_)) {
        x_ /= tau_;
        z_ /= tau_;
        s_ /= tau_;
        kappa_ /= tau_;
        tau_ = 1;
      }
    }

    if (best_x.size() == 0) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    sol.x = best_x;
    sol.status = SolveStatus::MaxIterations;
    sol.objective = e_.f.dot(sol.x);
    sol.kkt = best_kkt;
    sol.iterations = best_iter;
    return sol;
  }

 private:
  bool initial_point() {
    const Eigen::Index n = e_.n, m = e_.m;
    MatX m0 = e_.G.transpose() * e_.G;
    m0.diagonal().array() += 1e-12 * (1 + m0.diagonal().maxCoeff());
    Eigen::LLT<MatX> llt(m0);
    if (llt.info() != Eigen::Success) return false;

    x_ = llt.solve(e_.G.transpose() * e_.h);
    VecX s_hat = e_.h - e_.G * x_;
    VecX z_hat = -(e_.G * llt.solve(e_.f));
    shift_into_cone(s_hat);
    shift_into_cone(z_hat);
    s_ = std::move(s_hat);
    z_ = std::move(z_hat);
    tau_ = 1;
    kappa_ = 1;
    return n >= 0 && m >= 0;
  }

  void shift_into_cone(VecX& v) const {
    Scalar worst = -kInf;
    for (const auto& c : e_.cones) {
      Scalar margin = v[c.offset];
      if (c.dim > 1) margin -= v.segment(c.offset + 1, c.dim - 1).norm();
      worst = std::max(worst, -margin);
    }
    if (worst >= 0) {
      for (const auto& c : e_.cones) v[c.offset] += 1 + worst;
    }
  }

  bool factor_schur() {
    const Eigen::Index n = e_.n;
    MatX M = MatX::Zero(n, n);
    for (std::size_t i = 0; i < e_.cones.size(); ++i) {
      const auto& c = e_.cones[i];
      const auto& sc = scalings_[i];
      VecX v = sc.wbar;
      if (c.dim > 1) v.tail(c.dim - 1) = -v.tail(c.dim - 1);
      const VecX q = e_.G.middleRows(c.offset, c.dim).transpose() * v;
      const Scalar inv_eta2 = 1 / (sc.eta * sc.eta);
      M.noalias() += inv_eta2 * (2 * q * q.transpose());
      M.noalias() -= inv_eta2 * pj_[i];
    }
    M.diagonal().array() += 1e-13 * (1 + M.diagonal().cwiseAbs().maxCoeff());
    llt_.compute(M);
    return llt_.info() == Eigen::Success;
  }

  VecX apply_w2inv_all(const VecX& u) const {
    VecX r(u.size());
    for (std::size_t i = 0; i < e_.cones.size(); ++i) {
      const auto& c = e_.cones[i];
      r.segment(c.offset, c.dim) = scalings_[i].apply_sq_inv(u.segment(c.offset, c.dim));
    }
    return r;
  }

  VecX apply_w2_all(const VecX& u) const {
    VecX r(u.size());
    for (std::size_t i = 0; i < e_.cones.size(); ++i) {
      const auto& c = e_.cones[i];
      r.segment(c.offset, c.dim) = scalings_[i].apply_sq(u.segment(c.offset, c.dim));
    }
    return r;
  }

  // Solves [0 G'; G -W^2] (px, pz) = (r1, r2) with iterative refinement.
  void solve_kkt(const VecX& r1, const VecX& r2, VecX& px, VecX& pz) const {
    auto direct = [&](const VecX& a, const VecX& b, VecX& ox, VecX& oz) {
      ox = llt_.solve(a + e_.G.transpose() * apply_w2inv_all(b));
      oz = apply_w2inv_all(e_.G * ox - b);
    };
    direct(r1, r2, px, pz);
    for (int pass = 0; pass < 2; ++pass) {
      const VecX e1 = r1 - e_.G.transpose() * pz;
      const VecX e2 = r2 - e_.G * px + apply_w2_all(pz);
      VecX cx, cz;
      direct(e1, e2, cx, cz);
      px += cx;
      pz += cz;
    }
  }

  // Shared assembly of a search direction given the complementarity targets.
  void assemble_direction(const VecX& res_x, const VecX& res_z, Scalar res_t,
                          const VecX& ds_target, Scalar dkappa_rhs, Scalar residual_weight,
                          const VecX& x1, const VecX& z1, Scalar denom, VecX& dx, VecX& dz,
                          VecX& ds, Scalar& dtau, Scalar& dkappa) const {
    VecX w_dsb(e_.m);
    for (std::size_t i = 0; i < e_.cones.size(); ++i) {
      const auto& c = e_.cones[i];
      w_dsb.segment(c.offset, c.dim) = scalings_[i].apply(ds_target.segment(c.offset, c.dim));
    }
    const VecX bx = -residual_weight * res_x;
    const VecX rhs_z = -residual_weight * res_z - w_dsb;
    VecX x2(e_.n), z2(e_.m);
    solve_kkt(bx, rhs_z, x2, z2);
    dtau = (-residual_weight * res_t - dkappa_rhs / tau_ - e_.f.dot(x2) - e_.h.dot(z2)) / denom;
    dx = x2 + dtau * x1;
    dz = z2 + dtau * z1;
    ds = w_dsb - apply_w2_all(dz);
    dkappa = (dkappa_rhs - kappa_ * dtau) / tau_;
  }

  Scalar max_step(const VecX& dz, const VecX& ds, Scalar dtau, Scalar dkappa) const {
    Scalar a = std::min(ray_step(tau_, dtau), ray_step(kappa_, dkappa));
    for (const auto& c : e_.cones) {
      a = std::min(a, step_to_boundary(s_.segment(c.offset, c.dim), ds.segment(c.offset, c.dim)));
      a = std::min(a, step_to_boundary(z_.segment(c.offset, c.dim), dz.segment(c.offset, c.dim)));
    }
    return a;
  }

  const Embedding& e_;
  Scalar tol_;
  int max_iter_;
  Scalar hnorm_ = 1, fnorm_ = 1;

  std::vector<MatX> pj_;
  std::vector<NtScaling> scalings_;
  Eigen::LLT<MatX> llt_;

  VecX x_, z_, s_;
  Scalar tau_ = 1, kappa_ = 1;
};

Embedding build_embedding(const ConicProgram& program) {
  const Eigen::Index n = program.f.size();
  Eigen::Index m = 0;
  for (const auto& cone : program.cones) {
    if (cone.c.size() != n || cone.A.cols() != n || cone.A.rows() != cone.b.size())
      throw std::invalid_argument("cone dimensions inconsistent with the variable dimension");
    m += cone.rows() + 1;
  }
  if (program.cones.empty()) throw std::invalid_argument("conic program needs at least one cone");

  Embedding e;
  e.n = n;
  e.m = m;
  e.f = program.f;
  e.G.setZero(m, n);
  e.h.setZero(m);
  Eigen::Index off = 0;
  for (const auto& cone : program.cones) {
    // Row scaling keeps mixed-magnitude constraint data well conditioned;
    // the constraint set is unchanged.
    Scalar scale = std::max({cone.A.size() ? cone.A.cwiseAbs().maxCoeff() : 0,
                             cone.b.size() ? cone.b.cwiseAbs().maxCoeff() : 0,
                             cone.c.cwiseAbs().maxCoeff(), std::abs(cone.d)});
    if (!(scale > 0) || !std::isfinite(scale)) scale = 1;
    e.G.row(off) = -cone.c.transpose() / scale;
    e.h[off] = cone.d / scale;
    if (cone.rows() > 0) {
      e.G.middleRows(off + 1, cone.rows()) = cone.A / scale;
      e.h.segment(off + 1, cone.rows()) = -cone.b / scale;
    }
    e.cones.push_back({static_cast<int>(off), static_cast<int>(cone.rows() + 1)});
    off += cone.rows() + 1;
  }
  return e;
}

}  // namespace

void SocpProblem::validate() const {
  const Eigen::Index n = dim();
  if (n < 1) throw std::invalid_argument("socp problem has no variables");
  for (const auto& cone : cones) {
    if (cone.c.size() != n || cone.A.cols() != n || cone.A.rows() != cone.b.size())
      throw std::invalid_argument("cone dimensions inconsistent with the variable dimension");
  }
}

SocpSolution solve_conic(const ConicProgram& program, Scalar tol, int max_iter) {
  Embedding e = build_embedding(program);
  HsdeSolver solver(e, tol, max_iter);
  return solver.run();
}

SocpSolution solve(const SocpProblem& problem, Scalar tol, int max_iter) {
  problem.validate();
  const Eigen::Index n = problem.dim();

  ConicProgram cp;
  cp.f = VecX::Zero(n + 1);
  cp.f[n] = 1;

  SocCone epigraph;
  epigraph.A.setZero(n, n + 1);
  epigraph.A.leftCols(n).setIdentity();
  epigraph.b = -problem.target;
  epigraph.c = VecX::Zero(n + 1);
  epigraph.c[n] = 1;
  epigraph.d = 0;
  cp.cones.push_back(std::move(epigraph));

  for (const auto& cone : problem.cones) {
    SocCone lifted;
    lifted.A.setZero(cone.rows(), n + 1);
    lifted.A.leftCols(n) = cone.A;
    lifted.b = cone.b;
    lifted.c = VecX::Zero(n + 1);
    lifted.c.head(n) = cone.c;
    lifted.d = cone.d;
    cp.cones.push_back(std::move(lifted));
  }

  SocpSolution inner = solve_conic(cp, tol, max_iter);
  SocpSolution out;
  out.status = inner.status;
  out.kkt = inner.kkt;
  out.iterations = inner.iterations;
  if (inner.x.size() == n + 1) {
    out.x = inner.x.head(n);
    out.objective = (out.x - problem.target).norm();
  }
  return out;
}

VecX complex_to_real(const CVec& z) {
  VecX x(2 * z.size());
  x.head(z.size()) = z.real();
  x.tail(z.size()) = z.imag();
  return x;
}

CVec real_to_complex(const VecX& x) {
  if (x.size() % 2 != 0) throw std::invalid_argument("stacked vector must have even length");
  const Eigen::Index n = x.size() / 2;
  CVec z(n);
  z.real() = x.head(n);
  z.imag() = x.tail(n);
  return z;
}

MatX realify_matrix(const CMat& S) {
  const Eigen::Index r = S.rows(), c = S.cols();
  MatX out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = S.real();
  out.topRightCorner(r, c) = -S.imag();
  out.bottomLeftCorner(r, c) = S.imag();
  out.bottomRightCorner(r, c) = S.real();
  return out;
}

MatX realify_matrix_conj(const CMat& S) {
  const Eigen::Index r = S.rows(), c = S.cols();
  MatX out(2 * r, 2 * c);
  out.topLeftCorner(r, c) = S.real();
  out.topRightCorner(r, c) = S.imag();
  out.bottomLeftCorner(r, c) = S.imag();
  out.bottomRightCorner(r, c) = -S.real();
  return out;
}

CMat psd_sqrt(const CMat& S, Scalar eps) {
  if (S.rows() != S.cols()) throw std::invalid_argument("psd_sqrt needs a square matrix");
  const Scalar scale = std::max<Scalar>(1, S.cwiseAbs().maxCoeff());
  if ((S - S.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("psd_sqrt needs a Hermitian matrix");

  Eigen::SelfAdjointEigenSolver<CMat> es((S + S.adjoint()) / 2);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  VecX ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -eps) throw std::domain_error("matrix is not PSD within the clamp tolerance");
    if (ev[i] < 0) ev[i] = 0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

namespace {

void write_vec(std::ostream& os, const VecX& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
    os << buf;
  }
  os << '\n';
}

VecX read_vec(std::istream& is, Eigen::Index n) {
  VecX v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(is >> v[i])) throw std::runtime_error("short socp fixture");
  return v;
}

}  // namespace

void write_problem(std::ostream& os, const SocpProblem& problem) {
  os << "socp 1\n";
  os << "dim " << problem.dim() << '\n';
  os << "target\n";
  write_vec(os, problem.target);
  os << "cones " << problem.cones.size() << '\n';
  for (const auto& cone : problem.cones) {
    os << "cone " << cone.rows() << ' ' << cone.dim() << '\n';
    for (Eigen::Index r = 0; r < cone.rows(); ++r) write_vec(os, cone.A.row(r).transpose());
    write_vec(os, cone.b);
    write_vec(os, cone.c);
    VecX d(1);
    d[0] = cone.d;
    write_vec(os, d);
  }
}

SocpProblem read_problem(std::istream& is) {
  std::string word;
  int version = 0;
  is >> word >> version;
  if (word != "socp" || version != 1) throw std::runtime_error("not an socp fixture");
  Eigen::Index n = 0;
  is >> word >> n;
  if (word != "dim" || n < 1) throw std::runtime_error("malformed socp fixture");
  SocpProblem problem;
  is >> word;
  problem.target = read_vec(is, n);
  std::size_t count = 0;
  is >> word >> count;
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::Index rows = 0, cols = 0;
    is >> word >> rows >> cols;
    if (word != "cone" || cols != n || rows < 0) throw std::runtime_error("malformed socp cone");
    SocCone cone;
    cone.A.resize(rows, n);
    for (Eigen::Index r = 0; r < rows; ++r) cone.A.row(r) = read_vec(is, n).transpose();
    cone.b = read_vec(is, rows);
    cone.c = read_vec(is, n);
    cone.d = read_vec(is, 1)[0];
    problem.cones.push_back(std::move(cone));
  }
  problem.validate();
  return problem;
}

}  // namespace irsbf
