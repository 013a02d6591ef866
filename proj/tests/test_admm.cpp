#include "irsbf/admm.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace irsbf;

namespace {

std::mt19937_64 rng(424242);

Complex rand_c(Scalar scale = 1) {
  std::uniform_real_distribution<Scalar> u(-scale, scale);
  return {u(rng), u(rng)};
}

CVec rand_cvec(Eigen::Index n, Scalar scale = 1) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rand_c(scale);
  return v;
}

CMat rand_cmat(Eigen::Index r, Eigen::Index c) {
  CMat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) m.row(i) = rand_cvec(c).transpose();
  return m;
}

SystemConfig config_knm(int k, int n, int m, Scalar rc = 1, Scalar re = 1) {
  SystemConfig config;
  config.clusters = k;
  config.bs_antennas = n;
  config.irs_elements = m;
  config.noise_power = 0.01;
  config.set_uniform_rates(rc, re);
  return config;
}

ChannelRealization random_channels(const SystemConfig& config) {
  ChannelRealization ch;
  ch.H = rand_cmat(config.irs_elements, config.bs_antennas);
  ch.h.resize(config.clusters);
  ch.g.resize(config.clusters);
  for (int k = 0; k < config.clusters; ++k)
    for (int i = 0; i < 2; ++i) {
      ch.h[k][i] = rand_cvec(config.bs_antennas);
      ch.g[k][i] = rand_cvec(config.irs_elements);
    }
  return ch;
}

AdmmState random_state(const SystemConfig& config) {
  AdmmState state;
  state.phi = rand_cvec(config.irs_elements);
  state.varphi = project_reflection(state.phi, config.reflection_case);
  state.lambda = rand_cvec(config.irs_elements, 0.2);
  state.w = rand_cvec(Eigen::Index(2 * config.clusters) * config.bs_antennas);
  state.u.resize(config.clusters);
  for (auto& uk : state.u) uk = {rand_c(), rand_c(), rand_c()};
  return state;
}

Scalar quad_phi(const PhiConstraint& pc, const CVec& phi) {
  const Complex quad = (phi.transpose() * (pc.upsilon * phi.conjugate())).value();
  return 2 * std::real(pc.mu.dot(phi.conjugate())) + quad.real() - pc.e;
}

Scalar quad_w(const WConstraint& wc, const CVec& w) {
  const Complex quad = w.dot(wc.psi * w);
  return quad.real() + 2 * std::real(wc.rho.dot(w)) - wc.e_hat;
}

}  // namespace

TEST_CASE("rate thresholds") {
  SystemConfig config = config_knm(2, 2, 2, 0, 4);
  const RateConstraintTransform taus(config);
  CHECK(taus.tau_center[0] == 0);
  CHECK(taus.tau_edge[1] == doctest::Approx(15.0).epsilon(1e-14));
}

TEST_CASE("trace identity of the auxiliary-variable bound") {
  // tr(Y^H A + A^H Y - Y^H B Y) at Y = B^-1 A equals tr(A^H B^-1 A) and
  // dominates random Y for positive definite B.
  for (int rep = 0; rep < 25; ++rep) {
    const Eigen::Index a = 3, b = 2;
    const CMat A = rand_cmat(a, b);
    const CMat R = rand_cmat(a, a);
    const CMat B = R.adjoint() * R + 0.1 * CMat::Identity(a, a);
    auto f = [&](const CMat& Y) {
      return std::real((Y.adjoint() * A + A.adjoint() * Y - Y.adjoint() * B * Y).trace());
    };
    const CMat best = B.inverse() * A;
    const Scalar closed = std::real((A.adjoint() * B.inverse() * A).trace());
    CHECK(std::abs(f(best) - closed) <= 1e-9 * std::max<Scalar>(1, std::abs(closed)));
    for (int trial = 0; trial < 100; ++trial) CHECK(f(best) >= f(rand_cmat(a, b)) - 1e-12);
  }
}

TEST_CASE("scalar surrogate maximum recovers the sinr") {
  const SystemConfig config = config_knm(1, 1, 1);
  const ChannelRealization ch = random_channels(config);
  const CVec phi = rand_cvec(1);
  const CVec w = rand_cvec(2);

  const CVec hc = effective_channel(phi, ch.H, ch.g[0][kCenter], ch.h[0][kCenter]);
  const Scalar gamma = std::norm(hc.dot(w.head(1))) / config.noise_power;

  Scalar best = -1e30;
  const Scalar radius = 2 * std::abs(hc.dot(w.head(1))) / config.noise_power + 1;
  for (int a = -60; a <= 60; ++a)
    for (int b = -60; b <= 60; ++b) {
      const Complex u(radius * a / 60.0, radius * b / 60.0);
      best = std::max(best, evaluate_surrogate_lhs(config, ch, 0, 0, phi, w, u));
    }
  CHECK(best <= gamma + 1e-12);
  CHECK(best >= gamma - 1e-2 * std::max<Scalar>(1, gamma));
}

TEST_CASE("phi-side coefficients reproduce the direct constraint evaluation") {
  std::uniform_int_distribution<int> kd(1, 2), nd(1, 3), md(1, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const SystemConfig config = config_knm(kd(rng), nd(rng), md(rng));
    const ChannelRealization ch = random_channels(config);
    const AdmmState state = random_state(config);
    const RateConstraintTransform taus(config);
    const ConstraintCoeffs coeffs = build_phi_coeffs(state, ch, config);
    const CVec probe = rand_cvec(config.irs_elements);
    for (int k = 0; k < config.clusters; ++k)
      for (int j = 0; j < 3; ++j) {
        const Scalar lhs = quad_phi(coeffs.phi_part[k][j], probe);
        const Scalar rhs = taus.tau(k, j) - evaluate_surrogate_lhs(config, ch, k, j, probe,
                                                                   state.w, state.u[k][j]);
        CHECK(std::abs(lhs - rhs) <=
              1e-9 * std::max<Scalar>({1, std::abs(lhs), std::abs(rhs)}));
      }
  }
}

TEST_CASE("w-side coefficients reproduce the direct constraint evaluation") {
  std::uniform_int_distribution<int> kd(1, 2), nd(1, 3), md(1, 3);
  for (int rep = 0; rep < 200; ++rep) {
    const SystemConfig config = config_knm(kd(rng), nd(rng), md(rng));
    const ChannelRealization ch = random_channels(config);
    const AdmmState state = random_state(config);
    const RateConstraintTransform taus(config);
    const ConstraintCoeffs coeffs = build_w_coeffs(state, ch, config);
    const CVec probe = rand_cvec(state.w.size());
    for (int k = 0; k < config.clusters; ++k)
      for (int j = 0; j < 3; ++j) {
        const Scalar lhs = quad_w(coeffs.w_part[k][j], probe);
        const Scalar rhs = taus.tau(k, j) - evaluate_surrogate_lhs(config, ch, k, j, state.phi,
                                                                   probe, state.u[k][j]);
        CHECK(std::abs(lhs - rhs) <=
              1e-9 * std::max<Scalar>({1, std::abs(lhs), std::abs(rhs)}));
      }
  }
}

TEST_CASE("degenerate coefficient patterns") {
  SUBCASE("zero auxiliaries empty every u-dependent term") {
    const SystemConfig config = config_knm(2, 2, 2, 1, 2);
    const ChannelRealization ch = random_channels(config);
    AdmmState state = random_state(config);
    for (auto& uk : state.u) uk = {Complex(0), Complex(0), Complex(0)};
    const RateConstraintTransform taus(config);
    const ConstraintCoeffs phi_coeffs = build_phi_coeffs(state, ch, config);
    const ConstraintCoeffs w_coeffs = build_w_coeffs(state, ch, config);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j) {
        CHECK(phi_coeffs.phi_part[k][j].mu.norm() == 0);
        CHECK(phi_coeffs.phi_part[k][j].upsilon.norm() == 0);
        CHECK(phi_coeffs.phi_part[k][j].e == doctest::Approx(-taus.tau(k, j)));
        CHECK(w_coeffs.w_part[k][j].psi.norm() == 0);
        CHECK(w_coeffs.w_part[k][j].rho.norm() == 0);
        CHECK(w_coeffs.w_part[k][j].e_hat == doctest::Approx(-taus.tau(k, j)));
      }
  }
  SUBCASE("single cluster drops the inter-cluster quadratics") {
    const SystemConfig config = config_knm(1, 3, 2);
    const ChannelRealization ch = random_channels(config);
    const AdmmState state = random_state(config);
    CHECK(build_phi_coeffs(state, ch, config).phi_part[0][0].upsilon.norm() == 0);
    CHECK(build_w_coeffs(state, ch, config).w_part[0][0].psi.norm() == 0);
  }
  SUBCASE("psi zero blocks sit on the own-cluster slots") {
    const SystemConfig config = config_knm(3, 2, 2);
    const ChannelRealization ch = random_channels(config);
    const AdmmState state = random_state(config);
    const ConstraintCoeffs coeffs = build_w_coeffs(state, ch, config);
    const int n = config.bs_antennas;
    const auto h_hat = effective_channels(config, ch, state.phi);
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j) {
        const auto& psi = coeffs.w_part[k][j].psi;
        const int user = (j == 1) ? kEdge : kCenter;
        const CMat v = std::norm(state.u[k][j]) * h_hat[k][user] * h_hat[k][user].adjoint();
        for (int slot = 0; slot < 6; ++slot) {
          const CMat block = psi.block(slot * n, slot * n, n, n);
          const bool zero = (j == 0) ? (slot == 2 * k || slot == 2 * k + 1) : (slot == 2 * k + 1);
          if (zero)
            CHECK(block.norm() == 0);
          else
            CHECK((block - v).norm() <= 1e-12 * std::max<Scalar>(1, v.norm()));
        }
        // Off-diagonal blocks are absent by construction.
        CHECK((psi - psi.adjoint()).norm() <= 1e-12 * std::max<Scalar>(1, psi.norm()));
      }
  }
}

TEST_CASE("closed-form u updates") {
  SUBCASE("zero beams give zero auxiliaries") {
    const SystemConfig config = config_knm(2, 2, 2);
    const ChannelRealization ch = random_channels(config);
    const auto u = update_u(config, ch, rand_cvec(2), CVec::Zero(8));
    for (const auto& uk : u)
      for (const Complex& val : uk) CHECK(std::abs(val) == 0);
  }
  SUBCASE("single-cluster scalar form") {
    const SystemConfig config = config_knm(1, 2, 2);
    const ChannelRealization ch = random_channels(config);
    const CVec phi = rand_cvec(2);
    const CVec w = rand_cvec(4);
    const auto u = update_u(config, ch, phi, w);
    const CVec hc = effective_channel(phi, ch.H, ch.g[0][kCenter], ch.h[0][kCenter]);
    const Complex expect = hc.dot(w.head(2)) / config.noise_power;
    CHECK(std::abs(u[0][0] - expect) < 1e-12 * std::max<Scalar>(1, std::abs(expect)));
  }
  SUBCASE("no grid point beats the closed form") {
    const SystemConfig config = config_knm(2, 2, 2);
    const ChannelRealization ch = random_channels(config);
    const CVec phi = rand_cvec(2);
    const CVec w = rand_cvec(8);
    const auto u = update_u(config, ch, phi, w);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j) {
        const Scalar at_closed =
            evaluate_surrogate_lhs(config, ch, k, j, phi, w, u[k][j]);
        const Scalar radius = 2 * std::abs(u[k][j]) + 0.1;
        for (int a = -20; a <= 20; ++a)
          for (int b = -20; b <= 20; ++b) {
            const Complex probe(radius * a / 20.0, radius * b / 20.0);
            CHECK(evaluate_surrogate_lhs(config, ch, k, j, phi, w, probe) <=
                  at_closed + 1e-12);
          }
      }
  }
  SUBCASE("finite perturbations strictly decrease the surrogate") {
    const SystemConfig config = config_knm(2, 2, 2);
    const ChannelRealization ch = random_channels(config);
    const CVec phi = rand_cvec(2);
    const CVec w = rand_cvec(8);
    const auto u = update_u(config, ch, phi, w);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j) {
        const Scalar base = evaluate_surrogate_lhs(config, ch, k, j, phi, w, u[k][j]);
        for (const Complex delta : {Complex(1e-3, 0), Complex(-1e-3, 0), Complex(0, 1e-3),
                                    Complex(0, -1e-3)}) {
          CHECK(evaluate_surrogate_lhs(config, ch, k, j, phi, w, u[k][j] + delta) <
                base - 1e-12);
        }
      }
  }
}

TEST_CASE("dual update") {
  const SystemConfig config = config_knm(1, 1, 3);
  AdmmState state = random_state(config);
  SUBCASE("exact consensus keeps lambda") {
    state.varphi = state.phi;
    CHECK((update_lambda(state) - state.lambda).norm() == 0);
  }
  SUBCASE("zero dual accumulates the gap") {
    state.lambda.setZero();
    CHECK((update_lambda(state) - (state.phi - state.varphi)).norm() == 0);
    state.lambda = update_lambda(state);
    state.varphi = state.phi;
    const CVec after = update_lambda(state);
    CHECK((after - state.lambda).norm() == 0);  // fixed point under consensus
  }
}

TEST_CASE("phi update") {
  AdmmParams params;
  SUBCASE("slack constraints reduce to the pure proximal point") {
    const SystemConfig config = config_knm(1, 1, 3);
    AdmmState state = random_state(config);
    ConstraintCoeffs coeffs;
    coeffs.phi_part.resize(1);
    for (int j = 0; j < 3; ++j) {
      coeffs.phi_part[0][j].mu = CVec::Zero(3);
      coeffs.phi_part[0][j].upsilon = CMat::Zero(3, 3);
      coeffs.phi_part[0][j].e = 1e6;
    }
    const CVec phi = update_phi(state, coeffs, params);
    CHECK((phi - (state.varphi - state.lambda)).norm() < 1e-6);
  }
  SUBCASE("single quadratic cone is the analytic disk projection") {
    const SystemConfig config = config_knm(1, 1, 1);
    for (int rep = 0; rep < 10; ++rep) {
      AdmmState state = random_state(config);
      const Scalar radius = 0.8;
      ConstraintCoeffs coeffs;
      coeffs.phi_part.resize(1);
      for (int j = 0; j < 3; ++j) {
        coeffs.phi_part[0][j].mu = CVec::Zero(1);
        coeffs.phi_part[0][j].upsilon = CMat::Identity(1, 1);
        coeffs.phi_part[0][j].e = radius * radius;
      }
      const Complex target = (state.varphi - state.lambda)[0];
      const Complex expect =
          std::abs(target) <= radius ? target : radius * target / std::abs(target);
      const CVec phi = update_phi(state, coeffs, params);
      CHECK(std::abs(phi[0] - expect) < 1e-6);
    }
  }
}

TEST_CASE("w update with zero thresholds returns zero beams") {
  const SystemConfig config = config_knm(2, 2, 2, 0, 0);
  const ChannelRealization ch = random_channels(config);
  AdmmState state = random_state(config);
  state.u = update_u(config, ch, state.phi, CVec::Zero(8));  // zero auxiliaries
  const CVec w = update_w(state, build_w_coeffs(state, ch, config), AdmmParams{});
  CHECK(w.norm() < 1e-6);
}

TEST_CASE("scalar downlink pair reaches the hand-derived minimum power") {
  SystemConfig config = config_knm(1, 1, 1, 2, 1.5);
  config.irs_enabled = false;
  config.noise_power = 0.1;
  const ChannelRealization ch = random_channels(config);
  const Scalar hc2 = std::norm(ch.h[0][kCenter][0]);
  const Scalar he2 = std::norm(ch.h[0][kEdge][0]);
  const Scalar tau_c = std::exp2(2.0) - 1, tau_e = std::exp2(1.5) - 1;
  const Scalar wc2 = tau_c * config.noise_power / hc2;
  const Scalar we2 = tau_e * std::max((config.noise_power + he2 * wc2) / he2,
                                      (config.noise_power + hc2 * wc2) / hc2);
  const Scalar expect = wc2 + we2;

  AdmmParams params;
  params.epsilon = 1e-9;
  params.max_outer_iterations = 400;
  const RunResult result = run_admm(config, ch, params);
  REQUIRE(result.status == RunStatus::Converged);
  CHECK(result.solution.total_power == doctest::Approx(expect).epsilon(1e-5));
}

TEST_CASE("zero rate targets converge to zero power") {
  SystemConfig config = config_knm(2, 2, 3, 0, 0);
  const ChannelRealization ch = random_channels(config);
  const RunResult result = run_admm(config, ch);
  REQUIRE(result.status == RunStatus::Converged);
  CHECK(result.solution.total_power == doctest::Approx(0.0));
}

TEST_CASE("reference-scale instance converges and audits feasible") {
  SystemConfig config;
  config.clusters = 3;
  config.bs_antennas = 8;
  config.irs_elements = 30;
  config.noise_power = dbm_to_watt(-80);
  config.set_uniform_rates(4, 4);
  config.reflection_case = ReflectionCase::unit_modulus();
  const ChannelRealization ch = generate(config, 2024);

  const RunResult result = run_admm(config, ch);
  REQUIRE(result.status == RunStatus::Converged);
  CHECK(result.iterations <= 50);

  const FeasibilityReport report = audit(config, ch, result.solution, 1e-4);
  CHECK(report.feasible);

  // Consensus invariants at exit: feasible copy returned, unit modulus.
  for (Eigen::Index m = 0; m < result.solution.phi.size(); ++m)
    CHECK(std::abs(std::abs(result.solution.phi[m]) - 1) < 1e-12);

  // Every accepted iterate keeps the surrogate constraints within solver
  // tolerance.
  for (const auto& row : result.trace.rows) CHECK(row.min_slack >= -1e-5);
  CHECK(result.trace.rows.back().consensus_residual.has_value());
  CHECK(*result.trace.rows.back().consensus_residual < 1e-3);
}
