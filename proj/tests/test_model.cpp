#include "irsbf/model.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace irsbf;

namespace {

std::mt19937_64 rng(777);

Complex rand_c() {
  std::uniform_real_distribution<Scalar> u(-1, 1);
  return {u(rng), u(rng)};
}

CVec rand_cvec(Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rand_c();
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

BeamformingSolution random_solution(const SystemConfig& config) {
  BeamformingSolution sol;
  sol.phi = rand_cvec(config.irs_elements);
  sol.w.resize(config.clusters);
  for (int k = 0; k < config.clusters; ++k)
    for (int i = 0; i < 2; ++i) sol.w[k][i] = rand_cvec(config.bs_antennas);
  return sol;
}

// Entrywise recomputation of the composite channel through the diagonal
// expansion phi^T diag(g^H) H + h^H, kept independent of the library's
// vectorized path.
CVec effective_oracle(const CVec& phi, const CMat& H, const CVec& g, const CVec& h) {
  CVec out(h.size());
  for (Eigen::Index col = 0; col < h.size(); ++col) {
    Complex row_sum = 0;  // (phi^T diag(g^H) H)_col
    for (Eigen::Index m = 0; m < phi.size(); ++m)
      row_sum += phi[m] * std::conj(g[m]) * H(m, col);
    out[col] = std::conj(row_sum + std::conj(h[col]));
  }
  return out;
}

Scalar sinr_oracle(const SystemConfig& config, const ChannelRealization& ch,
                   const BeamformingSolution& sol, int k, int which) {
  // which: 0 = center, 1 = edge, 2 = center decoding edge
  const int user = (which == 1) ? kEdge : kCenter;
  CVec hh = effective_oracle(sol.phi, ch.H, ch.g[k][user], ch.h[k][user]);
  auto power = [&](const CVec& w) {
    Complex acc = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc += std::conj(hh[i]) * w[i];
    return std::norm(acc);
  };
  Scalar zeta = 0;
  for (int j = 0; j < config.clusters; ++j) {
    if (j == k) continue;
    zeta += power(sol.w[j][kCenter]) + power(sol.w[j][kEdge]);
  }
  const CVec& num_beam = (which == 0) ? sol.w[k][kCenter] : sol.w[k][kEdge];
  Scalar den = config.noise_power + zeta;
  if (which != 0) den += power(sol.w[k][kCenter]);
  return power(num_beam) / den;
}

}  // namespace

TEST_CASE("effective channel reductions and expansion oracle") {
  const SystemConfig config = config_knm(1, 2, 2);
  const ChannelRealization ch = random_channels(config);

  CHECK((effective_channel(CVec::Zero(2), ch.H, ch.g[0][0], ch.h[0][0]) - ch.h[0][0]).norm() == 0);
  CHECK((effective_channel(rand_cvec(2), ch.H, CVec::Zero(2), ch.h[0][0]) - ch.h[0][0]).norm() ==
        0);

  for (int rep = 0; rep < 20; ++rep) {
    const CVec phi = rand_cvec(2);
    const CVec expect = effective_oracle(phi, ch.H, ch.g[0][1], ch.h[0][1]);
    const CVec got = effective_channel(phi, ch.H, ch.g[0][1], ch.h[0][1]);
    CHECK((got - expect).norm() < 1e-13);
  }

  CHECK_THROWS_AS(effective_channel(rand_cvec(3), ch.H, ch.g[0][0], ch.h[0][0]),
                  std::invalid_argument);
}

TEST_CASE("interference zeta") {
  SUBCASE("single cluster has no inter-cluster term") {
    const SystemConfig config = config_knm(1, 3, 2);
    const ChannelRealization ch = random_channels(config);
    const BeamformingSolution sol = random_solution(config);
    CHECK(interference_zeta(config, ch, sol, 0, kCenter) == 0);
  }
  SUBCASE("zero beams give zero") {
    const SystemConfig config = config_knm(2, 3, 2);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    for (auto& pair : sol.w) pair = {CVec::Zero(3), CVec::Zero(3)};
    CHECK(interference_zeta(config, ch, sol, 0, kEdge) == 0);
  }
  SUBCASE("scalar two-cluster instance matches the hand expansion") {
    const SystemConfig config = config_knm(2, 1, 1);
    const ChannelRealization ch = random_channels(config);
    const BeamformingSolution sol = random_solution(config);
    const Complex hh =
        std::conj(std::conj(ch.h[0][kCenter][0]) +
                  sol.phi[0] * std::conj(ch.g[0][kCenter][0]) * ch.H(0, 0));
    const Scalar expect = std::norm(std::conj(hh) * sol.w[1][kCenter][0]) +
                          std::norm(std::conj(hh) * sol.w[1][kEdge][0]);
    CHECK(interference_zeta(config, ch, sol, 0, kCenter) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("sinr definitions") {
  SUBCASE("interference-free edge reduction") {
    const SystemConfig config = config_knm(1, 3, 2);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    sol.w[0][kCenter].setZero();
    const CVec he = effective_channel(sol.phi, ch.H, ch.g[0][kEdge], ch.h[0][kEdge]);
    const Scalar expect = std::norm(he.dot(sol.w[0][kEdge])) / config.noise_power;
    CHECK(sinr_edge(config, ch, sol, 0) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("all-zero beams give zero sinr") {
    const SystemConfig config = config_knm(2, 2, 2);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    for (auto& pair : sol.w) pair = {CVec::Zero(2), CVec::Zero(2)};
    CHECK(sinr_edge(config, ch, sol, 0) == 0);
    CHECK(sinr_center(config, ch, sol, 1) == 0);
    CHECK(sinr_center_decoding_edge(config, ch, sol, 0) == 0);
  }
  SUBCASE("random instances match the brute-force recomputation") {
    const SystemConfig config = config_knm(2, 2, 2);
    for (int rep = 0; rep < 25; ++rep) {
      const ChannelRealization ch = random_channels(config);
      const BeamformingSolution sol = random_solution(config);
      for (int k = 0; k < 2; ++k) {
        CHECK(sinr_center(config, ch, sol, k) ==
              doctest::Approx(sinr_oracle(config, ch, sol, k, 0)).epsilon(1e-10));
        CHECK(sinr_edge(config, ch, sol, k) ==
              doctest::Approx(sinr_oracle(config, ch, sol, k, 1)).epsilon(1e-10));
        CHECK(sinr_center_decoding_edge(config, ch, sol, k) ==
              doctest::Approx(sinr_oracle(config, ch, sol, k, 2)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("beam scaling raises center sinr and squares the power") {
  const SystemConfig config = config_knm(2, 3, 2);
  for (int rep = 0; rep < 10; ++rep) {
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    const Scalar p0 = total_power(sol);
    const Scalar g0 = sinr_center(config, ch, sol, 0);
    const Scalar t = 1.7;
    for (auto& pair : sol.w) {
      pair[0] *= t;
      pair[1] *= t;
    }
    CHECK(total_power(sol) == doctest::Approx(t * t * p0).epsilon(1e-12));
    CHECK(sinr_center(config, ch, sol, 0) >= g0 * (1 - 1e-12));
  }
}

TEST_CASE("audit") {
  SUBCASE("zero rate targets are feasible for any reflection point in the set") {
    SystemConfig config = config_knm(2, 2, 3, 0, 0);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    sol.phi = project_reflection(sol.phi, config.reflection_case);
    CHECK(audit(config, ch, sol).feasible);
  }
  SUBCASE("zero beams with positive targets report the rate shortfall") {
    SystemConfig config = config_knm(1, 2, 2, 2.5, 1);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    sol.w[0] = {CVec::Zero(2), CVec::Zero(2)};
    sol.phi = project_reflection(sol.phi, config.reflection_case);
    const FeasibilityReport report = audit(config, ch, sol);
    CHECK_FALSE(report.feasible);
    CHECK(report.center_rate_slack[0] == doctest::Approx(-2.5));
    CHECK(report.edge_rate_slack[0] == doctest::Approx(-1.0));
  }
  SUBCASE("edge slack uses the minimum of the two decoding sinrs") {
    const SystemConfig config = config_knm(2, 3, 2);
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    sol.phi = project_reflection(sol.phi, config.reflection_case);
    const FeasibilityReport report = audit(config, ch, sol);
    for (int k = 0; k < 2; ++k) {
      const Scalar expect =
          std::log2(1 + std::min(sinr_oracle(config, ch, sol, k, 1),
                                 sinr_oracle(config, ch, sol, k, 2))) -
          config.rate_edge[k];
      CHECK(report.edge_rate_slack[k] == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  SUBCASE("reflection membership slack is reported per element") {
    SystemConfig config = config_knm(1, 2, 3, 0, 0);
    config.reflection_case = ReflectionCase::unit_modulus();
    const ChannelRealization ch = random_channels(config);
    BeamformingSolution sol = random_solution(config);
    sol.phi << Complex(1, 0), std::polar(1.0, 0.3), std::polar(1.5, 0.2);
    const FeasibilityReport report = audit(config, ch, sol);
    CHECK_FALSE(report.feasible);
    CHECK(report.reflect_slack[2] == doctest::Approx(-0.5));
  }
}

TEST_CASE("without irs all model quantities ignore phi") {
  SystemConfig config = config_knm(2, 3, 4);
  config.irs_enabled = false;
  const ChannelRealization ch = random_channels(config);
  BeamformingSolution a = random_solution(config);
  BeamformingSolution b = a;
  b.phi = rand_cvec(4);
  CHECK(sinr_center(config, ch, a, 0) == sinr_center(config, ch, b, 0));
  CHECK(sinr_edge(config, ch, a, 1) == sinr_edge(config, ch, b, 1));
  CHECK(interference_zeta(config, ch, a, 0, kEdge) == interference_zeta(config, ch, b, 0, kEdge));
}

TEST_CASE("reflection projection cases") {
  const Complex inside = std::polar(0.5, kPi / 4);
  CVec z(1);
  z[0] = inside;
  CHECK((project_reflection(z, ReflectionCase::box())[0] - inside) == Complex(0, 0));

  z[0] = std::polar(3.0, kPi / 3);
  CHECK(std::abs(project_reflection(z, ReflectionCase::unit_modulus())[0] -
                 std::polar(1.0, kPi / 3)) < 1e-15);
  CHECK(std::abs(project_reflection(z, ReflectionCase::box())[0] - std::polar(1.0, kPi / 3)) <
        1e-15);

  z[0] = std::polar(1.0, 0.8 * (kPi / 2));
  CHECK(std::abs(project_reflection(z, ReflectionCase::discrete(4))[0] -
                 std::polar(1.0, kPi / 2)) < 1e-15);

  // Zero input falls back to unit modulus at zero phase.
  z[0] = 0;
  CHECK(project_reflection(z, ReflectionCase::unit_modulus())[0] == Complex(1, 0));
  CHECK(project_reflection(z, ReflectionCase::discrete(2))[0] == Complex(1, 0));
  CHECK(project_reflection(z, ReflectionCase::box())[0] == Complex(0, 0));
}

TEST_CASE("projection is no farther than sampled feasible points") {
  std::uniform_real_distribution<Scalar> angle(0, 2 * kPi);
  std::uniform_real_distribution<Scalar> radius(0, 1);
  for (const auto& reflection :
       {ReflectionCase::box(), ReflectionCase::unit_modulus(), ReflectionCase::discrete(4)}) {
    for (int rep = 0; rep < 50; ++rep) {
      CVec z(1);
      z[0] = 2.0 * rand_c();
      const Complex proj = project_reflection(z, reflection)[0];
      const Scalar dist = std::abs(z[0] - proj);
      if (reflection.kind == ReflectionCase::Kind::DiscretePhase) {
        for (int l = 0; l < reflection.levels; ++l) {
          const Complex cand = std::polar(1.0, 2 * kPi * l / reflection.levels);
          CHECK(dist <= std::abs(z[0] - cand) + 1e-12);
        }
      } else {
        for (int s = 0; s < 2000; ++s) {
          const Scalar r = reflection.kind == ReflectionCase::Kind::BoxModulus ? radius(rng) : 1.0;
          const Complex cand = std::polar(r, angle(rng));
          CHECK(dist <= std::abs(z[0] - cand) + 1e-12);
        }
      }
    }
  }
}
