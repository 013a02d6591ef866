#include "irsbf/model.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace irsbf {

namespace {

Scalar log2_1p(Scalar x) { return std::log1p(x) / std::log(Scalar(2)); }

void check_indices(const SystemConfig& config, const ChannelRealization& channels, int k, int i) {
  if (k < 0 || k >= config.clusters || (i != kCenter && i != kEdge))
    throw std::out_of_range("cluster/user index out of range");
  if (channels.clusters() != config.clusters)
    throw std::invalid_argument("channel realization does not match the configuration");
}

}  // namespace

Scalar total_power(const BeamformingSolution& solution) {
  Scalar p = 0;
  for (const auto& pair : solution.w) p += pair[kCenter].squaredNorm() + pair[kEdge].squaredNorm();
  return p;
}

CVec effective_channel(const CVec& phi, const CMat& H, const CVec& g, const CVec& h) {
  if (phi.size() == 0) return h;
  if (phi.size() != g.size() || H.rows() != g.size() || H.cols() != h.size())
    throw std::invalid_argument("effective_channel: dimension mismatch");
  // h_hat^H = g^H Phi H + h^H  =>  h_hat = H^H (conj(phi) .* g) + h
  return H.adjoint() * phi.conjugate().cwiseProduct(g) + h;
}

std::vector<std::array<CVec, 2>> effective_channels(const SystemConfig& config,
                                                    const ChannelRealization& channels,
                                                    const CVec& phi) {
  std::vector<std::array<CVec, 2>> out(config.clusters);
  const bool use_irs = config.irs_enabled && phi.size() > 0;
  for (int k = 0; k < config.clusters; ++k)
    for (int i = 0; i < 2; ++i)
      out[k][i] = use_irs ? effective_channel(phi, channels.H, channels.g[k][i], channels.h[k][i])
                          : channels.h[k][i];
  return out;
}

namespace {

Scalar zeta_from(const std::vector<std::array<CVec, 2>>& h_hat,
                 const BeamformingSolution& solution, int k, int i) {
  Scalar zeta = 0;
  const CVec& hk = h_hat[k][i];
  for (std::size_t j = 0; j < solution.w.size(); ++j) {
    if (static_cast<int>(j) == k) continue;
    zeta += std::norm(hk.dot(solution.w[j][kCenter])) + std::norm(hk.dot(solution.w[j][kEdge]));
  }
  return zeta;
}

}  // namespace

Scalar interference_zeta(const SystemConfig& config, const ChannelRealization& channels,
                         const BeamformingSolution& solution, int k, int i) {
  check_indices(config, channels, k, i);
  return zeta_from(effective_channels(config, channels, solution.phi), solution, k, i);
}

Scalar sinr_edge(const SystemConfig& config, const ChannelRealization& channels,
                 const BeamformingSolution& solution, int k) {
  check_indices(config, channels, k, kEdge);
  const auto h_hat = effective_channels(config, channels, solution.phi);
  const CVec& he = h_hat[k][kEdge];
  const Scalar num = std::norm(he.dot(solution.w[k][kEdge]));
  const Scalar den = config.noise_power + std::norm(he.dot(solution.w[k][kCenter])) +
                     zeta_from(h_hat, solution, k, kEdge);
  return num / den;
}

Scalar sinr_center_decoding_edge(const SystemConfig& config, const ChannelRealization& channels,
                                 const BeamformingSolution& solution, int k) {
  check_indices(config, channels, k, kCenter);
  const auto h_hat = effective_channels(config, channels, solution.phi);
  const CVec& hc = h_hat[k][kCenter];
  const Scalar num = std::norm(hc.dot(solution.w[k][kEdge]));
  const Scalar den = config.noise_power + std::norm(hc.dot(solution.w[k][kCenter])) +
                     zeta_from(h_hat, solution, k, kCenter);
  return num / den;
}

Scalar sinr_center(const SystemConfig& config, const ChannelRealization& channels,
                   const BeamformingSolution& solution, int k) {
  check_indices(config, channels, k, kCenter);
  const auto h_hat = effective_channels(config, channels, solution.phi);
  const CVec& hc = h_hat[k][kCenter];
  const Scalar num = std::norm(hc.dot(solution.w[k][kCenter]));
  const Scalar den = config.noise_power + zeta_from(h_hat, solution, k, kCenter);
  return num / den;
}

namespace {

Complex project_one(Complex z, const ReflectionCase& reflection) {
  const Scalar mag = std::abs(z);
  switch (reflection.kind) {
    case ReflectionCase::Kind::BoxModulus:
      return mag <= 1 ? z : z / mag;
    case ReflectionCase::Kind::UnitModulus:
      return mag == 0 ? Complex(1, 0) : z / mag;
    case ReflectionCase::Kind::DiscretePhase: {
      if (mag == 0) return {1, 0};
      const int levels = reflection.levels;
      const Scalar step = 2 * kPi / levels;
      const Scalar raw = std::arg(z) / step;
      // Round half away from zero, then wrap modulo the level count.
      long idx = std::lround(raw);
      idx = ((idx % levels) + levels) % levels;
      const Scalar theta = step * static_cast<Scalar>(idx);
      return {std::cos(theta), std::sin(theta)};
    }
  }
  throw std::logic_error("unknown reflection case");
}

}  // namespace

CVec project_reflection(const CVec& z, const ReflectionCase& reflection) {
  CVec out(z.size());
  for (Eigen::Index m = 0; m < z.size(); ++m) out[m] = project_one(z[m], reflection);
  return out;
}

Scalar membership_slack(Complex phi_m, const ReflectionCase& reflection) {
  switch (reflection.kind) {
    case ReflectionCase::Kind::BoxModulus:
      return 1 - std::abs(phi_m);
    case ReflectionCase::Kind::UnitModulus:
      return -std::abs(std::abs(phi_m) - 1);
    case ReflectionCase::Kind::DiscretePhase:
      return -std::abs(phi_m - project_one(phi_m, reflection));
  }
  throw std::logic_error("unknown reflection case");
}

Scalar FeasibilityReport::min_slack() const {
  Scalar m = std::numeric_limits<Scalar>::infinity();
  if (center_rate_slack.size()) m = std::min(m, center_rate_slack.minCoeff());
  if (edge_rate_slack.size()) m = std::min(m, edge_rate_slack.minCoeff());
  if (reflect_slack.size()) m = std::min(m, reflect_slack.minCoeff());
  return m;
}

void FeasibilityReport::to_csv(std::ostream& os) const {
  auto fmt = [](Scalar v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return std::string(buf);
  };
  os << "feasible,tolerance,min_center_rate_slack,min_edge_rate_slack,min_reflect_slack\n";
  os << (feasible ? 1 : 0) << ',' << fmt(tolerance) << ','
     << fmt(center_rate_slack.size() ? center_rate_slack.minCoeff() : 0) << ','
     << fmt(edge_rate_slack.size() ? edge_rate_slack.minCoeff() : 0) << ','
     << (reflect_slack.size() ? fmt(reflect_slack.minCoeff()) : std::string()) << '\n';
}

FeasibilityReport audit(const SystemConfig& config, const ChannelRealization& channels,
                        const BeamformingSolution& solution, Scalar tol) {
  config.validate();
  FeasibilityReport report;
  report.tolerance = tol;
  report.center_rate_slack.resize(config.clusters);
  report.edge_rate_slack.resize(config.clusters);
  for (int k = 0; k < config.clusters; ++k) {
    const Scalar rate_c = log2_1p(sinr_center(config, channels, solution, k));
    const Scalar sinr_e =
        std::min(sinr_edge(config, channels, solution, k),
                 sinr_center_decoding_edge(config, channels, solution, k));
    report.center_rate_slack[k] = rate_c - config.rate_center[k];
    report.edge_rate_slack[k] = log2_1p(sinr_e) - config.rate_edge[k];
  }
  if (config.irs_enabled) {
    report.reflect_slack.resize(solution.phi.size());
    for (Eigen::Index m = 0; m < solution.phi.size(); ++m)
      report.reflect_slack[m] = membership_slack(solution.phi[m], config.reflection_case);
  }
  report.feasible = report.min_slack() >= -tol;
  return report;
}

void finalize_solution(const SystemConfig& config, const ChannelRealization& channels,
                       BeamformingSolution& solution) {
  solution.total_power = total_power(solution);
  solution.rates.resize(config.clusters);
  for (int k = 0; k < config.clusters; ++k) {
    solution.rates[k][kCenter] = log2_1p(sinr_center(config, channels, solution, k));
    solution.rates[k][kEdge] =
        log2_1p(std::min(sinr_edge(config, channels, solution, k),
                         sinr_center_decoding_edge(config, channels, solution, k)));
  }
}

}  // namespace irsbf
