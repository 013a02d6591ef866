#include "irsbf/channel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irsbf {

Scalar pathloss_gain(const PathLossSpec& spec) {
  if (!(spec.distance > 0)) throw std::domain_error("path loss distance must be positive");
  if (!(spec.exponent > 0)) throw std::domain_error("path loss exponent must be positive");
  if (!(spec.reference_gain > 0)) throw std::domain_error("reference gain must be positive");
  return spec.reference_gain * std::pow(spec.distance, -spec.exponent);
}

ChannelGeometry ChannelGeometry::defaults() {
  ChannelGeometry geo;
  const Scalar c0 = 1e-3;
  geo.bs_irs = {c0, 30.0, 2.5};
  geo.irs_user[kCenter] = {c0, 50.0, 2.5};
  geo.irs_user[kEdge] = {c0, 70.0, 2.5};
  geo.bs_user[kCenter] = {c0, 50.0, 3.5};
  geo.bs_user[kEdge] = {c0, 80.0, 3.5};
  return geo;
}

std::pair<CVec, CVec> correlated_gaussian_pair(Eigen::Index length, Scalar rho,
                                               GaussianStream& rng) {
  if (!(rho >= 0 && rho <= 1)) throw std::domain_error("correlation coefficient must be in [0,1]");
  CVec a = rng.next_complex_vector(length);
  CVec e = rng.next_complex_vector(length);
  CVec b = rho * a + std::sqrt(1 - rho * rho) * e;
  return {std::move(a), std::move(b)};
}

namespace {

// Correlated pair from two dedicated substreams (base, innovation), so the
// base draw is unaffected by whether a partner exists. Entries are indexed,
// not sequential: lengthening the vectors extends the realization.
std::pair<CVec, CVec> correlated_pair_streams(Eigen::Index length, Scalar rho, std::uint64_t master,
                                              std::uint64_t base_stream) {
  const std::uint64_t seed_a = derive_stream_seed(master, base_stream);
  const std::uint64_t seed_e = derive_stream_seed(master, base_stream + 1);
  const Scalar mix = std::sqrt(1 - rho * rho);
  CVec a(length), b(length);
  for (Eigen::Index i = 0; i < length; ++i) {
    a[i] = indexed_complex_gauss(seed_a, i);
    b[i] = rho * a[i] + mix * indexed_complex_gauss(seed_e, i);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

ChannelRealization generate(const SystemConfig& config, const ChannelGeometry& geometry,
                            std::uint64_t seed) {
  config.validate();
  const int n = config.bs_antennas, m = config.irs_elements, k_count = config.clusters;

  ChannelRealization ch;
  ch.H.resize(m, n);
  {
    const std::uint64_t stream = derive_stream_seed(seed, 0);
    const Scalar a0 = pathloss_gain(geometry.bs_irs);
    for (Eigen::Index col = 0; col < n; ++col)
      for (Eigen::Index row = 0; row < m; ++row)
        ch.H(row, col) = a0 * indexed_complex_gauss(
                                  stream, (static_cast<std::uint64_t>(row) << 32) |
                                              static_cast<std::uint64_t>(col));
  }

  ch.h.resize(k_count);
  ch.g.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    const std::uint64_t base = 1 + 4 * static_cast<std::uint64_t>(k);
    auto [hc, he] =
        correlated_pair_streams(n, geometry.correlation.rho_direct, seed, base);
    auto [gc, ge] =
        correlated_pair_streams(m, geometry.correlation.rho_reflect, seed, base + 2);
    ch.h[k][kCenter] = pathloss_gain(geometry.bs_user[kCenter]) * hc;
    ch.h[k][kEdge] = pathloss_gain(geometry.bs_user[kEdge]) * he;
    ch.g[k][kCenter] = pathloss_gain(geometry.irs_user[kCenter]) * gc;
    ch.g[k][kEdge] = pathloss_gain(geometry.irs_user[kEdge]) * ge;
  }
  return ch;
}

ChannelRealization generate(const SystemConfig& config, std::uint64_t seed) {
  return generate(config, ChannelGeometry::defaults(), seed);
}

namespace {

std::string format_cell(Complex z) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

Complex parse_cell(const std::string& cell) {
  if (cell.empty() || cell.back() != 'j')
    throw std::runtime_error("malformed channel cell: " + cell);
  // The imaginary part starts at the last sign not belonging to an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t i = cell.size() - 1; i > 0; --i) {
    const char c = cell[i];
    if ((c == '+' || c == '-') && cell[i - 1] != 'e' && cell[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string::npos) throw std::runtime_error("malformed channel cell: " + cell);
  return {std::stod(cell.substr(0, split)), std::stod(cell.substr(split, cell.size() - split - 1))};
}

void write_row(std::ostream& os, const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ' ';
    os << format_cell(v[i]);
  }
  os << '\n';
}

CVec read_row(std::istream& is, Eigen::Index n) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("unexpected end of channel file");
  std::istringstream ss(line);
  CVec v(n);
  std::string cell;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(ss >> cell)) throw std::runtime_error("short channel row");
    v[i] = parse_cell(cell);
  }
  return v;
}

}  // namespace

void write_channels(std::ostream& os, const ChannelRealization& ch) {
  const int k_count = ch.clusters();
  const Eigen::Index m = ch.H.rows(), n = ch.H.cols();
  os << "channels K " << k_count << " N " << n << " M " << m << '\n';
  os << "H\n";
  for (Eigen::Index row = 0; row < m; ++row) write_row(os, ch.H.row(row).transpose());
  for (int k = 0; k < k_count; ++k) {
    for (int i = 0; i < 2; ++i) {
      os << "h " << k << ' ' << (i == kCenter ? 'c' : 'e') << '\n';
      write_row(os, ch.h[k][i]);
    }
    for (int i = 0; i < 2; ++i) {
      os << "g " << k << ' ' << (i == kCenter ? 'c' : 'e') << '\n';
      write_row(os, ch.g[k][i]);
    }
  }
}

ChannelRealization read_channels(std::istream& is) {
  std::string word;
  int k_count = 0;
  Eigen::Index n = 0, m = 0;
  is >> word;
  if (word != "channels") throw std::runtime_error("not a channel fixture file");
  is >> word >> k_count >> word >> n >> word >> m;
  is >> word;  // "H"
  is.ignore();
  if (word != "H" || k_count < 1 || n < 1 || m < 1)
    throw std::runtime_error("malformed channel header");

  ChannelRealization ch;
  ch.H.resize(m, n);
  for (Eigen::Index row = 0; row < m; ++row) ch.H.row(row) = read_row(is, n).transpose();
  ch.h.resize(k_count);
  ch.g.resize(k_count);
  for (int k = 0; k < k_count; ++k) {
    for (int rep = 0; rep < 4; ++rep) {
      std::string kind, user;
      int kk = 0;
      is >> kind >> kk >> user;
      is.ignore();
      if (kk != k || (user != "c" && user != "e"))
        throw std::runtime_error("malformed channel block header");
      const int i = (user == "c") ? kCenter : kEdge;
      if (kind == "h")
        ch.h[k][i] = read_row(is, n);
      else if (kind == "g")
        ch.g[k][i] = read_row(is, m);
      else
        throw std::runtime_error("malformed channel block kind: " + kind);
    }
  }
  return ch;
}

}  // namespace irsbf
