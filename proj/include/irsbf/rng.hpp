#pragma once

#include "irsbf/types.hpp"

#include <cstdint>
#include <random>

namespace irsbf {

// splitmix64 finalizer, used to mix (master seed, stream id) pairs into
// independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) + 0x9e3779b97f4a7c15ull * (stream + 1));
}

// Counter-based standard complex Gaussian: the draw depends only on
// (stream seed, index), so growing a matrix extends the realization
// instead of re-dealing it. Box-Muller on two splitmix64 uniforms.
inline std::complex<Scalar> indexed_complex_gauss(std::uint64_t stream_seed, std::uint64_t index) {
  const std::uint64_t s1 = splitmix64(stream_seed ^ splitmix64(index + 0x632be59bd9b4e019ull));
  const std::uint64_t s2 = splitmix64(s1);
  const Scalar u1 = (static_cast<Scalar>(s1 >> 11) + 1.0) * 0x1p-53;  // (0,1]
  const Scalar u2 = static_cast<Scalar>(s2 >> 11) * 0x1p-53;          // [0,1)
  const Scalar r = std::sqrt(-std::log(u1));  // variance 1/2 per component
  const Scalar a = 2 * kPi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

// Reproducible N(0,1) / CN(0,1) stream. mt19937_64 output is fully specified
// by the standard; Box-Muller is applied to explicitly constructed uniforms,
// so identical seeds give identical draws on every platform
// (std::normal_distribution would not).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  Scalar next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const Scalar u1 = (static_cast<Scalar>(eng_() >> 11) + 1.0) * 0x1p-53;  // (0,1]
    const Scalar u2 = static_cast<Scalar>(eng_() >> 11) * 0x1p-53;          // [0,1)
    const Scalar r = std::sqrt(-2.0 * std::log(u1));
    const Scalar a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric, zero mean, unit variance: E|z|^2 = 1.
  Complex next_complex() {
    const Scalar re = next();
    const Scalar im = next();
    return {re * kInvSqrt2, im * kInvSqrt2};
  }

  CVec next_complex_vector(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = next_complex();
    return v;
  }

 private:
  static constexpr Scalar kInvSqrt2 = 0.70710678118654752440;
  std::mt19937_64 eng_;
  Scalar spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace irsbf
