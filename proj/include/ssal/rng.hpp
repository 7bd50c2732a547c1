#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

#include "ssal/errors.hpp"

namespace ssal {

// FNV-1a 64-bit hash over a byte string. Used for seed-stream labels and
// for hashing image bytes into per-image noise seeds.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const double* data, std::size_t n) {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(data),
                                  n * sizeof(double)));
}

// splitmix64 finalizer: a fixed-constant 64-bit mix, used to derive child
// seeds. Child streams are a pure function of (root seed, label) so adding
// a new consumer never perturbs existing streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic random stream.
//
// Generator: std::mt19937_64, whose constants and output sequence are fixed
// by the C++ standard, so streams are identical across platforms and
// standard libraries. No std::*_distribution adaptors are used (their
// sequences are implementation-defined); uniform doubles come from the top
// 53 bits and Gaussians from explicit Box-Muller, both fully specified here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), stream_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Child stream keyed by label: splitmix64(seed XOR fnv1a64(label)).
  Rng split(std::string_view label) const {
    return Rng(splitmix64(seed_ ^ fnv1a64(label)));
  }

  std::uint64_t next_u64() { return stream_(); }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(stream_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. Two uniforms are consumed per value;
  // the sine partner is discarded to keep the draw order strictly
  // sequential and position-independent.
  double gaussian() {
    double u1 = static_cast<double>((stream_() >> 11) + 1) * 0x1.0p-53;  // (0,1]
    double u2 = static_cast<double>(stream_() >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  // Uniform direction on S^{n-1}: normalized Gaussian vector. Redraws on
  // the (measure-zero) near-zero norm event.
  Eigen::VectorXd unit_vector(Eigen::Index n) {
    if (n < 1) throw ContractViolation("unit_vector: n must be >= 1");
    for (int attempt = 0; attempt < 64; ++attempt) {
      Eigen::VectorXd v = gaussian_vector(n);
      double norm = v.norm();
      if (norm > 1e-12) return v / norm;
    }
    throw ContractViolation("unit_vector: repeated zero-norm draws");
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 stream_;
};

}  // namespace ssal
