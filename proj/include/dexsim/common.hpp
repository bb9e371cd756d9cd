#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dexsim {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;
using Isometry = Eigen::Isometry3d;

/// Thrown when a caller violates a documented precondition.
class ContractViolation : public std::runtime_error {
 public:
  explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a config file or experiment setup is invalid.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

/// sign with sign(0) = 0, used by the dry-friction torque term.
template <typename T>
T sign0(T x) {
  return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0));
}

template <typename T>
T clamp(T x, T lo, T hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// ---------------------------------------------------------------------------
// Seeded RNG.
//
// All draws go through fixed algorithms (53-bit uniform, Box-Muller normal)
// so that trajectories are reproducible bit-for-bit across reruns and worker
// counts. Every subsystem derives its stream from a single run seed via
// stable string labels.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stable label -> stream derivation (FNV-1a mixed through splitmix64).
inline std::uint64_t seed_split(std::uint64_t base, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = base ^ h;
  return splitmix64(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    // splitmix-expanded state avoids correlated streams for nearby seeds
    std::uint64_t s = seed;
    s0_ = splitmix64(s);
    s1_ = splitmix64(s);
    if (s0_ == 0 && s1_ == 0) s1_ = 1;
  }

  /// xoshiro-style 64-bit output (xorshift128+).
  std::uint64_t next_u64() {
    std::uint64_t x = s0_;
    const std::uint64_t y = s1_;
    s0_ = y;
    x ^= x << 23;
    s1_ = x ^ y ^ (x >> 17) ^ (y >> 26);
    return s1_ + y;
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    return n == 0 ? 0 : next_u64() % n;
  }

  /// Standard normal via Box-Muller (fixed two-draw cost, no rejection).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniformly distributed unit vector.
  Vec3 unit_vector() {
    // Marsaglia: z uniform, azimuth uniform
    const double z = uniform(-1.0, 1.0);
    const double phi = uniform(0.0, 2.0 * M_PI);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

 private:
  std::uint64_t s0_ = 1;
  std::uint64_t s1_ = 2;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Quintic minimum-jerk interpolant, s(0)=0, s(1)=1, zero vel/acc at both ends.
template <typename T>
T min_jerk(T tau) {
  const T t3 = tau * tau * tau;
  return t3 * (T(10) + tau * (T(-15) + T(6) * tau));
}

}  // namespace dexsim
