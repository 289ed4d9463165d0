#pragma once

// Seeded problem generators. Instances depend only on (d, l, seed), never on
// the platform or the standard library's distributions.

#include "polyproj/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace polyproj {

/// SplitMix64 (Steele, Lea, Flood 2014): state += 0x9e3779b97f4a7c15, then the
/// 64-bit finaliser. Doubles take the top 53 bits.
class SplitMix64 {
 public:
  static constexpr std::string_view name = "splitmix64-v1";

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform on [0, 1).
  double uniform01() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;

 private:
  std::uint64_t state_;
};

/// SplitMix64 finaliser, a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Per-trial seed from the suite's master seed; independent of solver and mode.
std::uint64_t derive_seed(std::uint64_t master, std::size_t d, std::size_t ell,
                          std::size_t trial) noexcept;

enum class ProblemKind { nearest, distance };

std::string_view to_string(ProblemKind k) noexcept;
ProblemKind parse_problem_kind(std::string_view s);

struct ProblemInstance {
  ProblemKind kind;
  PointCloud cloud_p;
  std::optional<PointCloud> cloud_q;  // distance problems only
  Vector z;                           // nearest problems only
  std::uint64_t seed = 0;
  std::string generator_name;
  std::size_t d = 0;
  std::size_t ell = 0;
  std::size_t m = 0;
};

/// x_i = (1 + 0.01 u_1, u_2, ..., u_d) with u uniform on [-1, 1]^d, z = 0.
ProblemInstance gen_compressed_cube(std::size_t d, std::size_t ell, std::uint64_t seed);

/// P as above; Q with first coordinate -1 + 0.01 u_1. One stream draws all of
/// P, then all of Q.
ProblemInstance gen_two_cubes(std::size_t d, std::size_t ell, std::uint64_t seed);

}  // namespace polyproj
