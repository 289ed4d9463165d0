#include "polyproj/generators.hpp"

#include <stdexcept>
#include <string>

namespace polyproj {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double SplitMix64::uniform01() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double SplitMix64::uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform01(); }

std::uint64_t derive_seed(std::uint64_t master, std::size_t d, std::size_t ell,
                          std::size_t trial) noexcept {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t v : {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(ell),
                          static_cast<std::uint64_t>(trial)}) {
    h = mix64(h + 0x9e3779b97f4a7c15ULL + v);
  }
  return h;
}

std::string_view to_string(ProblemKind k) noexcept {
  return k == ProblemKind::nearest ? "nearest" : "distance";
}

ProblemKind parse_problem_kind(std::string_view s) {
  if (s == "nearest") return ProblemKind::nearest;
  if (s == "distance") return ProblemKind::distance;
  throw std::invalid_argument("unknown problem kind '" + std::string(s) + "'");
}

namespace {

PointCloud shifted_cube(SplitMix64& rng, std::size_t d, std::size_t ell, double offset) {
  PointCloud::Matrix m(static_cast<Eigen::Index>(ell), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double u = rng.uniform(-1.0, 1.0);
      m(i, k) = k == 0 ? offset + 0.01 * u : u;
    }
  }
  return PointCloud(std::move(m));
}

void check_sizes(std::size_t d, std::size_t ell) {
  if (d == 0 || ell == 0) throw std::invalid_argument("generator: d and l must be positive");
}

}  // namespace

ProblemInstance gen_compressed_cube(std::size_t d, std::size_t ell, std::uint64_t seed) {
  check_sizes(d, ell);
  SplitMix64 rng(seed);
  return {ProblemKind::nearest,
          shifted_cube(rng, d, ell, 1.0),
          std::nullopt,
          Vector::Zero(static_cast<Eigen::Index>(d)),
          seed,
          "compressed-cube/" + std::string(SplitMix64::name),
          d,
          ell,
          0};
}

ProblemInstance gen_two_cubes(std::size_t d, std::size_t ell, std::uint64_t seed) {
  check_sizes(d, ell);
  SplitMix64 rng(seed);
  PointCloud p = shifted_cube(rng, d, ell, 1.0);
  PointCloud q = shifted_cube(rng, d, ell, -1.0);
  return {ProblemKind::distance,
          std::move(p),
          std::move(q),
          Vector(),
          seed,
          "two-cubes/" + std::string(SplitMix64::name),
          d,
          ell,
          ell};
}

}  // namespace polyproj
