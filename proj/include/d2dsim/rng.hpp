#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace d2d {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) noexcept
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed derivation used everywhere a child stream is needed:
///   child = splitmix64(parent ^ splitmix64(fnv1a(label) + index))
/// Trial t of a run uses derive_seed(master_seed, "trial", t), so trials are
/// independent of execution order and worker count.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::string_view label,
                                    std::uint64_t index = 0) noexcept
{
  return splitmix64(parent ^ splitmix64(fnv1a(label) + index));
}

/// Stateless uniform in (0, 1) addressed by (seed, index); for values that
/// must not depend on the order they are requested in.
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t index) noexcept
{
  return (static_cast<double>(splitmix64(seed ^ splitmix64(index)) >> 11) + 0.5) * 0x1.0p-53;
}

/// Stateless standard normal (Box-Muller on two counter uniforms).
inline double counter_normal(std::uint64_t seed, std::uint64_t index) noexcept
{
  const double u1 = counter_uniform(seed, 2 * index);
  const double u2 = counter_uniform(seed, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// A labelled random stream. Two streams built from the same (seed, label,
/// index) produce identical sequences.
class SeedStream {
public:
  explicit SeedStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}
  SeedStream(std::uint64_t parent, std::string_view label, std::uint64_t index = 0)
      : SeedStream(derive_seed(parent, label, index)) {}

  SeedStream child(std::string_view label, std::uint64_t index = 0) const
  {
    return SeedStream(seed_, label, index);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi)
  {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  double normal(double sigma)
  {
    return std::normal_distribution<double>(0.0, sigma)(engine_);
  }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

} // namespace d2d
