#pragma once

#include <cstdint>
#include <string_view>

namespace longtail::rng {

/// xoshiro256++ with splitmix64 seeding. Hand-rolled so that streams are
/// identical across compilers and standard libraries; all samplers below are
/// exact (no approximate large-count branches).
class Engine {
 public:
  explicit Engine(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform on [0,1), 53-bit resolution.
  double uniform();
  /// Uniform on the open interval (0,1); never returns an endpoint.
  double uniform_open();
  /// Uniform on (a,b).
  double uniform(double a, double b);

  /// Standard normal via inverse CDF of uniform_open().
  double normal();
  double normal(double mean, double sd);

  /// Gamma(shape, rate) by Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape, double rate);

  /// Exact Poisson(mean) by Knuth's product method, chunked so the running
  /// product never underflows.
  long poisson(double mean);

  double lognormal(double mu_log, double sigma_log);

 private:
  std::uint64_t s_[4];
};

/// Derives the seed of a named sub-stream from a master seed, e.g.
/// substream(seed, "chain", 3). Stable across platforms.
std::uint64_t substream(std::uint64_t master, std::string_view tag, std::uint64_t index);

}  // namespace longtail::rng
