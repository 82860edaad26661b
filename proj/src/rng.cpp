#include "longtail/rng.hpp"

#include <cmath>

#include "longtail/dist.hpp"

namespace longtail::rng {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the tag bytes, folded with the index.
inline std::uint64_t hash_tag(std::string_view tag, std::uint64_t index) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  h ^= index + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

Engine::Engine(std::uint64_t seed) {
  std::uint64_t s = seed;
  for (auto& word : s_) word = splitmix64(s);
}

std::uint64_t Engine::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Engine::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Engine::uniform_open() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

double Engine::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Engine::normal() { return dist::norm_quantile(uniform_open()); }

double Engine::normal(double mean, double sd) { return mean + sd * normal(); }

double Engine::gamma(double shape, double rate) {
  if (shape < 1.0) {
    const double boost = std::pow(uniform_open(), 1.0 / shape);
    return gamma(shape + 1.0, rate) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

long Engine::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  long total = 0;
  // Chunking keeps exp(-chunk) far from underflow for any mean.
  while (mean > 30.0) {
    const double chunk = 30.0;
    const double limit = std::exp(-chunk);
    long k = 0;
    double prod = uniform_open();
    while (prod > limit) {
      ++k;
      prod *= uniform_open();
    }
    total += k;
    mean -= chunk;
  }
  const double limit = std::exp(-mean);
  long k = 0;
  double prod = uniform_open();
  while (prod > limit) {
    ++k;
    prod *= uniform_open();
  }
  return total + k;
}

double Engine::lognormal(double mu_log, double sigma_log) { return std::exp(normal(mu_log, sigma_log)); }

std::uint64_t substream(std::uint64_t master, std::string_view tag, std::uint64_t index) {
  std::uint64_t s = master ^ hash_tag(tag, index);
  return splitmix64(s);
}

}  // namespace longtail::rng
