#include "copmed/rng.hpp"

#include <cmath>
#include <stdexcept>

#include "copmed/normal.hpp"

namespace copmed {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t key = seed ^ (stream_id * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL);
  for (auto& w : state_) w = splitmix64(key);
  // All-zero state is invalid for xoshiro; splitmix cannot emit four zero
  // words for any key, so no check is needed beyond this comment.
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  // 53-bit mantissa in (0,1): offset by half an ulp so 0 is excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::uniform(double a, double b) { return a + (b - a) * uniform(); }

double RngStream::normal() { return norm_quantile(uniform()); }

double RngStream::normal(double mean, double sd) { return mean + sd * normal(); }

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape, double rate) {
  if (shape <= 0 || rate <= 0) throw std::invalid_argument("gamma: shape and rate must be > 0");
  if (shape < 1.0) {
    // Boost: draw with shape+1 and scale by u^(1/shape).
    double g = gamma(shape + 1.0, 1.0);
    double u = uniform();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = normal();
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::beta(double a, double b) {
  double x = gamma(a, 1.0);
  double y = gamma(b, 1.0);
  return x / (x + y);
}

double RngStream::chi_squared(double df) { return gamma(0.5 * df, 0.5); }

int RngStream::categorical(const double* weights, int n) {
  double total = 0;
  for (int i = 0; i < n; ++i) total += weights[i];
  if (!(total > 0)) throw std::invalid_argument("categorical: nonpositive weight total");
  double u = uniform() * total;
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    acc += weights[i];
    if (u <= acc) return i;
  }
  return n - 1;
}

bool RngStream::bernoulli(double p) { return uniform() < p; }

}  // namespace copmed
