#pragma once

#include <array>
#include <cstdint>

namespace copmed {

// Counter-tracked xoshiro256++ stream.  Streams are keyed by (seed, stream id):
// distinct ids give statistically independent sequences, and a stream replayed
// from the same key reproduces the same draws on every platform (the generator
// is integer-only and the double conversion uses the top 53 bits).
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();

  // Uniform on (0,1); never returns an exact endpoint.
  double uniform();
  // Uniform on (a,b).
  double uniform(double a, double b);
  // Standard normal via the inverse CDF (keeps draws platform-stable).
  double normal();
  double normal(double mean, double sd);
  // Exponential with unit rate.
  double exponential();
  // Gamma(shape, rate); Marsaglia-Tsang with the shape<1 boost.
  double gamma(double shape, double rate);
  double beta(double a, double b);
  double chi_squared(double df);
  // Index in [0, weights.size()) proportional to the (unnormalized) weights.
  int categorical(const double* weights, int n);
  bool bernoulli(double p);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  // Number of raw 64-bit words consumed so far.
  std::uint64_t position() const { return counter_; }

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace copmed
