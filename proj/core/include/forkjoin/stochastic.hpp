#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace forkjoin {

// Interarrival / service time families. Erlang-k, exponential and
// gamma-with-target-scv cover the low / moderate / high variability settings
// of the experiment design; the deterministic family exists so engine tests
// can be checked by hand.
enum class DistFamily {
  kExponential,
  kErlangK,
  kGammaScv,
  kDeterministic,
};

struct DistributionSpec {
  DistFamily family = DistFamily::kExponential;
  double mean = 1.0;
  double scv_param = 1.0;  // gamma only: target squared coefficient of variation
  int k = 1;               // erlang only: number of stages

  double rate() const { return 1.0 / mean; }
  // Implied squared coefficient of variation of the family.
  double scv() const;
  std::string describe() const;

  bool operator==(const DistributionSpec&) const = default;
};

// Validates parameters. scv is required for the gamma family, k for erlang.
DistributionSpec make_distribution(DistFamily family, double mean,
                                   double scv = -1.0, int k = 0);

DistributionSpec make_exponential(double mean);
DistributionSpec make_erlang(int k, double mean);
DistributionSpec make_gamma_scv(double mean, double scv);
DistributionSpec make_deterministic(double mean);

// Seed derivation helpers: independent streams come from mixing a base seed
// with a hash of the stream label, so experiment layouts are reproducible.
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t mix64(std::uint64_t x);  // splitmix64 finalizer
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

// A replication-owned random stream. Identical (seed, spec) pairs produce
// bit-identical sequences; the draw counter counts top-level draws.
class RandomStream {
 public:
  RandomStream() : RandomStream(0) {}
  explicit RandomStream(std::uint64_t seed) : gen_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  // Uniform on the open interval (0, 1).
  double uniform() {
    ++draws_;
    return raw_uniform();
  }

  // Standard normal via Box-Muller (two raw uniforms per draw).
  double normal();

  // One variate from the given family; strictly positive; advances the
  // counter by one.
  double sample(const DistributionSpec& spec);

 private:
  double raw_uniform() {
    // (x >> 11) spans 53 bits; the half-step offset keeps us strictly inside
    // (0, 1) so logarithms never see 0 or 1.
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double gamma_variate(double shape);

  std::mt19937_64 gen_;
  std::uint64_t seed_ = 0;
  std::uint64_t draws_ = 0;
};

inline double sample(RandomStream& stream, const DistributionSpec& spec) {
  return stream.sample(spec);
}

}  // namespace forkjoin
