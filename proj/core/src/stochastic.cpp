#include "forkjoin/stochastic.hpp"

#include <cmath>
#include <numbers>

#include "forkjoin/error.hpp"

namespace forkjoin {

double DistributionSpec::scv() const {
  switch (family) {
    case DistFamily::kExponential: return 1.0;
    case DistFamily::kErlangK: return 1.0 / static_cast<double>(k);
    case DistFamily::kGammaScv: return scv_param;
    case DistFamily::kDeterministic: return 0.0;
  }
  return 0.0;
}

std::string DistributionSpec::describe() const {
  switch (family) {
    case DistFamily::kExponential: return "exponential(mean=" + std::to_string(mean) + ")";
    case DistFamily::kErlangK:
      return "erlang(k=" + std::to_string(k) + ", mean=" + std::to_string(mean) + ")";
    case DistFamily::kGammaScv:
      return "gamma_scv(mean=" + std::to_string(mean) + ", scv=" + std::to_string(scv_param) + ")";
    case DistFamily::kDeterministic: return "deterministic(mean=" + std::to_string(mean) + ")";
  }
  return "?";
}

DistributionSpec make_distribution(DistFamily family, double mean, double scv, int k) {
  if (!(mean > 0.0)) throw ConfigError("distribution mean must be > 0");
  DistributionSpec spec;
  spec.family = family;
  spec.mean = mean;
  switch (family) {
    case DistFamily::kExponential:
    case DistFamily::kDeterministic:
      break;
    case DistFamily::kErlangK:
      if (k < 1) throw ConfigError("erlang distribution requires k >= 1");
      spec.k = k;
      break;
    case DistFamily::kGammaScv:
      if (!(scv > 0.0)) throw ConfigError("gamma distribution requires scv > 0");
      spec.scv_param = scv;
      break;
  }
  return spec;
}

DistributionSpec make_exponential(double mean) {
  return make_distribution(DistFamily::kExponential, mean);
}
DistributionSpec make_erlang(int k, double mean) {
  return make_distribution(DistFamily::kErlangK, mean, -1.0, k);
}
DistributionSpec make_gamma_scv(double mean, double scv) {
  return make_distribution(DistFamily::kGammaScv, mean, scv);
}
DistributionSpec make_deterministic(double mean) {
  return make_distribution(DistFamily::kDeterministic, mean);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  return mix64(base ^ fnv1a64(label));
}

double RandomStream::normal() {
  ++draws_;
  const double u1 = raw_uniform();
  const double u2 = raw_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Marsaglia-Tsang squeeze method; the shape < 1 case uses the standard boost
// G(a) = G(a+1) * U^{1/a}.
double RandomStream::gamma_variate(double shape) {
  if (shape < 1.0) {
    const double u = raw_uniform();
    return gamma_variate(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      const double u1 = raw_uniform();
      const double u2 = raw_uniform();
      x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = raw_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RandomStream::sample(const DistributionSpec& spec) {
  ++draws_;
  switch (spec.family) {
    case DistFamily::kDeterministic:
      return spec.mean;
    case DistFamily::kExponential:
      return -spec.mean * std::log(raw_uniform());
    case DistFamily::kErlangK: {
      // Sum of k exponentials with mean mean/k, folded into one log.
      double prod = 1.0;
      for (int i = 0; i < spec.k; ++i) prod *= raw_uniform();
      return -(spec.mean / spec.k) * std::log(prod);
    }
    case DistFamily::kGammaScv: {
      const double shape = 1.0 / spec.scv_param;
      const double scale = spec.mean * spec.scv_param;
      return scale * gamma_variate(shape);
    }
  }
  throw Error("unreachable distribution family");
}

}  // namespace forkjoin
