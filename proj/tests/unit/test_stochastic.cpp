#include <cmath>
#include <vector>

#include <doctest.h>

#include "forkjoin/error.hpp"
#include "forkjoin/stochastic.hpp"

using namespace forkjoin;

namespace {

struct Moments {
  double mean = 0, scv = 0, se_mean = 0, se_scv = 0;
};

// Empirical mean/scv with batch-based standard errors (100 batches), so the
// 3-standard-error assertions do not depend on closed-form fourth moments.
Moments sample_moments(const DistributionSpec& spec, std::uint64_t seed, int n) {
  RandomStream stream(seed);
  const int batches = 100;
  const int per = n / batches;
  std::vector<double> bmean(batches), bscv(batches);
  double total = 0, total_sq = 0;
  for (int b = 0; b < batches; ++b) {
    double s = 0, s2 = 0;
    for (int i = 0; i < per; ++i) {
      const double x = stream.sample(spec);
      s += x;
      s2 += x * x;
    }
    const double m = s / per;
    const double var = s2 / per - m * m;
    bmean[b] = m;
    bscv[b] = m > 0 ? var / (m * m) : 0;
    total += s;
    total_sq += s2;
  }
  Moments out;
  out.mean = total / (per * batches);
  const double var = total_sq / (per * batches) - out.mean * out.mean;
  out.scv = var / (out.mean * out.mean);
  double vm = 0, vs = 0;
  for (int b = 0; b < batches; ++b) {
    vm += (bmean[b] - out.mean) * (bmean[b] - out.mean);
    vs += (bscv[b] - out.scv) * (bscv[b] - out.scv);
  }
  out.se_mean = std::sqrt(vm / (batches - 1) / batches);
  out.se_scv = std::sqrt(vs / (batches - 1) / batches);
  return out;
}

}  // namespace

TEST_CASE("distribution construction pins the stated moments") {
  const auto erlang = make_erlang(3, 0.95);
  CHECK(erlang.mean == 0.95);
  CHECK(erlang.scv() == doctest::Approx(1.0 / 3.0));

  const auto gamma = make_gamma_scv(1.0, 3.0);
  CHECK(gamma.scv() == 3.0);

  const auto exp = make_exponential(0.5);
  CHECK(exp.scv() == 1.0);
  CHECK(exp.rate() == doctest::Approx(2.0));

  CHECK(make_deterministic(2.0).scv() == 0.0);
}

TEST_CASE("invalid distribution parameters are rejected") {
  CHECK_THROWS_AS(make_exponential(0.0), ConfigError);
  CHECK_THROWS_AS(make_exponential(-1.0), ConfigError);
  CHECK_THROWS_AS(make_gamma_scv(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(make_gamma_scv(1.0, -3.0), ConfigError);
  CHECK_THROWS_AS(make_erlang(0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_distribution(DistFamily::kGammaScv, 1.0), ConfigError);
}

TEST_CASE("draws are strictly positive for every family") {
  const DistributionSpec specs[] = {
      make_exponential(0.01), make_erlang(3, 0.5), make_gamma_scv(0.2, 3.0),
      make_deterministic(0.7)};
  RandomStream stream(123);
  for (const auto& spec : specs)
    for (int i = 0; i < 10000; ++i) CHECK(stream.sample(spec) > 0.0);
}

TEST_CASE("identical seed and spec replay bit-identical sequences") {
  const auto spec = make_gamma_scv(1.0, 3.0);
  RandomStream s1(derive_seed(42, "service/A"));
  RandomStream s2(derive_seed(42, "service/A"));
  for (int i = 0; i < 1000; ++i) CHECK(s1.sample(spec) == s2.sample(spec));
  CHECK(s1.draws() == 1000);
}

TEST_CASE("empirical mean and scv match the stated parameters within 3 standard errors") {
  struct Case {
    DistributionSpec spec;
    const char* name;
  };
  const Case cases[] = {
      {make_exponential(1.0), "exponential"},
      {make_erlang(3, 0.95), "erlang3"},
      {make_gamma_scv(1.0, 3.0), "gamma_scv3"},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const Moments m = sample_moments(c.spec, derive_seed(7, c.name), 1000000);
    CHECK(std::abs(m.mean - c.spec.mean) <= 3.0 * m.se_mean);
    CHECK(std::abs(m.scv - c.spec.scv()) <= 3.0 * m.se_scv);
    // The law-of-large-numbers bound on the mean at n = 1e6.
    CHECK(std::abs(m.mean - c.spec.mean) <= 0.01 * c.spec.mean);
  }
  RandomStream det(1);
  const auto spec = make_deterministic(2.5);
  for (int i = 0; i < 100; ++i) CHECK(det.sample(spec) == 2.5);
}

TEST_CASE("streams with distinct derived seeds are uncorrelated") {
  RandomStream sx(derive_seed(99, "arrival/a"));
  RandomStream sy(derive_seed(99, "arrival/b"));
  const auto spec = make_exponential(1.0);
  const int n = 1000000;
  double sum_x = 0, sum_y = 0, sum_xx = 0, sum_yy = 0, sum_xy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sx.sample(spec);
    const double y = sy.sample(spec);
    sum_x += x;
    sum_y += y;
    sum_xx += x * x;
    sum_yy += y * y;
    sum_xy += x * y;
  }
  const double mx = sum_x / n, my = sum_y / n;
  const double corr = (sum_xy / n - mx * my) /
                      std::sqrt((sum_xx / n - mx * mx) * (sum_yy / n - my * my));
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("seed derivation separates labels and bases") {
  CHECK(derive_seed(1, "service/A") != derive_seed(1, "service/B"));
  CHECK(derive_seed(1, "service/A") != derive_seed(2, "service/A"));
  CHECK(derive_seed(1, "service/A") == derive_seed(1, "service/A"));
}
