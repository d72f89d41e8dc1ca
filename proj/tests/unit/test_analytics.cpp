#include <cmath>

#include <doctest.h>

#include "forkjoin/analytics.hpp"
#include "forkjoin/error.hpp"
#include "forkjoin/stats.hpp"
#include "test_util.hpp"

using namespace forkjoin;

// ---------------------------------------------------------------------------
// reflection map

TEST_CASE("reflecting the zero path yields zero") {
  Path x(0.0);
  x.set(1.0, 0.0);
  const Reflected r = reflect(x);
  for (double t : {0.0, 0.5, 1.0, 2.0}) {
    CHECK(r.phi.value(t) == 0.0);
    CHECK(r.psi.value(t) == 0.0);
  }
}

TEST_CASE("nonnegative paths need no reflection") {
  Path x(2.0);
  x.set(1.0, 0.5);
  x.set(2.0, 3.0);
  const Reflected r = reflect(x);
  for (double t : {0.0, 0.9, 1.5, 2.5}) {
    CHECK(r.phi.value(t) == x.value(t));
    CHECK(r.psi.value(t) == 0.0);
  }
}

TEST_CASE("a negative excursion is pushed back to zero") {
  Path x(1.0);
  x.set(1.0, -1.0);
  const Reflected r = reflect(x);
  CHECK(r.psi.value(0.5) == 0.0);
  CHECK(r.psi.value(1.5) == 1.0);
  CHECK(r.phi.value(0.5) == 1.0);
  CHECK(r.phi.value(1.5) == 0.0);
}

TEST_CASE("reflection properties hold on random piecewise-constant paths") {
  RandomStream rng(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const Path x = testutil::random_path(rng, 30, 10.0, -3.0, 3.0);
    const Reflected r = reflect(x);
    CHECK(r.psi.value(0.0) == std::max(-x.initial_value(), 0.0));
    double prev_psi = -1.0;
    auto ts = r.psi.times();
    auto psis = r.psi.values();
    auto phis = r.phi.values();
    for (std::size_t i = 0; i < ts.size(); ++i) {
      CHECK(phis[i] >= 0.0);
      CHECK(psis[i] >= prev_psi);
      if (i > 0 && psis[i] > psis[i - 1]) CHECK(phis[i] == 0.0);  // complementarity
      prev_psi = psis[i];
    }
  }
}

TEST_CASE("reflection is Lipschitz in the uniform norm") {
  RandomStream rng(77);
  for (int rep = 0; rep < 500; ++rep) {
    const Path x = testutil::random_path(rng, 25, 10.0, -3.0, 3.0);
    const Path y = testutil::random_path(rng, 25, 10.0, -3.0, 3.0);
    const Reflected rx = reflect(x);
    const Reflected ry = reflect(y);
    const double dxy = sup_norm_distance(x, y, 10.0);
    CHECK(sup_norm_distance(rx.phi, ry.phi, 10.0) <= 2.0 * dxy + 1e-12);
    CHECK(sup_norm_distance(rx.psi, ry.psi, 10.0) <= dxy + 1e-12);
  }
}

// ---------------------------------------------------------------------------
// two-type workload split

TEST_CASE("closed-form split matches the grid oracle on the worked example") {
  const DcpInstance inst{2.0, 0.0, 5.0, 1.0, 1.0, 2.0, 1.0};
  const DcpSplit s = dcp_closed_form_solve(inst);
  CHECK(s.q4 == 2.0);
  CHECK(s.q5 == 3.0);
  const GridSolution g = dcp_grid_oracle(inst, 1e-3);
  CHECK(std::abs(g.q4 - s.q4) <= 1e-3 + 1e-12);
  CHECK(std::abs(g.q5 - s.q5) <= 1e-3 + 1e-12);
  CHECK(dcp_objective(inst, s.q4, s.q5) <= g.objective + 1e-12);
}

TEST_CASE("all workload is held upstream when it fits") {
  const DcpSplit s = dcp_closed_form_solve({5.0, 0.0, 3.0, 1.0, 1.0, 2.0, 1.0});
  CHECK(s.q4 == 3.0);
  CHECK(s.q5 == 0.0);
}

TEST_CASE("an empty pacing buffer pushes all workload to the other type") {
  const DcpSplit s = dcp_closed_form_solve({0.0, 0.0, 4.0, 1.0, 1.0, 2.0, 1.0});
  CHECK(s.q4 == 0.0);
  CHECK(s.q5 == 4.0);
}

TEST_CASE("violated cost ordering is an input error") {
  CHECK_THROWS_AS(dcp_closed_form_solve({1, 1, 1, 1.0, 2.0, 1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(dcp_closed_form_solve({-1, 0, 1, 1, 1, 2, 1}), ConfigError);
}

TEST_CASE("grid oracle handles the empty workload") {
  const GridSolution g = dcp_grid_oracle({1.0, 1.0, 0.0, 1.0, 1.0, 2.0, 1.0}, 1e-3);
  CHECK(g.q4 == 0.0);
  CHECK(g.q5 == 0.0);
  CHECK(g.objective == 0.0);
}

TEST_CASE("closed form agrees with the oracle on random instances") {
  RandomStream rng(5);
  const double step = 1e-3;
  for (int rep = 0; rep < 200; ++rep) {
    DcpInstance inst;
    inst.q3 = rng.uniform();
    inst.q6 = rng.uniform();
    inst.w4 = rng.uniform();
    inst.mu_A = 0.5 + 1.5 * rng.uniform();
    inst.mu_B = 0.5 + 1.5 * rng.uniform();
    inst.h_b = 0.1 + rng.uniform();
    inst.h_a = inst.h_b * inst.mu_B / inst.mu_A * (1.0 + rng.uniform());
    const DcpSplit s = dcp_closed_form_solve(inst);
    const double closed = dcp_objective(inst, s.q4, s.q5);
    const GridSolution g = dcp_grid_oracle(inst, step);
    const double tol = (inst.h_a + inst.h_b * inst.mu_A / inst.mu_B) * step;
    CHECK(closed <= g.objective + 1e-12);  // the oracle explores a subset
    CHECK(g.objective <= closed + tol);
  }
}

// ---------------------------------------------------------------------------
// fork extension

TEST_CASE("fork split clamps to the largest upstream branch") {
  const DcpSplit s = fork_dcp_solve({5.0, 2.0, 1.0, 1.0, 1.0, 1.0, 1, 1});
  CHECK(s.q4 == 2.0);
  CHECK(s.q5 == 3.0);
  const DcpSplit t = fork_dcp_solve({2.0, 3.0, 1.0, 1.0, 1.0, 1.0, 1, 1});
  CHECK(t.q4 == 2.0);
  CHECK(t.q5 == 0.0);
}

TEST_CASE("fork split with one branch equals the plain closed form") {
  RandomStream rng(9);
  for (int rep = 0; rep < 100; ++rep) {
    const double q3 = rng.uniform() * 3;
    const double w4 = rng.uniform() * 3;
    const double muA = 0.5 + rng.uniform();
    const double muB = 0.5 + rng.uniform();
    const double hb = 0.5;
    const double ha = hb * muB / muA * (1 + rng.uniform());
    const DcpSplit f = fork_dcp_solve({w4, q3, muA, muB, ha, hb, 1, 1});
    const DcpSplit l = dcp_closed_form_solve({q3, 0.0, w4, muA, muB, ha, hb});
    CHECK(f.q4 == l.q4);
    CHECK(f.q5 == l.q5);
  }
}

TEST_CASE("fork split is optimal for the max-form objective") {
  RandomStream rng(11);
  const double step = 1e-3;
  for (int rep = 0; rep < 200; ++rep) {
    ForkDcpInstance inst;
    inst.w4 = rng.uniform();
    inst.max_upstream_left = rng.uniform();
    inst.mu_A = 0.5 + 1.5 * rng.uniform();
    inst.mu_B = 0.5 + 1.5 * rng.uniform();
    inst.g1 = 1 + static_cast<int>(rng.uniform() * 3);
    inst.g2 = 1 + static_cast<int>(rng.uniform() * 3);
    inst.h_b = 0.1 + rng.uniform();
    inst.h_a = inst.h_b * (inst.g2 + 1) * inst.mu_B /
               ((inst.g1 + 1) * inst.mu_A) * (1.0 + rng.uniform());
    const double max_ur = rng.uniform();
    const DcpSplit s = fork_dcp_solve(inst);
    const double closed = fork_dcp_objective(inst, max_ur, s.q4, s.q5);
    const GridSolution g = fork_dcp_grid_oracle(inst, max_ur, step);
    const double tol =
        (inst.effective_h_a() + inst.effective_h_b() * inst.mu_B / inst.mu_A) * step;
    CHECK(closed <= g.objective + 1e-12);
    CHECK(g.objective <= closed + tol);
  }
}

TEST_CASE("fork split rejects a violated effective cost ordering") {
  // h_a (g1+1) mu_A = 2 < h_b (g2+1) mu_B = 4.
  CHECK_THROWS_AS(fork_dcp_solve({1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1, 1}), ConfigError);
}

// ---------------------------------------------------------------------------
// three-type extension

namespace {
ThreeTypeDcpInstance unit_rates(double q4, double q9, double w5, double w6, double ha,
                                double hb, double hc) {
  ThreeTypeDcpInstance in;
  in.q4 = q4;
  in.q9 = q9;
  in.w5 = w5;
  in.w6 = w6;
  in.h_a = ha;
  in.h_b = hb;
  in.h_c = hc;
  return in;
}

void check_constraints(const ThreeTypeDcpInstance& in, const ThreeTypeSplit& s) {
  CHECK(s.q5 >= -1e-12);
  CHECK(s.q6 >= -1e-12);
  CHECK(s.q7 >= -1e-12);
  CHECK(s.q8 >= -1e-12);
  CHECK(s.q5 + (in.mu_A / in.mu_B1) * s.q6 == doctest::Approx(in.w5).epsilon(1e-9));
  CHECK(s.q7 + (in.mu_B2 / in.mu_C) * s.q8 == doctest::Approx(in.w6).epsilon(1e-9));
}
}  // namespace

TEST_CASE("dominant middle-type cost empties both shared-server middle buffers") {
  const auto in = unit_rates(0.7, 0.2, 1.3, 0.8, 1.0, 3.0, 1.0);
  CHECK(threetype_regime(in) == ThreeTypeRegime::kFullPriorityB);
  const ThreeTypeSplit s = threetype_dcp_solve(in);
  CHECK(s.q5 == in.w5);
  CHECK(s.q6 == 0.0);
  CHECK(s.q7 == 0.0);
  CHECK(s.q8 == in.w6);  // (mu_C / mu_B2) w6 with unit rates
  check_constraints(in, s);
}

TEST_CASE("moderate middle-type cost matches the two middle buffers") {
  const auto in = unit_rates(1.0, 0.5, 4.0, 2.0, 1.0, 1.5, 1.0);
  CHECK(threetype_regime(in) == ThreeTypeRegime::kMatchingB);
  const ThreeTypeSplit s = threetype_dcp_solve(in);
  CHECK(s.q5 == doctest::Approx(2.5));
  CHECK(s.q6 == doctest::Approx(1.5));
  CHECK(s.q7 == doctest::Approx(1.5));
  CHECK(s.q8 == doctest::Approx(0.5));
  check_constraints(in, s);
  const ThreeTypeGridSolution g = threetype_grid_oracle(in, 1e-3);
  CHECK(threetype_objective(in, s) <= g.objective + 1e-12);
}

TEST_CASE("expensive outer types pace against their dedicated branches") {
  const auto in = unit_rates(1.0, 0.5, 4.0, 2.0, 2.0, 1.0, 2.0);
  CHECK(threetype_regime(in) == ThreeTypeRegime::kExpensiveAandC);
  const ThreeTypeSplit s = threetype_dcp_solve(in);
  CHECK(s.q5 == doctest::Approx(1.0));   // q4 /\ w5
  CHECK(s.q6 == doctest::Approx(3.0));   // (w5 - q4)^+
  CHECK(s.q7 == doctest::Approx(1.5));   // (w6 - q9)^+
  CHECK(s.q8 == doctest::Approx(0.5));   // w6 /\ q9
  check_constraints(in, s);
  const ThreeTypeGridSolution g = threetype_grid_oracle(in, 1e-3);
  CHECK(threetype_objective(in, s) <= g.objective + 1e-12);
}

TEST_CASE("three-type split tracks the 2-D grid oracle across regimes") {
  RandomStream rng(13);
  const double step = 2e-3;
  int seen[5] = {0, 0, 0, 0, 0};
  for (int rep = 0; rep < 400; ++rep) {
    ThreeTypeDcpInstance in;
    in.q4 = rng.uniform();
    in.q9 = rng.uniform();
    in.w5 = rng.uniform();
    in.w6 = rng.uniform();
    in.mu_A = 0.8 + 0.45 * rng.uniform();
    in.mu_B1 = 0.8 + 0.45 * rng.uniform();
    in.mu_B2 = 0.8 + 0.45 * rng.uniform();
    in.mu_C = 0.8 + 0.45 * rng.uniform();
    in.h_a = 0.1 + 2 * rng.uniform();
    in.h_b = 0.1 + 2 * rng.uniform();
    in.h_c = 0.1 + 2 * rng.uniform();
    ++seen[static_cast<int>(threetype_regime(in))];
    const ThreeTypeSplit s = threetype_dcp_solve(in);
    check_constraints(in, s);
    const ThreeTypeGridSolution g = threetype_grid_oracle(in, step);
    const double tol = ((in.h_a * in.mu_A / in.mu_B1 + in.h_b) +
                        (in.h_b + in.h_c * in.mu_C / in.mu_B2)) *
                       step;
    CHECK(threetype_objective(in, s) <= g.objective + 1e-12);
    CHECK(g.objective <= threetype_objective(in, s) + tol);
  }
  for (int r = 0; r < 5; ++r) CHECK(seen[r] > 0);  // every regime exercised
}

// ---------------------------------------------------------------------------
// SRBM data

TEST_CASE("all-light inputs collapse to the one-dimensional workload data") {
  SrbmInputs in;
  in.theta4 = -1.0;
  const SrbmData d = srbm_data(in);
  CHECK(d.dim == 1);
  CHECK(d.heavy.empty());
  CHECK(d.labels == std::vector<std::string>{"W4"});
  CHECK(d.drift[0] == -1.0);
  // Poisson arrivals and exponential services with equal shared rates.
  CHECK(d.covariance.at(0, 0) == doctest::Approx(4.0));
  CHECK(d.reflection.at(0, 0) == 1.0);
}

TEST_CASE("a heavy entry server contributes its service variability") {
  SrbmInputs in;
  in.heavy1 = true;
  in.theta1 = -0.5;
  in.heavy3 = true;
  in.theta3 = -0.25;
  in.scv1 = 0.75;
  in.theta4 = -1.0;
  const SrbmData d = srbm_data(in);
  CHECK(d.dim == 3);
  CHECK(d.labels == std::vector<std::string>{"Q1", "Q3", "W4"});
  // Cross-covariance of the Q3 and W4 coordinates equals lambda_a * scv1.
  CHECK(d.covariance.at(1, 2) == doctest::Approx(in.lambda_a * in.scv1));
  CHECK(d.covariance.at(2, 1) == d.covariance.at(1, 2));
  // Drift rows fold the upstream drift into downstream coordinates.
  CHECK(d.drift[0] == -0.5);
  CHECK(d.drift[1] == doctest::Approx(-0.25 - (-0.5)));
  CHECK(d.drift[2] == doctest::Approx(-1.0 - (-0.5)));
}

TEST_CASE("SRBM covariance is symmetric positive semidefinite") {
  RandomStream rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    SrbmInputs in;
    in.lambda_a = 0.5 + rng.uniform();
    in.lambda_b = 0.5 + rng.uniform();
    in.mu_A = 1 + rng.uniform();
    in.mu_B = 1 + rng.uniform();
    in.scv_a = 0.2 + rng.uniform();
    in.scv_b = 0.2 + rng.uniform();
    in.scv1 = 0.2 + rng.uniform();
    in.scv2 = 0.2 + rng.uniform();
    in.scv3 = 0.2 + rng.uniform();
    in.scv5 = 0.2 + rng.uniform();
    in.scvA = 0.2 + rng.uniform();
    in.scvB = 0.2 + rng.uniform();
    in.heavy1 = rng.uniform() < 0.5;
    in.heavy2 = rng.uniform() < 0.5;
    in.heavy3 = rng.uniform() < 0.5;
    in.heavy5 = rng.uniform() < 0.5;
    if (in.heavy1) in.theta1 = -rng.uniform();
    if (in.heavy2) in.theta2 = -rng.uniform();
    if (in.heavy3) in.theta3 = -rng.uniform();
    if (in.heavy5) in.theta5 = -rng.uniform();
    in.theta4 = -rng.uniform();
    const SrbmData d = srbm_data(in);
    for (int i = 0; i < d.dim; ++i)
      for (int j = 0; j < d.dim; ++j) CHECK(d.covariance.at(i, j) == d.covariance.at(j, i));
    for (double eig : testutil::symmetric_eigenvalues(d.covariance)) CHECK(eig >= -1e-9);
    // Reflection matrix is lower triangular with a positive diagonal.
    for (int i = 0; i < d.dim; ++i) {
      CHECK(d.reflection.at(i, i) > 0);
      for (int j = i + 1; j < d.dim; ++j) CHECK(d.reflection.at(i, j) == 0.0);
    }
  }
}

TEST_CASE("heavy flags must match the supplied drifts") {
  SrbmInputs in;
  in.heavy1 = true;  // no theta1 supplied
  in.theta4 = -1;
  CHECK_THROWS_AS(srbm_data(in), ConfigError);
  SrbmInputs in2;
  in2.theta2 = -1.0;  // light server with a drift
  in2.theta4 = -1;
  CHECK_THROWS_AS(srbm_data(in2), ConfigError);
}

// ---------------------------------------------------------------------------
// tracking deviation and reflected Brownian motion

TEST_CASE("a perfectly tracking trace has zero deviation") {
  Path q3(2.0), q4(2.0), q5(0.0);
  q3.set(1.0, 3.0);
  q4.set(1.0, 3.0);
  CHECK(tracking_deviation(q3, q4, q5, 1.0, 1.0, 2.0, 5.0) == 0.0);
}

TEST_CASE("tracking deviation evaluates the sup at breakpoints") {
  Path q3(2.0), q4(1.0), q5(0.0);
  q3.set(1.0, 0.0);
  q4.set(2.0, 3.0);
  q5.set(1.0, 2.0);
  // t=0: |1 - min(2, 1)| = 0; t=1: |1 - min(0, 3)| = 1; t=2: |3 - min(0, 5)| = 3.
  CHECK(tracking_deviation(q3, q4, q5, 1.0, 1.0, 2.0, 10.0) == doctest::Approx(1.5));
  // Truncating the horizon drops the last breakpoint.
  CHECK(tracking_deviation(q3, q4, q5, 1.0, 1.0, 2.0, 1.5) == doctest::Approx(0.5));
}

TEST_CASE("driftless-noise-free reflected motion stays at zero") {
  const Path p = rbm_simulate(-1.0, 0.0, 10.0, 0.01, 3);
  for (double t : {0.0, 5.0, 10.0}) CHECK(p.value(t) == 0.0);
}

TEST_CASE("reflected Brownian motion is nonnegative with plausible mean") {
  const Path p = rbm_simulate(-1.0, 1.0, 2000.0, 1e-3, 17);
  for (double v : p.values()) REQUIRE(v >= 0.0);
  const double avg = time_average(p, 100.0, 2000.0);
  CHECK(avg == doctest::Approx(0.5).epsilon(0.2));
}
