// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line. Run all with no arguments or one with --criterion N.
//
// Set FJSIM_FULL_SCALE=1 to run criterion 5 at the full experiment scale
// (30 replications x 1e6 jobs per type) instead of desk scale.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "forkjoin/analytics.hpp"
#include "forkjoin/engine.hpp"
#include "forkjoin/error.hpp"
#include "forkjoin/experiment.hpp"
#include "forkjoin/policies.hpp"
#include "forkjoin/presets.hpp"
#include "forkjoin/stats.hpp"
#include "forkjoin/stochastic.hpp"

namespace fj = forkjoin;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

fj::PolicySpec policy(const std::string& key) { return fj::parse_policy(key); }

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// --------------------------------------------------------------------------
// 1. Flow balance identities hold after every event under every policy.

Outcome criterion1() {
  const fj::Topology topo = fj::build_instance(2);
  const char* policies[] = {"proposed", "sdp",
                            "sdp!",     "static",
                            "fcfs",     "randomized(0.5)",
                            "randomized(0.666667)"};
  std::uint64_t total_events = 0;
  for (const char* key : policies) {
    fj::RunOptions opt;
    opt.jobs_per_type = 110000;  // > 1e6 events per run
    opt.seed = fj::derive_seed(1001, key);
    opt.check_invariants = true;  // throws InvariantError on any violation
    try {
      const fj::RunResult r = fj::run(topo, policy(key), opt);
      if (r.stats.events < 1000000)
        return {false, fmt("run under %s produced only %llu events", key,
                           static_cast<unsigned long long>(r.stats.events))};
      total_events += r.stats.events;
    } catch (const fj::InvariantError& e) {
      return {false, fmt("policy %s violated an identity: %s", key, e.what())};
    }
  }
  return {true, fmt("%llu events across %zu policies, zero violations",
                    static_cast<unsigned long long>(total_events), std::size(policies))};
}

// --------------------------------------------------------------------------
// 2. Closed-form workload splits match their grid oracles on 1000 random
//    instances each (step 1e-3).

Outcome criterion2() {
  const double step = 1e-3;
  fj::RandomStream rng(654321);

  double worst_two = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    fj::DcpInstance in;
    in.q3 = rng.uniform();
    in.q6 = rng.uniform();
    in.w4 = rng.uniform();
    in.mu_A = 0.5 + 1.5 * rng.uniform();
    in.mu_B = 0.5 + 1.5 * rng.uniform();
    in.h_b = 0.1 + rng.uniform();
    in.h_a = in.h_b * in.mu_B / in.mu_A * (1.0 + rng.uniform());
    const fj::DcpSplit s = fj::dcp_closed_form_solve(in);
    const double closed = fj::dcp_objective(in, s.q4, s.q5);
    const fj::GridSolution g = fj::dcp_grid_oracle(in, step);
    const double tol = (in.h_a + in.h_b * in.mu_A / in.mu_B) * step;
    if (closed > g.objective + 1e-12 || g.objective > closed + tol)
      return {false, fmt("two-type split disagrees at rep %d: closed %.6g oracle %.6g tol %.2g",
                         rep, closed, g.objective, tol)};
    worst_two = std::max(worst_two, std::abs(closed - g.objective));
  }

  double worst_fork = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    fj::ForkDcpInstance in;
    in.w4 = rng.uniform();
    in.max_upstream_left = rng.uniform();
    in.mu_A = 0.5 + 1.5 * rng.uniform();
    in.mu_B = 0.5 + 1.5 * rng.uniform();
    in.g1 = 1 + static_cast<int>(rng.uniform() * 3);
    in.g2 = 1 + static_cast<int>(rng.uniform() * 3);
    in.h_b = 0.1 + rng.uniform();
    in.h_a = in.h_b * (in.g2 + 1) * in.mu_B / ((in.g1 + 1) * in.mu_A) * (1.0 + rng.uniform());
    const double max_ur = rng.uniform();
    const fj::DcpSplit s = fj::fork_dcp_solve(in);
    const double closed = fj::fork_dcp_objective(in, max_ur, s.q4, s.q5);
    const fj::GridSolution g = fj::fork_dcp_grid_oracle(in, max_ur, step);
    const double tol = (in.effective_h_a() + in.effective_h_b() * in.mu_B / in.mu_A) * step;
    if (closed > g.objective + 1e-12 || g.objective > closed + tol)
      return {false, fmt("fork split disagrees at rep %d: closed %.6g oracle %.6g", rep,
                         closed, g.objective)};
    worst_fork = std::max(worst_fork, std::abs(closed - g.objective));
  }

  double worst_three = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    fj::ThreeTypeDcpInstance in;
    in.q4 = rng.uniform();
    in.q9 = rng.uniform();
    in.w5 = 0.5 * rng.uniform();
    in.w6 = 0.5 * rng.uniform();
    in.mu_A = 0.8 + 0.45 * rng.uniform();
    in.mu_B1 = 0.8 + 0.45 * rng.uniform();
    in.mu_B2 = 0.8 + 0.45 * rng.uniform();
    in.mu_C = 0.8 + 0.45 * rng.uniform();
    in.h_a = 0.1 + 2 * rng.uniform();
    in.h_b = 0.1 + 2 * rng.uniform();
    in.h_c = 0.1 + 2 * rng.uniform();
    const fj::ThreeTypeSplit s = fj::threetype_dcp_solve(in);
    const double closed = fj::threetype_objective(in, s);
    const fj::ThreeTypeGridSolution g = fj::threetype_grid_oracle(in, step);
    const double tol = ((in.h_a * in.mu_A / in.mu_B1 + in.h_b) +
                        (in.h_b + in.h_c * in.mu_C / in.mu_B2)) *
                       step;
    if (closed > g.objective + 1e-12 || g.objective > closed + tol)
      return {false, fmt("three-type split disagrees at rep %d: closed %.6g oracle %.6g", rep,
                         closed, g.objective)};
    worst_three = std::max(worst_three, std::abs(closed - g.objective));
  }
  return {true, fmt("1000 instances each; worst |closed - oracle|: two-type %.2e, fork %.2e, "
                    "three-type %.2e",
                    worst_two, worst_fork, worst_three)};
}

// --------------------------------------------------------------------------
// 3. Dominant-middle-cost regime yields (w5, 0, 0, (muC/muB2) w6) exactly.

Outcome criterion3() {
  fj::RandomStream rng(97);
  for (int rep = 0; rep < 1000; ++rep) {
    fj::ThreeTypeDcpInstance in;
    in.q4 = rng.uniform() * 2;
    in.q9 = rng.uniform() * 2;
    in.w5 = rng.uniform() * 2;
    in.w6 = rng.uniform() * 2;
    in.mu_A = 0.5 + rng.uniform();
    in.mu_B1 = 0.5 + rng.uniform();
    in.mu_B2 = 0.5 + rng.uniform();
    in.mu_C = 0.5 + rng.uniform();
    in.h_a = 0.1 + rng.uniform();
    in.h_c = 0.1 + rng.uniform();
    in.h_b = (in.h_a * in.mu_A / in.mu_B1 + in.h_c * in.mu_C / in.mu_B2) *
             (1.0 + rng.uniform());
    const fj::ThreeTypeSplit s = fj::threetype_dcp_solve(in);
    const bool exact = s.q5 == in.w5 && s.q6 == 0.0 && s.q7 == 0.0 &&
                       s.q8 == (in.mu_C / in.mu_B2) * in.w6;
    if (!exact)
      return {false, fmt("rep %d: got (%.9g, %.9g, %.9g, %.9g), want (w5, 0, 0, (muC/muB2) w6)",
                         rep, s.q5, s.q6, s.q7, s.q8)};
  }
  return {true, "closed form exact on 1000 dominant-middle-cost instances"};
}

// --------------------------------------------------------------------------
// 4. An isolated single-server queue reproduces the birth-death mean.

Outcome criterion4() {
  fj::TopologyData d;
  d.buffers = {"1"};
  d.servers = {"1"};
  d.job_types = {{"a", fj::make_exponential(1.0), 1}};
  d.activities = {{"1", 1, 1, {1}, {}, fj::make_exponential(0.7), {}}};
  const fj::Topology topo(std::move(d));

  fj::RunOptions opt;
  opt.jobs_per_type = 1000000;
  opt.warmup_jobs_per_type = 10000;
  opt.seed = 4;
  const fj::RunResult r = fj::run(topo, policy("static"), opt);
  const double got = r.stats.buffer_time_average(1);
  const double want = 0.7 / 0.3;
  const bool pass = std::abs(got - want) <= 0.03 * want;
  return {pass, fmt("time-average number in system %.4f vs %.4f (tolerance 3%%)", got, want)};
}

// --------------------------------------------------------------------------
// 5. The published instance-1 queue averages are reproduced.

Outcome criterion5() {
  const bool full = std::getenv("FJSIM_FULL_SCALE") != nullptr;
  const int reps = full ? 30 : 10;
  const std::uint64_t jobs = full ? 1000000 : 200000;
  const std::uint64_t warmup = full ? 50000 : 10000;
  const double kPublishedQ37 = 14.01, kPublishedQ37Hw = 0.16;
  const double kPublishedQ610 = 14.43, kPublishedQ610Hw = 0.17;

  auto measure = [&](double mu1, double mu2, int nreps, std::vector<double>& q37s,
                     std::vector<double>& q610s) {
    const fj::Topology topo = fj::build_instance(1, mu1, mu2);
    for (int rep = 0; rep < nreps; ++rep) {
      fj::RunOptions opt;
      opt.jobs_per_type = jobs;
      opt.warmup_jobs_per_type = warmup;
      opt.seed = fj::replication_seed(0, "1", "proposed", rep);
      const fj::RunResult r = fj::run(topo, policy("proposed"), opt);
      q37s.push_back(r.stats.buffer_time_average(3) + r.stats.buffer_time_average(7));
      q610s.push_back(r.stats.buffer_time_average(6) + r.stats.buffer_time_average(10));
    }
  };

  std::vector<double> q37s, q610s;
  measure(1.0 / 0.7, 1.0 / 0.7, reps, q37s, q610s);
  const auto ci37 = fj::ci95(q37s);
  const auto ci610 = fj::ci95(q610s);

  bool pass;
  std::string detail;
  if (full) {
    // Full scale: the 95% intervals must overlap the published ones.
    pass = std::abs(ci37.mean - kPublishedQ37) <= ci37.half_width + kPublishedQ37Hw &&
           std::abs(ci610.mean - kPublishedQ610) <= ci610.half_width + kPublishedQ610Hw;
    detail = fmt("full scale: Q3+Q7 %.3f+/-%.3f vs %.2f+/-%.2f; Q6+Q10 %.3f+/-%.3f vs "
                 "%.2f+/-%.2f",
                 ci37.mean, ci37.half_width, kPublishedQ37, kPublishedQ37Hw, ci610.mean,
                 ci610.half_width, kPublishedQ610, kPublishedQ610Hw);
  } else {
    pass = std::abs(ci37.mean - kPublishedQ37) <= 0.10 * kPublishedQ37 &&
           std::abs(ci610.mean - kPublishedQ610) <= 0.10 * kPublishedQ610;
    detail = fmt("desk scale: Q3+Q7 %.3f (target %.2f +/-10%%), Q6+Q10 %.3f (target %.2f "
                 "+/-10%%)",
                 ci37.mean, kPublishedQ37, ci610.mean, kPublishedQ610);
  }

  if (!pass) {
    // The entry-server rates are not part of the published grid; report the
    // sensitivity to them instead of failing silently.
    std::fprintf(stderr, "criterion 5 failed; entry-rate sensitivity report:\n");
    for (const double mu : {1.0 / 0.5, 1.0 / 0.7, 1.0 / 0.9}) {
      std::vector<double> s37, s610;
      measure(mu, mu, 4, s37, s610);
      const auto c37 = fj::ci95(s37);
      const auto c610 = fj::ci95(s610);
      std::fprintf(stderr, "  mu1 = mu2 = %.4f: Q3+Q7 %.3f+/-%.3f, Q6+Q10 %.3f+/-%.3f\n", mu,
                   c37.mean, c37.half_width, c610.mean, c610.half_width);
    }
  }
  return {pass, detail};
}

// --------------------------------------------------------------------------
// 6. Where the upstream branch outpaces the shared server, the proposed rule
//    is static priority decision-for-decision.

Outcome criterion6() {
  for (int instance = 13; instance <= 18; ++instance) {
    const fj::Topology topo = fj::build_instance(instance);
    fj::RunOptions opt;
    opt.jobs_per_type = 20000;
    opt.warmup_jobs_per_type = 1000;
    opt.seed = fj::derive_seed(6, std::to_string(instance));
    opt.trace.all_queues = true;
    const fj::RunResult a = fj::run(topo, policy("proposed"), opt);
    const fj::RunResult b = fj::run(topo, policy("static"), opt);
    if (a.stats.events != b.stats.events)
      return {false, fmt("instance %d: event counts differ", instance)};
    for (int k = 1; k <= 10; ++k) {
      if (!(a.trace.queue[k] == b.trace.queue[k]))
        return {false, fmt("instance %d: queue path %d differs", instance, k)};
      if (a.stats.buffer_integral[k] != b.stats.buffer_integral[k])
        return {false, fmt("instance %d: buffer %d integral differs", instance, k)};
    }
  }
  return {true, "instances 13..18: identical traces under proposed and static priority"};
}

// --------------------------------------------------------------------------
// 7. Cost orderings at h_a = 2, h_b = 1: static priority is worse than the
//    pacing rule where the upstream branch is saturated (instances 1-6) and
//    within noise of it on instances 7-12.

Outcome criterion7() {
  const int reps = 10;
  const std::uint64_t jobs = 100000, warmup = 5000;
  std::string detail;
  for (int instance = 1; instance <= 12; ++instance) {
    const fj::Topology topo = fj::build_instance(instance);
    double j_sdp = 0, j_static = 0;
    for (int rep = 0; rep < reps; ++rep) {
      fj::RunOptions opt;
      opt.jobs_per_type = jobs;
      opt.warmup_jobs_per_type = warmup;
      // Common random numbers: the same seed for both policies.
      opt.seed = fj::replication_seed(7, std::to_string(instance), "", rep);
      const fj::RunResult rs = fj::run(topo, policy("sdp"), opt);
      const fj::RunResult rt = fj::run(topo, policy("static"), opt);
      j_sdp += 2.0 * (rs.stats.buffer_time_average(3) + rs.stats.buffer_time_average(7)) +
               (rs.stats.buffer_time_average(6) + rs.stats.buffer_time_average(10));
      j_static += 2.0 * (rt.stats.buffer_time_average(3) + rt.stats.buffer_time_average(7)) +
                  (rt.stats.buffer_time_average(6) + rt.stats.buffer_time_average(10));
    }
    j_sdp /= reps;
    j_static /= reps;
    const double rel = (j_static - j_sdp) / std::min(j_sdp, j_static);
    if (instance <= 6) {
      if (!(j_static > j_sdp))
        return {false, fmt("instance %d: static cost %.3f not above pacing cost %.3f",
                           instance, j_static, j_sdp)};
    } else {
      if (std::abs(rel) > 0.05)
        return {false,
                fmt("instance %d: |static - pacing| relative gap %.1f%% exceeds the 5%% "
                    "noise band",
                    instance, 100 * rel)};
    }
    if (instance == 1 || instance == 7) detail += fmt("i%d %+0.1f%% ", instance, 100 * rel);
  }
  return {true, "instances 1-6 favor pacing; 7-12 within the 5% noise band (" + detail + ")"};
}

// --------------------------------------------------------------------------
// 8. Reflection-map properties on 1e4 random piecewise-constant paths.

Outcome criterion8() {
  fj::RandomStream rng(88);
  auto random_path = [&](int breakpoints) {
    fj::Path p;
    double t = 0;
    for (int i = 0; i < breakpoints; ++i) {
      p.set(t, -3.0 + 6.0 * rng.uniform());
      t += 0.05 + rng.uniform();
    }
    return p;
  };
  for (int rep = 0; rep < 10000; ++rep) {
    const fj::Path x = random_path(40);
    const fj::Reflected r = fj::reflect(x);
    auto psis = r.psi.values();
    auto phis = r.phi.values();
    for (std::size_t i = 0; i < psis.size(); ++i) {
      if (phis[i] < 0) return {false, fmt("rep %d: reflected path went negative", rep)};
      if (i > 0 && psis[i] < psis[i - 1])
        return {false, fmt("rep %d: regulator decreased", rep)};
      if (i > 0 && psis[i] > psis[i - 1] && phis[i] != 0.0)
        return {false, fmt("rep %d: regulator increased away from zero", rep)};
    }
    if (rep % 2 == 1) continue;  // pair up consecutive draws for Lipschitz checks
    const fj::Path y = random_path(40);
    const fj::Reflected ry = fj::reflect(y);
    const double horizon = std::min(x.last_time(), y.last_time());
    const double dxy = fj::sup_norm_distance(x, y, horizon);
    if (fj::sup_norm_distance(r.phi, ry.phi, horizon) > 2 * dxy + 1e-12)
      return {false, fmt("rep %d: reflection Lipschitz bound broken", rep)};
    if (fj::sup_norm_distance(r.psi, ry.psi, horizon) > dxy + 1e-12)
      return {false, fmt("rep %d: regulator Lipschitz bound broken", rep)};
  }
  return {true, "nonnegativity, monotonicity, complementarity and Lipschitz bounds on 1e4 paths"};
}

// --------------------------------------------------------------------------
// 9. The scaled tracking deviation shrinks along the heavy-traffic family.

Outcome criterion9() {
  // Rates fixed at instance-4 values (upstream branch slower than the shared
  // server, type-b side light); the type-b arrival rate closes the gap to
  // full utilization as r grows: rho_4(r) = 1 - 0.475 / r.
  const double T = 50.0;
  const int seeds = 20;
  std::vector<double> medians;
  for (const double r : {5.0, 10.0, 20.0}) {
    fj::Figure1Params params = fj::instance_params(4);
    const double lambda_b = params.muB * (0.525 - 0.475 / r);
    params.lambda_b = lambda_b;
    const fj::Topology topo = fj::build_figure1(params);
    const double mu_A = params.muA, mu_B = params.muB;
    std::vector<double> stats;
    for (int seed = 0; seed < seeds; ++seed) {
      fj::RunOptions opt;
      opt.horizon = r * r * T;
      opt.seed = fj::derive_seed(9, fmt("r=%g/seed=%d", r, seed));
      opt.trace.queue_buffers = {3, 4, 5};
      const fj::RunResult run = fj::run(topo, policy("sdp!"), opt);
      stats.push_back(fj::tracking_deviation(run.trace.queue[3], run.trace.queue[4],
                                             run.trace.queue[5], mu_A, mu_B, r,
                                             run.trace.horizon));
    }
    medians.push_back(median(stats));
  }
  const bool pass = medians[0] >= medians[1] && medians[1] >= medians[2];
  return {pass, fmt("median sup|Q4 - Q3 /\\ W4| / r over 20 seeds: r=5 %.4f, r=10 %.4f, "
                    "r=20 %.4f",
                    medians[0], medians[1], medians[2])};
}

// --------------------------------------------------------------------------
// 10. Discretized reflected Brownian motion matches its stationary mean.

Outcome criterion10() {
  const fj::Path p = fj::rbm_simulate(-1.0, 1.0, 10000.0, 1e-3, 10);
  const double avg = fj::time_average(p, 100.0, 10000.0);
  const bool pass = std::abs(avg - 0.5) <= 0.05;
  return {pass, fmt("long-run average %.4f vs 0.5 +/- 0.05", avg)};
}

// --------------------------------------------------------------------------
// 11. Work-conserving long-run utilizations match the traffic design.

Outcome criterion11() {
  const fj::Topology topo = fj::build_instance(1);
  const int A = topo.activity_id("A");
  const int B = topo.activity_id("B");
  std::string detail;
  for (const char* key : {"proposed", "static", "fcfs", "randomized(0.5)"}) {
    fj::RunOptions opt;
    opt.jobs_per_type = 100000;
    opt.seed = fj::derive_seed(11, key);
    const fj::RunResult r = fj::run(topo, policy(key), opt);
    const double ta = r.stats.activity_utilization(A);
    const double rho4 = ta + r.stats.activity_utilization(B);
    if (std::abs(ta - 0.475) > 0.02)
      return {false, fmt("%s: T_A/t = %.4f outside 0.475 +/- 0.02", key, ta)};
    if (std::abs(rho4 - 0.95) > 0.01)
      return {false, fmt("%s: shared-server utilization %.4f outside 0.95 +/- 0.01", key, rho4)};
    detail += fmt("%s %.3f/%.3f ", key, ta, rho4);
  }
  return {true, "T_A/t and total utilization on target: " + detail};
}

using CriterionFn = Outcome (*)();

struct Criterion {
  int id;
  const char* summary;
  CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, "balance identities hold after every event under every policy", criterion1},
    {2, "closed-form workload splits match grid oracles (step 1e-3)", criterion2},
    {3, "dominant-middle-cost three-type split is exact", criterion3},
    {4, "isolated single-server queue matches rho/(1-rho)", criterion4},
    {5, "instance-1 published queue averages reproduced", criterion5},
    {6, "proposed equals static priority when the branch outpaces the shared server",
     criterion6},
    {7, "cost orderings across instances 1-12 at h_a = 2", criterion7},
    {8, "reflection map properties on 1e4 random paths", criterion8},
    {9, "tracking deviation shrinks along the heavy-traffic family", criterion9},
    {10, "reflected Brownian motion long-run mean", criterion10},
    {11, "fluid-limit utilizations under work-conserving policies", criterion11},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else if (std::strcmp(argv[i], "--list") == 0) {
      for (const Criterion& c : kCriteria) std::printf("%2d  %s\n", c.id, c.summary);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N | --list]\n", argv[0]);
      return 1;
    }
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (only != 0 && c.id != only) continue;
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, fmt("unexpected exception: %s", e.what())};
    }
    std::printf("%s  %2d  %s: %s\n", out.pass ? "PASS" : "FAIL", c.id, c.summary,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
