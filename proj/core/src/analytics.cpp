#include "forkjoin/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "forkjoin/error.hpp"
#include "forkjoin/stochastic.hpp"

namespace forkjoin {

namespace {
double pos(double x) { return x > 0.0 ? x : 0.0; }
}  // namespace

Reflected reflect(const Path& x) {
  if (x.empty()) throw Error("reflect: empty path");
  Reflected out;
  out.phi.reserve(x.size());
  out.psi.reserve(x.size());
  double running = 0.0;
  auto ts = x.times();
  auto vs = x.values();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    running = std::max(running, -vs[i]);
    out.psi.set(ts[i], running);
    out.phi.set(ts[i], vs[i] + running);
  }
  return out;
}

// ---------------------------------------------------------------------------

double dcp_objective(const DcpInstance& inst, double q4, double q5) {
  return inst.h_a * pos(q4 - inst.q3) + inst.h_b * pos(q5 - inst.q6);
}

DcpSplit dcp_closed_form_solve(const DcpInstance& inst) {
  if (inst.q3 < 0 || inst.q6 < 0 || inst.w4 < 0 || inst.h_a < 0 || inst.h_b < 0)
    throw ConfigError("workload-split instance requires nonnegative state and costs");
  if (!(inst.mu_A > 0) || !(inst.mu_B > 0))
    throw ConfigError("workload-split instance requires positive rates");
  if (inst.h_a * inst.mu_A < inst.h_b * inst.mu_B)
    throw ConfigError("cost ordering h_a*mu_A >= h_b*mu_B violated; swap the type roles first");
  DcpSplit s;
  s.q4 = std::min(inst.q3, inst.w4);
  s.q5 = (inst.mu_B / inst.mu_A) * pos(inst.w4 - inst.q3);
  return s;
}

GridSolution dcp_grid_oracle(const DcpInstance& inst, double step) {
  if (!(step > 0)) throw ConfigError("grid oracle requires step > 0");
  GridSolution best;
  bool first = true;
  const auto consider = [&](double q4) {
    const double q5 = (inst.mu_B / inst.mu_A) * (inst.w4 - q4);
    const double obj = dcp_objective(inst, q4, q5);
    if (first || obj < best.objective) {
      best = {q4, q5, obj};
      first = false;
    }
  };
  const auto n = static_cast<std::size_t>(inst.w4 / step);
  for (std::size_t i = 0; i <= n; ++i) consider(static_cast<double>(i) * step);
  consider(inst.w4);
  return best;
}

// ---------------------------------------------------------------------------

DcpSplit fork_dcp_solve(const ForkDcpInstance& inst) {
  if (inst.w4 < 0 || inst.max_upstream_left < 0)
    throw ConfigError("fork workload-split instance requires nonnegative state");
  if (!(inst.mu_A > 0) || !(inst.mu_B > 0))
    throw ConfigError("fork workload-split instance requires positive rates");
  if (inst.effective_h_a() * inst.mu_A < inst.effective_h_b() * inst.mu_B)
    throw ConfigError(
        "effective cost ordering h_a(g1+1)*mu_A >= h_b(g2+1)*mu_B violated; swap the type roles");
  DcpSplit s;
  s.q4 = std::min(inst.w4, inst.max_upstream_left);
  s.q5 = (inst.mu_B / inst.mu_A) * pos(inst.w4 - inst.max_upstream_left);
  return s;
}

double fork_dcp_objective(const ForkDcpInstance& inst, double max_upstream_right,
                          double q4, double q5) {
  return inst.effective_h_a() * std::max(q4, inst.max_upstream_left) +
         inst.effective_h_b() * std::max(q5, max_upstream_right);
}

GridSolution fork_dcp_grid_oracle(const ForkDcpInstance& inst, double max_upstream_right,
                                  double step) {
  if (!(step > 0)) throw ConfigError("grid oracle requires step > 0");
  GridSolution best;
  bool first = true;
  const auto consider = [&](double q4) {
    const double q5 = (inst.mu_B / inst.mu_A) * (inst.w4 - q4);
    const double obj = fork_dcp_objective(inst, max_upstream_right, q4, q5);
    if (first || obj < best.objective) {
      best = {q4, q5, obj};
      first = false;
    }
  };
  const auto n = static_cast<std::size_t>(inst.w4 / step);
  for (std::size_t i = 0; i <= n; ++i) consider(static_cast<double>(i) * step);
  consider(inst.w4);
  return best;
}

// ---------------------------------------------------------------------------

ThreeTypeRegime threetype_regime(const ThreeTypeDcpInstance& in) {
  const bool a_expensive = in.h_a * in.mu_A >= in.h_b * in.mu_B1;   // on server 5
  const bool c_expensive = in.h_c * in.mu_C >= in.h_b * in.mu_B2;   // on server 6
  if (a_expensive && !c_expensive) return ThreeTypeRegime::kExpensiveAandB;
  if (a_expensive && c_expensive) return ThreeTypeRegime::kExpensiveAandC;
  if (!a_expensive && !c_expensive) {
    if (in.h_b >= in.h_a * in.mu_A / in.mu_B1 + in.h_c * in.mu_C / in.mu_B2)
      return ThreeTypeRegime::kFullPriorityB;
    return ThreeTypeRegime::kMatchingB;
  }
  return ThreeTypeRegime::kExpensiveCandB;
}

namespace {

// The a <-> c swap maps the fourth cost regime onto the first; workloads are
// rescaled because each one is normalized by its own expensive-type rate.
ThreeTypeDcpInstance mirror_instance(const ThreeTypeDcpInstance& o) {
  ThreeTypeDcpInstance m;
  m.q4 = o.q9;
  m.q9 = o.q4;
  m.w5 = (o.mu_C / o.mu_B2) * o.w6;
  m.w6 = (o.mu_B1 / o.mu_A) * o.w5;
  m.mu_A = o.mu_C;
  m.mu_B1 = o.mu_B2;
  m.mu_B2 = o.mu_B1;
  m.mu_C = o.mu_A;
  m.h_a = o.h_c;
  m.h_b = o.h_b;
  m.h_c = o.h_a;
  return m;
}

ThreeTypeSplit mirror_split(const ThreeTypeSplit& s) {
  return {s.q8, s.q7, s.q6, s.q5};
}

ThreeTypeSplit solve_expensive_a_and_b(const ThreeTypeDcpInstance& in) {
  ThreeTypeSplit s;
  s.q5 = std::min(in.q4, in.w5);
  s.q6 = (in.mu_B1 / in.mu_A) * pos(in.w5 - in.q4);
  s.q7 = std::min(s.q6, in.w6);
  s.q8 = (in.mu_C / in.mu_B2) * pos(in.w6 - s.q6);
  return s;
}

ThreeTypeSplit solve_expensive_a_and_c(const ThreeTypeDcpInstance& in) {
  ThreeTypeSplit s;
  s.q5 = std::min(in.q4, in.w5);
  s.q6 = (in.mu_B1 / in.mu_A) * pos(in.w5 - in.q4);
  s.q7 = pos(in.w6 - (in.mu_B2 / in.mu_C) * in.q9);
  s.q8 = std::min((in.mu_C / in.mu_B2) * in.w6, in.q9);
  return s;
}

ThreeTypeSplit solve_full_priority_b(const ThreeTypeDcpInstance& in) {
  return {in.w5, 0.0, 0.0, (in.mu_C / in.mu_B2) * in.w6};
}

ThreeTypeSplit solve_matching_b(const ThreeTypeDcpInstance& in) {
  const double left = (in.mu_B1 / in.mu_A) * pos(in.w5 - in.q4);
  const double right = pos(in.w6 - (in.mu_B2 / in.mu_C) * in.q9);
  ThreeTypeSplit s;
  s.q6 = std::min(left, right);
  s.q7 = s.q6;
  s.q5 = std::max(std::min(in.q4, in.w5), in.w5 - (in.mu_A / in.mu_B1) * right);
  s.q8 = std::max(std::min(in.q9, (in.mu_C / in.mu_B2) * in.w6),
                  (in.mu_C / in.mu_B2) * (in.w6 - left));
  return s;
}

}  // namespace

ThreeTypeSplit threetype_dcp_solve(const ThreeTypeDcpInstance& in) {
  if (in.q4 < 0 || in.q9 < 0 || in.w5 < 0 || in.w6 < 0 || in.h_a < 0 || in.h_b < 0 || in.h_c < 0)
    throw ConfigError("three-type workload-split instance requires nonnegative state and costs");
  if (!(in.mu_A > 0) || !(in.mu_B1 > 0) || !(in.mu_B2 > 0) || !(in.mu_C > 0))
    throw ConfigError("three-type workload-split instance requires positive rates");
  switch (threetype_regime(in)) {
    case ThreeTypeRegime::kExpensiveAandB: return solve_expensive_a_and_b(in);
    case ThreeTypeRegime::kExpensiveAandC: return solve_expensive_a_and_c(in);
    case ThreeTypeRegime::kFullPriorityB: return solve_full_priority_b(in);
    case ThreeTypeRegime::kMatchingB: return solve_matching_b(in);
    case ThreeTypeRegime::kExpensiveCandB:
      return mirror_split(solve_expensive_a_and_b(mirror_instance(in)));
  }
  throw Error("unreachable three-type regime");
}

double threetype_objective(const ThreeTypeDcpInstance& in, const ThreeTypeSplit& s) {
  return in.h_a * pos(s.q5 - in.q4) + in.h_b * std::max(s.q6, s.q7) +
         in.h_c * pos(s.q8 - in.q9);
}

ThreeTypeGridSolution threetype_grid_oracle(const ThreeTypeDcpInstance& in, double step) {
  if (!(step > 0)) throw ConfigError("grid oracle requires step > 0");
  const double q6_max = (in.mu_B1 / in.mu_A) * in.w5;
  const double q7_max = in.w6;
  ThreeTypeGridSolution best;
  bool first = true;
  const auto n6 = static_cast<std::size_t>(q6_max / step);
  const auto n7 = static_cast<std::size_t>(q7_max / step);
  for (std::size_t i = 0; i <= n6 + 1; ++i) {
    const double q6 = std::min(static_cast<double>(i) * step, q6_max);
    const double q5 = in.w5 - (in.mu_A / in.mu_B1) * q6;
    for (std::size_t j = 0; j <= n7 + 1; ++j) {
      const double q7 = std::min(static_cast<double>(j) * step, q7_max);
      const double q8 = (in.mu_C / in.mu_B2) * (in.w6 - q7);
      const ThreeTypeSplit s{q5, q6, q7, q8};
      const double obj = threetype_objective(in, s);
      if (first || obj < best.objective) {
        best = {s, obj};
        first = false;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

SrbmData srbm_data(const SrbmInputs& in) {
  const bool heavy[4] = {in.heavy1, in.heavy2, in.heavy3, in.heavy5};
  const std::optional<double> theta_in[4] = {in.theta1, in.theta2, in.theta3, in.theta5};
  static const int server_of[4] = {1, 2, 3, 5};
  for (int i = 0; i < 4; ++i) {
    if (heavy[i] && !theta_in[i])
      throw ConfigError("server " + std::to_string(server_of[i]) +
                        " flagged heavy but no drift supplied");
    if (!heavy[i] && theta_in[i])
      throw ConfigError("server " + std::to_string(server_of[i]) +
                        " flagged light but a finite drift was supplied");
  }
  const double chi1 = in.heavy1 ? 1.0 : 0.0;
  const double chi2 = in.heavy2 ? 1.0 : 0.0;
  const double t1 = in.theta1.value_or(0.0);
  const double t2 = in.theta2.value_or(0.0);
  const double t3 = in.theta3.value_or(0.0);
  const double t5 = in.theta5.value_or(0.0);
  const double ab = in.mu_A / in.mu_B;

  // Full 5x5 data on coordinates (Q1, Q2, Q3, Q6, W4); light rows/columns are
  // deleted below, the workload row is always retained.
  double theta5v[5] = {t1, t2, t3 - chi1 * t1, t5 - chi2 * t2,
                       in.theta4 - chi1 * t1 - chi2 * ab * t2};

  Matrix sigma(5, 5);
  const double cov33 = in.lambda_a * (chi1 * in.scv1 + (1 - chi1) * in.scv_a + in.scv3);
  const double cov34 = in.lambda_a * (chi1 * in.scv1 + (1 - chi1) * in.scv_a);
  const double cov46 = ab * in.lambda_b * (chi2 * in.scv2 + (1 - chi2) * in.scv_b);
  const double cov66 = in.lambda_b * (chi2 * in.scv2 + (1 - chi2) * in.scv_b + in.scv5);
  const double cov44 =
      in.lambda_a * (chi1 * in.scv1 + (1 - chi1) * in.scv_a + in.scvA) +
      ab * ab * in.lambda_b * (chi2 * in.scv2 + (1 - chi2) * in.scv_b + in.scvB);
  sigma.at(0, 0) = in.lambda_a * (in.scv_a + in.scv1);
  sigma.at(0, 2) = sigma.at(2, 0) = -in.lambda_a * in.scv1;
  sigma.at(0, 4) = sigma.at(4, 0) = -in.lambda_a * in.scv1;
  sigma.at(1, 1) = in.lambda_b * (in.scv_b + in.scv2);
  sigma.at(1, 3) = sigma.at(3, 1) = -in.lambda_b * in.scv2;
  sigma.at(1, 4) = sigma.at(4, 1) = -ab * in.lambda_b * in.scv2;
  sigma.at(2, 2) = cov33;
  sigma.at(2, 4) = sigma.at(4, 2) = cov34;
  sigma.at(3, 3) = cov66;
  sigma.at(3, 4) = sigma.at(4, 3) = cov46;
  sigma.at(4, 4) = cov44;

  Matrix refl(5, 5);
  refl.at(0, 0) = in.mu1;
  refl.at(1, 1) = in.mu2;
  refl.at(2, 0) = -chi1 * in.mu1;
  refl.at(2, 2) = in.mu3;
  refl.at(3, 1) = -chi2 * in.mu2;
  refl.at(3, 3) = in.mu5;
  refl.at(4, 0) = -chi1 * in.mu1;
  refl.at(4, 1) = -chi2 * ab * in.mu2;
  refl.at(4, 4) = in.mu_A;

  static const char* coord_label[5] = {"Q1", "Q2", "Q3", "Q6", "W4"};
  std::vector<int> keep;
  SrbmData out;
  for (int i = 0; i < 4; ++i) {
    if (heavy[i]) {
      keep.push_back(i);
      out.heavy.push_back(server_of[i]);
    }
  }
  keep.push_back(4);  // workload coordinate

  out.dim = static_cast<int>(keep.size());
  out.drift.resize(out.dim);
  out.covariance = Matrix(out.dim, out.dim);
  out.reflection = Matrix(out.dim, out.dim);
  for (int i = 0; i < out.dim; ++i) {
    out.labels.push_back(coord_label[keep[i]]);
    out.drift[i] = theta5v[keep[i]];
    for (int j = 0; j < out.dim; ++j) {
      out.covariance.at(i, j) = sigma.at(keep[i], keep[j]);
      out.reflection.at(i, j) = refl.at(keep[i], keep[j]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

double tracking_deviation(const Path& q3, const Path& q4, const Path& q5,
                          double mu_A, double mu_B, double r, double horizon) {
  if (q3.empty() || q4.empty() || q5.empty())
    throw Error("tracking_deviation: missing queue paths");
  if (!(r > 0)) throw ConfigError("tracking_deviation: scale r must be > 0");
  const double ratio = mu_A / mu_B;
  const Path* ps[] = {&q3, &q4, &q5};
  double sup = 0.0;
  for (double t : merged_breakpoints(ps)) {
    if (t > horizon) break;
    const double v3 = q3.value(t);
    const double v4 = q4.value(t);
    const double w4 = v4 + ratio * q5.value(t);
    sup = std::max(sup, std::abs(v4 - std::min(v3, w4)));
  }
  return sup / r;
}

Path rbm_simulate(double theta, double sigma2, double horizon, double dt,
                  std::uint64_t seed) {
  if (!(dt > 0)) throw ConfigError("rbm_simulate: dt must be > 0");
  if (sigma2 < 0) throw ConfigError("rbm_simulate: sigma2 must be >= 0");
  if (horizon < 0) throw ConfigError("rbm_simulate: horizon must be >= 0");
  RandomStream stream(seed);
  const auto steps = static_cast<std::uint64_t>(horizon / dt);
  const double drift = theta * dt;
  const double vol = std::sqrt(sigma2 * dt);
  Path path;
  path.reserve(steps + 1);
  double value = 0.0;
  path.set(0.0, value);
  for (std::uint64_t k = 1; k <= steps; ++k) {
    const double incr = drift + (vol > 0.0 ? vol * stream.normal() : 0.0);
    value = std::max(value + incr, 0.0);
    path.set(static_cast<double>(k) * dt, value);
  }
  return path;
}

}  // namespace forkjoin
