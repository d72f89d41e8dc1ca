#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forkjoin/path.hpp"

namespace forkjoin {

// ---------------------------------------------------------------------------
// One-sided, one-dimensional reflection: Psi(x)(t) = sup_{0<=s<=t} (-x(s))^+
// and Phi(x) = x + Psi(x). For piecewise-constant inputs both outputs are
// piecewise constant on the same breakpoints.
struct Reflected {
  Path phi;
  Path psi;
};
Reflected reflect(const Path& x);

// ---------------------------------------------------------------------------
// Workload-split problem for the two-type network: split the shared server's
// workload w4 between its type-a buffer (q4) and type-b buffer (q5) to
// minimize h_a (q4 - q3)^+ + h_b (q5 - q6)^+ subject to
// q4 + (mu_A / mu_B) q5 = w4, q4 >= 0, q5 >= 0.
struct DcpInstance {
  double q3 = 0, q6 = 0, w4 = 0;
  double mu_A = 1, mu_B = 1;
  double h_a = 1, h_b = 1;
};
struct DcpSplit {
  double q4 = 0, q5 = 0;
};
double dcp_objective(const DcpInstance& inst, double q4, double q5);

// Closed form: q4 = q3 /\ w4, q5 = (mu_B/mu_A)(w4 - q3)^+. Requires the
// cost ordering h_a mu_A >= h_b mu_B; callers must pre-swap roles otherwise.
DcpSplit dcp_closed_form_solve(const DcpInstance& inst);

struct GridSolution {
  double q4 = 0, q5 = 0;
  double objective = 0;
};
// Exhaustive minimization over q4 in {0, step, ..., w4} with q5 pinned by the
// equality constraint. Independent of the closed form by construction.
GridSolution dcp_grid_oracle(const DcpInstance& inst, double step);

// ---------------------------------------------------------------------------
// Arbitrary-fork extension: the type-a branch count g1+1 and type-b branch
// count g2+1 enter through the effective costs h_a (g1+1) and h_b (g2+1).
// The split matches buffer 4 against the largest upstream left-branch buffer.
struct ForkDcpInstance {
  double w4 = 0;
  double max_upstream_left = 0;
  double mu_A = 1, mu_B = 1;
  double h_a = 1, h_b = 1;
  int g1 = 1, g2 = 1;

  double effective_h_a() const { return h_a * (g1 + 1); }
  double effective_h_b() const { return h_b * (g2 + 1); }
};
DcpSplit fork_dcp_solve(const ForkDcpInstance& inst);
// Objective of the max form, which additionally needs the right-branch max.
double fork_dcp_objective(const ForkDcpInstance& inst, double max_upstream_right,
                          double q4, double q5);
GridSolution fork_dcp_grid_oracle(const ForkDcpInstance& inst, double max_upstream_right,
                                  double step);

// ---------------------------------------------------------------------------
// Three-type extension: two shared servers with workloads w5 and w6 and
// decision variables (q5, q6, q7, q8); q4 and q9 are the dedicated-branch
// queue lengths. Minimizes
//   h_a (q5 - q4)^+ + h_b (q6 \/ q7) + h_c (q8 - q9)^+
// subject to q5 + (mu_A/mu_B1) q6 = w5 and q7 + (mu_B2/mu_C) q8 = w6.
struct ThreeTypeDcpInstance {
  double q4 = 0, q9 = 0;
  double w5 = 0, w6 = 0;
  double mu_A = 1, mu_B1 = 1, mu_B2 = 1, mu_C = 1;
  double h_a = 1, h_b = 1, h_c = 1;
};
struct ThreeTypeSplit {
  double q5 = 0, q6 = 0, q7 = 0, q8 = 0;
};
// Cost regimes; detection order follows the case analysis.
enum class ThreeTypeRegime {
  kExpensiveAandB,   // h_a mu_A >= h_b mu_B1 and h_b mu_B2 >= h_c mu_C
  kExpensiveAandC,   // h_a mu_A >= h_b mu_B1 and h_c mu_C >= h_b mu_B2
  kFullPriorityB,    // b most expensive on both servers, h_b dominant
  kMatchingB,        // b most expensive on both servers, h_b moderate
  kExpensiveCandB,   // mirror of kExpensiveAandB under the a <-> c swap
};
ThreeTypeRegime threetype_regime(const ThreeTypeDcpInstance& inst);
ThreeTypeSplit threetype_dcp_solve(const ThreeTypeDcpInstance& inst);
double threetype_objective(const ThreeTypeDcpInstance& inst, const ThreeTypeSplit& s);

struct ThreeTypeGridSolution {
  ThreeTypeSplit split;
  double objective = 0;
};
// 2-D enumeration over (q6, q7) with q5, q8 pinned by the constraints.
ThreeTypeGridSolution threetype_grid_oracle(const ThreeTypeDcpInstance& inst, double step);

// ---------------------------------------------------------------------------
// SRBM data for the heavy-traffic limit of (Q1, Q2, Q3, Q6, W4): drift vector,
// Brownian covariance and reflection matrix, with rows/columns of light
// servers among {1,2,3,5} deleted. The workload coordinate is always kept, so
// the dimension is |H| + 1.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

struct SrbmInputs {
  double lambda_a = 1, lambda_b = 1;
  double mu1 = 1, mu2 = 1, mu3 = 1, mu5 = 1;
  double mu_A = 1, mu_B = 1;
  // Squared coefficients of variation of interarrival (a, b) and service
  // times (activities 1, 2, 3, 5, A, B).
  double scv_a = 1, scv_b = 1;
  double scv1 = 1, scv2 = 1, scv3 = 1, scv5 = 1, scvA = 1, scvB = 1;
  // Heavy-traffic flags for servers 1, 2, 3, 5 and the matching drift inputs.
  // A heavy server requires a finite drift; a light server must not have one.
  bool heavy1 = false, heavy2 = false, heavy3 = false, heavy5 = false;
  std::optional<double> theta1, theta2, theta3, theta5;
  double theta4 = 0;
};

struct SrbmData {
  std::vector<int> heavy;           // subset of {1, 2, 3, 5}
  std::vector<std::string> labels;  // coordinate names; workload row last
  int dim = 0;                      // |heavy| + 1
  std::vector<double> drift;
  Matrix covariance;
  Matrix reflection;
};
SrbmData srbm_data(const SrbmInputs& in);

// ---------------------------------------------------------------------------
// Tracking deviation: sup_{t in [0, horizon]} |q4(t) - q3(t) /\ w4(t)| / r
// with w4 = q4 + (mu_A / mu_B) q5. The diffusion-scaled statistic behind the
// policy's tracking property; horizon is normally r^2 T.
double tracking_deviation(const Path& q3, const Path& q4, const Path& q5,
                          double mu_A, double mu_B, double r, double horizon);

// ---------------------------------------------------------------------------
// Discretized reflected Brownian motion: value_{k+1} = (value_k + theta dt +
// sqrt(sigma2 dt) Z_k)^+ starting at 0. Comparison baseline for simulated
// workload processes.
Path rbm_simulate(double theta, double sigma2, double horizon, double dt,
                  std::uint64_t seed);

}  // namespace forkjoin
