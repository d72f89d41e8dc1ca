#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "forkjoin/path.hpp"
#include "forkjoin/trace.hpp"

namespace forkjoin {

// Sum of recorded queue-length paths over a buffer set, e.g. the four buffers
// holding one job type. Input paths must all be recorded in the trace.
Path summed_queue_path(const Trace& trace, std::span<const int> buffers);

// Time average (1/(t1-t0)) * integral of a piecewise-constant path over
// [t0, t1]; exact, no quadrature.
double time_average(const Path& path, double t0, double t1);

struct ConfidenceInterval {
  double mean = 0;
  double half_width = 0;
};
// Student-t 95% interval over replication means: mean +/- t_{0.975,n-1} s/sqrt(n).
ConfidenceInterval ci95(std::span<const double> replication_means);

// Holding-cost functionals of the type-level queue content paths z_a, z_b.
double discounted_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                       double delta, double horizon);
double finite_horizon_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                           double horizon);
double long_run_average_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                             double t0, double t1);

// Empirical tail: fraction of values strictly above each threshold.
// Nonincreasing in the threshold by construction.
std::vector<double> tail_fraction(std::span<const double> values,
                                  std::span<const double> thresholds);

// ---------------------------------------------------------------------------
// Experiment report assembly: per-replication queue sums roll up into
// per-(instance, policy) means with 95% intervals, holding costs
// J = h_a (Q3+Q7) + h_b (Q6+Q10), and percentage deviations from the
// per-instance lowest cost.

struct RepResult {
  int instance = 0;
  std::string policy;
  int rep = 0;
  std::uint64_t seed = 0;
  double q37 = 0;   // replication time average of Q3 + Q7
  double q610 = 0;  // replication time average of Q6 + Q10
};

struct CellSummary {
  int instance = 0;
  std::string policy;
  int reps = 0;
  double q37_mean = 0, q37_hw = 0;
  double q610_mean = 0, q610_hw = 0;
  double cost = 0;
  double deviation_pct = 0;
};

struct PolicyDeviation {
  std::string policy;
  double avg_pct = 0;
  double max_pct = 0;
};

struct ExperimentReport {
  double h_a = 1, h_b = 1;
  std::vector<RepResult> reps;
  std::vector<CellSummary> cells;           // ordered by (instance, policy)
  std::vector<PolicyDeviation> deviations;  // over the instances present
};

// Requires a complete (instance x policy) grid; missing cells are an error
// naming the first absent combination. With a single replication in a cell
// the half widths are reported as 0.
ExperimentReport cost_and_tables(std::vector<RepResult> reps, double h_a, double h_b);

}  // namespace forkjoin
