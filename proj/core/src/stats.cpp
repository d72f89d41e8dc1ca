#include "forkjoin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "forkjoin/error.hpp"

namespace forkjoin {

namespace {

// Integral of path over [t0, t1], exact for piecewise-constant paths.
double integrate(const Path& path, double t0, double t1) {
  auto ts = path.times();
  auto vs = path.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double seg_start = ts[i];
    const double seg_end = (i + 1 < ts.size()) ? ts[i + 1] : t1;
    const double lo = std::max(seg_start, t0);
    const double hi = std::min(seg_end, t1);
    if (hi > lo) acc += vs[i] * (hi - lo);
    if (seg_start >= t1) break;
  }
  return acc;
}

// Exact integral of v * exp(-delta t) over piecewise-constant segments.
double integrate_discounted(const Path& path, double delta, double t1) {
  auto ts = path.times();
  auto vs = path.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double lo = ts[i];
    const double hi = std::min((i + 1 < ts.size()) ? ts[i + 1] : t1, t1);
    if (hi > lo) acc += vs[i] * (std::exp(-delta * lo) - std::exp(-delta * hi)) / delta;
    if (lo >= t1) break;
  }
  return acc;
}

}  // namespace

Path summed_queue_path(const Trace& trace, std::span<const int> buffers) {
  std::vector<const Path*> ps;
  for (int b : buffers) {
    if (!trace.has_queue(b))
      throw ConfigError("summed_queue_path: buffer " + std::to_string(b) +
                        " was not recorded in the trace");
    ps.push_back(&trace.queue[b]);
  }
  if (ps.empty()) throw ConfigError("summed_queue_path: empty buffer set");
  Path out;
  for (double t : merged_breakpoints(ps)) {
    double sum = 0;
    for (const Path* p : ps) sum += p->value(t);
    out.set(t, sum);
  }
  return out;
}

double time_average(const Path& path, double t0, double t1) {
  if (path.empty()) throw ConfigError("time_average: empty path");
  if (!(t1 > t0)) throw ConfigError("time_average: window must satisfy t1 > t0");
  if (t0 < path.times().front())
    throw ConfigError("time_average: window starts before the path domain");
  return integrate(path, t0, t1) / (t1 - t0);
}

ConfidenceInterval ci95(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) throw ConfigError("ci95: need at least 2 replication means");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t_distribution<double> dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(dist, 0.975);
  return {mean, t * sd / std::sqrt(static_cast<double>(n))};
}

double discounted_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                       double delta, double horizon) {
  if (!(delta > 0)) throw ConfigError("discounted_cost: delta must be > 0");
  return h_a * integrate_discounted(z_a, delta, horizon) +
         h_b * integrate_discounted(z_b, delta, horizon);
}

double finite_horizon_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                           double horizon) {
  return h_a * integrate(z_a, 0.0, horizon) + h_b * integrate(z_b, 0.0, horizon);
}

double long_run_average_cost(const Path& z_a, const Path& z_b, double h_a, double h_b,
                             double t0, double t1) {
  return h_a * time_average(z_a, t0, t1) + h_b * time_average(z_b, t0, t1);
}

std::vector<double> tail_fraction(std::span<const double> values,
                                  std::span<const double> thresholds) {
  if (values.empty()) throw ConfigError("tail_fraction: no values");
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double x : thresholds) {
    std::size_t count = 0;
    for (double v : values)
      if (v > x) ++count;
    out.push_back(static_cast<double>(count) / static_cast<double>(values.size()));
  }
  return out;
}

ExperimentReport cost_and_tables(std::vector<RepResult> reps, double h_a, double h_b) {
  if (reps.empty()) throw ConfigError("cost_and_tables: no replication results");
  ExperimentReport report;
  report.h_a = h_a;
  report.h_b = h_b;

  std::set<int> instances;
  std::vector<std::string> policies;  // first-appearance order
  for (const RepResult& r : reps) {
    instances.insert(r.instance);
    if (std::find(policies.begin(), policies.end(), r.policy) == policies.end())
      policies.push_back(r.policy);
  }

  std::map<std::pair<int, std::string>, std::vector<const RepResult*>> cells;
  for (const RepResult& r : reps) cells[{r.instance, r.policy}].push_back(&r);
  for (int i : instances)
    for (const std::string& p : policies)
      if (!cells.count({i, p}))
        throw ConfigError("cost_and_tables: missing cell (instance " + std::to_string(i) +
                          ", policy " + p + ")");

  for (int i : instances) {
    for (const std::string& p : policies) {
      const auto& rs = cells.at({i, p});
      CellSummary c;
      c.instance = i;
      c.policy = p;
      c.reps = static_cast<int>(rs.size());
      std::vector<double> q37s, q610s;
      for (const RepResult* r : rs) {
        q37s.push_back(r->q37);
        q610s.push_back(r->q610);
      }
      if (rs.size() >= 2) {
        const auto ci37 = ci95(q37s);
        const auto ci610 = ci95(q610s);
        c.q37_mean = ci37.mean;
        c.q37_hw = ci37.half_width;
        c.q610_mean = ci610.mean;
        c.q610_hw = ci610.half_width;
      } else {
        c.q37_mean = q37s[0];
        c.q610_mean = q610s[0];
      }
      c.cost = h_a * c.q37_mean + h_b * c.q610_mean;
      report.cells.push_back(c);
    }
  }

  // Deviations from the per-instance lowest cost over the policies present.
  std::map<int, double> lowest;
  for (const CellSummary& c : report.cells) {
    auto it = lowest.find(c.instance);
    if (it == lowest.end() || c.cost < it->second) lowest[c.instance] = c.cost;
  }
  for (CellSummary& c : report.cells) {
    const double l = lowest.at(c.instance);
    c.deviation_pct = l > 0 ? 100.0 * (c.cost - l) / l : 0.0;
  }
  for (const std::string& p : policies) {
    PolicyDeviation d;
    d.policy = p;
    double sum = 0;
    int n = 0;
    for (const CellSummary& c : report.cells) {
      if (c.policy != p) continue;
      sum += c.deviation_pct;
      d.max_pct = std::max(d.max_pct, c.deviation_pct);
      ++n;
    }
    d.avg_pct = sum / n;
    report.deviations.push_back(d);
  }
  report.reps = std::move(reps);
  return report;
}

}  // namespace forkjoin
