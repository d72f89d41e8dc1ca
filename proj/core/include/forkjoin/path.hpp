#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace forkjoin {

// Right-continuous piecewise-constant function of time.
//
// Breakpoints are strictly increasing and start at 0; values[i] holds on
// [times[i], times[i+1]) and values.back() holds from times.back() on.
class Path {
 public:
  Path() = default;
  explicit Path(double initial_value) { set(0.0, initial_value); }
  static Path constant(double v) { return Path(v); }

  // Records the value from time t on. t must be >= the last breakpoint;
  // a repeated breakpoint overwrites the value (right continuity).
  void set(double t, double v);

  double value(double t) const;
  double initial_value() const { return values_.front(); }
  double last_value() const { return values_.back(); }
  double last_time() const { return times_.back(); }

  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }
  std::span<const double> times() const { return times_; }
  std::span<const double> values() const { return values_; }

  void reserve(std::size_t n) { times_.reserve(n); values_.reserve(n); }

  bool operator==(const Path&) const = default;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
};

// Union of the breakpoints of several paths, deduplicated and sorted.
std::vector<double> merged_breakpoints(std::span<const Path* const> paths);

// Uniform-norm distance sup_{t in [0, horizon]} |x(t) - y(t)|.
double sup_norm_distance(const Path& x, const Path& y, double horizon);

}  // namespace forkjoin
