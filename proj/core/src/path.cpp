#include "forkjoin/path.hpp"

#include <algorithm>
#include <cmath>

#include "forkjoin/error.hpp"

namespace forkjoin {

void Path::set(double t, double v) {
  if (times_.empty()) {
    // The first value is extended back to 0 so the domain always starts there.
    if (t != 0.0) {
      times_.push_back(0.0);
      values_.push_back(v);
    }
    times_.push_back(t);
    values_.push_back(v);
    return;
  }
  if (t < times_.back()) throw Error("Path::set: breakpoints must be nondecreasing");
  if (t == times_.back()) {
    values_.back() = v;
    return;
  }
  times_.push_back(t);
  values_.push_back(v);
}

double Path::value(double t) const {
  if (empty()) throw Error("Path::value: empty path");
  if (t < times_.front()) throw Error("Path::value: time before domain start");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

std::vector<double> merged_breakpoints(std::span<const Path* const> paths) {
  std::vector<double> out;
  std::size_t total = 0;
  for (const Path* p : paths) total += p->size();
  out.reserve(total);
  for (const Path* p : paths) {
    auto ts = p->times();
    out.insert(out.end(), ts.begin(), ts.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double sup_norm_distance(const Path& x, const Path& y, double horizon) {
  const Path* ps[] = {&x, &y};
  double sup = 0.0;
  for (double t : merged_breakpoints(ps)) {
    if (t > horizon) break;
    sup = std::max(sup, std::abs(x.value(t) - y.value(t)));
  }
  return sup;
}

}  // namespace forkjoin
