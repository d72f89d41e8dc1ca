#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "forkjoin/stochastic.hpp"
#include "forkjoin/topology.hpp"
#include "forkjoin/trace.hpp"

namespace forkjoin {

// Scheduling rule for shared servers, named in configs by string key.
struct PolicySpec {
  enum class Kind {
    kSdp,            // serve the paced type only when its buffer exceeds the
                     // upstream buffer it is paced against
    kStaticPriority, // always prefer the paced (more expensive) type
    kFcfs,           // earliest head-of-line arrival across the input buffers
    kRandomized,     // paced type with probability p when both are nonempty
    kProposed,       // SDP when the pacing branch is slower than the shared
                     // server, static priority otherwise
    kForkSdp,        // SDP against the max of several upstream branch buffers
    kThreeTypeRule,  // cost-regime rule for the two shared servers of the
                     // three-type network
  };

  Kind kind = Kind::kProposed;
  bool preemptive = false;
  double p = 0.5;                        // kRandomized
  double h_a = 1, h_b = 1, h_c = 1;      // kThreeTypeRule regime selection

  // Canonical key, e.g. "sdp", "randomized(0.667)", "proposed!": used in
  // seed derivation and CSV output. '!' marks preemptive mode.
  std::string key() const;
};

// Parses keys produced by PolicySpec::key plus the spellings used in configs:
// sdp, static, fcfs, randomized(p) | randomized:p, proposed, forksdp,
// threetype(h_a,h_b,h_c); trailing '!' selects preemptive mode.
PolicySpec parse_policy(const std::string& text);

// What a policy may look at when a shared server picks its next activity:
// the full queue-length vector, per-activity head-of-line arrival times, and
// the topology (service rates, pacing wiring).
struct DecisionView {
  int server = 0;
  double clock = 0;
  std::span<const long long> queue;          // by buffer id
  std::span<const int> activities;           // activities of this server
  std::span<const double> hol_arrival;       // per activity; +inf when empty
  const Topology* topology = nullptr;

  long long queue_at(int buffer) const { return queue[buffer]; }
};

class Policy {
 public:
  virtual ~Policy() = default;
  // Returns the activity to work on next. Called only when at least one of
  // the server's activities is serviceable; must return a serviceable one
  // (work conservation).
  virtual int choose(const DecisionView& view) = 0;
  // Whether choose() is deterministic in the state, which preemptive mode
  // requires (it re-evaluates the decision continuously).
  virtual bool state_deterministic() const { return true; }
};

// Binds a policy to a topology; stream_seed feeds the randomized rule.
// Throws ConfigError when the requested policy does not fit the topology (e.g. a
// three-type rule on the two-type network) or when a non-state-deterministic
// rule is requested preemptively.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Topology& topology,
                                    std::uint64_t stream_seed);

// ---------------------------------------------------------------------------
// Up/down interval classification of a two-type-network trace.
//
// Down intervals start at 0 and whenever Q3 returns to Q4; an up interval
// starts when Q3 = Q4 - 1 first holds. Inside a down interval, the segment
// from the first time Q5 = 0 to the interval's end is the "down 2" part, the
// rest "down 1". Under the preemptive pacing rule the shared server serves
// only the paced type during up intervals and only the other type during
// down 1 intervals.
struct IntervalLabel {
  enum class Kind { kUp, kDown1, kDown2 };
  double start = 0;
  double end = 0;
  Kind kind = Kind::kDown1;
};

std::vector<IntervalLabel> classify_intervals(const Path& q3, const Path& q4,
                                              const Path& q5, double horizon);
// Convenience overload reading buffers 3, 4, 5 from a recorded trace.
std::vector<IntervalLabel> classify_intervals(const Trace& trace);

}  // namespace forkjoin
