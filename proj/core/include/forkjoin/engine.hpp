#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "forkjoin/policies.hpp"
#include "forkjoin/topology.hpp"
#include "forkjoin/trace.hpp"

namespace forkjoin {

struct TraceOptions {
  bool all_queues = false;
  std::vector<int> queue_buffers;  // record these buffer paths
  bool all_servers = false;
  std::vector<int> servers;        // record these servers' activity paths
  bool event_log = false;
};

struct RunOptions {
  // Exactly one stop rule: run to a fixed time, or until every job type has
  // produced this many external arrivals.
  std::optional<double> horizon;
  std::optional<std::uint64_t> jobs_per_type;
  // Queue statistics start once every job type has seen this many arrivals.
  std::uint64_t warmup_jobs_per_type = 0;
  std::uint64_t seed = 0;
  // Re-checks the flow balance identities and counter accounting after every
  // event; for test and diagnostic runs.
  bool check_invariants = false;
  TraceOptions trace;
};

struct StatsSnapshot {
  double measure_start = 0;  // end of the warm-up period
  double end_time = 0;
  std::uint64_t events = 0;
  std::vector<double> buffer_integral;        // of Q dt over [measure_start, end_time]
  std::vector<double> activity_busy;          // T_j over [0, end_time]
  std::vector<std::uint64_t> completions;     // S_j
  std::vector<std::uint64_t> arrivals;        // per job type id

  double measured_span() const { return end_time - measure_start; }
  double buffer_time_average(int buffer) const;
  double activity_utilization(int activity) const {
    return end_time > 0 ? activity_busy[activity] / end_time : 0.0;
  }
};

struct RunResult {
  double clock = 0;
  std::vector<long long> queue;  // by buffer id
  StatsSnapshot stats;
  Trace trace;
};

// Event-by-event simulation of a topology under a scheduling policy.
// Single-threaded; replications own their engines.
class Engine {
 public:
  Engine(const Topology& topology, const PolicySpec& policy, const RunOptions& options);
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Processes the earliest pending event; returns false once stopped.
  bool step();
  bool stopped() const;

  double clock() const;
  long long queue_length(int buffer) const;
  std::uint64_t arrivals(int job_type) const;
  std::uint64_t completions(int activity) const;

  // Finalizes integrals and hands out the results; call once, after stepping.
  RunResult finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunResult run(const Topology& topology, const PolicySpec& policy, const RunOptions& options);

}  // namespace forkjoin
