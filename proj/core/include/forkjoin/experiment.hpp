#pragma once

#include <string>
#include <vector>

#include "forkjoin/config.hpp"
#include "forkjoin/stats.hpp"
#include "forkjoin/trace.hpp"

namespace forkjoin {

struct ExperimentOutput {
  ExperimentReport report;
  std::vector<std::string> files_written;
};

// Simulates every (instance, policy, replication) cell with derived seeds,
// replications in parallel up to the configured bound, then aggregates and
// writes per_rep.csv, table3.csv and deviations.csv under config.out_dir.
// Re-running the same config writes byte-identical files. An engine
// invariant failure aborts the sweep, reporting the failing seed.
ExperimentOutput run_experiment(const ExperimentConfig& config);

// Seed for one replication cell; policy_key is empty when seeds are shared
// across policies.
std::uint64_t replication_seed(std::uint64_t master, const std::string& instance_key,
                               const std::string& policy_key, int rep);

// CSV round-trip used by run_experiment and the report tool.
void write_per_rep_csv(const std::string& path, const std::vector<RepResult>& reps);
std::vector<RepResult> read_per_rep_csv(const std::string& path);
void write_table3_csv(const std::string& path, const ExperimentReport& report);
void write_deviation_csv(const std::string& path, const ExperimentReport& report);

// Event-log and queue-path exports for debugging and diagnostics.
void write_event_csv(const std::string& path, const Trace& trace, const Topology& topo);
void write_queue_paths_csv(const std::string& path, const Trace& trace, const Topology& topo);

std::string render_report(const ExperimentReport& report);

}  // namespace forkjoin
