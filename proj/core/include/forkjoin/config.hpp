#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "forkjoin/policies.hpp"
#include "forkjoin/topology.hpp"

namespace forkjoin {

// JSON round-trip for distributions and topologies (custom networks).
nlohmann::json distribution_to_json(const DistributionSpec& spec);
DistributionSpec distribution_from_json(const nlohmann::json& j);
nlohmann::json topology_to_json(const Topology& topo);
Topology topology_from_json(const nlohmann::json& j);

// One experiment sweep: instances x policies x replications.
struct ExperimentConfig {
  std::vector<int> instances;                     // preset ids 1..36
  std::optional<nlohmann::json> custom_topology;  // alternative to presets
  std::string custom_name = "custom";
  std::vector<PolicySpec> policies;
  int replications = 30;
  std::uint64_t jobs_per_type = 1'000'000;
  std::uint64_t warmup_jobs_per_type = 50'000;
  std::uint64_t seed = 0;
  double h_a = 2.0, h_b = 1.0;
  // The experiment grid leaves the entry servers' rates free; light traffic
  // by default.
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7;
  // Reuse one replication seed across policies (common random numbers); by
  // default each (instance, policy, rep) cell gets its own derived seed.
  bool share_seeds_across_policies = false;
  // Emit deviation tables; this adds the randomized(2/3) baseline to the
  // policy set if missing, so the lowest-cost reference always includes it.
  bool deviation_table = true;
  std::string out_dir = "results";
  int parallelism = 0;  // 0 = number of hardware threads
};

// Parses a config document (JSON, // and /* */ comments allowed). Errors
// carry the offending key or parse location.
ExperimentConfig load_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Applies --scale: multiplies jobs, warm-up and replications, keeping at
// least 2 replications and 1000 jobs.
void scale_config(ExperimentConfig& config, double factor);

}  // namespace forkjoin
