#pragma once

#include <array>
#include <string>

#include "forkjoin/topology.hpp"

namespace forkjoin {

// The 36-instance experiment grid for the two-type network. Arrivals are
// Poisson with rate one for both types; the shared server runs at
// muA = muB = 2/0.95 (95% utilization); mu3 sweeps three levels against the
// shared server's type-a rate; servers 5, 6, 7 are heavy (1/0.95) or light
// (1/0.7); one service-time family is used per instance (Erlang-3,
// exponential, or gamma with scv 3). Rates mu1 and mu2 are not part of the
// grid; they default to light traffic (1/0.7) and can be overridden.
struct InstancePreset {
  int id = 0;
  double mu3 = 0;
  double mu5 = 0;
  double mu6 = 0;
  double mu7 = 0;
  DistFamily service_family = DistFamily::kExponential;
  std::string variability;  // "low" | "moderate" | "high"
};

const std::array<InstancePreset, 36>& instance_table();

// Throws ConfigError for ids outside 1..36.
const InstancePreset& instance_preset(int id);

Figure1Params instance_params(int id, double mu1 = 1.0 / 0.7, double mu2 = 1.0 / 0.7);
Topology build_instance(int id, double mu1 = 1.0 / 0.7, double mu2 = 1.0 / 0.7);

}  // namespace forkjoin
