#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forkjoin/stochastic.hpp"

namespace forkjoin {

// Fork-join network description: buffers, servers and activities with their
// wiring. Ids are 1-based indices assigned in construction order; names carry
// the conventional labels (e.g. the shared server's activities "A" and "B"),
// and in the two-type preset ids coincide with the numeric names.
//
// An activity consumes one job from each of its input buffers per service
// (a join when there is more than one input) and deposits one job into each
// of its output buffers on completion (a fork when there is more than one).
// Activities with no outputs complete jobs out of the network.

struct JobType {
  std::string name;
  DistributionSpec arrival;
  int entry_buffer = 0;

  bool operator==(const JobType&) const = default;
};

struct Activity {
  std::string name;
  int server = 0;
  int job_type = 0;
  std::vector<int> inputs;   // buffer ids, nonempty
  std::vector<int> outputs;  // buffer ids, possibly empty (jobs depart)
  DistributionSpec service;
  // Upstream buffers this activity's departures are paced against by
  // SDP-style policies (empty when the activity is never paced).
  std::vector<int> pace_buffers;

  bool is_fork() const { return outputs.size() > 1; }
  bool is_join() const { return inputs.size() > 1; }

  bool operator==(const Activity&) const = default;
};

struct TopologyData {
  std::vector<JobType> job_types;
  std::vector<std::string> buffers;
  std::vector<std::string> servers;
  std::vector<Activity> activities;

  bool operator==(const TopologyData&) const = default;
};

class Topology {
 public:
  // Builds lookup tables; never throws on invariant violations so that
  // validate() can report them. Preset builders only construct valid data.
  explicit Topology(TopologyData data);

  int n_job_types() const { return static_cast<int>(d_.job_types.size()); }
  int n_buffers() const { return static_cast<int>(d_.buffers.size()); }
  int n_servers() const { return static_cast<int>(d_.servers.size()); }
  int n_activities() const { return static_cast<int>(d_.activities.size()); }

  const JobType& job_type(int id) const { return d_.job_types[id - 1]; }
  const Activity& activity(int id) const { return d_.activities[id - 1]; }
  const std::string& buffer_name(int id) const { return d_.buffers[id - 1]; }
  const std::string& server_name(int id) const { return d_.servers[id - 1]; }

  const std::vector<JobType>& job_types() const { return d_.job_types; }
  const std::vector<Activity>& activities() const { return d_.activities; }

  // 0 when the buffer is externally fed (an entry buffer) or unfed.
  int fed_by(int buffer) const { return fed_by_[buffer]; }
  // 0 when no activity depletes the buffer (invalid; reported by validate).
  int depleted_by(int buffer) const { return depleted_by_[buffer]; }
  bool is_entry_buffer(int buffer) const;

  const std::vector<int>& server_activities(int server) const {
    return server_activities_[server];
  }
  bool is_shared(int server) const { return server_activities_[server].size() > 1; }
  std::vector<int> shared_servers() const;

  // Name lookups throw ConfigError on unknown names.
  int buffer_id(std::string_view name) const;
  int server_id(std::string_view name) const;
  int activity_id(std::string_view name) const;
  bool has_activity(std::string_view name) const;

  // All invariant violations, empty when the topology is well formed:
  // every buffer depleted by exactly one activity, every non-entry buffer fed
  // by exactly one, acyclic activity precedence, shared servers with distinct
  // input buffers, strictly positive rates.
  std::vector<std::string> validate() const;

  bool operator==(const Topology& other) const { return d_ == other.d_; }

 private:
  TopologyData d_;
  std::vector<int> fed_by_;       // by buffer id
  std::vector<int> depleted_by_;  // by buffer id (first depleter if several)
  std::vector<int> feeders_count_;
  std::vector<int> depleters_count_;
  std::vector<std::vector<int>> server_activities_;  // by server id
  std::map<std::string, int, std::less<>> buffer_ids_;
  std::map<std::string, int, std::less<>> server_ids_;
  std::map<std::string, int, std::less<>> activity_ids_;
};

// Uniform service-time family applied across a preset, following the
// experiment design: one family, rates per activity.
struct ServiceFamilySpec {
  DistFamily family = DistFamily::kExponential;
  int erlang_k = 3;
  double gamma_scv = 3.0;

  DistributionSpec make(double rate) const;
};

// Two-type network with forks after the entry servers, a shared server 4
// (activities A and B), and join servers 6 and 7.
// Buffers 1..10, servers 1..7, activities 1,2,3,A,B,5,6,7.
struct Figure1Params {
  double lambda_a = 1.0, lambda_b = 1.0;
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7;
  double mu3 = 1.0 / 0.95, mu5 = 1.0 / 0.95;
  double mu6 = 1.0 / 0.7, mu7 = 1.0 / 0.7;
  double muA = 2.0 / 0.95, muB = 2.0 / 0.95;
  ServiceFamilySpec services;
  // Arrivals are renewal with exponential interarrivals unless overridden.
  std::map<std::string, DistributionSpec> arrival_overrides;   // by job type name
  std::map<std::string, DistributionSpec> service_overrides;   // by activity name
};
Topology build_figure1(const Figure1Params& p);

// Generalization where type a (b) forks into g1+1 (g2+1) parallel tasks; one
// branch of each type is served by the shared server 4.
struct MultiforkParams {
  int g1 = 1, g2 = 1;
  double lambda_a = 1.0, lambda_b = 1.0;
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7;
  double muA = 2.0 / 0.95, muB = 2.0 / 0.95;
  double mu6 = 1.0 / 0.7, mu7 = 1.0 / 0.7;
  std::vector<double> muL;  // per left-branch server; default mu3 everywhere
  std::vector<double> muR;  // per right-branch server; default mu5 everywhere
  double default_muL = 1.0 / 0.95, default_muR = 1.0 / 0.95;
  ServiceFamilySpec services;
  std::map<std::string, DistributionSpec> arrival_overrides;
  std::map<std::string, DistributionSpec> service_overrides;
};
Topology build_multifork(const MultiforkParams& p);

// Three job types; server 5 processes types a and b, server 6 types b and c.
// Buffers 1..15, servers 1..10 (8,9,10 are joins), activities
// 1,2,3,4,A,B1,B2,C,7,8,9,10.
struct ThreeTypeParams {
  double lambda_a = 1.0, lambda_b = 1.0, lambda_c = 1.0;
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7, mu3 = 1.0 / 0.7;
  double mu4 = 1.0 / 0.95;   // dedicated type-a server
  double muA = 2.0 / 0.95, muB1 = 2.0 / 0.95;   // shared server 5
  double muB2 = 2.0 / 0.95, muC = 2.0 / 0.95;   // shared server 6
  double mu7 = 1.0 / 0.95;   // dedicated type-c server
  double mu8 = 1.0 / 0.7, mu9 = 1.0 / 0.7, mu10 = 1.0 / 0.7;  // joins
  ServiceFamilySpec services;
  std::map<std::string, DistributionSpec> arrival_overrides;
  std::map<std::string, DistributionSpec> service_overrides;
};
Topology build_threetype(const ThreeTypeParams& p);

}  // namespace forkjoin
