#include "forkjoin/topology.hpp"

#include <algorithm>
#include <set>

#include "forkjoin/error.hpp"

namespace forkjoin {

Topology::Topology(TopologyData data) : d_(std::move(data)) {
  const int nb = n_buffers();
  const int ns = n_servers();
  fed_by_.assign(nb + 1, 0);
  depleted_by_.assign(nb + 1, 0);
  feeders_count_.assign(nb + 1, 0);
  depleters_count_.assign(nb + 1, 0);
  server_activities_.assign(ns + 1, {});

  for (int a = 1; a <= n_activities(); ++a) {
    const Activity& act = activity(a);
    if (act.server >= 1 && act.server <= ns) server_activities_[act.server].push_back(a);
    for (int k : act.inputs) {
      if (k >= 1 && k <= nb) {
        if (depleted_by_[k] == 0) depleted_by_[k] = a;
        ++depleters_count_[k];
      }
    }
    for (int k : act.outputs) {
      if (k >= 1 && k <= nb) {
        if (fed_by_[k] == 0) fed_by_[k] = a;
        ++feeders_count_[k];
      }
    }
  }
  for (int b = 1; b <= nb; ++b) buffer_ids_.emplace(d_.buffers[b - 1], b);
  for (int s = 1; s <= ns; ++s) server_ids_.emplace(d_.servers[s - 1], s);
  for (int a = 1; a <= n_activities(); ++a) activity_ids_.emplace(d_.activities[a - 1].name, a);
}

bool Topology::is_entry_buffer(int buffer) const {
  for (const JobType& jt : d_.job_types)
    if (jt.entry_buffer == buffer) return true;
  return false;
}

std::vector<int> Topology::shared_servers() const {
  std::vector<int> out;
  for (int s = 1; s <= n_servers(); ++s)
    if (is_shared(s)) out.push_back(s);
  return out;
}

namespace {
int lookup(const std::map<std::string, int, std::less<>>& m, std::string_view name,
           const char* what) {
  auto it = m.find(name);
  if (it == m.end()) throw ConfigError(std::string("unknown ") + what + " name: " + std::string(name));
  return it->second;
}
}  // namespace

int Topology::buffer_id(std::string_view name) const { return lookup(buffer_ids_, name, "buffer"); }
int Topology::server_id(std::string_view name) const { return lookup(server_ids_, name, "server"); }
int Topology::activity_id(std::string_view name) const {
  return lookup(activity_ids_, name, "activity");
}
bool Topology::has_activity(std::string_view name) const {
  return activity_ids_.find(name) != activity_ids_.end();
}

std::vector<std::string> Topology::validate() const {
  std::vector<std::string> v;
  const int nb = n_buffers();

  for (const JobType& jt : d_.job_types) {
    if (jt.entry_buffer < 1 || jt.entry_buffer > nb) {
      v.push_back("job type " + jt.name + " has an invalid entry buffer");
      continue;
    }
    if (feeders_count_[jt.entry_buffer] > 0)
      v.push_back("entry buffer " + buffer_name(jt.entry_buffer) +
                  " has a feeding activity (must be externally fed)");
    if (!(jt.arrival.mean > 0.0))
      v.push_back("job type " + jt.name + " has a nonpositive arrival mean");
  }

  for (int b = 1; b <= nb; ++b) {
    if (depleters_count_[b] == 0)
      v.push_back("buffer " + buffer_name(b) + " is depleted by no activity (d not a function)");
    else if (depleters_count_[b] > 1)
      v.push_back("buffer " + buffer_name(b) + " is depleted by " +
                  std::to_string(depleters_count_[b]) + " activities (d not a function)");
    if (!is_entry_buffer(b)) {
      if (feeders_count_[b] == 0)
        v.push_back("buffer " + buffer_name(b) + " is neither an entry buffer nor fed (orphan)");
      else if (feeders_count_[b] > 1)
        v.push_back("buffer " + buffer_name(b) + " is fed by " +
                    std::to_string(feeders_count_[b]) + " activities (f not a function)");
    }
  }

  for (int a = 1; a <= n_activities(); ++a) {
    const Activity& act = activity(a);
    if (act.inputs.empty()) v.push_back("activity " + act.name + " has no input buffer");
    if (act.server < 1 || act.server > n_servers())
      v.push_back("activity " + act.name + " names an unknown server");
    if (act.job_type < 1 || act.job_type > n_job_types())
      v.push_back("activity " + act.name + " names an unknown job type");
    if (!(act.service.mean > 0.0))
      v.push_back("activity " + act.name + " has a nonpositive service mean");
    for (int k : act.inputs)
      if (k < 1 || k > nb) v.push_back("activity " + act.name + " inputs an unknown buffer");
    for (int k : act.outputs)
      if (k < 1 || k > nb) v.push_back("activity " + act.name + " outputs an unknown buffer");
  }

  for (int s = 1; s <= n_servers(); ++s) {
    if (!is_shared(s)) continue;
    std::set<int> seen;
    for (int a : server_activities_[s])
      for (int k : activity(a).inputs)
        if (!seen.insert(k).second)
          v.push_back("server " + server_name(s) + " has two activities depleting buffer " +
                      buffer_name(k));
  }

  // Cycle check over activity precedence: j -> j' when j feeds a buffer that
  // j' depletes.
  const int na = n_activities();
  std::vector<int> state(na + 1, 0);  // 0 unvisited, 1 on stack, 2 done
  std::vector<std::vector<int>> next(na + 1);
  for (int a = 1; a <= na; ++a)
    for (int k : activity(a).outputs)
      if (k >= 1 && k <= nb && depleted_by_[k] != 0) next[a].push_back(depleted_by_[k]);
  bool cycle = false;
  auto dfs = [&](auto&& self, int a) -> void {
    state[a] = 1;
    for (int b : next[a]) {
      if (state[b] == 1) cycle = true;
      if (state[b] == 0) self(self, b);
    }
    state[a] = 2;
  };
  for (int a = 1; a <= na && !cycle; ++a)
    if (state[a] == 0) dfs(dfs, a);
  if (cycle) v.push_back("activity precedence graph has a cycle (network must be feedforward)");

  return v;
}

DistributionSpec ServiceFamilySpec::make(double rate) const {
  if (!(rate > 0.0)) throw ConfigError("service rate must be > 0");
  switch (family) {
    case DistFamily::kExponential: return make_exponential(1.0 / rate);
    case DistFamily::kErlangK: return make_erlang(erlang_k, 1.0 / rate);
    case DistFamily::kGammaScv: return make_gamma_scv(1.0 / rate, gamma_scv);
    case DistFamily::kDeterministic: return make_deterministic(1.0 / rate);
  }
  throw ConfigError("unknown service family");
}

namespace {

void check_rate(double r, const char* name) {
  if (!(r > 0.0)) throw ConfigError(std::string("rate ") + name + " must be strictly positive");
}

DistributionSpec arrival_spec(const std::map<std::string, DistributionSpec>& overrides,
                              const std::string& type, double lambda) {
  auto it = overrides.find(type);
  if (it != overrides.end()) return it->second;
  return make_exponential(1.0 / lambda);
}

DistributionSpec service_spec(const std::map<std::string, DistributionSpec>& overrides,
                              const std::string& act, const ServiceFamilySpec& fam, double rate) {
  auto it = overrides.find(act);
  if (it != overrides.end()) return it->second;
  return fam.make(rate);
}

}  // namespace

Topology build_figure1(const Figure1Params& p) {
  check_rate(p.lambda_a, "lambda_a");
  check_rate(p.lambda_b, "lambda_b");
  check_rate(p.mu1, "mu1");
  check_rate(p.mu2, "mu2");
  check_rate(p.mu3, "mu3");
  check_rate(p.mu5, "mu5");
  check_rate(p.mu6, "mu6");
  check_rate(p.mu7, "mu7");
  check_rate(p.muA, "muA");
  check_rate(p.muB, "muB");

  TopologyData d;
  for (int b = 1; b <= 10; ++b) d.buffers.push_back(std::to_string(b));
  for (int s = 1; s <= 7; ++s) d.servers.push_back(std::to_string(s));
  d.job_types = {
      {"a", arrival_spec(p.arrival_overrides, "a", p.lambda_a), 1},
      {"b", arrival_spec(p.arrival_overrides, "b", p.lambda_b), 2},
  };
  auto svc = [&](const std::string& name, double rate) {
    return service_spec(p.service_overrides, name, p.services, rate);
  };
  d.activities = {
      {"1", 1, 1, {1}, {3, 4}, svc("1", p.mu1), {}},
      {"2", 2, 2, {2}, {5, 6}, svc("2", p.mu2), {}},
      {"3", 3, 1, {3}, {7}, svc("3", p.mu3), {}},
      {"A", 4, 1, {4}, {8}, svc("A", p.muA), {3}},
      {"B", 4, 2, {5}, {9}, svc("B", p.muB), {}},
      {"5", 5, 2, {6}, {10}, svc("5", p.mu5), {}},
      {"6", 6, 1, {7, 8}, {}, svc("6", p.mu6), {}},
      {"7", 7, 2, {9, 10}, {}, svc("7", p.mu7), {}},
  };
  return Topology(std::move(d));
}

Topology build_multifork(const MultiforkParams& p) {
  if (p.g1 < 1 || p.g2 < 1) throw ConfigError("multifork requires g1 >= 1 and g2 >= 1");
  check_rate(p.lambda_a, "lambda_a");
  check_rate(p.lambda_b, "lambda_b");
  check_rate(p.mu1, "mu1");
  check_rate(p.mu2, "mu2");
  check_rate(p.muA, "muA");
  check_rate(p.muB, "muB");
  check_rate(p.mu6, "mu6");
  check_rate(p.mu7, "mu7");
  std::vector<double> muL = p.muL;
  std::vector<double> muR = p.muR;
  if (muL.empty()) muL.assign(p.g1, p.default_muL);
  if (muR.empty()) muR.assign(p.g2, p.default_muR);
  if (static_cast<int>(muL.size()) != p.g1 || static_cast<int>(muR.size()) != p.g2)
    throw ConfigError("multifork branch rate lists must have g1 and g2 entries");
  for (double r : muL) check_rate(r, "muL[i]");
  for (double r : muR) check_rate(r, "muR[j]");

  TopologyData d;
  auto add_buffer = [&](const std::string& name) {
    d.buffers.push_back(name);
    return static_cast<int>(d.buffers.size());
  };
  auto add_server = [&](const std::string& name) {
    d.servers.push_back(name);
    return static_cast<int>(d.servers.size());
  };

  const int b1 = add_buffer("1");
  const int b2 = add_buffer("2");
  const int b4 = add_buffer("4");
  const int b5 = add_buffer("5");
  std::vector<int> bUL(p.g1), bUR(p.g2), bDL(p.g1), bDR(p.g2);
  for (int i = 0; i < p.g1; ++i) bUL[i] = add_buffer("UL" + std::to_string(i + 1));
  for (int j = 0; j < p.g2; ++j) bUR[j] = add_buffer("UR" + std::to_string(j + 1));
  const int bDA = add_buffer("DA");
  const int bDB = add_buffer("DB");
  for (int i = 0; i < p.g1; ++i) bDL[i] = add_buffer("DL" + std::to_string(i + 1));
  for (int j = 0; j < p.g2; ++j) bDR[j] = add_buffer("DR" + std::to_string(j + 1));

  const int s1 = add_server("1");
  const int s2 = add_server("2");
  const int s4 = add_server("4");
  std::vector<int> sL(p.g1), sR(p.g2);
  for (int i = 0; i < p.g1; ++i) sL[i] = add_server("L" + std::to_string(i + 1));
  for (int j = 0; j < p.g2; ++j) sR[j] = add_server("R" + std::to_string(j + 1));
  const int s6 = add_server("6");
  const int s7 = add_server("7");

  d.job_types = {
      {"a", arrival_spec(p.arrival_overrides, "a", p.lambda_a), b1},
      {"b", arrival_spec(p.arrival_overrides, "b", p.lambda_b), b2},
  };
  auto svc = [&](const std::string& name, double rate) {
    return service_spec(p.service_overrides, name, p.services, rate);
  };

  std::vector<int> fork_a_out = {b4};
  fork_a_out.insert(fork_a_out.end(), bUL.begin(), bUL.end());
  std::vector<int> fork_b_out = {b5};
  fork_b_out.insert(fork_b_out.end(), bUR.begin(), bUR.end());
  std::vector<int> join_a_in = {bDA};
  join_a_in.insert(join_a_in.end(), bDL.begin(), bDL.end());
  std::vector<int> join_b_in = {bDB};
  join_b_in.insert(join_b_in.end(), bDR.begin(), bDR.end());

  d.activities.push_back({"1", s1, 1, {b1}, fork_a_out, svc("1", p.mu1), {}});
  d.activities.push_back({"2", s2, 2, {b2}, fork_b_out, svc("2", p.mu2), {}});
  d.activities.push_back({"A", s4, 1, {b4}, {bDA}, svc("A", p.muA), bUL});
  d.activities.push_back({"B", s4, 2, {b5}, {bDB}, svc("B", p.muB), {}});
  for (int i = 0; i < p.g1; ++i) {
    const std::string name = "L" + std::to_string(i + 1);
    d.activities.push_back({name, sL[i], 1, {bUL[i]}, {bDL[i]}, svc(name, muL[i]), {}});
  }
  for (int j = 0; j < p.g2; ++j) {
    const std::string name = "R" + std::to_string(j + 1);
    d.activities.push_back({name, sR[j], 2, {bUR[j]}, {bDR[j]}, svc(name, muR[j]), {}});
  }
  d.activities.push_back({"6", s6, 1, join_a_in, {}, svc("6", p.mu6), {}});
  d.activities.push_back({"7", s7, 2, join_b_in, {}, svc("7", p.mu7), {}});
  return Topology(std::move(d));
}

Topology build_threetype(const ThreeTypeParams& p) {
  check_rate(p.lambda_a, "lambda_a");
  check_rate(p.lambda_b, "lambda_b");
  check_rate(p.lambda_c, "lambda_c");
  check_rate(p.mu1, "mu1");
  check_rate(p.mu2, "mu2");
  check_rate(p.mu3, "mu3");
  check_rate(p.mu4, "mu4");
  check_rate(p.muA, "muA");
  check_rate(p.muB1, "muB1");
  check_rate(p.muB2, "muB2");
  check_rate(p.muC, "muC");
  check_rate(p.mu7, "mu7");
  check_rate(p.mu8, "mu8");
  check_rate(p.mu9, "mu9");
  check_rate(p.mu10, "mu10");

  TopologyData d;
  for (int b = 1; b <= 15; ++b) d.buffers.push_back(std::to_string(b));
  for (int s = 1; s <= 10; ++s) d.servers.push_back(std::to_string(s));
  d.job_types = {
      {"a", arrival_spec(p.arrival_overrides, "a", p.lambda_a), 1},
      {"b", arrival_spec(p.arrival_overrides, "b", p.lambda_b), 2},
      {"c", arrival_spec(p.arrival_overrides, "c", p.lambda_c), 3},
  };
  auto svc = [&](const std::string& name, double rate) {
    return service_spec(p.service_overrides, name, p.services, rate);
  };
  // Type a forks into buffers 4 (dedicated server 4) and 5 (shared server 5);
  // type b into buffers 6 (server 5) and 7 (server 6); type c into buffers
  // 8 (shared server 6) and 9 (dedicated server 7). Buffers 10..15 feed the
  // join servers 8, 9 and 10.
  d.activities = {
      {"1", 1, 1, {1}, {4, 5}, svc("1", p.mu1), {}},
      {"2", 2, 2, {2}, {6, 7}, svc("2", p.mu2), {}},
      {"3", 3, 3, {3}, {8, 9}, svc("3", p.mu3), {}},
      {"4", 4, 1, {4}, {10}, svc("4", p.mu4), {}},
      {"A", 5, 1, {5}, {11}, svc("A", p.muA), {4}},
      {"B1", 5, 2, {6}, {12}, svc("B1", p.muB1), {}},
      {"B2", 6, 2, {7}, {13}, svc("B2", p.muB2), {6}},
      {"C", 6, 3, {8}, {14}, svc("C", p.muC), {}},
      {"7", 7, 3, {9}, {15}, svc("7", p.mu7), {}},
      {"8", 8, 1, {10, 11}, {}, svc("8", p.mu8), {}},
      {"9", 9, 2, {12, 13}, {}, svc("9", p.mu9), {}},
      {"10", 10, 3, {14, 15}, {}, svc("10", p.mu10), {}},
  };
  return Topology(std::move(d));
}

}  // namespace forkjoin
