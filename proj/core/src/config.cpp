#include "forkjoin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "forkjoin/error.hpp"
#include "forkjoin/presets.hpp"

namespace forkjoin {

using nlohmann::json;

nlohmann::json distribution_to_json(const DistributionSpec& spec) {
  json j;
  j["mean"] = spec.mean;
  switch (spec.family) {
    case DistFamily::kExponential: j["family"] = "exponential"; break;
    case DistFamily::kErlangK:
      j["family"] = "erlang";
      j["k"] = spec.k;
      break;
    case DistFamily::kGammaScv:
      j["family"] = "gamma_scv";
      j["scv"] = spec.scv_param;
      break;
    case DistFamily::kDeterministic: j["family"] = "deterministic"; break;
  }
  return j;
}

DistributionSpec distribution_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.contains("mean"))
    throw ConfigError("distribution needs 'family' and 'mean': " + j.dump());
  const std::string family = j.at("family").get<std::string>();
  const double mean = j.at("mean").get<double>();
  if (family == "exponential") return make_distribution(DistFamily::kExponential, mean);
  if (family == "deterministic") return make_distribution(DistFamily::kDeterministic, mean);
  if (family == "erlang")
    return make_distribution(DistFamily::kErlangK, mean, -1.0, j.value("k", 0));
  if (family == "gamma_scv")
    return make_distribution(DistFamily::kGammaScv, mean, j.value("scv", -1.0));
  throw ConfigError("unknown distribution family: " + family);
}

nlohmann::json topology_to_json(const Topology& topo) {
  json j;
  j["buffers"] = json::array();
  for (int b = 1; b <= topo.n_buffers(); ++b) j["buffers"].push_back(topo.buffer_name(b));
  j["servers"] = json::array();
  for (int s = 1; s <= topo.n_servers(); ++s) j["servers"].push_back(topo.server_name(s));
  j["job_types"] = json::array();
  for (const JobType& jt : topo.job_types()) {
    json t;
    t["name"] = jt.name;
    t["entry_buffer"] = topo.buffer_name(jt.entry_buffer);
    t["arrival"] = distribution_to_json(jt.arrival);
    j["job_types"].push_back(t);
  }
  j["activities"] = json::array();
  for (const Activity& act : topo.activities()) {
    json a;
    a["name"] = act.name;
    a["server"] = topo.server_name(act.server);
    a["job_type"] = topo.job_type(act.job_type).name;
    a["inputs"] = json::array();
    for (int k : act.inputs) a["inputs"].push_back(topo.buffer_name(k));
    a["outputs"] = json::array();
    for (int k : act.outputs) a["outputs"].push_back(topo.buffer_name(k));
    if (!act.pace_buffers.empty()) {
      a["pace_buffers"] = json::array();
      for (int k : act.pace_buffers) a["pace_buffers"].push_back(topo.buffer_name(k));
    }
    a["service"] = distribution_to_json(act.service);
    j["activities"].push_back(a);
  }
  return j;
}

Topology topology_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("topology document must be a JSON object");
  for (const char* key : {"buffers", "servers", "job_types", "activities"})
    if (!j.contains(key)) throw ConfigError(std::string("topology document missing '") + key + "'");

  TopologyData d;
  std::map<std::string, int> buffer_ids, server_ids, type_ids;
  for (const auto& b : j.at("buffers")) {
    d.buffers.push_back(b.get<std::string>());
    if (!buffer_ids.emplace(d.buffers.back(), static_cast<int>(d.buffers.size())).second)
      throw ConfigError("duplicate buffer name: " + d.buffers.back());
  }
  for (const auto& s : j.at("servers")) {
    d.servers.push_back(s.get<std::string>());
    if (!server_ids.emplace(d.servers.back(), static_cast<int>(d.servers.size())).second)
      throw ConfigError("duplicate server name: " + d.servers.back());
  }
  auto buffer_of = [&](const std::string& name) {
    auto it = buffer_ids.find(name);
    if (it == buffer_ids.end()) throw ConfigError("unknown buffer name: " + name);
    return it->second;
  };
  for (const auto& t : j.at("job_types")) {
    JobType jt;
    jt.name = t.at("name").get<std::string>();
    jt.entry_buffer = buffer_of(t.at("entry_buffer").get<std::string>());
    jt.arrival = distribution_from_json(t.at("arrival"));
    if (!type_ids.emplace(jt.name, static_cast<int>(d.job_types.size()) + 1).second)
      throw ConfigError("duplicate job type name: " + jt.name);
    d.job_types.push_back(jt);
  }
  for (const auto& a : j.at("activities")) {
    Activity act;
    act.name = a.at("name").get<std::string>();
    auto sit = server_ids.find(a.at("server").get<std::string>());
    if (sit == server_ids.end())
      throw ConfigError("activity " + act.name + " names an unknown server");
    act.server = sit->second;
    auto tit = type_ids.find(a.at("job_type").get<std::string>());
    if (tit == type_ids.end())
      throw ConfigError("activity " + act.name + " names an unknown job type");
    act.job_type = tit->second;
    for (const auto& k : a.at("inputs")) act.inputs.push_back(buffer_of(k.get<std::string>()));
    for (const auto& k : a.at("outputs")) act.outputs.push_back(buffer_of(k.get<std::string>()));
    if (a.contains("pace_buffers"))
      for (const auto& k : a.at("pace_buffers"))
        act.pace_buffers.push_back(buffer_of(k.get<std::string>()));
    act.service = distribution_from_json(a.at("service"));
    d.activities.push_back(act);
  }
  return Topology(std::move(d));
}

namespace {

PolicySpec policy_from_json(const json& j) {
  if (j.is_string()) return parse_policy(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("policy entries are key strings or objects with a 'kind'");
  PolicySpec spec = parse_policy(j.at("kind").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (key == "p")
      spec.p = value.get<double>();
    else if (key == "preemptive")
      spec.preemptive = value.get<bool>();
    else if (key == "h_a")
      spec.h_a = value.get<double>();
    else if (key == "h_b")
      spec.h_b = value.get<double>();
    else if (key == "h_c")
      spec.h_c = value.get<double>();
    else
      throw ConfigError("unknown policy field: " + key);
  }
  if (spec.kind == PolicySpec::Kind::kRandomized && (spec.p < 0 || spec.p > 1))
    throw ConfigError("randomized policy requires p in [0, 1]");
  return spec;
}

}  // namespace

ExperimentConfig load_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::set<std::string> known = {
      "instances",    "topology",        "topology_name", "policies",
      "replications", "jobs_per_type",   "warmup_jobs_per_type",
      "seed",         "h_a",             "h_b",
      "mu1",          "mu2",             "share_seeds_across_policies",
      "deviation_table", "out_dir",      "parallelism"};
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!known.count(key)) throw ConfigError("unknown config key: " + key);
  }

  ExperimentConfig cfg;
  if (j.contains("instances")) {
    for (const auto& i : j.at("instances")) {
      const int id = i.get<int>();
      instance_preset(id);  // throws "unknown preset" for bad ids
      cfg.instances.push_back(id);
    }
  }
  if (j.contains("topology")) {
    cfg.custom_topology = j.at("topology");
    Topology topo = topology_from_json(*cfg.custom_topology);
    const auto violations = topo.validate();
    if (!violations.empty())
      throw ConfigError("custom topology invalid: " + violations.front());
  }
  if (j.contains("topology_name")) cfg.custom_name = j.at("topology_name").get<std::string>();
  if (cfg.instances.empty() && !cfg.custom_topology)
    throw ConfigError("config needs 'instances' (preset ids) or a custom 'topology'");
  if (!cfg.instances.empty() && cfg.custom_topology)
    throw ConfigError("config must use either 'instances' or 'topology', not both");

  if (!j.contains("policies") || j.at("policies").empty())
    throw ConfigError("config needs a nonempty 'policies' list");
  for (const auto& p : j.at("policies")) cfg.policies.push_back(policy_from_json(p));

  cfg.replications = j.value("replications", cfg.replications);
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  cfg.jobs_per_type = j.value("jobs_per_type", cfg.jobs_per_type);
  cfg.warmup_jobs_per_type = j.value("warmup_jobs_per_type", cfg.warmup_jobs_per_type);
  if (cfg.warmup_jobs_per_type >= cfg.jobs_per_type)
    throw ConfigError("inconsistent warm-up: warmup_jobs_per_type must be below jobs_per_type");
  cfg.seed = j.value("seed", cfg.seed);
  cfg.h_a = j.value("h_a", cfg.h_a);
  cfg.h_b = j.value("h_b", cfg.h_b);
  cfg.mu1 = j.value("mu1", cfg.mu1);
  cfg.mu2 = j.value("mu2", cfg.mu2);
  if (!(cfg.mu1 > 0) || !(cfg.mu2 > 0)) throw ConfigError("mu1 and mu2 must be > 0");
  cfg.share_seeds_across_policies =
      j.value("share_seeds_across_policies", cfg.share_seeds_across_policies);
  cfg.deviation_table = j.value("deviation_table", cfg.deviation_table);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.parallelism = j.value("parallelism", cfg.parallelism);
  if (cfg.parallelism < 0) throw ConfigError("parallelism must be >= 0");
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

void scale_config(ExperimentConfig& config, double factor) {
  if (!(factor > 0)) throw ConfigError("--scale must be > 0");
  if (factor == 1.0) return;
  const auto scaled_jobs =
      static_cast<std::uint64_t>(std::llround(static_cast<double>(config.jobs_per_type) * factor));
  config.jobs_per_type = std::max<std::uint64_t>(1000, scaled_jobs);
  const auto scaled_warm = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(config.warmup_jobs_per_type) * factor));
  config.warmup_jobs_per_type = std::min(scaled_warm, config.jobs_per_type - 1);
  const int scaled_reps =
      static_cast<int>(std::llround(static_cast<double>(config.replications) * factor));
  config.replications = std::clamp(scaled_reps, 2, config.replications);
}

}  // namespace forkjoin
