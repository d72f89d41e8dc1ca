#include "forkjoin/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "forkjoin/engine.hpp"
#include "forkjoin/error.hpp"
#include "forkjoin/presets.hpp"

namespace forkjoin {

namespace {

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}
std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

struct Task {
  int instance = 0;  // 0 for a custom topology
  std::string instance_key;
  const Topology* topology = nullptr;
  PolicySpec policy;
  int rep = 0;
  std::uint64_t seed = 0;
};

bool is_rand23(const PolicySpec& p) {
  return p.kind == PolicySpec::Kind::kRandomized && std::abs(p.p - 2.0 / 3.0) < 1e-9;
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, const std::string& instance_key,
                               const std::string& policy_key, int rep) {
  std::string label = "i=" + instance_key + "/r=" + std::to_string(rep);
  if (!policy_key.empty()) label += "/p=" + policy_key;
  return derive_seed(master, label);
}

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  // Resolve topologies once; they are immutable and shared across workers.
  std::vector<std::pair<std::string, Topology>> topologies;
  if (config.custom_topology) {
    topologies.emplace_back(config.custom_name, topology_from_json(*config.custom_topology));
  } else {
    for (int id : config.instances)
      topologies.emplace_back(std::to_string(id), build_instance(id, config.mu1, config.mu2));
  }
  // Reported sums live in buffers named 3/7 and 6/10.
  for (auto& [key, topo] : topologies) {
    for (const char* name : {"3", "7", "6", "10"}) (void)topo.buffer_id(name);
  }

  std::vector<PolicySpec> policies = config.policies;
  if (config.deviation_table &&
      std::none_of(policies.begin(), policies.end(), is_rand23)) {
    PolicySpec rand23;
    rand23.kind = PolicySpec::Kind::kRandomized;
    rand23.p = 2.0 / 3.0;
    policies.push_back(rand23);
  }

  std::vector<Task> tasks;
  for (std::size_t ti = 0; ti < topologies.size(); ++ti) {
    const int id = config.custom_topology ? 0 : config.instances[ti];
    for (const PolicySpec& p : policies) {
      for (int rep = 0; rep < config.replications; ++rep) {
        Task t;
        t.instance = id;
        t.instance_key = topologies[ti].first;
        t.topology = &topologies[ti].second;
        t.policy = p;
        t.rep = rep;
        t.seed = replication_seed(config.seed, t.instance_key,
                                  config.share_seeds_across_policies ? "" : p.key(), rep);
        tasks.push_back(std::move(t));
      }
    }
  }

  std::vector<RepResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      const Task& t = tasks[i];
      try {
        RunOptions opt;
        opt.jobs_per_type = config.jobs_per_type;
        opt.warmup_jobs_per_type = config.warmup_jobs_per_type;
        opt.seed = t.seed;
        const RunResult r = run(*t.topology, t.policy, opt);
        RepResult& out = results[i];
        out.instance = t.instance;
        out.policy = t.policy.key();
        out.rep = t.rep;
        out.seed = t.seed;
        const Topology& topo = *t.topology;
        out.q37 = r.stats.buffer_time_average(topo.buffer_id("3")) +
                  r.stats.buffer_time_average(topo.buffer_id("7"));
        out.q610 = r.stats.buffer_time_average(topo.buffer_id("6")) +
                   r.stats.buffer_time_average(topo.buffer_id("10"));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failed.exchange(true))
          failure = std::string(e.what()) + " (instance " + t.instance_key + ", policy " +
                    t.policy.key() + ", rep " + std::to_string(t.rep) + ", seed " +
                    std::to_string(t.seed) + ")";
        return;
      }
    }
  };

  unsigned n_threads = config.parallelism > 0
                           ? static_cast<unsigned>(config.parallelism)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw InvariantError("replication failed: " + failure);

  ExperimentOutput out;
  out.report = cost_and_tables(std::move(results), config.h_a, config.h_b);

  std::filesystem::create_directories(config.out_dir);
  const std::string per_rep = config.out_dir + "/per_rep.csv";
  const std::string table3 = config.out_dir + "/table3.csv";
  const std::string devs = config.out_dir + "/deviations.csv";
  write_per_rep_csv(per_rep, out.report.reps);
  write_table3_csv(table3, out.report);
  write_deviation_csv(devs, out.report);
  out.files_written = {per_rep, table3, devs};
  return out;
}

void write_per_rep_csv(const std::string& path, const std::vector<RepResult>& reps) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "instance,policy,rep,seed,q37,q610\n";
  for (const RepResult& r : reps)
    f << r.instance << ',' << r.policy << ',' << r.rep << ',' << r.seed << ','
      << fixed6(r.q37) << ',' << fixed6(r.q610) << '\n';
}

std::vector<RepResult> read_per_rep_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != "instance,policy,rep,seed,q37,q610")
    throw ConfigError("unexpected per-rep CSV header in " + path);
  std::vector<RepResult> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    RepResult r;
    std::getline(ss, field, ',');
    r.instance = std::stoi(field);
    std::getline(ss, r.policy, ',');
    std::getline(ss, field, ',');
    r.rep = std::stoi(field);
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    std::getline(ss, field, ',');
    r.q37 = std::stod(field);
    std::getline(ss, field, ',');
    r.q610 = std::stod(field);
    out.push_back(std::move(r));
  }
  return out;
}

void write_table3_csv(const std::string& path, const ExperimentReport& report) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "instance,policy,q37_mean,q37_hw,q610_mean,q610_hw,cost,deviation_pct\n";
  for (const CellSummary& c : report.cells)
    f << c.instance << ',' << c.policy << ',' << fixed6(c.q37_mean) << ',' << fixed6(c.q37_hw)
      << ',' << fixed6(c.q610_mean) << ',' << fixed6(c.q610_hw) << ',' << fixed6(c.cost) << ','
      << fixed4(c.deviation_pct) << '\n';
}

void write_deviation_csv(const std::string& path, const ExperimentReport& report) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "policy,h_a,h_b,avg_deviation_pct,max_deviation_pct\n";
  for (const PolicyDeviation& d : report.deviations)
    f << d.policy << ',' << fixed4(report.h_a) << ',' << fixed4(report.h_b) << ','
      << fixed4(d.avg_pct) << ',' << fixed4(d.max_pct) << '\n';
}

void write_event_csv(const std::string& path, const Trace& trace, const Topology& topo) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "time,kind,where,activity,job,buffer_deltas\n";
  for (const EventRecord& e : trace.events) {
    f << fixed6(e.time) << ',';
    if (e.kind == 'a') {
      const JobType& jt = topo.job_type(e.id);
      f << "arrival," << jt.name << ",," << e.job << ",+"
        << topo.buffer_name(jt.entry_buffer) << '\n';
    } else {
      const Activity& act = topo.activity(e.activity);
      f << "completion," << topo.server_name(e.id) << ',' << act.name << ',' << e.job << ',';
      bool first = true;
      for (int k : act.inputs) {
        f << (first ? "" : ";") << '-' << topo.buffer_name(k);
        first = false;
      }
      for (int k : act.outputs) {
        f << (first ? "" : ";") << '+' << topo.buffer_name(k);
        first = false;
      }
      f << '\n';
    }
  }
}

void write_queue_paths_csv(const std::string& path, const Trace& trace, const Topology& topo) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << "buffer,time,value\n";
  for (int b = 1; b < static_cast<int>(trace.queue.size()); ++b) {
    if (!trace.has_queue(b)) continue;
    const Path& p = trace.queue[b];
    auto ts = p.times();
    auto vs = p.values();
    for (std::size_t i = 0; i < ts.size(); ++i)
      f << topo.buffer_name(b) << ',' << fixed6(ts[i]) << ',' << vs[i] << '\n';
  }
}

std::string render_report(const ExperimentReport& report) {
  std::ostringstream os;
  os << "instance  policy                 q3+q7 (95% ci)        q6+q10 (95% ci)       cost      dev%\n";
  for (const CellSummary& c : report.cells) {
    char line[256];
    std::snprintf(line, sizeof line, "%-9d %-22s %8.3f +/- %-8.3f %8.3f +/- %-8.3f %-9.3f %6.2f\n",
                  c.instance, c.policy.c_str(), c.q37_mean, c.q37_hw, c.q610_mean, c.q610_hw,
                  c.cost, c.deviation_pct);
    os << line;
  }
  os << "\npolicy deviations from the per-instance lowest cost (h_a=" << report.h_a
     << ", h_b=" << report.h_b << "):\n";
  for (const PolicyDeviation& d : report.deviations) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-22s avg %6.2f%%  max %6.2f%%\n", d.policy.c_str(),
                  d.avg_pct, d.max_pct);
    os << line;
  }
  return os.str();
}

}  // namespace forkjoin
