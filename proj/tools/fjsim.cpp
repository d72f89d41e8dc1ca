// fjsim: simulate fork-join networks, sweep experiment grids, solve the
// workload-split problems, and post-process result CSVs.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "forkjoin/analytics.hpp"
#include "forkjoin/config.hpp"
#include "forkjoin/engine.hpp"
#include "forkjoin/error.hpp"
#include "forkjoin/experiment.hpp"
#include "forkjoin/presets.hpp"
#include "forkjoin/stats.hpp"

namespace fj = forkjoin;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;

int default_parallelism() {
  if (const char* env = std::getenv("FJSIM_PARALLELISM")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // auto
}

fj::Topology load_topology(int instance, const std::string& topology_file, double mu1,
                           double mu2) {
  if (instance > 0 && !topology_file.empty())
    throw fj::ConfigError("use either --instance or --topology, not both");
  if (instance > 0) return fj::build_instance(instance, mu1, mu2);
  if (topology_file.empty())
    throw fj::ConfigError("one of --instance or --topology is required");
  std::ifstream in(topology_file);
  if (!in) throw fj::ConfigError("cannot open " + topology_file);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = nlohmann::json::parse(ss.str(), nullptr, true, /*ignore_comments=*/true);
  fj::Topology topo = fj::topology_from_json(j);
  const auto violations = topo.validate();
  if (!violations.empty()) throw fj::ConfigError("topology invalid: " + violations.front());
  return topo;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  int instance = 0;
  std::string topology_file;
  std::string policy = "proposed";
  std::uint64_t jobs = 0;
  double horizon = -1;
  std::uint64_t warmup = 0;
  std::uint64_t seed = 0;
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7;
  bool check = false;
  std::string trace_file;
  std::string events_file;
};

int cmd_simulate(const SimulateArgs& a) {
  const fj::Topology topo = load_topology(a.instance, a.topology_file, a.mu1, a.mu2);
  const fj::PolicySpec policy = fj::parse_policy(a.policy);

  fj::RunOptions opt;
  if (a.horizon >= 0 && a.jobs > 0)
    throw fj::ConfigError("use either --jobs or --horizon, not both");
  if (a.horizon >= 0)
    opt.horizon = a.horizon;
  else
    opt.jobs_per_type = a.jobs > 0 ? a.jobs : 100000;
  opt.warmup_jobs_per_type = a.warmup;
  opt.seed = a.seed;
  opt.check_invariants = a.check;
  opt.trace.all_queues = !a.trace_file.empty();
  opt.trace.event_log = !a.events_file.empty();

  const fj::RunResult r = fj::run(topo, policy, opt);

  std::printf("policy %s, seed %llu: %llu events, t = %.3f (measured from %.3f)\n",
              policy.key().c_str(), static_cast<unsigned long long>(a.seed),
              static_cast<unsigned long long>(r.stats.events), r.stats.end_time,
              r.stats.measure_start);
  std::printf("%-8s %12s %14s\n", "buffer", "final", "time-average");
  for (int b = 1; b <= topo.n_buffers(); ++b) {
    std::printf("%-8s %12lld %14.4f\n", topo.buffer_name(b).c_str(), r.queue[b],
                r.stats.measured_span() > 0 ? r.stats.buffer_time_average(b) : 0.0);
  }
  std::printf("%-8s %12s %14s\n", "activity", "done", "utilization");
  for (int j = 1; j <= topo.n_activities(); ++j)
    std::printf("%-8s %12llu %14.4f\n", topo.activity(j).name.c_str(),
                static_cast<unsigned long long>(r.stats.completions[j]),
                r.stats.activity_utilization(j));

  if (!a.trace_file.empty()) {
    fj::write_queue_paths_csv(a.trace_file, r.trace, topo);
    std::printf("queue paths -> %s\n", a.trace_file.c_str());
  }
  if (!a.events_file.empty()) {
    fj::write_event_csv(a.events_file, r.trace, topo);
    std::printf("event log -> %s\n", a.events_file.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// experiment

int cmd_experiment(const std::string& config_file, const std::string& out_dir,
                   int parallelism, long long seed_override, double scale) {
  fj::ExperimentConfig cfg = fj::load_config_file(config_file);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (parallelism > 0) cfg.parallelism = parallelism;
  if (cfg.parallelism == 0) cfg.parallelism = default_parallelism();
  if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
  fj::scale_config(cfg, scale);

  const fj::ExperimentOutput out = fj::run_experiment(cfg);
  std::fputs(fj::render_report(out.report).c_str(), stdout);
  for (const std::string& f : out.files_written) std::printf("wrote %s\n", f.c_str());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// dcp

struct DcpArgs {
  std::string kind = "twotype";
  std::string in_file, out_file;
  bool oracle = false;
  double step = 1e-3;
  // inline instance fields
  double q3 = 0, q6 = 0, w4 = 0, mu_A = 1, mu_B = 1, h_a = 1, h_b = 1;
  double max_ul = 0, max_ur = 0;
  int g1 = 1, g2 = 1;
  double q4 = 0, q9 = 0, w5 = 0, w6 = 0, mu_B1 = 1, mu_B2 = 1, mu_C = 1, h_c = 1;
};

std::vector<std::map<std::string, double>> read_numeric_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw fj::ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw fj::ConfigError("empty CSV: " + path);
  std::vector<std::string> cols;
  std::stringstream hs(line);
  std::string field;
  while (std::getline(hs, field, ',')) cols.push_back(field);
  std::vector<std::map<std::string, double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::map<std::string, double> row;
    for (const std::string& c : cols) {
      if (!std::getline(ls, field, ','))
        throw fj::ConfigError("short row in " + path + ": " + line);
      row[c] = std::stod(field);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double get(const std::map<std::string, double>& row, const std::string& key) {
  auto it = row.find(key);
  if (it == row.end()) throw fj::ConfigError("CSV is missing column " + key);
  return it->second;
}

int cmd_dcp(const DcpArgs& a) {
  std::ostringstream out;
  auto emit_header = [&](const std::string& base, const std::string& solved) {
    out << base << ',' << solved;
    if (a.oracle) out << ",oracle_" << solved << "_step" ;
    out << '\n';
  };
  (void)emit_header;

  const bool batch = !a.in_file.empty();
  std::vector<std::map<std::string, double>> rows;
  if (batch) rows = read_numeric_csv(a.in_file);

  std::ostringstream csv;
  if (a.kind == "twotype") {
    csv << "q3,q6,w4,mu_A,mu_B,h_a,h_b,q4,q5,objective";
    if (a.oracle) csv << ",oracle_q4,oracle_q5,oracle_objective";
    csv << '\n';
    auto solve_one = [&](const fj::DcpInstance& inst) {
      const fj::DcpSplit s = fj::dcp_closed_form_solve(inst);
      char buf[512];
      std::snprintf(buf, sizeof buf, "%g,%g,%g,%g,%g,%g,%g,%.9g,%.9g,%.9g", inst.q3, inst.q6,
                    inst.w4, inst.mu_A, inst.mu_B, inst.h_a, inst.h_b, s.q4, s.q5,
                    fj::dcp_objective(inst, s.q4, s.q5));
      csv << buf;
      if (a.oracle) {
        const fj::GridSolution g = fj::dcp_grid_oracle(inst, a.step);
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g", g.q4, g.q5, g.objective);
        csv << buf;
      }
      csv << '\n';
    };
    if (batch) {
      for (const auto& row : rows)
        solve_one({get(row, "q3"), get(row, "q6"), get(row, "w4"), get(row, "mu_A"),
                   get(row, "mu_B"), get(row, "h_a"), get(row, "h_b")});
    } else {
      solve_one({a.q3, a.q6, a.w4, a.mu_A, a.mu_B, a.h_a, a.h_b});
    }
  } else if (a.kind == "fork") {
    csv << "w4,max_ul,max_ur,mu_A,mu_B,h_a,h_b,g1,g2,q4,q5,objective";
    if (a.oracle) csv << ",oracle_q4,oracle_q5,oracle_objective";
    csv << '\n';
    auto solve_one = [&](const fj::ForkDcpInstance& inst, double max_ur) {
      const fj::DcpSplit s = fj::fork_dcp_solve(inst);
      char buf[512];
      std::snprintf(buf, sizeof buf, "%g,%g,%g,%g,%g,%g,%g,%d,%d,%.9g,%.9g,%.9g", inst.w4,
                    inst.max_upstream_left, max_ur, inst.mu_A, inst.mu_B, inst.h_a, inst.h_b,
                    inst.g1, inst.g2, s.q4, s.q5,
                    fj::fork_dcp_objective(inst, max_ur, s.q4, s.q5));
      csv << buf;
      if (a.oracle) {
        const fj::GridSolution g = fj::fork_dcp_grid_oracle(inst, max_ur, a.step);
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g", g.q4, g.q5, g.objective);
        csv << buf;
      }
      csv << '\n';
    };
    if (batch) {
      for (const auto& row : rows) {
        fj::ForkDcpInstance inst{get(row, "w4"),  get(row, "max_ul"), get(row, "mu_A"),
                                 get(row, "mu_B"), get(row, "h_a"),   get(row, "h_b"),
                                 static_cast<int>(get(row, "g1")),
                                 static_cast<int>(get(row, "g2"))};
        solve_one(inst, get(row, "max_ur"));
      }
    } else {
      solve_one({a.w4, a.max_ul, a.mu_A, a.mu_B, a.h_a, a.h_b, a.g1, a.g2}, a.max_ur);
    }
  } else if (a.kind == "threetype") {
    csv << "q4,q9,w5,w6,mu_A,mu_B1,mu_B2,mu_C,h_a,h_b,h_c,q5,q6,q7,q8,objective";
    if (a.oracle) csv << ",oracle_q5,oracle_q6,oracle_q7,oracle_q8,oracle_objective";
    csv << '\n';
    auto solve_one = [&](const fj::ThreeTypeDcpInstance& inst) {
      const fj::ThreeTypeSplit s = fj::threetype_dcp_solve(inst);
      char buf[640];
      std::snprintf(buf, sizeof buf,
                    "%g,%g,%g,%g,%g,%g,%g,%g,%g,%g,%g,%.9g,%.9g,%.9g,%.9g,%.9g", inst.q4,
                    inst.q9, inst.w5, inst.w6, inst.mu_A, inst.mu_B1, inst.mu_B2, inst.mu_C,
                    inst.h_a, inst.h_b, inst.h_c, s.q5, s.q6, s.q7, s.q8,
                    fj::threetype_objective(inst, s));
      csv << buf;
      if (a.oracle) {
        const fj::ThreeTypeGridSolution g = fj::threetype_grid_oracle(inst, a.step);
        std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g,%.9g,%.9g", g.split.q5, g.split.q6,
                      g.split.q7, g.split.q8, g.objective);
        csv << buf;
      }
      csv << '\n';
    };
    if (batch) {
      for (const auto& row : rows)
        solve_one({get(row, "q4"), get(row, "q9"), get(row, "w5"), get(row, "w6"),
                   get(row, "mu_A"), get(row, "mu_B1"), get(row, "mu_B2"), get(row, "mu_C"),
                   get(row, "h_a"), get(row, "h_b"), get(row, "h_c")});
    } else {
      solve_one({a.q4, a.q9, a.w5, a.w6, a.mu_A, a.mu_B1, a.mu_B2, a.mu_C, a.h_a, a.h_b, a.h_c});
    }
  } else {
    throw fj::ConfigError("--kind must be twotype, fork or threetype");
  }

  if (!a.out_file.empty()) {
    std::ofstream f(a.out_file);
    if (!f) throw fj::ConfigError("cannot write " + a.out_file);
    f << csv.str();
    std::printf("wrote %s\n", a.out_file.c_str());
  } else {
    std::fputs(csv.str().c_str(), stdout);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose

struct DiagnoseArgs {
  int instance = 1;
  std::string topology_file;
  std::string policy = "sdp!";
  std::uint64_t jobs = 0;
  double horizon = -1;
  std::uint64_t seed = 0;
  double mu1 = 1.0 / 0.7, mu2 = 1.0 / 0.7;
  double r = 1.0;
  std::string intervals_file;
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const fj::Topology topo = load_topology(a.instance, a.topology_file, a.mu1, a.mu2);
  const fj::PolicySpec policy = fj::parse_policy(a.policy);

  fj::RunOptions opt;
  if (a.horizon >= 0)
    opt.horizon = a.horizon;
  else
    opt.jobs_per_type = a.jobs > 0 ? a.jobs : 20000;
  opt.seed = a.seed;
  opt.trace.queue_buffers = {topo.buffer_id("3"), topo.buffer_id("4"), topo.buffer_id("5")};

  const fj::RunResult r = fj::run(topo, policy, opt);
  const auto intervals = fj::classify_intervals(r.trace);

  double up_time = 0, down1_time = 0, down2_time = 0;
  for (const auto& iv : intervals) {
    const double len = iv.end - iv.start;
    switch (iv.kind) {
      case fj::IntervalLabel::Kind::kUp: up_time += len; break;
      case fj::IntervalLabel::Kind::kDown1: down1_time += len; break;
      case fj::IntervalLabel::Kind::kDown2: down2_time += len; break;
    }
  }
  const double mu_A = topo.activity(topo.activity_id("A")).service.rate();
  const double mu_B = topo.activity(topo.activity_id("B")).service.rate();
  const double dev = fj::tracking_deviation(r.trace.queue[topo.buffer_id("3")],
                                            r.trace.queue[topo.buffer_id("4")],
                                            r.trace.queue[topo.buffer_id("5")], mu_A, mu_B,
                                            a.r, r.trace.horizon);

  std::printf("horizon %.3f: %zu intervals (up %.1f%%, down1 %.1f%%, down2 %.1f%%)\n",
              r.trace.horizon, intervals.size(), 100 * up_time / r.trace.horizon,
              100 * down1_time / r.trace.horizon, 100 * down2_time / r.trace.horizon);
  std::printf("tracking deviation sup|Q4 - Q3 /\\ W4| / r = %.6f (r = %g)\n", dev, a.r);

  if (!a.intervals_file.empty()) {
    std::ofstream f(a.intervals_file);
    if (!f) throw fj::ConfigError("cannot write " + a.intervals_file);
    f << "start,end,label\n";
    for (const auto& iv : intervals) {
      const char* label = iv.kind == fj::IntervalLabel::Kind::kUp ? "up"
                          : iv.kind == fj::IntervalLabel::Kind::kDown1 ? "down1"
                                                                       : "down2";
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%s\n", iv.start, iv.end, label);
      f << buf;
    }
    std::printf("intervals -> %s\n", a.intervals_file.c_str());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& in_file, double h_a, double h_b, const std::string& out_dir) {
  const std::vector<fj::RepResult> reps = fj::read_per_rep_csv(in_file);
  const fj::ExperimentReport report = fj::cost_and_tables(reps, h_a, h_b);
  std::fputs(fj::render_report(report).c_str(), stdout);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    fj::write_table3_csv(out_dir + "/table3.csv", report);
    fj::write_deviation_csv(out_dir + "/deviations.csv", report);
    std::printf("wrote %s/table3.csv and %s/deviations.csv\n", out_dir.c_str(),
                out_dir.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fork-join network simulator and analytics toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run one simulation");
  simulate->add_option("--instance", sim.instance, "experiment grid instance id (1..36)");
  simulate->add_option("--topology", sim.topology_file, "custom topology JSON file");
  simulate->add_option("--policy", sim.policy, "policy key (default proposed)");
  simulate->add_option("--jobs", sim.jobs, "stop after this many arrivals of each type");
  simulate->add_option("--horizon", sim.horizon, "stop at this simulated time");
  simulate->add_option("--warmup", sim.warmup, "warm-up arrivals of each type");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--mu1", sim.mu1, "entry server 1 rate (presets only)");
  simulate->add_option("--mu2", sim.mu2, "entry server 2 rate (presets only)");
  simulate->add_flag("--check", sim.check, "verify flow identities after every event");
  simulate->add_option("--trace", sim.trace_file, "write queue paths CSV here");
  simulate->add_option("--events", sim.events_file, "write event log CSV here");

  std::string config_file, out_dir;
  int parallelism = 0;
  long long seed_override = -1;
  double scale = 1.0;
  CLI::App* experiment = app.add_subcommand("experiment", "run a config-driven sweep");
  experiment->add_option("--config", config_file, "experiment config JSON")->required();
  experiment->add_option("--out", out_dir, "output directory (overrides config)");
  experiment->add_option("--parallelism", parallelism, "worker threads (or FJSIM_PARALLELISM)");
  experiment->add_option("--seed", seed_override, "master seed (overrides config)");
  experiment->add_option("--scale", scale, "scale jobs/warm-up/replications by this factor");

  DcpArgs dcp;
  CLI::App* dcp_cmd = app.add_subcommand("dcp", "closed-form and oracle workload splits");
  dcp_cmd->add_option("--kind", dcp.kind, "twotype | fork | threetype");
  dcp_cmd->add_option("--in", dcp.in_file, "batch input CSV");
  dcp_cmd->add_option("--out", dcp.out_file, "output CSV (stdout when omitted)");
  dcp_cmd->add_flag("--oracle", dcp.oracle, "also run the grid oracle");
  dcp_cmd->add_option("--step", dcp.step, "oracle grid step (default 1e-3)");
  dcp_cmd->add_option("--q3", dcp.q3, "");
  dcp_cmd->add_option("--q6", dcp.q6, "");
  dcp_cmd->add_option("--w4", dcp.w4, "");
  dcp_cmd->add_option("--muA", dcp.mu_A, "");
  dcp_cmd->add_option("--muB", dcp.mu_B, "");
  dcp_cmd->add_option("--ha", dcp.h_a, "");
  dcp_cmd->add_option("--hb", dcp.h_b, "");
  dcp_cmd->add_option("--max-ul", dcp.max_ul, "fork: max left-branch upstream queue");
  dcp_cmd->add_option("--max-ur", dcp.max_ur, "fork: max right-branch upstream queue");
  dcp_cmd->add_option("--g1", dcp.g1, "");
  dcp_cmd->add_option("--g2", dcp.g2, "");
  dcp_cmd->add_option("--q4", dcp.q4, "");
  dcp_cmd->add_option("--q9", dcp.q9, "");
  dcp_cmd->add_option("--w5", dcp.w5, "");
  dcp_cmd->add_option("--w6", dcp.w6, "");
  dcp_cmd->add_option("--muB1", dcp.mu_B1, "");
  dcp_cmd->add_option("--muB2", dcp.mu_B2, "");
  dcp_cmd->add_option("--muC", dcp.mu_C, "");
  dcp_cmd->add_option("--hc", dcp.h_c, "");

  DiagnoseArgs diag;
  CLI::App* diagnose = app.add_subcommand("diagnose", "interval classification and tracking");
  diagnose->add_option("--instance", diag.instance, "experiment grid instance id");
  diagnose->add_option("--topology", diag.topology_file, "custom topology JSON file");
  diagnose->add_option("--policy", diag.policy, "policy key (default sdp!)");
  diagnose->add_option("--jobs", diag.jobs, "arrivals of each type");
  diagnose->add_option("--horizon", diag.horizon, "stop at this simulated time");
  diagnose->add_option("--seed", diag.seed, "random seed");
  diagnose->add_option("--mu1", diag.mu1, "entry server 1 rate");
  diagnose->add_option("--mu2", diag.mu2, "entry server 2 rate");
  diagnose->add_option("--r", diag.r, "diffusion scale for the tracking statistic");
  diagnose->add_option("--intervals", diag.intervals_file, "write interval CSV here");

  std::string report_in;
  double report_ha = 2.0, report_hb = 1.0;
  std::string report_out;
  CLI::App* report = app.add_subcommand("report", "aggregate a per-rep CSV into tables");
  report->add_option("--in", report_in, "per_rep.csv produced by experiment")->required();
  report->add_option("--ha", report_ha, "type-a holding cost");
  report->add_option("--hb", report_hb, "type-b holding cost");
  report->add_option("--out", report_out, "directory for table CSVs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*experiment)
      return cmd_experiment(config_file, out_dir, parallelism, seed_override, scale);
    if (*dcp_cmd) return cmd_dcp(dcp);
    if (*diagnose) return cmd_diagnose(diag);
    if (*report) return cmd_report(report_in, report_ha, report_hb, report_out);
  } catch (const fj::InvariantError& e) {
    std::fprintf(stderr, "invariant violation: %s\n", e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
