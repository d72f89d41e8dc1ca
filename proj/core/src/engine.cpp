#include "forkjoin/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>

#include "forkjoin/error.hpp"
#include "forkjoin/stochastic.hpp"

namespace forkjoin {

double StatsSnapshot::buffer_time_average(int buffer) const {
  const double span = measured_span();
  if (!(span > 0)) throw ConfigError("buffer_time_average: empty measurement window");
  return buffer_integral[buffer] / span;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Job {
  std::uint64_t id = 0;
  double arrived = 0;
  double remaining = -1;  // partial service left by a preemption; < 0 if none
};

struct Ev {
  double t = 0;
  std::uint8_t cls = 0;  // 0 completion, 1 arrival: completions first on ties
  int id = 0;            // server id (completion) or job type id (arrival)
  std::uint64_t epoch = 0;
  std::uint64_t seq = 0;
};

struct EvLater {
  bool operator()(const Ev& a, const Ev& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.cls != b.cls) return a.cls > b.cls;
    if (a.id != b.id) return a.id > b.id;
    return a.seq > b.seq;
  }
};

}  // namespace

struct Engine::Impl {
  const Topology& topo;
  RunOptions opt;
  std::unique_ptr<Policy> policy;
  bool preemptive = false;

  // --- state ---------------------------------------------------------------
  double clock = 0;
  bool stopped = false;
  bool finished = false;
  double end_time = 0;
  std::uint64_t events = 0;
  std::uint64_t next_job_id = 0;
  std::uint64_t seq = 0;

  std::vector<std::deque<Job>> buffers;   // by buffer id
  std::vector<long long> qlen;            // by buffer id
  std::vector<std::uint64_t> arrivals;    // by job type id
  std::vector<std::uint64_t> completions; // by activity id
  std::vector<double> busy;               // by activity id
  std::vector<int> active;                // by server id: activity or 0
  std::vector<double> server_end;         // scheduled completion time
  std::vector<double> resumed_at;         // start of the current busy stretch
  std::vector<std::uint64_t> epoch;       // invalidates stale completions

  std::vector<RandomStream> arrival_stream;  // by job type id
  std::vector<RandomStream> service_stream;  // by activity id

  std::priority_queue<Ev, std::vector<Ev>, EvLater> heap;

  // --- statistics ----------------------------------------------------------
  double measure_start = 0;
  bool warmed = false;
  std::vector<double> integral;     // by buffer id
  std::vector<double> last_change;  // by buffer id

  // --- trace ---------------------------------------------------------------
  std::vector<char> record_queue;   // by buffer id
  std::vector<char> record_server;  // by server id
  Trace trace;

  // --- invariant checking --------------------------------------------------
  // Groups of parallel branch chains between a fork and a common terminal
  // activity; the per-chain queue sums must agree at all times.
  std::vector<std::vector<std::vector<int>>> balance_groups;
  std::vector<int> shared;  // shared server ids, ascending
  std::vector<int> trigger_buf;

  Impl(const Topology& t, const PolicySpec& spec, const RunOptions& o)
      : topo(t), opt(o) {
    const int nb = topo.n_buffers();
    const int ns = topo.n_servers();
    const int na = topo.n_activities();
    const int nt = topo.n_job_types();

    if (opt.horizon.has_value() == opt.jobs_per_type.has_value())
      throw ConfigError("run options must set exactly one of horizon or jobs_per_type");
    if (opt.horizon && !(*opt.horizon >= 0)) throw ConfigError("horizon must be >= 0");
    if (opt.jobs_per_type) {
      if (*opt.jobs_per_type == 0) throw ConfigError("jobs_per_type must be >= 1");
      for (const JobType& jt : topo.job_types())
        if (!(jt.arrival.mean > 0) || !std::isfinite(jt.arrival.mean))
          throw ConfigError("job-count stop unreachable: job type " + jt.name +
                            " has no positive external arrival rate");
    }

    policy = make_policy(spec, topo, derive_seed(opt.seed, "policy"));
    preemptive = spec.preemptive;

    buffers.resize(nb + 1);
    qlen.assign(nb + 1, 0);
    arrivals.assign(nt + 1, 0);
    completions.assign(na + 1, 0);
    busy.assign(na + 1, 0.0);
    active.assign(ns + 1, 0);
    server_end.assign(ns + 1, 0.0);
    resumed_at.assign(ns + 1, 0.0);
    epoch.assign(ns + 1, 0);
    integral.assign(nb + 1, 0.0);
    last_change.assign(nb + 1, 0.0);
    warmed = opt.warmup_jobs_per_type == 0;

    arrival_stream.reserve(nt + 1);
    arrival_stream.emplace_back(0);
    for (int j = 1; j <= nt; ++j)
      arrival_stream.emplace_back(derive_seed(opt.seed, "arrival/" + topo.job_type(j).name));
    service_stream.reserve(na + 1);
    service_stream.emplace_back(0);
    for (int a = 1; a <= na; ++a)
      service_stream.emplace_back(derive_seed(opt.seed, "service/" + topo.activity(a).name));

    record_queue.assign(nb + 1, 0);
    record_server.assign(ns + 1, 0);
    if (opt.trace.all_queues)
      for (int b = 1; b <= nb; ++b) record_queue[b] = 1;
    for (int b : opt.trace.queue_buffers) record_queue.at(b) = 1;
    if (opt.trace.all_servers)
      for (int s = 1; s <= ns; ++s) record_server[s] = 1;
    for (int s : opt.trace.servers) record_server.at(s) = 1;
    trace.queue.resize(nb + 1);
    trace.server_activity.resize(ns + 1);
    for (int b = 1; b <= nb; ++b)
      if (record_queue[b]) trace.queue[b].set(0.0, 0.0);
    for (int s = 1; s <= ns; ++s)
      if (record_server[s]) trace.server_activity[s].set(0.0, 0.0);

    shared = topo.shared_servers();
    if (opt.check_invariants) build_balance_groups();

    for (int j = 1; j <= nt; ++j) {
      const double t0 = arrival_stream[j].sample(topo.job_type(j).arrival);
      heap.push(Ev{t0, 1, j, 0, seq++});
    }
  }

  void build_balance_groups() {
    // chain(o): follow o through single-output activities; returns the
    // buffers passed and the terminal activity, or terminal -1 when the walk
    // hits another fork (no linear-chain invariant there).
    auto chain = [&](int o, std::vector<int>& bufs) -> int {
      bufs.clear();
      int b = o;
      for (;;) {
        bufs.push_back(b);
        const int j = topo.depleted_by(b);
        if (j == 0) return -1;
        const auto& outs = topo.activity(j).outputs;
        if (outs.empty()) return j;
        if (outs.size() > 1) return -1;
        b = outs[0];
      }
    };
    for (int a = 1; a <= topo.n_activities(); ++a) {
      const Activity& act = topo.activity(a);
      if (!act.is_fork()) continue;
      std::vector<std::pair<int, std::vector<int>>> chains;
      for (int o : act.outputs) {
        std::vector<int> bufs;
        const int term = chain(o, bufs);
        if (term > 0) chains.emplace_back(term, std::move(bufs));
      }
      std::sort(chains.begin(), chains.end(),
                [](const auto& x, const auto& y) { return x.first < y.first; });
      for (std::size_t i = 0; i < chains.size();) {
        std::size_t j = i;
        while (j < chains.size() && chains[j].first == chains[i].first) ++j;
        if (j - i >= 2) {
          std::vector<std::vector<int>> group;
          for (std::size_t k = i; k < j; ++k) group.push_back(chains[k].second);
          balance_groups.push_back(std::move(group));
        }
        i = j;
      }
    }
  }

  void change_q(int b, int delta) {
    integral[b] += static_cast<double>(qlen[b]) * (clock - last_change[b]);
    last_change[b] = clock;
    qlen[b] += delta;
    if (qlen[b] < 0)
      throw InvariantError("negative queue length at buffer " + topo.buffer_name(b));
    if (record_queue[b]) trace.queue[b].set(clock, static_cast<double>(qlen[b]));
  }

  double hol_arrival(int activity) const {
    const auto& ins = topo.activity(activity).inputs;
    double t = -kInf;
    for (int k : ins) {
      if (buffers[k].empty()) return kInf;
      t = std::max(t, buffers[k].front().arrived);  // a join waits for its latest input
    }
    return t;
  }

  bool serviceable(int activity) const {
    for (int k : topo.activity(activity).inputs)
      if (buffers[k].empty()) return false;
    return true;
  }

  std::vector<double> hol_scratch;

  int consult_policy(int s) {
    const auto& acts = topo.server_activities(s);
    std::vector<double>& hol = hol_scratch;
    hol.resize(acts.size());
    for (std::size_t i = 0; i < acts.size(); ++i) hol[i] = hol_arrival(acts[i]);
    DecisionView view;
    view.server = s;
    view.clock = clock;
    view.queue = qlen;
    view.activities = acts;
    view.hol_arrival = hol;
    view.topology = &topo;
    const int choice = policy->choose(view);
    if (choice == 0 || !serviceable(choice))
      throw InvariantError("policy returned an unserviceable activity for server " +
                           topo.server_name(s));
    return choice;
  }

  void start_service(int s, int j) {
    const Activity& act = topo.activity(j);
    double d = -1;
    if (act.inputs.size() == 1) {
      Job& head = buffers[act.inputs[0]].front();
      if (head.remaining >= 0) {
        d = head.remaining;
        head.remaining = -1;
      }
    }
    if (d < 0) d = service_stream[j].sample(act.service);
    active[s] = j;
    resumed_at[s] = clock;
    server_end[s] = clock + d;
    ++epoch[s];
    heap.push(Ev{server_end[s], 0, s, epoch[s], seq++});
    if (record_server[s]) trace.server_activity[s].set(clock, static_cast<double>(j));
  }

  void try_start(int s) {
    if (active[s] != 0) return;
    const auto& acts = topo.server_activities(s);
    int serviceable_any = 0;
    for (int a : acts)
      if (serviceable(a)) {
        serviceable_any = a;
        break;
      }
    if (serviceable_any == 0) return;
    const int choice = acts.size() == 1 ? serviceable_any : consult_policy(s);
    start_service(s, choice);
  }

  // Preemptive shared-server control: re-derive the preferred activity from
  // the current state; switch with preserved remaining service time when it
  // differs from the one in service.
  void reevaluate(int s) {
    bool any = false;
    for (int a : topo.server_activities(s))
      if (serviceable(a)) {
        any = true;
        break;
      }
    if (!any) return;
    const int preferred = consult_policy(s);
    if (active[s] == preferred) return;
    if (active[s] != 0) {
      const Activity& cur = topo.activity(active[s]);
      buffers[cur.inputs[0]].front().remaining = server_end[s] - clock;
      busy[active[s]] += clock - resumed_at[s];
      active[s] = 0;
      ++epoch[s];
    }
    start_service(s, preferred);
  }

  void check_invariants_now() {
    for (int b = 1; b <= topo.n_buffers(); ++b) {
      long long expected;
      const int f = topo.fed_by(b);
      const int d = topo.depleted_by(b);
      if (topo.is_entry_buffer(b)) {
        int type = 0;
        for (int j = 1; j <= topo.n_job_types(); ++j)
          if (topo.job_type(j).entry_buffer == b) type = j;
        expected = static_cast<long long>(arrivals[type]) -
                   static_cast<long long>(completions[d]);
      } else {
        expected = static_cast<long long>(completions[f]) -
                   static_cast<long long>(completions[d]);
      }
      if (expected != qlen[b])
        throw InvariantError("queue accounting broken at buffer " + topo.buffer_name(b) +
                             ": counters say " + std::to_string(expected) + ", state says " +
                             std::to_string(qlen[b]));
    }
    for (const auto& group : balance_groups) {
      long long first = 0;
      for (std::size_t c = 0; c < group.size(); ++c) {
        long long sum = 0;
        for (int b : group[c]) sum += qlen[b];
        if (c == 0)
          first = sum;
        else if (sum != first)
          throw InvariantError("branch balance identity broken after event " +
                               std::to_string(events) + " at t=" + std::to_string(clock));
      }
    }
  }

  void warmup_and_stop_checks() {
    if (!warmed) {
      bool all = true;
      for (int j = 1; j <= topo.n_job_types(); ++j)
        if (arrivals[j] < opt.warmup_jobs_per_type) {
          all = false;
          break;
        }
      if (all) {
        warmed = true;
        measure_start = clock;
        for (int b = 1; b <= topo.n_buffers(); ++b) {
          integral[b] = 0.0;
          last_change[b] = clock;
        }
      }
    }
    if (opt.jobs_per_type) {
      bool all = true;
      for (int j = 1; j <= topo.n_job_types(); ++j)
        if (arrivals[j] < *opt.jobs_per_type) {
          all = false;
          break;
        }
      if (all) {
        stopped = true;
        end_time = clock;
      }
    }
  }

  bool step() {
    if (stopped) return false;
    Ev ev;
    for (;;) {
      if (heap.empty()) {
        stopped = true;
        end_time = clock;
        return false;
      }
      ev = heap.top();
      heap.pop();
      if (ev.cls == 0 && ev.epoch != epoch[ev.id]) continue;  // preempted
      break;
    }
    if (opt.horizon && ev.t > *opt.horizon) {
      stopped = true;
      end_time = *opt.horizon;
      return false;
    }
    clock = ev.t;
    ++events;

    trigger_buf.clear();
    if (ev.cls == 1) {
      const int type = ev.id;
      ++arrivals[type];
      const std::uint64_t jid = ++next_job_id;
      const int eb = topo.job_type(type).entry_buffer;
      buffers[eb].push_back(Job{jid, clock, -1});
      change_q(eb, +1);
      const double next = clock + arrival_stream[type].sample(topo.job_type(type).arrival);
      heap.push(Ev{next, 1, type, 0, seq++});
      if (opt.trace.event_log) trace.events.push_back({clock, 'a', type, 0, jid});
      trigger_buf.push_back(topo.depleted_by(eb) != 0 ? topo.activity(topo.depleted_by(eb)).server : 0);
    } else {
      const int s = ev.id;
      const int j = active[s];
      if (j == 0) throw InvariantError("completion event for an idle server");
      const Activity& act = topo.activity(j);
      busy[j] += clock - resumed_at[s];
      ++completions[j];
      std::uint64_t jid = 0;
      for (int k : act.inputs) {
        if (buffers[k].empty())
          throw InvariantError("service completed on an empty buffer " + topo.buffer_name(k));
        if (jid == 0) jid = buffers[k].front().id;
        buffers[k].pop_front();
        change_q(k, -1);
      }
      for (int m : act.outputs) {
        buffers[m].push_back(Job{jid, clock, -1});
        change_q(m, +1);
      }
      active[s] = 0;
      if (record_server[s]) trace.server_activity[s].set(clock, 0.0);
      if (opt.trace.event_log) trace.events.push_back({clock, 'c', s, j, jid});
      trigger_buf.push_back(s);
      for (int m : act.outputs) {
        const int d = topo.depleted_by(m);
        if (d != 0) trigger_buf.push_back(topo.activity(d).server);
      }
    }

    std::sort(trigger_buf.begin(), trigger_buf.end());
    trigger_buf.erase(std::unique(trigger_buf.begin(), trigger_buf.end()), trigger_buf.end());
    for (int s : trigger_buf) {
      if (s == 0) continue;
      if (preemptive && topo.is_shared(s)) continue;  // handled below
      try_start(s);
    }
    if (preemptive)
      for (int s : shared) reevaluate(s);

    if (opt.check_invariants) check_invariants_now();
    warmup_and_stop_checks();
    return !stopped;
  }

  RunResult finish() {
    if (finished) throw Error("Engine::finish called twice");
    finished = true;
    if (!stopped) {
      stopped = true;
      end_time = clock;
    }
    for (int b = 1; b <= topo.n_buffers(); ++b) {
      integral[b] += static_cast<double>(qlen[b]) * (end_time - last_change[b]);
      last_change[b] = end_time;
    }
    for (int s = 1; s <= topo.n_servers(); ++s) {
      if (active[s] != 0) {
        busy[active[s]] += end_time - resumed_at[s];
        resumed_at[s] = end_time;
      }
    }
    RunResult out;
    out.clock = clock;
    out.queue = qlen;
    out.stats.measure_start = measure_start;
    out.stats.end_time = end_time;
    out.stats.events = events;
    out.stats.buffer_integral = integral;
    out.stats.activity_busy = busy;
    out.stats.completions = completions;
    out.stats.arrivals = arrivals;
    trace.horizon = end_time;
    out.trace = std::move(trace);
    return out;
  }
};

Engine::Engine(const Topology& topology, const PolicySpec& policy, const RunOptions& options)
    : impl_(std::make_unique<Impl>(topology, policy, options)) {}
Engine::~Engine() = default;

bool Engine::step() { return impl_->step(); }
bool Engine::stopped() const { return impl_->stopped; }
double Engine::clock() const { return impl_->clock; }
long long Engine::queue_length(int buffer) const { return impl_->qlen[buffer]; }
std::uint64_t Engine::arrivals(int job_type) const { return impl_->arrivals[job_type]; }
std::uint64_t Engine::completions(int activity) const { return impl_->completions[activity]; }
RunResult Engine::finish() { return impl_->finish(); }

RunResult run(const Topology& topology, const PolicySpec& policy, const RunOptions& options) {
  Engine engine(topology, policy, options);
  while (engine.step()) {
  }
  return engine.finish();
}

}  // namespace forkjoin
