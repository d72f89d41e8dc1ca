#include "forkjoin/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>

#include "forkjoin/error.hpp"

namespace forkjoin {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
}  // namespace

std::string PolicySpec::key() const {
  std::string s;
  switch (kind) {
    case Kind::kSdp: s = "sdp"; break;
    case Kind::kStaticPriority: s = "static"; break;
    case Kind::kFcfs: s = "fcfs"; break;
    case Kind::kRandomized: s = "randomized(" + fmt_num(p) + ")"; break;
    case Kind::kProposed: s = "proposed"; break;
    case Kind::kForkSdp: s = "forksdp"; break;
    case Kind::kThreeTypeRule:
      s = "threetype(" + fmt_num(h_a) + "," + fmt_num(h_b) + "," + fmt_num(h_c) + ")";
      break;
  }
  if (preemptive) s += "!";
  return s;
}

PolicySpec parse_policy(const std::string& text) {
  std::string t = text;
  PolicySpec spec;
  if (!t.empty() && t.back() == '!') {
    spec.preemptive = true;
    t.pop_back();
  }
  auto args_of = [&](std::string_view head) -> std::optional<std::string> {
    if (t.size() >= head.size() && t.compare(0, head.size(), head) == 0) {
      std::string rest = t.substr(head.size());
      if (rest.empty()) return std::string{};
      if (rest.front() == ':') return rest.substr(1);
      if (rest.front() == '(' && rest.back() == ')') return rest.substr(1, rest.size() - 2);
    }
    return std::nullopt;
  };
  if (t == "sdp") {
    spec.kind = PolicySpec::Kind::kSdp;
  } else if (t == "static" || t == "static_priority") {
    spec.kind = PolicySpec::Kind::kStaticPriority;
  } else if (t == "fcfs") {
    spec.kind = PolicySpec::Kind::kFcfs;
  } else if (t == "proposed") {
    spec.kind = PolicySpec::Kind::kProposed;
  } else if (t == "forksdp") {
    spec.kind = PolicySpec::Kind::kForkSdp;
  } else if (auto args = args_of("randomized")) {
    spec.kind = PolicySpec::Kind::kRandomized;
    if (!args->empty()) {
      char* end = nullptr;
      spec.p = std::strtod(args->c_str(), &end);
      if (end == args->c_str() || *end != '\0')
        throw ConfigError("bad randomized policy parameter: " + text);
    }
    if (spec.p < 0 || spec.p > 1)
      throw ConfigError("randomized policy requires p in [0, 1]");
  } else if (auto targs = args_of("threetype")) {
    spec.kind = PolicySpec::Kind::kThreeTypeRule;
    if (!targs->empty()) {
      double h[3];
      if (std::sscanf(targs->c_str(), "%lf,%lf,%lf", &h[0], &h[1], &h[2]) != 3)
        throw ConfigError("threetype policy expects three holding costs: " + text);
      spec.h_a = h[0];
      spec.h_b = h[1];
      spec.h_c = h[2];
    }
  } else {
    throw ConfigError("unknown policy key: " + text);
  }
  return spec;
}

namespace {

// Binding of a two-activity shared server: the "paced" activity serves the
// more expensive type (it carries the pace_buffers wiring), the other is the
// alternative the server falls back to.
struct SharedBinding {
  int server = 0;
  int act_paced = 0, act_other = 0;
  int buf_paced = 0, buf_other = 0;
  std::size_t idx_paced = 0, idx_other = 0;  // positions in server_activities
  std::vector<int> pace_buffers;
};

SharedBinding bind_two_activity_server(const Topology& topo) {
  const auto shared = topo.shared_servers();
  if (shared.size() != 1)
    throw ConfigError("policy expects exactly one shared server; topology has " +
                      std::to_string(shared.size()));
  const int s = shared[0];
  const auto& acts = topo.server_activities(s);
  if (acts.size() != 2)
    throw ConfigError("policy expects a shared server with exactly two activities");
  SharedBinding b;
  b.server = s;
  const Activity& a0 = topo.activity(acts[0]);
  const Activity& a1 = topo.activity(acts[1]);
  const bool paced_first = !a0.pace_buffers.empty();
  if (paced_first == !a1.pace_buffers.empty())
    throw ConfigError("shared server must have exactly one activity with pacing wiring");
  b.idx_paced = paced_first ? 0 : 1;
  b.idx_other = paced_first ? 1 : 0;
  b.act_paced = acts[b.idx_paced];
  b.act_other = acts[b.idx_other];
  b.buf_paced = topo.activity(b.act_paced).inputs[0];
  b.buf_other = topo.activity(b.act_other).inputs[0];
  b.pace_buffers = topo.activity(b.act_paced).pace_buffers;
  return b;
}

// Serve the paced type iff its buffer strictly exceeds the largest buffer it
// is paced against; otherwise drain the other type, falling back to the paced
// type when the other buffer is empty (work conservation).
class SdpPolicy : public Policy {
 public:
  explicit SdpPolicy(SharedBinding b) : b_(std::move(b)) {}
  int choose(const DecisionView& v) override {
    long long pace = 0;
    for (int k : b_.pace_buffers) pace = std::max(pace, v.queue_at(k));
    const long long qp = v.queue_at(b_.buf_paced);
    if (qp > pace) return b_.act_paced;
    if (v.queue_at(b_.buf_other) > 0) return b_.act_other;
    return b_.act_paced;
  }

 private:
  SharedBinding b_;
};

class StaticPriorityPolicy : public Policy {
 public:
  explicit StaticPriorityPolicy(SharedBinding b) : b_(std::move(b)) {}
  int choose(const DecisionView& v) override {
    if (v.queue_at(b_.buf_paced) > 0) return b_.act_paced;
    return b_.act_other;
  }

 private:
  SharedBinding b_;
};

class FcfsPolicy : public Policy {
 public:
  explicit FcfsPolicy(SharedBinding b) : b_(std::move(b)) {}
  int choose(const DecisionView& v) override {
    const double tp = v.hol_arrival[b_.idx_paced];
    const double to = v.hol_arrival[b_.idx_other];
    if (tp <= to) return b_.act_paced;  // ties go to the paced type
    return b_.act_other;
  }

 private:
  SharedBinding b_;
};

class RandomizedPolicy : public Policy {
 public:
  RandomizedPolicy(SharedBinding b, double p, std::uint64_t seed)
      : b_(std::move(b)), p_(p), stream_(seed) {}
  int choose(const DecisionView& v) override {
    const bool paced = v.queue_at(b_.buf_paced) > 0;
    const bool other = v.queue_at(b_.buf_other) > 0;
    if (paced && other) return stream_.uniform() < p_ ? b_.act_paced : b_.act_other;
    return paced ? b_.act_paced : b_.act_other;
  }
  bool state_deterministic() const override { return false; }

 private:
  SharedBinding b_;
  double p_;
  RandomStream stream_;
};

// Cost-regime rule for the three-type network's two shared servers.
class ThreeTypeRulePolicy : public Policy {
 public:
  ThreeTypeRulePolicy(const Topology& topo, double h_a, double h_b, double h_c) {
    for (const char* name : {"A", "B1", "B2", "C"})
      if (!topo.has_activity(name))
        throw ConfigError("three-type rule requires the three-type network topology");
    s5_ = topo.server_id("5");
    s6_ = topo.server_id("6");
    actA_ = topo.activity_id("A");
    actB1_ = topo.activity_id("B1");
    actB2_ = topo.activity_id("B2");
    actC_ = topo.activity_id("C");
    q4_ = topo.buffer_id("4");
    q5_ = topo.buffer_id("5");
    q6_ = topo.buffer_id("6");
    q7_ = topo.buffer_id("7");
    q8_ = topo.buffer_id("8");
    q9_ = topo.buffer_id("9");
    muA_ = topo.activity(actA_).service.rate();
    muB1_ = topo.activity(actB1_).service.rate();
    muB2_ = topo.activity(actB2_).service.rate();
    muC_ = topo.activity(actC_).service.rate();
    a_expensive_ = h_a * muA_ >= h_b * muB1_;
    c_expensive_ = h_c * muC_ >= h_b * muB2_;
    full_b_ = !a_expensive_ && !c_expensive_ &&
              h_b >= h_a * muA_ / muB1_ + h_c * muC_ / muB2_;
  }

  int choose(const DecisionView& v) override {
    if (v.server == s5_) return choose_s5(v);
    if (v.server == s6_) return choose_s6(v);
    throw ConfigError("three-type rule consulted for an unexpected server");
  }

 private:
  // Work-conserving pick between the two activities of one server given the
  // preferred one.
  static int pick(const DecisionView& v, int preferred_act, int preferred_buf,
                  int other_act, int other_buf) {
    if (v.queue_at(preferred_buf) > 0) return preferred_act;
    if (v.queue_at(other_buf) > 0) return other_act;
    return preferred_act;
  }

  double matching_target(const DecisionView& v) const {
    const double w5 = v.queue_at(q5_) + (muA_ / muB1_) * v.queue_at(q6_);
    const double w6 = v.queue_at(q7_) + (muB2_ / muC_) * v.queue_at(q8_);
    const double left = (muB1_ / muA_) * std::max(w5 - v.queue_at(q4_), 0.0);
    const double right = std::max(w6 - (muB2_ / muC_) * v.queue_at(q9_), 0.0);
    return std::min(left, right);
  }

  int choose_s5(const DecisionView& v) const {
    bool prefer_a;
    if (a_expensive_) {
      // Pace type-a departures to the dedicated branch.
      prefer_a = v.queue_at(q5_) > v.queue_at(q4_);
    } else if (c_expensive_) {
      // Mirror regime: pace type b on this server to its server-6 buffer.
      prefer_a = !(v.queue_at(q6_) > v.queue_at(q7_));
    } else if (full_b_) {
      prefer_a = false;
    } else {
      prefer_a = !(v.queue_at(q6_) > matching_target(v));
    }
    return prefer_a ? pick(v, actA_, q5_, actB1_, q6_) : pick(v, actB1_, q6_, actA_, q5_);
  }

  int choose_s6(const DecisionView& v) const {
    bool prefer_c;
    if (c_expensive_) {
      prefer_c = v.queue_at(q8_) > v.queue_at(q9_);
    } else if (a_expensive_) {
      // Pace type b on this server to its server-5 buffer.
      prefer_c = !(v.queue_at(q7_) > v.queue_at(q6_));
    } else if (full_b_) {
      prefer_c = false;
    } else {
      prefer_c = !(v.queue_at(q7_) > matching_target(v));
    }
    return prefer_c ? pick(v, actC_, q8_, actB2_, q7_) : pick(v, actB2_, q7_, actC_, q8_);
  }

  int s5_ = 0, s6_ = 0;
  int actA_ = 0, actB1_ = 0, actB2_ = 0, actC_ = 0;
  int q4_ = 0, q5_ = 0, q6_ = 0, q7_ = 0, q8_ = 0, q9_ = 0;
  double muA_ = 1, muB1_ = 1, muB2_ = 1, muC_ = 1;
  bool a_expensive_ = false, c_expensive_ = false, full_b_ = false;
};

// Placeholder for networks without any shared server: there is no decision
// to make, so the engine never consults it.
class NoSharedServerPolicy : public Policy {
 public:
  int choose(const DecisionView&) override {
    throw InvariantError("policy consulted on a network without shared servers");
  }
};

}  // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Topology& topo,
                                    std::uint64_t stream_seed) {
  using Kind = PolicySpec::Kind;
  if (topo.shared_servers().empty()) return std::make_unique<NoSharedServerPolicy>();
  std::unique_ptr<Policy> policy;
  switch (spec.kind) {
    case Kind::kSdp:
      policy = std::make_unique<SdpPolicy>(bind_two_activity_server(topo));
      break;
    case Kind::kForkSdp: {
      auto b = bind_two_activity_server(topo);
      if (b.pace_buffers.empty())
        throw ConfigError("forksdp requires pacing wiring on the shared server");
      policy = std::make_unique<SdpPolicy>(std::move(b));
      break;
    }
    case Kind::kStaticPriority:
      policy = std::make_unique<StaticPriorityPolicy>(bind_two_activity_server(topo));
      break;
    case Kind::kFcfs:
      policy = std::make_unique<FcfsPolicy>(bind_two_activity_server(topo));
      break;
    case Kind::kRandomized:
      if (spec.p < 0 || spec.p > 1) throw ConfigError("randomized policy requires p in [0, 1]");
      policy = std::make_unique<RandomizedPolicy>(bind_two_activity_server(topo), spec.p,
                                                  stream_seed);
      break;
    case Kind::kProposed: {
      // Pacing pays off only when the slowest upstream branch is slower than
      // the shared server's own rate for the paced type; otherwise plain
      // static priority behaves identically and is simpler.
      auto b = bind_two_activity_server(topo);
      double mu_upstream = kInf;
      for (int k : b.pace_buffers) {
        const int d = topo.depleted_by(k);
        if (d != 0) mu_upstream = std::min(mu_upstream, topo.activity(d).service.rate());
      }
      const double mu_paced = topo.activity(b.act_paced).service.rate();
      if (mu_upstream < mu_paced)
        policy = std::make_unique<SdpPolicy>(std::move(b));
      else
        policy = std::make_unique<StaticPriorityPolicy>(std::move(b));
      break;
    }
    case Kind::kThreeTypeRule:
      policy = std::make_unique<ThreeTypeRulePolicy>(topo, spec.h_a, spec.h_b, spec.h_c);
      break;
  }
  if (spec.preemptive && !policy->state_deterministic())
    throw ConfigError("policy " + spec.key() +
                      " draws random numbers per decision and cannot run preemptively");
  return policy;
}

// ---------------------------------------------------------------------------

std::vector<IntervalLabel> classify_intervals(const Path& q3, const Path& q4,
                                              const Path& q5, double horizon) {
  if (q3.empty() || q4.empty() || q5.empty())
    throw ConfigError("classify_intervals: missing queue paths");
  if (q3.initial_value() != q4.initial_value())
    throw ConfigError("classify_intervals: trace must start with Q3(0) = Q4(0)");

  std::vector<IntervalLabel> out;
  const Path* ps[] = {&q3, &q4, &q5};
  const std::vector<double> ts = merged_breakpoints(ps);

  bool up = false;
  double seg_start = 0.0;
  double down_zero = q5.value(0.0) == 0.0 ? 0.0 : kInf;

  auto emit_down = [&](double start, double end) {
    if (end <= start) return;
    if (down_zero <= start) {
      out.push_back({start, end, IntervalLabel::Kind::kDown2});
    } else if (down_zero < end) {
      out.push_back({start, down_zero, IntervalLabel::Kind::kDown1});
      out.push_back({down_zero, end, IntervalLabel::Kind::kDown2});
    } else {
      out.push_back({start, end, IntervalLabel::Kind::kDown1});
    }
  };

  for (double t : ts) {
    if (t > horizon) break;
    if (t <= seg_start) continue;
    const double v3 = q3.value(t);
    const double v4 = q4.value(t);
    if (!up) {
      if (q5.value(t) == 0.0 && down_zero == kInf) down_zero = t;
      if (v3 == v4 - 1.0) {
        emit_down(seg_start, t);
        up = true;
        seg_start = t;
      }
    } else {
      if (v3 == v4) {
        if (t > seg_start) out.push_back({seg_start, t, IntervalLabel::Kind::kUp});
        up = false;
        seg_start = t;
        down_zero = q5.value(t) == 0.0 ? t : kInf;
      }
    }
  }
  if (horizon > seg_start) {
    if (up)
      out.push_back({seg_start, horizon, IntervalLabel::Kind::kUp});
    else
      emit_down(seg_start, horizon);
  }
  return out;
}

std::vector<IntervalLabel> classify_intervals(const Trace& trace) {
  if (!trace.has_queue(3) || !trace.has_queue(4) || !trace.has_queue(5))
    throw ConfigError("classify_intervals: trace must record buffers 3, 4 and 5");
  return classify_intervals(trace.queue[3], trace.queue[4], trace.queue[5], trace.horizon);
}

}  // namespace forkjoin
