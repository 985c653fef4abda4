#include "semu/simulator.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace semu {

const char* to_string(DeliveryPolicy p) {
  switch (p) {
    case DeliveryPolicy::random_order: return "random";
    case DeliveryPolicy::skew_quorum: return "skew-quorum";
    case DeliveryPolicy::delay_finalize: return "delay-finalize";
    case DeliveryPolicy::starve_reader: return "starve-reader";
  }
  return "?";
}

DeliveryPolicy delivery_policy_from_string(const std::string& s) {
  if (s == "random") return DeliveryPolicy::random_order;
  if (s == "skew-quorum") return DeliveryPolicy::skew_quorum;
  if (s == "delay-finalize") return DeliveryPolicy::delay_finalize;
  if (s == "starve-reader") return DeliveryPolicy::starve_reader;
  throw std::invalid_argument("unknown adversary strategy: " + s);
}

std::vector<std::string> adversary_strategies() {
  return {"random", "skew-quorum", "delay-finalize", "starve-reader"};
}

void RunConfig::validate() const {
  bool single_writer = algorithm == Algorithm::alg1 || algorithm == Algorithm::abd;
  if (single_writer && workload.writers != 1)
    throw std::invalid_argument(std::string(to_string(algorithm)) +
                                " uses single-writer tags and requires exactly one writer");
  if (algorithm == Algorithm::abd && params.n_servers != 2 * params.max_failures + 1)
    throw std::invalid_argument("abd runs on exactly 2f+1 servers");
  if (workload.writers < 0 || workload.readers < 0 || workload.writers + workload.readers < 1)
    throw std::invalid_argument("workload needs at least one client");
  for (const CrashEvent& c : schedule.crash_plan) {
    int limit = c.node.is_server() ? params.n_servers : workload.writers + workload.readers;
    if (c.node.index < 1 || c.node.index > limit)
      throw std::invalid_argument("crash plan names unknown node " + c.node.str());
  }
}

namespace {

struct Pending {
  Message msg;
  std::uint64_t born_choice = 0;
};

struct SimClient {
  NodeId node;
  bool is_writer = false;
  int remaining = 0;
  std::unique_ptr<ClientMachine> machine;
  bool crashed = false;
  bool retired = false;  // aborted read in abort mode: client stops issuing ops
  std::uint64_t cur_token = 0;
  OpKind cur_kind = OpKind::read;
  int read_overlap = 0;  // writes concurrent with the read in progress
};

class Sim {
 public:
  explicit Sim(const RunConfig& cfg)
      : cfg_(cfg), rng_(cfg.schedule.seed), codec_(cfg.params.n_servers, cfg.params.k) {
    cfg_.validate();
    trace_.header.algorithm = to_string(cfg.algorithm);
    trace_.header.read_mode = to_string(cfg.read_mode);
    trace_.header.n = cfg.params.n_servers;
    trace_.header.f = cfg.params.max_failures;
    trace_.header.nu = cfg.params.liveness;
    trace_.header.k = cfg.params.k;
    trace_.header.value_bytes = cfg.params.value_bytes;
    trace_.header.writers = cfg.workload.writers;
    trace_.header.readers = cfg.workload.readers;
    trace_.header.concurrency_cap = cfg.workload.write_concurrency_cap;
    trace_.header.seed = cfg.schedule.seed;

    for (int i = 1; i <= cfg.params.n_servers; ++i)
      servers_.emplace_back(cfg.algorithm, cfg.params, codec_, i);
    server_crashed_.assign(static_cast<std::size_t>(cfg.params.n_servers) + 1, false);

    int index = 1;
    for (int w = 0; w < cfg.workload.writers; ++w, ++index) {
      SimClient c;
      c.node = NodeId::client(index);
      c.is_writer = true;
      c.remaining = cfg.workload.writes_per_writer;
      c.machine = make_writer(cfg.algorithm, cfg.params, codec_, index, cfg.finalize_markers);
      clients_.push_back(std::move(c));
    }
    for (int r = 0; r < cfg.workload.readers; ++r, ++index) {
      SimClient c;
      c.node = NodeId::client(index);
      c.remaining = cfg.workload.reads_per_reader;
      c.machine = make_reader(cfg.algorithm, cfg.read_mode, cfg.params, codec_, index,
                              cfg.finalize_markers);
      clients_.push_back(std::move(c));
    }

    crash_plan_ = cfg.schedule.crash_plan;
    std::sort(crash_plan_.begin(), crash_plan_.end(),
              [](const CrashEvent& a, const CrashEvent& b) { return a.at_event < b.at_event; });
  }

  Trace take() && { return std::move(trace_); }

  void run() {
    while (seq_ < cfg_.step_limit) {
      fire_due_crashes();
      std::vector<std::size_t> deliverable = deliverable_messages();
      std::vector<std::size_t> invokable = invokable_clients();
      if (deliverable.empty() && invokable.empty()) break;
      ++choices_;
      Action a = choose(deliverable, invokable);
      if (a.deliver)
        do_deliver(a.index);
      else
        do_invoke(a.index);
    }
    if (seq_ >= cfg_.step_limit) trace_.header.truncated = true;
  }

 private:
  struct Action {
    bool deliver = false;
    std::size_t index = 0;
  };

  std::uint64_t rand_below(std::uint64_t n) { return rng_() % n; }

  bool node_crashed(const NodeId& n) const {
    if (n.is_server()) return server_crashed_[static_cast<std::size_t>(n.index)];
    return clients_[static_cast<std::size_t>(n.index - 1)].crashed;
  }

  // --- events -------------------------------------------------------------

  void fire_due_crashes() {
    while (next_crash_ < crash_plan_.size() && crash_plan_[next_crash_].at_event <= seq_) {
      NodeId victim = crash_plan_[next_crash_].node;
      ++next_crash_;
      if (node_crashed(victim)) continue;
      TraceEvent e;
      e.seq = e.time = seq_++;
      e.kind = EventKind::crash;
      e.node = victim;
      trace_.events.push_back(e);
      if (victim.is_server()) {
        server_crashed_[static_cast<std::size_t>(victim.index)] = true;
        ++trace_.stats.crashed_servers;
      } else {
        clients_[static_cast<std::size_t>(victim.index - 1)].crashed = true;
        ++trace_.stats.crashed_clients;
      }
      // Messages addressed to a crashed node are never processed.
      std::erase_if(pending_, [&](const Pending& p) { return p.msg.to == victim; });
    }
  }

  // Emits a send event and queues the message; drops silently when the
  // sender crashed mid-burst (its remaining outputs die with it).
  void emit_outputs(const NodeId& origin, StepResult&& res) {
    for (Message& m : res.out) {
      fire_due_crashes();
      if (seq_ >= cfg_.step_limit) return;
      if (node_crashed(origin)) return;
      TraceEvent e;
      e.seq = e.time = seq_++;
      e.kind = EventKind::send;
      e.node = origin;
      e.op = m.op;
      e.msg = MsgMeta::of(m);
      trace_.events.push_back(e);
      if (!node_crashed(m.to)) pending_.push_back(Pending{std::move(m), choices_});
    }
    if (!origin.is_server()) {
      SimClient& c = clients_[static_cast<std::size_t>(origin.index - 1)];
      if (res.response) {
        fire_due_crashes();
        if (seq_ >= cfg_.step_limit || node_crashed(origin)) return;
        finish_op(c, *res.response);
      } else if (res.aborted) {
        fire_due_crashes();
        if (seq_ >= cfg_.step_limit || node_crashed(origin)) return;
        abort_op(c);
      }
    }
  }

  void finish_op(SimClient& c, const OpResponse& r) {
    TraceEvent e;
    e.seq = e.time = seq_++;
    e.kind = EventKind::respond;
    e.node = c.node;
    e.op = c.cur_token;
    e.op_kind = r.kind;
    if (r.value) e.value_hex = r.value->hex();
    e.tag = r.tag;
    trace_.events.push_back(e);
    if (r.kind == OpKind::write) {
      --ongoing_writes_;
      ++trace_.stats.completed_writes;
    } else {
      ++trace_.stats.completed_reads;
      if (cfg_.read_mode == ReadMode::fw)
        trace_.stats.fw_max_iterations =
            std::max(trace_.stats.fw_max_iterations, c.machine->iterations());
    }
    c.cur_token = 0;
  }

  void abort_op(SimClient& c) {
    TraceEvent e;
    e.seq = e.time = seq_++;
    e.kind = EventKind::abort_read;
    e.node = c.node;
    e.op = c.cur_token;
    e.op_kind = OpKind::read;
    trace_.events.push_back(e);
    ++trace_.stats.aborted_reads;
    trace_.stats.aborted_read_overlap = std::max(trace_.stats.aborted_read_overlap, c.read_overlap);
    // The operation stays incomplete; the client never invokes again.
    c.retired = true;
    c.cur_token = 0;
  }

  void do_invoke(std::size_t ci) {
    SimClient& c = clients_[ci];
    OpKind kind = c.is_writer ? OpKind::write : OpKind::read;
    std::optional<Value> v;
    if (c.is_writer) {
      Value val;
      val.bytes.resize(static_cast<std::size_t>(cfg_.params.value_bytes));
      for (std::uint8_t& b : val.bytes) b = static_cast<std::uint8_t>(rng_() & 0xff);
      v = std::move(val);
    }
    c.cur_token = next_token_++;
    c.cur_kind = kind;
    --c.remaining;
    TraceEvent e;
    e.seq = e.time = seq_++;
    e.kind = EventKind::invoke;
    e.node = c.node;
    e.op = c.cur_token;
    e.op_kind = kind;
    if (v) e.value_hex = v->hex();
    trace_.events.push_back(e);
    if (kind == OpKind::write) {
      ++trace_.stats.invoked_writes;
      ++ongoing_writes_;
      trace_.stats.max_concurrent_writes =
          std::max(trace_.stats.max_concurrent_writes, ongoing_writes_);
      for (SimClient& other : clients_)
        if (!other.is_writer && !other.crashed && other.cur_token != 0) {
          ++other.read_overlap;
          trace_.stats.max_read_overlap =
              std::max(trace_.stats.max_read_overlap, other.read_overlap);
        }
    } else {
      ++trace_.stats.invoked_reads;
      c.read_overlap = ongoing_writes_;
      trace_.stats.max_read_overlap = std::max(trace_.stats.max_read_overlap, c.read_overlap);
    }
    emit_outputs(c.node, c.machine->invoke(kind, std::move(v), c.cur_token));
  }

  void do_deliver(std::size_t pi) {
    Pending p = std::move(pending_[pi]);
    pending_.erase(pending_.begin() + static_cast<std::ptrdiff_t>(pi));
    const NodeId dest = p.msg.to;
    TraceEvent e;
    e.seq = e.time = seq_++;
    e.kind = EventKind::deliver;
    e.node = dest;
    e.op = p.msg.op;
    e.msg = MsgMeta::of(p.msg);
    StepResult res;
    if (dest.is_server()) {
      ServerMachine& s = servers_[static_cast<std::size_t>(dest.index - 1)];
      res = s.on_deliver(p.msg);
      const StoredElement& st = s.stored();
      e.stored = StoredMeta{st.tag, st.kind, static_cast<std::uint32_t>(st.payload_bytes())};
      trace_.events.push_back(e);
    } else {
      trace_.events.push_back(e);
      SimClient& c = clients_[static_cast<std::size_t>(dest.index - 1)];
      res = c.machine->on_deliver(p.msg);
    }
    emit_outputs(dest, std::move(res));
  }

  // --- scheduling ---------------------------------------------------------

  std::vector<std::size_t> deliverable_messages() const {
    std::vector<std::size_t> out(pending_.size());
    for (std::size_t i = 0; i < pending_.size(); ++i) out[i] = i;
    return out;
  }

  bool write_gate_open() const {
    int cap = cfg_.workload.write_concurrency_cap;
    if (cap < 0) return true;
    if (ongoing_writes_ + 1 > cap) return false;
    for (const SimClient& c : clients_)
      if (!c.is_writer && !c.crashed && c.cur_token != 0 && c.read_overlap + 1 > cap)
        return false;
    return true;
  }

  bool read_gate_open() const {
    int cap = cfg_.workload.write_concurrency_cap;
    return cap < 0 || ongoing_writes_ <= cap;
  }

  std::vector<std::size_t> invokable_clients() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < clients_.size(); ++i) {
      const SimClient& c = clients_[i];
      if (c.crashed || c.retired || c.remaining <= 0 || c.machine->busy()) continue;
      if (c.is_writer ? !write_gate_open() : !read_gate_open()) continue;
      out.push_back(i);
    }
    return out;
  }

  static bool is_storage_put(const Message& m) {
    return m.kind == MsgKind::put_replica || m.kind == MsgKind::put_coded ||
           m.kind == MsgKind::finalize_mark;
  }

  bool preferred(const Message& m, bool starve_coin) const {
    switch (cfg_.schedule.policy) {
      case DeliveryPolicy::random_order:
        return true;
      case DeliveryPolicy::skew_quorum:
        // Client-bound replies always flow; the last f servers starve.
        return !m.to.is_server() ||
               m.to.index <= cfg_.params.n_servers - cfg_.params.max_failures;
      case DeliveryPolicy::delay_finalize: {
        bool fin = m.phase == Phase::finalize || m.phase == Phase::wb_finalize;
        if (!fin) return true;
        for (const Pending& p : pending_)
          if (p.msg.phase == Phase::pre_write || p.msg.phase == Phase::wb_pre_write) return false;
        return true;
      }
      case DeliveryPolicy::starve_reader: {
        // Read traffic trickles out one message at a time while write traffic
        // is in flight, so a read samples servers across write generations.
        bool read_traffic = m.phase == Phase::get;
        if (!read_traffic || starve_coin) return true;
        for (const Pending& p : pending_)
          if (is_storage_put(p.msg)) return false;
        return true;
      }
    }
    return true;
  }

  Action choose(const std::vector<std::size_t>& deliverable,
                const std::vector<std::size_t>& invokable) {
    // Fairness: the oldest overdue message goes first.
    if (cfg_.schedule.fairness && !pending_.empty()) {
      std::uint64_t bound = cfg_.schedule.fairness_bound
                                ? cfg_.schedule.fairness_bound
                                : 4ull * static_cast<std::uint64_t>(cfg_.params.n_servers) *
                                      pending_.size();
      std::size_t oldest = pending_.size();
      for (std::size_t i = 0; i < pending_.size(); ++i)
        if (choices_ - pending_[i].born_choice >= bound &&
            (oldest == pending_.size() || pending_[i].born_choice < pending_[oldest].born_choice))
          oldest = i;
      if (oldest != pending_.size()) return Action{true, oldest};
    }

    bool starve_coin = cfg_.schedule.policy == DeliveryPolicy::starve_reader && rng_() % 8 == 0;
    std::vector<Action> pool;
    for (std::size_t i : deliverable)
      if (preferred(pending_[i].msg, starve_coin)) pool.push_back(Action{true, i});
    for (std::size_t i : invokable) pool.push_back(Action{false, i});
    if (pool.empty())
      for (std::size_t i : deliverable) pool.push_back(Action{true, i});
    return pool[static_cast<std::size_t>(rand_below(pool.size()))];
  }

  RunConfig cfg_;
  std::mt19937_64 rng_;
  Codec codec_;
  std::vector<ServerMachine> servers_;
  std::vector<bool> server_crashed_;
  std::vector<SimClient> clients_;
  std::vector<Pending> pending_;
  std::vector<CrashEvent> crash_plan_;
  std::size_t next_crash_ = 0;
  Trace trace_;
  std::uint64_t seq_ = 0;
  std::uint64_t choices_ = 0;
  std::uint64_t next_token_ = 1;
  int ongoing_writes_ = 0;
};

}  // namespace

Trace run(const RunConfig& cfg) {
  Sim sim(cfg);
  sim.run();
  return std::move(sim).take();
}

std::vector<std::size_t> steady_state_points(const Trace& trace) {
  struct PendingPut {
    std::uint64_t sent_seq;
    NodeId to;
    std::uint64_t delivered_seq;  // UINT64_MAX when never delivered
  };
  // Collect storage-mutating sends and match them with deliveries in order
  // (channels are FIFO per identical metadata; order within equal keys is
  // irrelevant because only counts matter).
  std::vector<PendingPut> puts;
  auto is_put = [](const MsgMeta& m) {
    return m.kind == MsgKind::put_replica || m.kind == MsgKind::put_coded ||
           m.kind == MsgKind::finalize_mark;
  };
  for (const TraceEvent& e : trace.events) {
    if (e.kind == EventKind::send && e.msg && is_put(*e.msg) && e.msg->to.is_server()) {
      puts.push_back(PendingPut{e.seq, e.msg->to, UINT64_MAX});
    } else if (e.kind == EventKind::deliver && e.msg && is_put(*e.msg) && e.msg->to.is_server()) {
      for (PendingPut& p : puts)
        if (p.delivered_seq == UINT64_MAX && p.to == e.msg->to && p.sent_seq < e.seq) {
          p.delivered_seq = e.seq;
          break;
        }
    }
  }

  std::vector<std::size_t> out;
  std::vector<bool> server_crashed(trace.header.n + 1, false);
  std::map<std::uint64_t, NodeId> write_client;  // token -> client, for crash handling
  std::set<std::uint64_t> ongoing_writes;
  std::set<int> crashed_clients;

  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& e = trace.events[i];
    switch (e.kind) {
      case EventKind::invoke:
        if (e.op_kind == OpKind::write) {
          ongoing_writes.insert(e.op);
          write_client.emplace(e.op, e.node);
        }
        break;
      case EventKind::respond:
        if (e.op_kind == OpKind::write) ongoing_writes.erase(e.op);
        break;
      case EventKind::crash:
        if (e.node.is_server()) {
          server_crashed[static_cast<std::size_t>(e.node.index)] = true;
        } else {
          crashed_clients.insert(e.node.index);
          for (auto it = ongoing_writes.begin(); it != ongoing_writes.end();) {
            auto wc = write_client.find(*it);
            if (wc != write_client.end() && wc->second == e.node)
              it = ongoing_writes.erase(it);
            else
              ++it;
          }
        }
        break;
      default:
        break;
    }
    if (!ongoing_writes.empty()) continue;
    bool pending_to_live = false;
    for (const PendingPut& p : puts) {
      if (p.sent_seq > e.seq || p.delivered_seq <= e.seq) continue;
      if (server_crashed[static_cast<std::size_t>(p.to.index)]) continue;
      pending_to_live = true;
      break;
    }
    if (!pending_to_live) out.push_back(i);
  }
  return out;
}

}  // namespace semu
