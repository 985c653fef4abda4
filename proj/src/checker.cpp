#include "semu/checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "semu/machines.hpp"

namespace semu {

History extract_history(const Trace& trace) {
  History h;
  h.default_value_hex = Value::zeros(static_cast<std::size_t>(trace.header.value_bytes)).hex();
  std::map<std::uint64_t, OperationRecord> ops;
  for (const TraceEvent& e : trace.events) {
    switch (e.kind) {
      case EventKind::invoke: {
        OperationRecord r;
        r.token = e.op;
        r.client = e.node.index;
        r.kind = e.op_kind;
        r.invoke_seq = e.seq;
        if (e.op_kind == OpKind::write) r.value_hex = e.value_hex;
        ops.emplace(e.op, std::move(r));
        break;
      }
      case EventKind::respond: {
        auto it = ops.find(e.op);
        if (it == ops.end()) continue;
        it->second.respond_seq = e.seq;
        if (e.op_kind == OpKind::read) it->second.value_hex = e.value_hex;
        it->second.tag = e.tag;
        break;
      }
      case EventKind::abort_read: {
        auto it = ops.find(e.op);
        if (it != ops.end()) it->second.aborted = true;
        break;
      }
      default:
        break;
    }
  }
  for (auto& [token, r] : ops) {
    if (!r.respond_seq) ++h.incomplete;
    h.ops.push_back(std::move(r));
  }
  std::sort(h.ops.begin(), h.ops.end(),
            [](const OperationRecord& a, const OperationRecord& b) {
              return a.invoke_seq < b.invoke_seq;
            });
  return h;
}

namespace {

std::string op_desc(const OperationRecord& r) {
  std::ostringstream out;
  out << to_string(r.kind) << " op " << r.token << " (client c" << r.client << ")";
  return out.str();
}

Verdict well_formedness(const std::vector<OperationRecord>& ops) {
  std::map<int, const OperationRecord*> last;  // client -> previous op
  for (const OperationRecord& r : ops) {
    auto it = last.find(r.client);
    if (it != last.end()) {
      const OperationRecord* prev = it->second;
      if (!prev->respond_seq || *prev->respond_seq > r.invoke_seq)
        return Verdict::fail(0,
                             "malformed history: overlapping operations at one client: " +
                                 op_desc(*prev) + " and " + op_desc(r),
                             std::make_pair(prev->token, r.token));
    }
    last[r.client] = &r;
  }
  return Verdict::ok();
}

}  // namespace

Verdict check_tag_atomicity(const History& history) {
  std::vector<OperationRecord> complete;
  for (const OperationRecord& r : history.ops) {
    if (!r.respond_seq) continue;
    if (!r.tag)
      return Verdict::fail(0, "completed operation without a tag: " + op_desc(r),
                           std::make_pair(r.token, r.token));
    complete.push_back(r);
  }
  if (Verdict wf = well_formedness(history.ops); !wf.pass) return wf;

  // Property (2): completed writes carry pairwise distinct tags.
  std::map<Tag, const OperationRecord*> writes;
  for (const OperationRecord& r : complete) {
    if (r.kind != OpKind::write) continue;
    auto [it, inserted] = writes.emplace(*r.tag, &r);
    if (!inserted)
      return Verdict::fail(
          2, "two completed writes share tag " + r.tag->str() + ": " + op_desc(*it->second) +
                 " and " + op_desc(r),
          std::make_pair(it->second->token, r.token));
  }

  // Property (1): if op a responds before op b is invoked, b must not precede
  // a in the tag order.
  for (const OperationRecord& a : complete) {
    for (const OperationRecord& b : complete) {
      if (a.token == b.token || *a.respond_seq >= b.invoke_seq) continue;
      bool b_precedes_a = *b.tag < *a.tag || (*b.tag == *a.tag && b.kind == OpKind::write &&
                                              a.kind == OpKind::read);
      if (b_precedes_a)
        return Verdict::fail(1,
                             op_desc(a) + " with tag " + a.tag->str() + " finished before " +
                                 op_desc(b) + " with tag " + b.tag->str() + " was invoked",
                             std::make_pair(a.token, b.token));
    }
  }

  // Property (3): a read returns the value of the write with its tag, or the
  // default value for the initial tag.
  for (const OperationRecord& r : complete) {
    if (r.kind != OpKind::read) continue;
    if (r.tag->is_initial()) {
      if (r.value_hex != history.default_value_hex)
        return Verdict::fail(3, op_desc(r) + " returned a non-default value for the initial tag",
                             std::make_pair(r.token, r.token));
      continue;
    }
    auto it = writes.find(*r.tag);
    if (it == writes.end())
      return Verdict::fail(3,
                           op_desc(r) + " returned tag " + r.tag->str() +
                               " that no completed write produced",
                           std::make_pair(r.token, r.token));
    if (it->second->value_hex != r.value_hex)
      return Verdict::fail(3,
                           op_desc(r) + " returned a value different from the write with tag " +
                               r.tag->str(),
                           std::make_pair(it->second->token, r.token));
  }
  return Verdict::ok();
}

Verdict brute_force_linearizable(const History& history, std::size_t max_ops) {
  std::vector<const OperationRecord*> ops;
  for (const OperationRecord& r : history.ops)
    if (r.respond_seq) ops.push_back(&r);
  if (ops.size() > max_ops)
    return Verdict::fail(0, "history exceeds brute-force size limit");
  if (Verdict wf = well_formedness(history.ops); !wf.pass) return wf;

  const std::size_t n = ops.size();
  if (n == 0) return Verdict::ok();

  // State: chosen-set bitmask plus the index of the last linearized write
  // (n = none yet, register holds the default value).
  std::set<std::pair<std::uint32_t, std::size_t>> seen;
  struct Frame {
    std::uint32_t mask;
    std::size_t last_write;
  };
  std::vector<Frame> stack{{0u, n}};
  const std::uint32_t full = n == 32 ? 0xffffffffu : ((1u << n) - 1);
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    if (fr.mask == full) return Verdict::ok();
    if (!seen.insert({fr.mask, fr.last_write}).second) continue;
    for (std::size_t i = 0; i < n; ++i) {
      if (fr.mask & (1u << i)) continue;
      // Real-time: no unchosen op may have responded before ops[i] invoked.
      bool blocked = false;
      for (std::size_t j = 0; j < n && !blocked; ++j)
        if (j != i && !(fr.mask & (1u << j)) && *ops[j]->respond_seq < ops[i]->invoke_seq)
          blocked = true;
      if (blocked) continue;
      if (ops[i]->kind == OpKind::read) {
        const std::string& reg = fr.last_write == n ? history.default_value_hex
                                                    : ops[fr.last_write]->value_hex;
        if (ops[i]->value_hex != reg) continue;
        stack.push_back({fr.mask | (1u << i), fr.last_write});
      } else {
        stack.push_back({fr.mask | (1u << i), i});
      }
    }
  }
  return Verdict::fail(0, "no linearization of the completed operations exists");
}

Verdict check_server_monotonicity(const Trace& trace) {
  std::map<int, StoredMeta> state;
  for (const TraceEvent& e : trace.events) {
    if (e.kind != EventKind::deliver || !e.stored || !e.node.is_server()) continue;
    auto it = state.find(e.node.index);
    if (it != state.end()) {
      const StoredMeta& prev = it->second;
      if (e.stored->tag < prev.tag)
        return Verdict::fail(0,
                             "server " + e.node.str() + " tag decreased at event " +
                                 std::to_string(e.seq));
      if (e.stored->tag == prev.tag && prev.kind == PayloadKind::coded &&
          e.stored->kind == PayloadKind::replica)
        return Verdict::fail(0,
                             "server " + e.node.str() + " went coded->replica for tag " +
                                 prev.tag.str() + " at event " + std::to_string(e.seq));
    }
    state[e.node.index] = *e.stored;
  }
  return Verdict::ok();
}

Verdict check_reliable_channels(const Trace& trace) {
  // Multiset of message signatures in flight; a delivery must consume a
  // matching earlier send, and crashed nodes must stay silent.
  std::map<std::string, int> in_flight;
  std::set<std::string> crashed;
  auto signature = [](const MsgMeta& m) {
    std::ostringstream out;
    out << to_string(m.kind) << '|' << m.from.str() << '|' << m.to.str() << '|'
        << to_string(m.phase) << '|' << m.round << '|' << (m.has_tag ? m.tag.str() : "-") << '|'
        << (m.has_payload ? std::to_string(m.payload_bytes) : std::string("-"));
    return out.str();
  };
  for (const TraceEvent& e : trace.events) {
    switch (e.kind) {
      case EventKind::crash:
        crashed.insert(e.node.str());
        break;
      case EventKind::send:
        if (crashed.count(e.node.str()))
          return Verdict::fail(0, "crashed node " + e.node.str() + " sent at event " +
                                      std::to_string(e.seq));
        ++in_flight[signature(*e.msg)];
        break;
      case EventKind::deliver: {
        if (crashed.count(e.node.str()))
          return Verdict::fail(0, "delivery to crashed node " + e.node.str() + " at event " +
                                      std::to_string(e.seq));
        auto it = in_flight.find(signature(*e.msg));
        if (it == in_flight.end() || it->second == 0)
          return Verdict::fail(0, "delivery without a matching send at event " +
                                      std::to_string(e.seq));
        --it->second;
        break;
      }
      default:
        break;
    }
  }
  return Verdict::ok();
}

namespace {

struct ServerSnapshot {
  Tag tag;
  PayloadKind kind = PayloadKind::coded;
  bool crashed = false;
};

// True when some tag >= floor is decodable from the listed servers.
bool subset_has_decodable(const std::vector<const ServerSnapshot*>& subset, const Tag& floor,
                          int k) {
  std::map<Tag, std::pair<bool, int>> tally;  // tag -> (replica present, coded count)
  for (const ServerSnapshot* s : subset) {
    if (s->tag < floor) continue;
    auto& e = tally[s->tag];
    if (s->kind == PayloadKind::replica)
      e.first = true;
    else
      ++e.second;
  }
  for (const auto& [t, e] : tally)
    if (e.first || e.second >= k) return true;
  return false;
}

bool next_combination(std::vector<int>& idx, int n) {
  int r = static_cast<int>(idx.size());
  for (int i = r - 1; i >= 0; --i) {
    if (idx[static_cast<std::size_t>(i)] < n - (r - i)) {
      ++idx[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < r; ++j)
        idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

PersistenceResult check_persistence(const Trace& trace) {
  PersistenceResult result;
  const TraceHeader& h = trace.header;
  const bool alg2 = h.algorithm == "alg2";
  if (!alg2) {
    // The every-quorum scan is valid only when at most nu distinct tags above
    // the last completed write can coexist.
    bool valid = (h.algorithm == "abd") || (h.algorithm == "alg1" && h.nu >= 2) ||
                 (h.algorithm == "alg2a" && h.concurrency_cap >= 0 &&
                  h.concurrency_cap < h.nu);
    if (!valid) return result;
  }
  result.applicable = true;

  const int n = h.n;
  const int f = h.f;
  const int k = h.k;
  std::vector<ServerSnapshot> state(static_cast<std::size_t>(n) + 1);
  {
    Tag t0 = Tag::initial(alg2 || h.algorithm == "alg2a" ? TagKind::multi : TagKind::single);
    for (auto& s : state) {
      s.tag = t0;
      s.kind = h.algorithm == "abd" ? PayloadKind::replica : PayloadKind::coded;
    }
  }
  Tag last_write = state[0].tag;

  auto scan = [&](std::uint64_t seq) -> Verdict {
    std::vector<const ServerSnapshot*> live;
    for (int i = 1; i <= n; ++i)
      if (!state[static_cast<std::size_t>(i)].crashed)
        live.push_back(&state[static_cast<std::size_t>(i)]);
    if (static_cast<int>(live.size()) < n - f) return Verdict::ok();  // more than f down
    if (alg2) {
      // The maximum tag among live servers must be recoverable from them.
      Tag max_tag = live.front()->tag;
      for (const ServerSnapshot* s : live)
        if (max_tag < s->tag) max_tag = s->tag;
      if (!subset_has_decodable(live, max_tag, k))
        return Verdict::fail(0, "maximum tag " + max_tag.str() +
                                    " not recoverable from live servers at event " +
                                    std::to_string(seq));
      return Verdict::ok();
    }
    int quorum = n - f;
    std::vector<int> idx(static_cast<std::size_t>(quorum));
    for (int i = 0; i < quorum; ++i) idx[static_cast<std::size_t>(i)] = i;
    do {
      std::vector<const ServerSnapshot*> subset;
      for (int i : idx) subset.push_back(live[static_cast<std::size_t>(i)]);
      if (!subset_has_decodable(subset, last_write, k))
        return Verdict::fail(0, "a quorum of live servers cannot decode a tag >= " +
                                    last_write.str() + " at event " + std::to_string(seq));
    } while (next_combination(idx, static_cast<int>(live.size())));
    return Verdict::ok();
  };

  for (const TraceEvent& e : trace.events) {
    bool changed = false;
    switch (e.kind) {
      case EventKind::deliver:
        if (e.stored && e.node.is_server()) {
          auto& s = state[static_cast<std::size_t>(e.node.index)];
          s.tag = e.stored->tag;
          s.kind = e.stored->kind;
          changed = true;
        }
        break;
      case EventKind::crash:
        if (e.node.is_server()) {
          state[static_cast<std::size_t>(e.node.index)].crashed = true;
          changed = true;
        }
        break;
      case EventKind::respond:
        if (e.op_kind == OpKind::write && e.tag && last_write < *e.tag) {
          last_write = *e.tag;
          changed = true;
        }
        break;
      default:
        break;
    }
    if (!changed) continue;
    Verdict v = scan(e.seq);
    if (!v.pass) {
      result.verdict = v;
      return result;
    }
  }
  return result;
}

}  // namespace semu
