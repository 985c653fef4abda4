#include "semu/machines.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace semu {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::alg1: return "alg1";
    case Algorithm::alg2: return "alg2";
    case Algorithm::alg2a: return "alg2a";
    case Algorithm::abd: return "abd";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "alg1") return Algorithm::alg1;
  if (s == "alg2") return Algorithm::alg2;
  if (s == "alg2a") return Algorithm::alg2a;
  if (s == "abd") return Algorithm::abd;
  throw std::invalid_argument("bad algorithm: " + s);
}

const char* to_string(ReadMode m) { return m == ReadMode::abort_on_miss ? "abort" : "fw"; }

ReadMode read_mode_from_string(const std::string& s) {
  if (s == "abort") return ReadMode::abort_on_miss;
  if (s == "fw") return ReadMode::fw;
  throw std::invalid_argument("bad read mode: " + s);
}

ReadResponse row_from_get_resp(const Message& m) {
  ReadResponse r;
  r.server = m.from.index;
  r.tag = m.tag;
  r.kind = m.payload;
  if (m.payload == PayloadKind::replica)
    r.value = m.value;
  else
    r.symbol = m.symbol;
  return r;
}

std::vector<Tag> decodable_tags(std::span<const ReadResponse> rows, int k) {
  std::map<Tag, std::pair<bool, std::set<int>>> info;  // tag -> (replica seen, coded indices)
  for (const ReadResponse& r : rows) {
    auto& e = info[r.tag];
    if (r.kind == PayloadKind::replica)
      e.first = true;
    else
      e.second.insert(r.symbol.index);
  }
  std::vector<Tag> out;
  for (const auto& [tag, e] : info)
    if (e.first || static_cast<int>(e.second.size()) >= k) out.push_back(tag);
  return out;
}

std::optional<Tag> select_read_tag(std::span<const ReadResponse> rows, int k, int f, int nu) {
  std::vector<Tag> dec = decodable_tags(rows, k);
  if (dec.empty()) return std::nullopt;
  std::map<Tag, int> count;
  for (const ReadResponse& r : rows) ++count[r.tag];
  std::optional<Tag> best;
  for (const Tag& t : dec) {
    int higher = 0;
    for (const auto& [u, c] : count)
      if (t < u) ++higher;
    bool ok = count[t] >= f + 1 || higher <= nu;
    if (ok && (!best || *best < t)) best = t;
  }
  return best;
}

Value recover_value(std::span<const ReadResponse> rows, const Tag& t, const Codec& codec,
                    std::size_t value_size) {
  std::vector<CodedSymbol> symbols;
  for (const ReadResponse& r : rows) {
    if (r.tag != t) continue;
    if (r.kind == PayloadKind::replica) return r.value;
    symbols.push_back(r.symbol);
  }
  return codec.decode(symbols, value_size);
}

// ---------------------------------------------------------------------------
// FW read selection search.

namespace {

// Branch-and-bound: choose `want` of the option rows (one per server, options
// grouped per server) so that the union of their tags stays within `budget`
// distinct tags. Returns the first satisfying pick.
bool pick_high_rows(const std::vector<std::vector<ReadResponse>>& options, std::size_t idx,
                    int want, int budget, std::vector<Tag>& used,
                    std::vector<ReadResponse>& picked) {
  if (want == 0) return true;
  if (idx >= options.size() || static_cast<int>(options.size() - idx) < want) return false;
  for (const ReadResponse& r : options[idx]) {
    bool is_new = std::find(used.begin(), used.end(), r.tag) == used.end();
    if (is_new && static_cast<int>(used.size()) >= budget) continue;
    if (is_new) used.push_back(r.tag);
    picked.push_back(r);
    if (pick_high_rows(options, idx + 1, want - 1, budget, used, picked)) return true;
    picked.pop_back();
    if (is_new) used.pop_back();
  }
  return pick_high_rows(options, idx + 1, want, budget, used, picked);
}

}  // namespace

std::optional<FwSelection> fw_search(std::span<const ReadResponse> pool, const Tag& gamma,
                                     int quorum, int k, int f, int nu) {
  std::set<Tag> tag_set;
  std::set<int> all_servers;
  for (const ReadResponse& r : pool) {
    tag_set.insert(r.tag);
    all_servers.insert(r.server);
  }
  if (static_cast<int>(all_servers.size()) < quorum) return std::nullopt;

  std::vector<Tag> tags(tag_set.rbegin(), tag_set.rend());  // descending
  for (const Tag& t : tags) {
    // One row per server holding t; prefer coded so symbols accumulate.
    std::map<int, ReadResponse> base;
    bool replica_available = false;
    for (const ReadResponse& r : pool) {
      if (r.tag != t) continue;
      if (r.kind == PayloadKind::replica) replica_available = true;
      auto it = base.find(r.server);
      if (it == base.end() ||
          (it->second.kind == PayloadKind::replica && r.kind == PayloadKind::coded))
        base[r.server] = r;
    }
    int coded = 0;
    bool replica_in_base = false;
    for (const auto& [s, r] : base) {
      if (r.kind == PayloadKind::coded)
        ++coded;
      else
        replica_in_base = true;
    }
    if (!replica_in_base && coded < k) {
      if (!replica_available) continue;  // t is not decodable from the pool
      for (const ReadResponse& r : pool)
        if (r.tag == t && r.kind == PayloadKind::replica) {
          base[r.server] = r;
          break;
        }
    }

    // Fill candidates from the remaining servers: per server the best row
    // with tag <= t when it has one, otherwise its rows above t (one per
    // distinct tag).
    std::map<int, ReadResponse> low;
    std::map<int, std::map<Tag, ReadResponse>> high;
    for (const ReadResponse& r : pool) {
      if (base.count(r.server)) continue;
      if (!(t < r.tag)) {
        auto it = low.find(r.server);
        if (it == low.end() || it->second.tag < r.tag) low[r.server] = r;
      } else {
        high[r.server].emplace(r.tag, r);
      }
    }
    for (const auto& [s, r] : low) high.erase(s);

    int need = quorum - static_cast<int>(base.size());
    if (need > static_cast<int>(low.size() + high.size())) continue;

    FwSelection sel;
    sel.tag = t;
    for (const auto& [s, r] : base) sel.rows.push_back(r);
    int count_t = static_cast<int>(base.size());
    if (need <= 0) return sel;  // all rows carry t, no higher tags at all

    // Conditions (i) and (iii) hold regardless of which rows complete the
    // quorum; condition (ii) also becomes free when low rows suffice.
    if (count_t >= f + 1 || !(t < gamma) || need <= static_cast<int>(low.size())) {
      for (const auto& [s, r] : low) {
        if (need == 0) break;
        sel.rows.push_back(r);
        --need;
      }
      for (const auto& [s, rows] : high) {
        if (need == 0) break;
        sel.rows.push_back(rows.begin()->second);  // smallest tag above t
        --need;
      }
      if (need == 0) return sel;
      continue;  // unreachable given the size check above
    }

    // Condition (ii) with forced rows above t: search for a pick of the
    // remaining servers introducing at most nu distinct higher tags.
    for (const auto& [s, r] : low) sel.rows.push_back(r);
    int forced = need - static_cast<int>(low.size());
    std::vector<std::vector<ReadResponse>> options;
    for (const auto& [s, rows] : high) {
      std::vector<ReadResponse> per_server;
      for (const auto& [u, r] : rows) per_server.push_back(r);
      options.push_back(std::move(per_server));
    }
    std::vector<Tag> used;
    std::vector<ReadResponse> picked;
    if (pick_high_rows(options, 0, forced, nu, used, picked)) {
      sel.rows.insert(sel.rows.end(), picked.begin(), picked.end());
      return sel;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Server.

ServerMachine::ServerMachine(Algorithm alg, const SystemParams& params, const Codec& codec,
                             int index)
    : alg_(alg), codec_(&codec), index_(index) {
  Tag t0 = Tag::initial(tag_kind_of(alg));
  Value v0 = params.default_value();
  if (alg == Algorithm::abd)
    stored_ = StoredElement::make_replica(t0, v0);
  else
    stored_ = StoredElement::make_coded(t0, codec.encode_one(v0, index));
}

StepResult ServerMachine::on_deliver(const Message& m) {
  StepResult res;
  Message reply;
  reply.from = NodeId::server(index_);
  reply.to = m.from;
  reply.op = m.op;
  reply.phase = m.phase;
  reply.round = m.round;
  switch (m.kind) {
    case MsgKind::get_tag:
      reply.kind = MsgKind::get_tag_resp;
      reply.tag = stored_.tag;
      break;
    case MsgKind::get:
      reply.kind = MsgKind::get_resp;
      reply.tag = stored_.tag;
      reply.payload = stored_.kind;
      if (stored_.kind == PayloadKind::replica)
        reply.value = stored_.replica;
      else
        reply.symbol = stored_.symbol;
      break;
    case MsgKind::put_replica:
      if (stored_.tag < m.tag) stored_ = StoredElement::make_replica(m.tag, m.value);
      reply.kind = MsgKind::ack;
      reply.tag = m.tag;
      break;
    case MsgKind::put_coded: {
      bool accept = alg_ == Algorithm::alg2 ? !(m.tag < stored_.tag) : stored_.tag < m.tag;
      if (accept) stored_ = StoredElement::make_coded(m.tag, m.symbol);
      reply.kind = MsgKind::ack;
      reply.tag = m.tag;
      break;
    }
    case MsgKind::finalize_mark:
      // Replace an exact-tag replica with this server's own symbol; a marker
      // that outruns its replica acknowledges without changing state.
      if (m.tag == stored_.tag && stored_.kind == PayloadKind::replica)
        stored_ = StoredElement::make_coded(m.tag, codec_->encode_one(stored_.replica, index_));
      reply.kind = MsgKind::ack;
      reply.tag = m.tag;
      break;
    default:
      throw std::logic_error("server received a client-bound message");
  }
  res.out.push_back(std::move(reply));
  return res;
}

// ---------------------------------------------------------------------------
// Client machines.

namespace {

struct ClientBase : ClientMachine {
  ClientBase(const SystemParams& params, const Codec& codec, int client_index)
      : params_(params), codec_(&codec), self_(NodeId::client(client_index)),
        cid_(static_cast<ClientId>(client_index)) {}

  bool busy() const override { return busy_; }

  Message to_server(MsgKind kind, int server, Phase phase) const {
    Message m;
    m.kind = kind;
    m.from = self_;
    m.to = NodeId::server(server);
    m.op = token_;
    m.phase = phase;
    return m;
  }

  void broadcast(StepResult& res, MsgKind kind, Phase phase, int first, int last,
                 std::uint32_t round = 0) const {
    for (int s = first; s <= last; ++s) {
      Message m = to_server(kind, s, phase);
      m.round = round;
      res.out.push_back(std::move(m));
    }
  }

  void put_coded_wave(StepResult& res, const Tag& tag, const Value& v, Phase phase, int first,
                      int last) const {
    for (int s = first; s <= last; ++s) {
      Message m = to_server(MsgKind::put_coded, s, phase);
      m.tag = tag;
      m.payload = PayloadKind::coded;
      m.symbol = codec_->encode_one(v, s);
      res.out.push_back(std::move(m));
    }
  }

  void put_replica_wave(StepResult& res, const Tag& tag, const Value& v, Phase phase, int first,
                        int last) const {
    for (int s = first; s <= last; ++s) {
      Message m = to_server(MsgKind::put_replica, s, phase);
      m.tag = tag;
      m.payload = PayloadKind::replica;
      m.value = v;
      res.out.push_back(std::move(m));
    }
  }

  void mark_wave(StepResult& res, const Tag& tag, Phase phase, int first, int last) const {
    for (int s = first; s <= last; ++s) {
      Message m = to_server(MsgKind::finalize_mark, s, phase);
      m.tag = tag;
      res.out.push_back(std::move(m));
    }
  }

  bool mine(const Message& m, Phase phase) const {
    return busy_ && m.op == token_ && m.phase == phase;
  }

  SystemParams params_;
  const Codec* codec_;
  NodeId self_;
  ClientId cid_;
  std::uint64_t token_ = 0;
  bool busy_ = false;
};

// Algorithm 1 write: bump the tag, propagate coded symbols everywhere, await
// a quorum of acks.
class SwWriter final : public ClientBase {
 public:
  using ClientBase::ClientBase;

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::write || !v) throw std::logic_error("bad writer invocation");
    busy_ = true;
    token_ = token;
    ++z_;
    tag_ = Tag::single(z_);
    acked_.clear();
    StepResult res;
    put_coded_wave(res, tag_, *v, Phase::put, 1, params_.n_servers);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind != MsgKind::ack || !mine(m, Phase::put)) return res;
    acked_.insert(m.from.index);
    if (static_cast<int>(acked_.size()) >= params_.quorum()) {
      busy_ = false;
      res.response = OpResponse{OpKind::write, std::nullopt, tag_};
    }
    return res;
  }

 private:
  std::uint64_t z_ = 0;
  Tag tag_;
  std::set<int> acked_;
};

// ABD baseline write: same shape with full replicas.
class AbdWriter final : public ClientBase {
 public:
  using ClientBase::ClientBase;

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::write || !v) throw std::logic_error("bad writer invocation");
    busy_ = true;
    token_ = token;
    ++z_;
    tag_ = Tag::single(z_);
    acked_.clear();
    StepResult res;
    put_replica_wave(res, tag_, *v, Phase::put, 1, params_.n_servers);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind != MsgKind::ack || !mine(m, Phase::put)) return res;
    acked_.insert(m.from.index);
    if (static_cast<int>(acked_.size()) >= params_.quorum()) {
      busy_ = false;
      res.response = OpResponse{OpKind::write, std::nullopt, tag_};
    }
    return res;
  }

 private:
  std::uint64_t z_ = 0;
  Tag tag_;
  std::set<int> acked_;
};

// Algorithm 2 write: query tags, pre-write replicas to the first k+2f
// servers, then finalize with coded symbols (or markers where the replica
// already sits).
class MwWriter final : public ClientBase {
 public:
  MwWriter(const SystemParams& params, const Codec& codec, int client_index, bool markers)
      : ClientBase(params, codec, client_index), markers_(markers) {}

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::write || !v) throw std::logic_error("bad writer invocation");
    busy_ = true;
    token_ = token;
    value_ = *v;
    phase_ = St::query;
    queried_.clear();
    max_tag_ = Tag::initial(TagKind::multi);
    acked_pre_.clear();
    acked_fin_.clear();
    StepResult res;
    broadcast(res, MsgKind::get_tag, Phase::query, 1, params_.n_servers);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind == MsgKind::get_tag_resp && mine(m, Phase::query) && phase_ == St::query) {
      queried_.insert(m.from.index);
      if (max_tag_ < m.tag) max_tag_ = m.tag;
      if (static_cast<int>(queried_.size()) >= params_.quorum()) {
        tag_ = Tag::multi(max_tag_.z + 1, cid_);
        phase_ = St::pre_write;
        put_replica_wave(res, tag_, value_, Phase::pre_write, 1, replica_targets());
      }
      return res;
    }
    if (m.kind == MsgKind::ack && mine(m, Phase::pre_write) && phase_ == St::pre_write) {
      acked_pre_.insert(m.from.index);
      if (static_cast<int>(acked_pre_.size()) >= params_.k + params_.max_failures) {
        phase_ = St::finalize;
        emit_finalize(res);
      }
      return res;
    }
    if (m.kind == MsgKind::ack && mine(m, Phase::finalize) && phase_ == St::finalize) {
      acked_fin_.insert(m.from.index);
      if (static_cast<int>(acked_fin_.size()) >= params_.quorum()) {
        busy_ = false;
        phase_ = St::idle;
        res.response = OpResponse{OpKind::write, std::nullopt, tag_};
      }
      return res;
    }
    return res;
  }

 private:
  enum class St { idle, query, pre_write, finalize };

  int replica_targets() const { return params_.k + 2 * params_.max_failures; }

  void emit_finalize(StepResult& res) {
    int split = replica_targets();
    if (markers_) {
      put_coded_wave(res, tag_, value_, Phase::finalize, split + 1, params_.n_servers);
      mark_wave(res, tag_, Phase::finalize, 1, split);
    } else {
      put_coded_wave(res, tag_, value_, Phase::finalize, 1, params_.n_servers);
    }
  }

  bool markers_;
  St phase_ = St::idle;
  Value value_;
  Tag tag_;
  Tag max_tag_;
  std::set<int> queried_;
  std::set<int> acked_pre_;
  std::set<int> acked_fin_;
};

// Algorithm 2-A write: query for the tag, then a single coded wave as in the
// single-writer algorithm.
class Mw2aWriter final : public ClientBase {
 public:
  using ClientBase::ClientBase;

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::write || !v) throw std::logic_error("bad writer invocation");
    busy_ = true;
    token_ = token;
    value_ = *v;
    querying_ = true;
    queried_.clear();
    acked_.clear();
    max_tag_ = Tag::initial(TagKind::multi);
    StepResult res;
    broadcast(res, MsgKind::get_tag, Phase::query, 1, params_.n_servers);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind == MsgKind::get_tag_resp && mine(m, Phase::query) && querying_) {
      queried_.insert(m.from.index);
      if (max_tag_ < m.tag) max_tag_ = m.tag;
      if (static_cast<int>(queried_.size()) >= params_.quorum()) {
        querying_ = false;
        tag_ = Tag::multi(max_tag_.z + 1, cid_);
        put_coded_wave(res, tag_, value_, Phase::put, 1, params_.n_servers);
      }
      return res;
    }
    if (m.kind == MsgKind::ack && mine(m, Phase::put) && !querying_) {
      acked_.insert(m.from.index);
      if (static_cast<int>(acked_.size()) >= params_.quorum()) {
        busy_ = false;
        res.response = OpResponse{OpKind::write, std::nullopt, tag_};
      }
      return res;
    }
    return res;
  }

 private:
  bool querying_ = false;
  Value value_;
  Tag tag_;
  Tag max_tag_;
  std::set<int> queried_;
  std::set<int> acked_;
};

// Abort-style reader covering all four algorithms. The algorithm decides the
// write_back shape: a single coded (or replica) wave, or the two-phase
// pre-write/finalize of Algorithm 2 with its two skip optimizations.
class AbortReader final : public ClientBase {
 public:
  AbortReader(Algorithm alg, const SystemParams& params, const Codec& codec, int client_index,
              bool markers)
      : ClientBase(params, codec, client_index), alg_(alg), markers_(markers) {}

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::read || v) throw std::logic_error("bad reader invocation");
    busy_ = true;
    token_ = token;
    phase_ = St::get;
    rows_.clear();
    acked_.clear();
    StepResult res;
    broadcast(res, MsgKind::get, Phase::get, 1, params_.n_servers);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind == MsgKind::get_resp && mine(m, Phase::get) && phase_ == St::get) {
      rows_.push_back(row_from_get_resp(m));
      if (static_cast<int>(rows_.size()) >= params_.quorum()) decide(res);
      return res;
    }
    if (m.kind == MsgKind::ack && mine(m, Phase::wb_pre_write) && phase_ == St::wb_pre) {
      acked_.insert(m.from.index);
      if (static_cast<int>(acked_.size()) >= params_.k + params_.max_failures) {
        phase_ = St::wb_fin;
        acked_.clear();
        emit_finalize(res);
      }
      return res;
    }
    if (m.kind == MsgKind::ack &&
        ((mine(m, Phase::wb_put) && phase_ == St::wb_single) ||
         (mine(m, Phase::wb_finalize) && phase_ == St::wb_fin))) {
      acked_.insert(m.from.index);
      if (static_cast<int>(acked_.size()) >= params_.quorum()) {
        busy_ = false;
        phase_ = St::idle;
        res.response = OpResponse{OpKind::read, value_, tag_};
      }
      return res;
    }
    return res;
  }

 private:
  enum class St { idle, get, wb_single, wb_pre, wb_fin };

  void decide(StepResult& res) {
    std::optional<Tag> t =
        select_read_tag(rows_, params_.k, params_.max_failures, params_.liveness);
    if (!t) {
      busy_ = false;
      phase_ = St::idle;
      res.aborted = true;
      return;
    }
    tag_ = *t;
    value_ = recover_value(rows_, tag_, *codec_,
                           static_cast<std::size_t>(params_.value_bytes));
    acked_.clear();
    if (alg_ == Algorithm::alg2) {
      int coded_seen = 0;
      for (const ReadResponse& r : rows_)
        if (r.tag == tag_ && r.kind == PayloadKind::coded) ++coded_seen;
      if (coded_seen >= params_.quorum()) {
        // Enough coded copies already sit in a quorum: skip write_back.
        busy_ = false;
        phase_ = St::idle;
        res.response = OpResponse{OpKind::read, value_, tag_};
        return;
      }
      if (coded_seen >= 1) {
        // Some server already replaced the replica, so the pre-write phase of
        // this tag completed; run finalize only.
        phase_ = St::wb_fin;
        emit_finalize(res);
        return;
      }
      phase_ = St::wb_pre;
      put_replica_wave(res, tag_, *value_, Phase::wb_pre_write, 1,
                       params_.k + 2 * params_.max_failures);
      return;
    }
    phase_ = St::wb_single;
    if (alg_ == Algorithm::abd)
      put_replica_wave(res, tag_, *value_, Phase::wb_put, 1, params_.n_servers);
    else
      put_coded_wave(res, tag_, *value_, Phase::wb_put, 1, params_.n_servers);
  }

  void emit_finalize(StepResult& res) {
    int split = params_.k + 2 * params_.max_failures;
    if (markers_) {
      put_coded_wave(res, tag_, *value_, Phase::wb_finalize, split + 1, params_.n_servers);
      mark_wave(res, tag_, Phase::wb_finalize, 1, split);
    } else {
      put_coded_wave(res, tag_, *value_, Phase::wb_finalize, 1, params_.n_servers);
    }
  }

  Algorithm alg_;
  bool markers_;
  St phase_ = St::idle;
  std::vector<ReadResponse> rows_;
  std::optional<Value> value_;
  Tag tag_;
  std::set<int> acked_;
};

// Finite-write-termination reader: repeated get rounds pool responses across
// iterations; a selection of pooled rows may return a tag satisfying the two
// usual conditions or tag >= Gamma, the largest tag of the first round.
class FwReader final : public ClientBase {
 public:
  FwReader(Algorithm alg, const SystemParams& params, const Codec& codec, int client_index,
           bool markers)
      : ClientBase(params, codec, client_index), alg_(alg), markers_(markers) {}

  StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) override {
    if (busy_ || kind != OpKind::read || v) throw std::logic_error("bad reader invocation");
    busy_ = true;
    token_ = token;
    phase_ = St::get;
    pool_.clear();
    round_servers_.clear();
    acked_.clear();
    round_ = 1;
    once_ = false;
    gamma_ = Tag::initial(tag_kind_of(alg_));
    round_max_ = gamma_;
    StepResult res;
    broadcast(res, MsgKind::get, Phase::get, 1, params_.n_servers, round_);
    return res;
  }

  StepResult on_deliver(const Message& m) override {
    StepResult res;
    if (m.kind == MsgKind::get_resp && busy_ && m.op == token_ && m.phase == Phase::get) {
      pool_add(row_from_get_resp(m));
      if (phase_ == St::get && m.round == round_) {
        round_servers_.insert(m.from.index);
        if (round_max_ < m.tag) round_max_ = m.tag;
        if (static_cast<int>(round_servers_.size()) >= params_.quorum()) end_iteration(res);
      }
      return res;
    }
    if (m.kind == MsgKind::ack && mine(m, Phase::wb_pre_write) && phase_ == St::wb_pre) {
      acked_.insert(m.from.index);
      if (static_cast<int>(acked_.size()) >= params_.k + params_.max_failures) {
        phase_ = St::wb_fin;
        acked_.clear();
        emit_finalize(res);
      }
      return res;
    }
    if (m.kind == MsgKind::ack &&
        ((mine(m, Phase::wb_put) && phase_ == St::wb_single) ||
         (mine(m, Phase::wb_finalize) && phase_ == St::wb_fin))) {
      acked_.insert(m.from.index);
      if (static_cast<int>(acked_.size()) >= params_.quorum()) {
        busy_ = false;
        phase_ = St::idle;
        res.response = OpResponse{OpKind::read, value_, tag_};
      }
      return res;
    }
    return res;
  }

  int iterations() const override { return static_cast<int>(round_); }

 private:
  enum class St { idle, get, wb_single, wb_pre, wb_fin };

  void pool_add(const ReadResponse& row) {
    for (const ReadResponse& r : pool_)
      if (r.server == row.server && r.tag == row.tag && r.kind == row.kind) return;
    pool_.push_back(row);
  }

  void end_iteration(StepResult& res) {
    if (!once_) {
      gamma_ = round_max_;
      once_ = true;
    }
    std::optional<FwSelection> found = fw_search(pool_, gamma_, params_.quorum(), params_.k,
                                                 params_.max_failures, params_.liveness);
    if (!found) {
      ++round_;
      round_servers_.clear();
      broadcast(res, MsgKind::get, Phase::get, 1, params_.n_servers, round_);
      return;
    }
    tag_ = found->tag;
    value_ = recover_value(found->rows, tag_, *codec_,
                           static_cast<std::size_t>(params_.value_bytes));
    acked_.clear();
    if (alg_ == Algorithm::alg2) {
      int coded_seen = 0;
      std::set<int> seen;
      for (const ReadResponse& r : pool_)
        if (r.tag == tag_ && r.kind == PayloadKind::coded && seen.insert(r.server).second)
          ++coded_seen;
      if (coded_seen >= params_.quorum()) {
        busy_ = false;
        phase_ = St::idle;
        res.response = OpResponse{OpKind::read, value_, tag_};
        return;
      }
      if (coded_seen >= 1) {
        phase_ = St::wb_fin;
        emit_finalize(res);
        return;
      }
      phase_ = St::wb_pre;
      put_replica_wave(res, tag_, *value_, Phase::wb_pre_write, 1,
                       params_.k + 2 * params_.max_failures);
      return;
    }
    phase_ = St::wb_single;
    if (alg_ == Algorithm::abd)
      put_replica_wave(res, tag_, *value_, Phase::wb_put, 1, params_.n_servers);
    else
      put_coded_wave(res, tag_, *value_, Phase::wb_put, 1, params_.n_servers);
  }

  void emit_finalize(StepResult& res) {
    int split = params_.k + 2 * params_.max_failures;
    if (markers_) {
      put_coded_wave(res, tag_, *value_, Phase::wb_finalize, split + 1, params_.n_servers);
      mark_wave(res, tag_, Phase::wb_finalize, 1, split);
    } else {
      put_coded_wave(res, tag_, *value_, Phase::wb_finalize, 1, params_.n_servers);
    }
  }

  Algorithm alg_;
  bool markers_;
  St phase_ = St::idle;
  std::vector<ReadResponse> pool_;
  std::set<int> round_servers_;
  std::uint32_t round_ = 0;
  bool once_ = false;
  Tag gamma_;
  Tag round_max_;
  std::optional<Value> value_;
  Tag tag_;
  std::set<int> acked_;
};

}  // namespace

std::unique_ptr<ClientMachine> make_writer(Algorithm alg, const SystemParams& params,
                                           const Codec& codec, int client_index,
                                           bool finalize_markers) {
  switch (alg) {
    case Algorithm::alg1: return std::make_unique<SwWriter>(params, codec, client_index);
    case Algorithm::abd: return std::make_unique<AbdWriter>(params, codec, client_index);
    case Algorithm::alg2:
      return std::make_unique<MwWriter>(params, codec, client_index, finalize_markers);
    case Algorithm::alg2a: return std::make_unique<Mw2aWriter>(params, codec, client_index);
  }
  throw std::logic_error("unreachable");
}

std::unique_ptr<ClientMachine> make_reader(Algorithm alg, ReadMode mode,
                                           const SystemParams& params, const Codec& codec,
                                           int client_index, bool finalize_markers) {
  if (mode == ReadMode::fw)
    return std::make_unique<FwReader>(alg, params, codec, client_index, finalize_markers);
  return std::make_unique<AbortReader>(alg, params, codec, client_index, finalize_markers);
}

}  // namespace semu
