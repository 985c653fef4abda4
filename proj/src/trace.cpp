#include "semu/trace.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semu {

NodeId NodeId::parse(const std::string& text) {
  if (text.size() < 2 || (text[0] != 's' && text[0] != 'c'))
    throw std::invalid_argument("bad node id: " + text);
  NodeId n;
  n.role = text[0] == 's' ? Role::server : Role::client;
  n.index = std::stoi(text.substr(1));
  return n;
}

const char* to_string(MsgKind k) {
  switch (k) {
    case MsgKind::get_tag: return "get_tag";
    case MsgKind::get_tag_resp: return "get_tag_resp";
    case MsgKind::get: return "get";
    case MsgKind::get_resp: return "get_resp";
    case MsgKind::put_replica: return "put_replica";
    case MsgKind::put_coded: return "put_coded";
    case MsgKind::finalize_mark: return "finalize_mark";
    case MsgKind::ack: return "ack";
  }
  return "?";
}

MsgKind msg_kind_from_string(const std::string& s) {
  if (s == "get_tag") return MsgKind::get_tag;
  if (s == "get_tag_resp") return MsgKind::get_tag_resp;
  if (s == "get") return MsgKind::get;
  if (s == "get_resp") return MsgKind::get_resp;
  if (s == "put_replica") return MsgKind::put_replica;
  if (s == "put_coded") return MsgKind::put_coded;
  if (s == "finalize_mark") return MsgKind::finalize_mark;
  if (s == "ack") return MsgKind::ack;
  throw std::invalid_argument("bad message kind: " + s);
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::none: return "none";
    case Phase::query: return "query";
    case Phase::pre_write: return "pre_write";
    case Phase::finalize: return "finalize";
    case Phase::put: return "put";
    case Phase::get: return "get";
    case Phase::wb_put: return "wb_put";
    case Phase::wb_pre_write: return "wb_pre_write";
    case Phase::wb_finalize: return "wb_finalize";
  }
  return "?";
}

Phase phase_from_string(const std::string& s) {
  if (s == "none") return Phase::none;
  if (s == "query") return Phase::query;
  if (s == "pre_write") return Phase::pre_write;
  if (s == "finalize") return Phase::finalize;
  if (s == "put") return Phase::put;
  if (s == "get") return Phase::get;
  if (s == "wb_put") return Phase::wb_put;
  if (s == "wb_pre_write") return Phase::wb_pre_write;
  if (s == "wb_finalize") return Phase::wb_finalize;
  throw std::invalid_argument("bad phase: " + s);
}

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::invoke: return "invoke";
    case EventKind::send: return "send";
    case EventKind::deliver: return "deliver";
    case EventKind::crash: return "crash";
    case EventKind::respond: return "respond";
    case EventKind::abort_read: return "abort";
  }
  return "?";
}

const char* to_string(OpKind k) { return k == OpKind::read ? "read" : "write"; }

namespace {

EventKind event_kind_from_string(const std::string& s) {
  if (s == "invoke") return EventKind::invoke;
  if (s == "send") return EventKind::send;
  if (s == "deliver") return EventKind::deliver;
  if (s == "crash") return EventKind::crash;
  if (s == "respond") return EventKind::respond;
  if (s == "abort") return EventKind::abort_read;
  throw std::invalid_argument("bad event kind: " + s);
}

OpKind op_kind_from_string(const std::string& s) {
  if (s == "read") return OpKind::read;
  if (s == "write") return OpKind::write;
  throw std::invalid_argument("bad op kind: " + s);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

MsgMeta MsgMeta::of(const Message& m) {
  MsgMeta meta;
  meta.kind = m.kind;
  meta.from = m.from;
  meta.to = m.to;
  meta.phase = m.phase;
  meta.round = m.round;
  meta.has_tag = m.kind != MsgKind::get && m.kind != MsgKind::get_tag;
  meta.tag = m.tag;
  meta.has_payload = m.has_payload();
  meta.payload = m.payload;
  meta.payload_bytes = static_cast<std::uint32_t>(m.payload_bytes());
  return meta;
}

std::string TraceEvent::line() const {
  std::ostringstream out;
  out << seq << ' ' << time << ' ' << to_string(kind) << ' ' << node.str() << ' ' << op;
  switch (kind) {
    case EventKind::invoke:
      out << ' ' << to_string(op_kind) << ' ' << (value_hex.empty() ? "-" : value_hex);
      break;
    case EventKind::respond:
      out << ' ' << to_string(op_kind) << ' ' << (value_hex.empty() ? "-" : value_hex) << ' '
          << (tag ? tag->str() : "-");
      break;
    case EventKind::abort_read:
      out << ' ' << to_string(op_kind);
      break;
    case EventKind::crash:
      break;
    case EventKind::send:
    case EventKind::deliver: {
      const MsgMeta& m = *msg;
      out << ' ' << to_string(m.kind) << ' ' << m.from.str() << ' ' << m.to.str() << ' '
          << to_string(m.phase) << ' ' << m.round << ' ' << (m.has_tag ? m.tag.str() : "-") << ' ';
      if (m.has_payload)
        out << to_string(m.payload) << ':' << m.payload_bytes;
      else
        out << '-';
      if (kind == EventKind::deliver) {
        if (stored)
          out << ' ' << stored->tag.str() << ':' << to_string(stored->kind) << ':' << stored->bytes;
        else
          out << " -";
      }
      break;
    }
  }
  return out.str();
}

TraceEvent TraceEvent::parse(const std::string& line) {
  std::vector<std::string> tok = split(line);
  if (tok.size() < 5) throw std::invalid_argument("short trace line: " + line);
  TraceEvent e;
  e.seq = std::stoull(tok[0]);
  e.time = std::stoull(tok[1]);
  e.kind = event_kind_from_string(tok[2]);
  e.node = NodeId::parse(tok[3]);
  e.op = std::stoull(tok[4]);
  auto need = [&](std::size_t n) {
    if (tok.size() < n) throw std::invalid_argument("truncated trace line: " + line);
  };
  switch (e.kind) {
    case EventKind::invoke:
      need(7);
      e.op_kind = op_kind_from_string(tok[5]);
      if (tok[6] != "-") e.value_hex = tok[6];
      break;
    case EventKind::respond:
      need(8);
      e.op_kind = op_kind_from_string(tok[5]);
      if (tok[6] != "-") e.value_hex = tok[6];
      if (tok[7] != "-") e.tag = Tag::parse(tok[7]);
      break;
    case EventKind::abort_read:
      need(6);
      e.op_kind = op_kind_from_string(tok[5]);
      break;
    case EventKind::crash:
      break;
    case EventKind::send:
    case EventKind::deliver: {
      need(e.kind == EventKind::send ? 12u : 13u);
      MsgMeta m;
      m.kind = msg_kind_from_string(tok[5]);
      m.from = NodeId::parse(tok[6]);
      m.to = NodeId::parse(tok[7]);
      m.phase = phase_from_string(tok[8]);
      m.round = static_cast<std::uint32_t>(std::stoul(tok[9]));
      if (tok[10] != "-") {
        m.has_tag = true;
        m.tag = Tag::parse(tok[10]);
      }
      if (tok[11] != "-") {
        std::size_t colon = tok[11].find(':');
        if (colon == std::string::npos) throw std::invalid_argument("bad payload field: " + tok[11]);
        m.has_payload = true;
        m.payload = payload_kind_from_string(tok[11].substr(0, colon));
        m.payload_bytes = static_cast<std::uint32_t>(std::stoul(tok[11].substr(colon + 1)));
      }
      e.msg = m;
      if (e.kind == EventKind::deliver && tok[12] != "-") {
        std::size_t a = tok[12].find(':');
        std::size_t b = tok[12].rfind(':');
        if (a == std::string::npos || b == a) throw std::invalid_argument("bad stored field: " + tok[12]);
        StoredMeta s;
        s.tag = Tag::parse(tok[12].substr(0, a));
        s.kind = payload_kind_from_string(tok[12].substr(a + 1, b - a - 1));
        s.bytes = static_cast<std::uint32_t>(std::stoul(tok[12].substr(b + 1)));
        e.stored = s;
      }
      break;
    }
  }
  return e;
}

std::string TraceHeader::line() const {
  std::ostringstream out;
  out << "# semu-trace v1 alg=" << algorithm << " read=" << read_mode << " n=" << n << " f=" << f
      << " nu=" << nu << " k=" << k << " vbytes=" << value_bytes << " writers=" << writers
      << " readers=" << readers << " cap=" << concurrency_cap << " seed=" << seed
      << " trunc=" << (truncated ? 1 : 0);
  return out.str();
}

TraceHeader TraceHeader::parse(const std::string& line) {
  std::vector<std::string> tok = split(line);
  if (tok.size() < 3 || tok[0] != "#" || tok[1] != "semu-trace" || tok[2] != "v1")
    throw std::invalid_argument("bad trace header: " + line);
  TraceHeader h;
  for (std::size_t i = 3; i < tok.size(); ++i) {
    std::size_t eq = tok[i].find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad header field: " + tok[i]);
    std::string key = tok[i].substr(0, eq);
    std::string val = tok[i].substr(eq + 1);
    if (key == "alg") h.algorithm = val;
    else if (key == "read") h.read_mode = val;
    else if (key == "n") h.n = std::stoi(val);
    else if (key == "f") h.f = std::stoi(val);
    else if (key == "nu") h.nu = std::stoi(val);
    else if (key == "k") h.k = std::stoi(val);
    else if (key == "vbytes") h.value_bytes = std::stoi(val);
    else if (key == "writers") h.writers = std::stoi(val);
    else if (key == "readers") h.readers = std::stoi(val);
    else if (key == "cap") h.concurrency_cap = std::stoi(val);
    else if (key == "seed") h.seed = std::stoull(val);
    else if (key == "trunc") h.truncated = val == "1";
    else throw std::invalid_argument("unknown header field: " + key);
  }
  return h;
}

std::string Trace::to_text() const {
  std::ostringstream out;
  save(out);
  return out.str();
}

void Trace::save(std::ostream& out) const {
  out << header.line() << '\n';
  for (const TraceEvent& e : events) out << e.line() << '\n';
}

Trace Trace::load(std::istream& in) {
  Trace t;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty trace");
  t.header = TraceHeader::parse(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.events.push_back(TraceEvent::parse(line));
  }
  return t;
}

Trace Trace::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  return load(in);
}

void Trace::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  save(out);
}

}  // namespace semu
