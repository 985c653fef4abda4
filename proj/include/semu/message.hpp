// The closed set of protocol messages exchanged between clients and servers,
// with the canonical byte sizes used for communication-cost accounting.
#pragma once

#include <compare>

#include "semu/core.hpp"

namespace semu {

struct NodeId {
  enum class Role : std::uint8_t { server, client };
  Role role = Role::server;
  int index = 0;  // servers 1..N, clients 1..C

  static NodeId server(int i) { return NodeId{Role::server, i}; }
  static NodeId client(int i) { return NodeId{Role::client, i}; }
  bool is_server() const { return role == Role::server; }
  std::string str() const {
    return (is_server() ? "s" : "c") + std::to_string(index);
  }
  static NodeId parse(const std::string& text);
  auto operator<=>(const NodeId&) const = default;
};

enum class MsgKind : std::uint8_t {
  get_tag,
  get_tag_resp,
  get,
  get_resp,
  put_replica,
  put_coded,
  finalize_mark,
  ack,
};

const char* to_string(MsgKind k);
MsgKind msg_kind_from_string(const std::string& s);

// Protocol phase a message belongs to. Requests carry it, replies echo it,
// and clients match replies on (op, phase, round) so stragglers from an
// earlier phase or operation are never miscounted.
enum class Phase : std::uint8_t {
  none,
  query,        // get_tag wave of a write
  pre_write,    // replica puts of an Algorithm-2 write
  finalize,     // coded puts / markers of an Algorithm-2 write
  put,          // single put wave (Algorithm 1 / 2-A / ABD writes)
  get,          // read query wave
  wb_put,       // read write_back, single wave
  wb_pre_write, // read write_back, replica wave
  wb_finalize,  // read write_back, coded/marker wave
};

const char* to_string(Phase p);
Phase phase_from_string(const std::string& s);

struct Message {
  MsgKind kind = MsgKind::get;
  NodeId from;
  NodeId to;
  std::uint64_t op = 0;     // operation correlation token
  Phase phase = Phase::none;
  std::uint32_t round = 0;  // read iteration (FW mode), 0 otherwise
  Tag tag;                  // all kinds except get / get_tag
  PayloadKind payload = PayloadKind::coded;
  Value value;              // put_replica, get_resp carrying a replica
  CodedSymbol symbol;       // put_coded, get_resp carrying a symbol

  bool has_payload() const {
    return kind == MsgKind::put_replica || kind == MsgKind::put_coded ||
           kind == MsgKind::get_resp;
  }
  // Bytes of the data value carried; tags and other metadata count zero.
  std::size_t payload_bytes() const {
    if (!has_payload()) return 0;
    return payload == PayloadKind::replica ? value.bytes.size() : symbol.bytes.size();
  }
  // Canonical serialized size: fixed-width header plus length-prefixed payload.
  std::size_t wire_bytes() const {
    return 1 + 5 + 5 + 8 + 1 + 4 + 13 + 1 + (has_payload() ? 4 + payload_bytes() : 0);
  }
};

}  // namespace semu
