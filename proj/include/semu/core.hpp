// Core domain types shared by every module: system parameters, tags,
// values, coded symbols and the element a server stores.
#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

namespace semu {

// Client identifiers. 0 is reserved: it marks the distinguished initial tag
// and never belongs to a real client. The numeric order of the ids is the
// predefined total order used to break tag ties.
using ClientId = std::uint32_t;

// Coding parameter k = ceil((N - 2f) / nu).
// Requires f <= (N-1)/2 (and hence N - 2f >= 1); throws std::invalid_argument
// on a model violation.
int compute_k(int n_servers, int max_failures, int liveness);

// Reduced node count Ntilde = (k-1)*nu + 2f + 1 <= N. Keeps the coding
// parameter unchanged and makes k = 1 + (Ntilde - (2f+1)) / nu an exact
// integer identity.
int reduce_nodes(int n_servers, int max_failures, int liveness);

enum class TagKind : std::uint8_t { single, multi };

// Version identifier: a plain counter in the single-writer setting, a
// (counter, client-id) pair ordered lexicographically with multiple writers.
struct Tag {
  TagKind kind = TagKind::single;
  std::uint64_t z = 0;
  ClientId id = 0;

  static Tag initial(TagKind kind) { return Tag{kind, 0, 0}; }
  static Tag single(std::uint64_t z) { return Tag{TagKind::single, z, 0}; }
  static Tag multi(std::uint64_t z, ClientId id) {
    return Tag{TagKind::multi, z, id};
  }

  bool is_initial() const { return z == 0 && id == 0; }
  std::string str() const;
  static Tag parse(const std::string& text);
};

// Strict lexicographic order; comparing tags of different kinds is a
// programming error.
inline bool tag_less(const Tag& a, const Tag& b) {
  assert(a.kind == b.kind && "mixed-variant tag comparison");
  if (a.z != b.z) return a.z < b.z;
  return a.id < b.id;
}

inline bool operator==(const Tag& a, const Tag& b) {
  return a.kind == b.kind && a.z == b.z && a.id == b.id;
}
inline bool operator!=(const Tag& a, const Tag& b) { return !(a == b); }
inline bool operator<(const Tag& a, const Tag& b) { return tag_less(a, b); }
inline bool operator>(const Tag& a, const Tag& b) { return tag_less(b, a); }
inline bool operator<=(const Tag& a, const Tag& b) { return !tag_less(b, a); }
inline bool operator>=(const Tag& a, const Tag& b) { return !tag_less(a, b); }

// An opaque byte string. One value is the unit of all storage and
// communication cost accounting.
struct Value {
  std::vector<std::uint8_t> bytes;

  static Value zeros(std::size_t n) { return Value{std::vector<std::uint8_t>(n, 0)}; }
  static Value from_hex(const std::string& hex);
  std::string hex() const;
};

inline bool operator==(const Value& a, const Value& b) { return a.bytes == b.bytes; }
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }

// One erasure-coded symbol; index is the server index in 1..N it was
// produced for.
struct CodedSymbol {
  int index = 0;
  std::vector<std::uint8_t> bytes;
};

inline bool operator==(const CodedSymbol& a, const CodedSymbol& b) {
  return a.index == b.index && a.bytes == b.bytes;
}

enum class PayloadKind : std::uint8_t { replica, coded };

const char* to_string(PayloadKind k);
PayloadKind payload_kind_from_string(const std::string& s);

// What a server holds: exactly one tag with either a full replica or one
// coded symbol; updates happen in place, there is no history.
struct StoredElement {
  Tag tag;
  PayloadKind kind = PayloadKind::coded;
  Value replica;       // valid when kind == replica
  CodedSymbol symbol;  // valid when kind == coded

  static StoredElement make_replica(Tag t, Value v) {
    StoredElement e;
    e.tag = t;
    e.kind = PayloadKind::replica;
    e.replica = std::move(v);
    return e;
  }
  static StoredElement make_coded(Tag t, CodedSymbol s) {
    StoredElement e;
    e.tag = t;
    e.kind = PayloadKind::coded;
    e.symbol = std::move(s);
    return e;
  }

  std::size_t payload_bytes() const {
    return kind == PayloadKind::replica ? replica.bytes.size() : symbol.bytes.size();
  }
};

// Derived system configuration. Node reduction is applied at construction,
// so n_servers is already the reduced count and every downstream module sees
// only the reduced system.
struct SystemParams {
  int n_servers = 0;
  int max_failures = 0;
  int liveness = 1;
  int k = 1;
  // Value size after rounding the requested size up to a multiple of 8*k
  // bits, so a coded symbol is a whole number of bytes and exactly 1/k unit.
  int value_bytes = 0;
  int requested_value_bits = 0;

  static SystemParams make(int n, int f, int nu, int value_size_bits);
  // The ABD baseline runs on 2f+1 servers with k = 1.
  static SystemParams make_abd(int f, int value_size_bits);

  int quorum() const { return n_servers - max_failures; }
  int symbol_bytes() const { return value_bytes / k; }
  Value default_value() const { return Value::zeros(static_cast<std::size_t>(value_bytes)); }
};

}  // namespace semu
