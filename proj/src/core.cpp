#include "semu/core.hpp"

#include <charconv>
#include <stdexcept>

namespace semu {

namespace {

void validate_model(int n, int f, int nu) {
  if (n < 1) throw std::invalid_argument("n_servers must be positive");
  if (f < 0) throw std::invalid_argument("max_failures must be non-negative");
  if (nu < 1) throw std::invalid_argument("liveness parameter must be positive");
  // f <= (N-1)/2, equivalently 2f + 1 <= N.
  if (2 * f + 1 > n)
    throw std::invalid_argument("model violation: requires f <= (N-1)/2");
}

}  // namespace

int compute_k(int n_servers, int max_failures, int liveness) {
  validate_model(n_servers, max_failures, liveness);
  int num = n_servers - 2 * max_failures;
  return (num + liveness - 1) / liveness;
}

int reduce_nodes(int n_servers, int max_failures, int liveness) {
  int k = compute_k(n_servers, max_failures, liveness);
  return (k - 1) * liveness + 2 * max_failures + 1;
}

std::string Tag::str() const {
  if (kind == TagKind::single) return "s" + std::to_string(z);
  return "m" + std::to_string(z) + ":" + std::to_string(id);
}

Tag Tag::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty tag");
  Tag t;
  std::size_t colon = text.find(':');
  if (text[0] == 's' && colon == std::string::npos) {
    t.kind = TagKind::single;
    t.z = std::stoull(text.substr(1));
    t.id = 0;
    return t;
  }
  if (text[0] == 'm' && colon != std::string::npos) {
    t.kind = TagKind::multi;
    t.z = std::stoull(text.substr(1, colon - 1));
    t.id = static_cast<ClientId>(std::stoul(text.substr(colon + 1)));
    return t;
  }
  throw std::invalid_argument("bad tag: " + text);
}

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw std::invalid_argument("bad hex digit");
}
}  // namespace

Value Value::from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
  Value v;
  v.bytes.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    v.bytes.push_back(static_cast<std::uint8_t>(hex_nibble(hex[i]) * 16 + hex_nibble(hex[i + 1])));
  return v;
}

std::string Value::hex() const {
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

const char* to_string(PayloadKind k) {
  return k == PayloadKind::replica ? "replica" : "coded";
}

PayloadKind payload_kind_from_string(const std::string& s) {
  if (s == "replica") return PayloadKind::replica;
  if (s == "coded") return PayloadKind::coded;
  throw std::invalid_argument("bad payload kind: " + s);
}

SystemParams SystemParams::make(int n, int f, int nu, int value_size_bits) {
  if (value_size_bits < 1) throw std::invalid_argument("value size must be positive");
  SystemParams p;
  p.k = compute_k(n, f, nu);
  p.n_servers = reduce_nodes(n, f, nu);
  p.max_failures = f;
  p.liveness = nu;
  p.requested_value_bits = value_size_bits;
  // Round up to a multiple of 8k bits so a symbol is a whole byte count.
  int chunk = 8 * p.k;
  int bits = (value_size_bits + chunk - 1) / chunk * chunk;
  p.value_bytes = bits / 8;
  return p;
}

SystemParams SystemParams::make_abd(int f, int value_size_bits) {
  // nu = 1 with N = 2f+1 yields k = 1 and no reduction.
  return make(2 * f + 1, f, 1, value_size_bits);
}

}  // namespace semu
