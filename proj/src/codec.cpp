#include "semu/codec.hpp"

#include <array>
#include <stdexcept>

namespace semu {

namespace gf {

// GF(2^8) with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d);
// 2 generates the multiplicative group.
struct Tables {
  std::array<std::uint8_t, 256> log{};
  std::array<std::uint8_t, 512> exp{};
  Tables() {
    int x = 1;
    for (int i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100) x ^= 0x11d;
    }
    for (int i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

inline std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  if (a == 0 || b == 0) return 0;
  const Tables& t = tables();
  return t.exp[t.log[a] + t.log[b]];
}

inline std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw std::domain_error("gf inverse of zero");
  const Tables& t = tables();
  return t.exp[255 - t.log[a]];
}

inline std::uint8_t pow(std::uint8_t a, int e) {
  std::uint8_t r = 1;
  for (int i = 0; i < e; ++i) r = mul(r, a);
  return r;
}

}  // namespace gf

Codec::Codec(int n, int k) : n_(n), k_(k) {
  if (k < 1 || n < k) throw std::invalid_argument("codec requires 1 <= k <= n");
  if (n > 255) throw std::invalid_argument("codec supports at most 255 symbols");
  // Row i is (x_i^0, x_i^1, ..., x_i^{k-1}) with x_i = i; distinct evaluation
  // points make every k-row submatrix a nonsingular Vandermonde matrix.
  gen_.resize(static_cast<std::size_t>(n) * k);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < k; ++c)
      gen_[static_cast<std::size_t>(i) * k + c] = gf::pow(static_cast<std::uint8_t>(i), c);
}

std::vector<CodedSymbol> Codec::encode(const Value& v) const {
  std::vector<CodedSymbol> out(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) out[static_cast<std::size_t>(i)] = encode_one(v, i + 1);
  return out;
}

CodedSymbol Codec::encode_one(const Value& v, int index) const {
  if (index < 1 || index > n_) throw std::invalid_argument("symbol index out of range");
  std::size_t shard = shard_bytes(v.bytes.size());
  CodedSymbol sym;
  sym.index = index;
  sym.bytes.assign(shard, 0);
  const std::uint8_t* row = &gen_[static_cast<std::size_t>(index - 1) * k_];
  for (int c = 0; c < k_; ++c) {
    std::uint8_t coef = row[c];
    if (coef == 0) continue;
    std::size_t base = static_cast<std::size_t>(c) * shard;
    for (std::size_t j = 0; j < shard; ++j) {
      std::size_t pos = base + j;
      std::uint8_t d = pos < v.bytes.size() ? v.bytes[pos] : 0;
      sym.bytes[j] = static_cast<std::uint8_t>(sym.bytes[j] ^ gf::mul(coef, d));
    }
  }
  return sym;
}

Value Codec::decode(std::span<const CodedSymbol> symbols, std::size_t value_size) const {
  // Collect the first k symbols with distinct indices.
  std::vector<const CodedSymbol*> picked;
  for (const CodedSymbol& s : symbols) {
    if (s.index < 1 || s.index > n_) throw std::invalid_argument("symbol index out of range");
    bool dup = false;
    for (const CodedSymbol* p : picked) dup = dup || p->index == s.index;
    if (!dup) picked.push_back(&s);
    if (static_cast<int>(picked.size()) == k_) break;
  }
  if (static_cast<int>(picked.size()) < k_)
    throw std::invalid_argument("insufficient symbols");

  std::size_t shard = shard_bytes(value_size);
  for (const CodedSymbol* p : picked)
    if (p->bytes.size() != shard)
      throw std::invalid_argument("symbol length mismatch");

  // Solve M * d = y where M is the k x k submatrix of the generator for the
  // picked indices, by Gauss-Jordan elimination over GF(2^8).
  int k = k_;
  std::vector<std::uint8_t> m(static_cast<std::size_t>(k) * k);
  std::vector<std::vector<std::uint8_t>> rhs(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    const std::uint8_t* row = &gen_[static_cast<std::size_t>(picked[r]->index - 1) * k];
    for (int c = 0; c < k; ++c) m[static_cast<std::size_t>(r) * k + c] = row[c];
    rhs[static_cast<std::size_t>(r)] = picked[r]->bytes;
  }
  for (int col = 0; col < k; ++col) {
    int pivot = -1;
    for (int r = col; r < k; ++r)
      if (m[static_cast<std::size_t>(r) * k + col] != 0) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw std::runtime_error("singular decode matrix");
    if (pivot != col) {
      for (int c = 0; c < k; ++c)
        std::swap(m[static_cast<std::size_t>(pivot) * k + c], m[static_cast<std::size_t>(col) * k + c]);
      std::swap(rhs[static_cast<std::size_t>(pivot)], rhs[static_cast<std::size_t>(col)]);
    }
    std::uint8_t piv_inv = gf::inv(m[static_cast<std::size_t>(col) * k + col]);
    for (int c = 0; c < k; ++c)
      m[static_cast<std::size_t>(col) * k + c] = gf::mul(m[static_cast<std::size_t>(col) * k + c], piv_inv);
    for (std::uint8_t& b : rhs[static_cast<std::size_t>(col)]) b = gf::mul(b, piv_inv);
    for (int r = 0; r < k; ++r) {
      if (r == col) continue;
      std::uint8_t factor = m[static_cast<std::size_t>(r) * k + col];
      if (factor == 0) continue;
      for (int c = 0; c < k; ++c)
        m[static_cast<std::size_t>(r) * k + c] = static_cast<std::uint8_t>(
            m[static_cast<std::size_t>(r) * k + c] ^ gf::mul(factor, m[static_cast<std::size_t>(col) * k + c]));
      for (std::size_t j = 0; j < shard; ++j)
        rhs[static_cast<std::size_t>(r)][j] = static_cast<std::uint8_t>(
            rhs[static_cast<std::size_t>(r)][j] ^ gf::mul(factor, rhs[static_cast<std::size_t>(col)][j]));
    }
  }

  Value v;
  v.bytes.reserve(value_size);
  for (int c = 0; c < k && v.bytes.size() < value_size; ++c)
    for (std::size_t j = 0; j < shard && v.bytes.size() < value_size; ++j)
      v.bytes.push_back(rhs[static_cast<std::size_t>(c)][j]);
  return v;
}

}  // namespace semu
