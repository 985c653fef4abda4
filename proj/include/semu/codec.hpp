// (n, k) maximum distance separable erasure code over GF(2^8) with a
// Vandermonde generator: any k of the n coded symbols reconstruct the value.
// k = 1 degenerates to plain replication.
#pragma once

#include <span>

#include "semu/core.hpp"

namespace semu {

class Codec {
 public:
  Codec(int n, int k);

  int n() const { return n_; }
  int k() const { return k_; }

  // Produces n symbols; symbol i carries server index i (1-based). The value
  // is padded with zeros to a multiple of k bytes before encoding.
  std::vector<CodedSymbol> encode(const Value& v) const;

  // The single symbol for one server index; bit-identical to encode(v)[index-1].
  CodedSymbol encode_one(const Value& v, int index) const;

  // Reconstructs the value from any k symbols with distinct indices.
  // value_size is the unpadded length in bytes; padding is stripped.
  // Throws std::invalid_argument("insufficient symbols") when fewer than k
  // distinct indices are supplied. Symbols from mixed source values are not
  // detected; callers must group by tag first.
  Value decode(std::span<const CodedSymbol> symbols, std::size_t value_size) const;

  std::size_t shard_bytes(std::size_t value_size) const {
    return (value_size + k_ - 1) / k_;
  }

 private:
  int n_;
  int k_;
  std::vector<std::uint8_t> gen_;  // n x k generator matrix, row-major
};

}  // namespace semu
