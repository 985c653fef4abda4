// Event-driven state machines for servers and clients: the single-writer
// algorithm, the multi-writer algorithm with pre-write/finalize phases, its
// bounded-concurrency variant, the finite-write-termination read loop, and a
// replication (ABD) baseline. Every machine is a deterministic step function
// (state, delivered message) -> (state, emitted messages, optional response);
// the simulator owns all machines and serializes their steps.
#pragma once

#include <memory>
#include <optional>
#include <span>

#include "semu/codec.hpp"
#include "semu/message.hpp"
#include "semu/trace.hpp"

namespace semu {

enum class Algorithm : std::uint8_t { alg1, alg2, alg2a, abd };
enum class ReadMode : std::uint8_t { abort_on_miss, fw };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);
const char* to_string(ReadMode m);
ReadMode read_mode_from_string(const std::string& s);

// Single-writer algorithms use plain integer tags; multi-writer ones use
// (integer, client-id) pairs.
inline TagKind tag_kind_of(Algorithm a) {
  return a == Algorithm::alg2 || a == Algorithm::alg2a ? TagKind::multi : TagKind::single;
}

struct OpResponse {
  OpKind kind = OpKind::write;
  std::optional<Value> value;  // present for reads
  Tag tag;
};

struct StepResult {
  std::vector<Message> out;
  std::optional<OpResponse> response;
  bool aborted = false;  // abort-style read gave up; operation stays incomplete
};

// One (server, tag, element) row a reader holds.
struct ReadResponse {
  int server = 0;
  Tag tag;
  PayloadKind kind = PayloadKind::coded;
  Value value;        // kind == replica
  CodedSymbol symbol; // kind == coded
};

ReadResponse row_from_get_resp(const Message& m);

// Tags whose value is reconstructible from the rows: a full replica, or at
// least k coded symbols with distinct indices. Expects at most one row per
// (server, kind).
std::vector<Tag> decodable_tags(std::span<const ReadResponse> rows, int k);

// The read rule of Algorithms 1/2/2-A: the largest decodable tag t such that
// (i) t appears in at least f+1 responses, or (ii) at most nu distinct tags
// are strictly higher than t. Empty when no tag qualifies (the read aborts).
std::optional<Tag> select_read_tag(std::span<const ReadResponse> rows, int k, int f, int nu);

// Rebuilds the value with tag t from the rows: a replica if present,
// otherwise any k coded symbols.
Value recover_value(std::span<const ReadResponse> rows, const Tag& t, const Codec& codec,
                    std::size_t value_size);

// One selection of pooled responses found by the FW read search.
struct FwSelection {
  Tag tag;
  std::vector<ReadResponse> rows;
};

// Searches the response pool for a selection of >= quorum rows (at most one
// per server) containing a decodable tag t with (i) >= f+1 rows bearing t,
// (ii) at most nu distinct tags above t, or (iii) t >= gamma. Tags are tried
// in descending order; the fill minimizing new higher tags is searched
// exactly with branch-and-bound.
std::optional<FwSelection> fw_search(std::span<const ReadResponse> pool, const Tag& gamma,
                                     int quorum, int k, int f, int nu);

class ServerMachine {
 public:
  ServerMachine(Algorithm alg, const SystemParams& params, const Codec& codec, int index);

  StepResult on_deliver(const Message& m);
  const StoredElement& stored() const { return stored_; }
  int index() const { return index_; }

 private:
  Algorithm alg_;
  const Codec* codec_;
  int index_;
  StoredElement stored_;
};

class ClientMachine {
 public:
  virtual ~ClientMachine() = default;
  // Starts an operation; the caller supplies the correlation token and, for
  // writes, the value. Clients are well-formed: invoking while busy is a
  // programming error.
  virtual StepResult invoke(OpKind kind, std::optional<Value> v, std::uint64_t token) = 0;
  virtual StepResult on_deliver(const Message& m) = 0;
  virtual bool busy() const = 0;
  // Read iterations used by the last completed operation (FW readers > 1).
  virtual int iterations() const { return 1; }
};

std::unique_ptr<ClientMachine> make_writer(Algorithm alg, const SystemParams& params,
                                           const Codec& codec, int client_index,
                                           bool finalize_markers);
std::unique_ptr<ClientMachine> make_reader(Algorithm alg, ReadMode mode,
                                           const SystemParams& params, const Codec& codec,
                                           int client_index, bool finalize_markers);

}  // namespace semu
