#include <doctest.h>

#include <random>
#include <sstream>

#include "semu/trace.hpp"

using namespace semu;

namespace {

TraceEvent random_event(std::mt19937_64& rng, std::uint64_t seq) {
  TraceEvent e;
  e.seq = e.time = seq;
  e.kind = static_cast<EventKind>(rng() % 6);
  bool server = rng() % 2;
  e.node = server ? NodeId::server(1 + static_cast<int>(rng() % 9))
                  : NodeId::client(1 + static_cast<int>(rng() % 4));
  e.op = rng() % 100;
  switch (e.kind) {
    case EventKind::invoke:
      e.node = NodeId::client(1 + static_cast<int>(rng() % 4));
      e.op_kind = rng() % 2 ? OpKind::write : OpKind::read;
      if (e.op_kind == OpKind::write) e.value_hex = "00ab1232";
      break;
    case EventKind::respond:
      e.node = NodeId::client(1 + static_cast<int>(rng() % 4));
      e.op_kind = rng() % 2 ? OpKind::write : OpKind::read;
      if (e.op_kind == OpKind::read) e.value_hex = "deadbeef";
      e.tag = Tag::multi(rng() % 9, static_cast<ClientId>(rng() % 4));
      break;
    case EventKind::abort_read:
      e.node = NodeId::client(1 + static_cast<int>(rng() % 4));
      e.op_kind = OpKind::read;
      break;
    case EventKind::crash:
      e.op = 0;
      break;
    case EventKind::send:
    case EventKind::deliver: {
      MsgMeta m;
      m.kind = static_cast<MsgKind>(rng() % 8);
      m.from = NodeId::client(1);
      m.to = e.node;
      m.phase = static_cast<Phase>(rng() % 9);
      m.round = static_cast<std::uint32_t>(rng() % 4);
      m.has_tag = m.kind != MsgKind::get && m.kind != MsgKind::get_tag;
      if (m.has_tag) m.tag = Tag::single(rng() % 20);
      m.has_payload = m.kind == MsgKind::put_replica || m.kind == MsgKind::put_coded ||
                      m.kind == MsgKind::get_resp;
      if (m.has_payload) {
        m.payload = rng() % 2 ? PayloadKind::replica : PayloadKind::coded;
        m.payload_bytes = static_cast<std::uint32_t>(rng() % 64);
      }
      e.msg = m;
      if (e.kind == EventKind::deliver && e.node.is_server() && rng() % 2)
        e.stored = StoredMeta{Tag::single(rng() % 20),
                              rng() % 2 ? PayloadKind::replica : PayloadKind::coded,
                              static_cast<std::uint32_t>(rng() % 64)};
      break;
    }
  }
  return e;
}

}  // namespace

TEST_CASE("event lines round-trip through text") {
  std::mt19937_64 rng(31337);
  for (std::uint64_t i = 0; i < 500; ++i) {
    TraceEvent e = random_event(rng, i);
    TraceEvent back = TraceEvent::parse(e.line());
    CHECK(back == e);
  }
}

TEST_CASE("header round-trips") {
  TraceHeader h;
  h.algorithm = "alg2";
  h.read_mode = "fw";
  h.n = 9;
  h.f = 2;
  h.nu = 2;
  h.k = 3;
  h.value_bytes = 6;
  h.writers = 2;
  h.readers = 3;
  h.concurrency_cap = 1;
  h.seed = 987654321;
  h.truncated = true;
  CHECK(TraceHeader::parse(h.line()) == h);
}

TEST_CASE("trace save/load preserves everything") {
  std::mt19937_64 rng(55);
  Trace t;
  t.header.algorithm = "alg1";
  t.header.n = 7;
  t.header.f = 1;
  t.header.nu = 2;
  t.header.k = 3;
  t.header.value_bytes = 6;
  t.header.seed = 4;
  for (std::uint64_t i = 0; i < 100; ++i) t.events.push_back(random_event(rng, i));
  std::stringstream buf;
  t.save(buf);
  Trace back = Trace::load(buf);
  CHECK(back.header == t.header);
  REQUIRE(back.events.size() == t.events.size());
  for (std::size_t i = 0; i < t.events.size(); ++i) CHECK(back.events[i] == t.events[i]);
  CHECK(back.to_text() == t.to_text());
}

TEST_CASE("malformed lines are rejected") {
  CHECK_THROWS_AS(TraceEvent::parse("1 1 bogus s1 0"), std::invalid_argument);
  CHECK_THROWS_AS(TraceEvent::parse("1 1 invoke"), std::invalid_argument);
  CHECK_THROWS_AS(TraceHeader::parse("not a header"), std::invalid_argument);
  CHECK_THROWS_AS(TraceHeader::parse("# semu-trace v1 bogus=1"), std::invalid_argument);
}
