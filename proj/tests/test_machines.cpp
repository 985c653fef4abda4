#include <doctest.h>

#include <map>
#include <set>
#include <stdexcept>

#include "semu/machines.hpp"

using namespace semu;

namespace {

const SystemParams kP712 = SystemParams::make(7, 1, 2, 48);  // k = 3, quorum 6

Message ack_for(const Message& put, int server) {
  Message m;
  m.kind = MsgKind::ack;
  m.from = NodeId::server(server);
  m.to = put.from;
  m.op = put.op;
  m.phase = put.phase;
  m.round = put.round;
  m.tag = put.tag;
  return m;
}

Message get_resp(int server, const Message& get, Tag tag, const CodedSymbol& sym) {
  Message m;
  m.kind = MsgKind::get_resp;
  m.from = NodeId::server(server);
  m.to = get.from;
  m.op = get.op;
  m.phase = get.phase;
  m.round = get.round;
  m.tag = tag;
  m.payload = PayloadKind::coded;
  m.symbol = sym;
  return m;
}

Message get_resp_replica(int server, const Message& get, Tag tag, const Value& v) {
  Message m;
  m.kind = MsgKind::get_resp;
  m.from = NodeId::server(server);
  m.to = get.from;
  m.op = get.op;
  m.phase = get.phase;
  m.round = get.round;
  m.tag = tag;
  m.payload = PayloadKind::replica;
  m.value = v;
  return m;
}

Message get_tag_resp(int server, const Message& req, Tag tag) {
  Message m;
  m.kind = MsgKind::get_tag_resp;
  m.from = NodeId::server(server);
  m.to = req.from;
  m.op = req.op;
  m.phase = req.phase;
  m.round = req.round;
  m.tag = tag;
  return m;
}

Value test_value(const SystemParams& p, std::uint8_t fill) {
  Value v;
  v.bytes.assign(static_cast<std::size_t>(p.value_bytes), fill);
  return v;
}

// Feed acks from the targets of `puts`, up to `count` distinct servers.
StepResult ack_from(ClientMachine& m, const std::vector<Message>& puts, int count) {
  StepResult last;
  std::set<int> done;
  for (const Message& put : puts) {
    int s = put.to.index;
    if (static_cast<int>(done.size()) >= count) break;
    if (!done.insert(s).second) continue;
    last = m.on_deliver(ack_for(put, s));
  }
  return last;
}

}  // namespace

TEST_CASE("decodable_tags: replica, coded threshold, and the mix") {
  Codec codec(7, 3);
  Value v = test_value(kP712, 0x5a);
  auto syms = codec.encode(v);
  std::vector<ReadResponse> rows;
  rows.push_back({1, Tag::single(2), PayloadKind::replica, v, {}});
  CHECK(decodable_tags(rows, 3) == std::vector<Tag>{Tag::single(2)});

  rows.clear();
  for (int s = 1; s <= 3; ++s)
    rows.push_back({s, Tag::single(4), PayloadKind::coded, {}, syms[static_cast<std::size_t>(s - 1)]});
  for (int s = 4; s <= 5; ++s)
    rows.push_back({s, Tag::single(5), PayloadKind::coded, {}, syms[static_cast<std::size_t>(s - 1)]});
  CHECK(decodable_tags(rows, 3) == std::vector<Tag>{Tag::single(4)});

  rows.push_back({6, Tag::single(5), PayloadKind::replica, v, {}});
  auto tags = decodable_tags(rows, 3);
  REQUIRE(tags.size() == 2);
  CHECK(tags[0] == Tag::single(4));
  CHECK(tags[1] == Tag::single(5));
}

TEST_CASE("single-writer write: tag increments and quorum of acks") {
  Codec codec(7, 3);
  auto writer = make_writer(Algorithm::alg1, kP712, codec, 1, true);
  std::uint64_t token = 100;
  // Complete four writes so the next one carries tag 5.
  for (int i = 1; i <= 4; ++i) {
    StepResult res = writer->invoke(OpKind::write, test_value(kP712, static_cast<std::uint8_t>(i)),
                                    token++);
    REQUIRE(res.out.size() == 7);
    StepResult fin = ack_from(*writer, res.out, 6);
    REQUIRE(fin.response);
    CHECK(fin.response->tag == Tag::single(static_cast<std::uint64_t>(i)));
  }
  Value v = test_value(kP712, 0xee);
  StepResult res = writer->invoke(OpKind::write, v, token);
  REQUIRE(res.out.size() == 7);
  for (const Message& m : res.out) {
    CHECK(m.kind == MsgKind::put_coded);
    CHECK(m.tag == Tag::single(5));
    CHECK(m.symbol.index == m.to.index);
    CHECK(m.symbol == codec.encode_one(v, m.to.index));
  }
  // N-f-1 distinct acks: not done yet.
  StepResult partial = ack_from(*writer, res.out, 5);
  CHECK_FALSE(partial.response);
  CHECK(writer->busy());
  // A duplicate ack from an already-counted server does not help.
  StepResult dup = writer->on_deliver(ack_for(res.out[0], 1));
  CHECK_FALSE(dup.response);
  // The 6th distinct ack completes the write (quorum N-f = 6).
  StepResult done = writer->on_deliver(ack_for(res.out[5], 6));
  REQUIRE(done.response);
  CHECK(done.response->kind == OpKind::write);
  CHECK(done.response->tag == Tag::single(5));
  CHECK_FALSE(writer->busy());
}

TEST_CASE("single-writer read returns the value and writes it back") {
  Codec codec(7, 3);
  auto reader = make_reader(Algorithm::alg1, ReadMode::abort_on_miss, kP712, codec, 2, true);
  Value v = test_value(kP712, 0x11);
  auto syms = codec.encode(v);
  StepResult res = reader->invoke(OpKind::read, std::nullopt, 7);
  REQUIRE(res.out.size() == 7);
  const Message& get = res.out[0];
  StepResult after;
  for (int s = 1; s <= 6; ++s)
    after = reader->on_deliver(get_resp(s, get, Tag::single(3), syms[static_cast<std::size_t>(s - 1)]));
  // Write-back wave with the chosen tag.
  REQUIRE(after.out.size() == 7);
  for (const Message& m : after.out) {
    CHECK(m.kind == MsgKind::put_coded);
    CHECK(m.tag == Tag::single(3));
  }
  StepResult done = ack_from(*reader, after.out, 6);
  REQUIRE(done.response);
  CHECK(done.response->kind == OpKind::read);
  REQUIRE(done.response->value);
  CHECK(*done.response->value == v);
  CHECK(done.response->tag == Tag::single(3));
}

TEST_CASE("single-writer read rule picks tag 5 from a mixed response set") {
  // N=7, f=1, nu=2, k=3: three coded responses of tag 5, two of tag 6, one
  // of tag 7. Tag 5 is decodable and has exactly 2 higher tags <= nu.
  Codec codec(7, 3);
  Value v5 = test_value(kP712, 0x55);
  Value v6 = test_value(kP712, 0x66);
  Value v7 = test_value(kP712, 0x77);
  auto s5 = codec.encode(v5);
  auto s6 = codec.encode(v6);
  auto s7 = codec.encode(v7);

  std::vector<ReadResponse> rows;
  for (int s = 1; s <= 3; ++s)
    rows.push_back({s, Tag::single(5), PayloadKind::coded, {}, s5[static_cast<std::size_t>(s - 1)]});
  for (int s = 4; s <= 5; ++s)
    rows.push_back({s, Tag::single(6), PayloadKind::coded, {}, s6[static_cast<std::size_t>(s - 1)]});
  rows.push_back({6, Tag::single(7), PayloadKind::coded, {}, s7[5]});

  // Brute-force decodability scan over the response set as an oracle.
  std::map<Tag, std::set<int>> indices;
  for (const ReadResponse& r : rows) indices[r.tag].insert(r.symbol.index);
  std::set<Tag> oracle_T;
  for (const auto& [t, idx] : indices) {
    if (static_cast<int>(idx.size()) < 3) continue;  // not decodable
    int count = static_cast<int>(idx.size());
    int higher = 0;
    for (const auto& [u, unused] : indices)
      if (t < u) ++higher;
    if (count >= 2 || higher <= 2) oracle_T.insert(t);
  }
  REQUIRE(oracle_T == std::set<Tag>{Tag::single(5)});

  auto chosen = select_read_tag(rows, 3, 1, 2);
  REQUIRE(chosen);
  CHECK(*chosen == Tag::single(5));

  // Through the full machine: the read returns the tag-5 value.
  auto reader = make_reader(Algorithm::alg1, ReadMode::abort_on_miss, kP712, codec, 2, true);
  StepResult res = reader->invoke(OpKind::read, std::nullopt, 9);
  const Message& get = res.out[0];
  StepResult after;
  for (const ReadResponse& r : rows)
    after = reader->on_deliver(get_resp(r.server, get, r.tag, r.symbol));
  REQUIRE(after.out.size() == 7);
  StepResult done = ack_from(*reader, after.out, 6);
  REQUIRE(done.response);
  CHECK(*done.response->value == v5);
  CHECK(done.response->tag == Tag::single(5));
}

TEST_CASE("single-writer read aborts when nothing is decodable") {
  // Tags 5, 6, 7 with two coded symbols each: none reaches k = 3.
  Codec codec(7, 3);
  auto s5 = codec.encode(test_value(kP712, 0x55));
  auto s6 = codec.encode(test_value(kP712, 0x66));
  auto s7 = codec.encode(test_value(kP712, 0x77));
  auto reader = make_reader(Algorithm::alg1, ReadMode::abort_on_miss, kP712, codec, 2, true);
  StepResult res = reader->invoke(OpKind::read, std::nullopt, 10);
  const Message& get = res.out[0];
  reader->on_deliver(get_resp(1, get, Tag::single(5), s5[0]));
  reader->on_deliver(get_resp(2, get, Tag::single(5), s5[1]));
  reader->on_deliver(get_resp(3, get, Tag::single(6), s6[2]));
  reader->on_deliver(get_resp(4, get, Tag::single(6), s6[3]));
  reader->on_deliver(get_resp(5, get, Tag::single(7), s7[4]));
  StepResult last = reader->on_deliver(get_resp(6, get, Tag::single(7), s7[5]));
  CHECK(last.aborted);
  CHECK(last.out.empty());
  CHECK_FALSE(last.response);
  CHECK_FALSE(reader->busy());
}

TEST_CASE("multi-writer write walks query, pre-write, finalize") {
  Codec codec(7, 3);
  auto writer = make_writer(Algorithm::alg2, kP712, codec, 1, true);
  Value v = test_value(kP712, 0xd0);
  StepResult res = writer->invoke(OpKind::write, v, 55);
  REQUIRE(res.out.size() == 7);
  for (const Message& m : res.out) CHECK(m.kind == MsgKind::get_tag);

  // Quorum of tag responses; the largest is (7, id 3), so the new tag must
  // be (8, own id 1).
  StepResult pre;
  for (int s = 1; s <= 6; ++s)
    pre = writer->on_deliver(
        get_tag_resp(s, res.out[0], s == 2 ? Tag::multi(7, 3) : Tag::multi(1, 2)));
  REQUIRE(pre.out.size() == 5);  // k + 2f = 5 replica targets
  for (const Message& m : pre.out) {
    CHECK(m.kind == MsgKind::put_replica);
    CHECK(m.tag == Tag::multi(8, 1));
    CHECK(m.to.index <= 5);
    CHECK(m.value == v);
  }

  // k + f = 4 pre-write acks trigger finalize.
  StepResult fin = ack_from(*writer, pre.out, 4);
  REQUIRE(fin.out.size() == 7);
  int coded = 0, marks = 0;
  for (const Message& m : fin.out) {
    if (m.kind == MsgKind::put_coded) {
      ++coded;
      CHECK(m.to.index > 5);
      CHECK(m.symbol == codec.encode_one(v, m.to.index));
    } else {
      CHECK(m.kind == MsgKind::finalize_mark);
      ++marks;
      CHECK(m.to.index <= 5);
    }
    CHECK(m.tag == Tag::multi(8, 1));
  }
  CHECK(coded == 2);  // N - k - 2f
  CHECK(marks == 5);

  // Quorum of finalize acks completes the write.
  StepResult done = ack_from(*writer, fin.out, 6);
  REQUIRE(done.response);
  CHECK(done.response->tag == Tag::multi(8, 1));
}

TEST_CASE("multi-writer finalize without markers sends coded symbols everywhere") {
  Codec codec(7, 3);
  auto writer = make_writer(Algorithm::alg2, kP712, codec, 1, false);
  Value v = test_value(kP712, 0xd1);
  StepResult res = writer->invoke(OpKind::write, v, 56);
  StepResult pre;
  for (int s = 1; s <= 6; ++s)
    pre = writer->on_deliver(get_tag_resp(s, res.out[0], Tag::initial(TagKind::multi)));
  StepResult fin = ack_from(*writer, pre.out, 4);
  REQUIRE(fin.out.size() == 7);
  for (const Message& m : fin.out) CHECK(m.kind == MsgKind::put_coded);
}

TEST_CASE("multi-writer server rules") {
  Codec codec(7, 3);
  ServerMachine server(Algorithm::alg2, kP712, codec, 3);
  Value v = test_value(kP712, 0xaa);
  Tag t5 = Tag::multi(5, 1);

  Message put_r;
  put_r.kind = MsgKind::put_replica;
  put_r.from = NodeId::client(1);
  put_r.to = NodeId::server(3);
  put_r.op = 1;
  put_r.phase = Phase::pre_write;
  put_r.tag = t5;
  put_r.payload = PayloadKind::replica;
  put_r.value = v;
  StepResult r1 = server.on_deliver(put_r);
  REQUIRE(r1.out.size() == 1);
  CHECK(r1.out[0].kind == MsgKind::ack);
  CHECK(server.stored().tag == t5);
  CHECK(server.stored().kind == PayloadKind::replica);

  // Coded put with the same tag replaces the replica (t_new >= t).
  Message put_c = put_r;
  put_c.kind = MsgKind::put_coded;
  put_c.payload = PayloadKind::coded;
  put_c.symbol = codec.encode_one(v, 3);
  server.on_deliver(put_c);
  CHECK(server.stored().kind == PayloadKind::coded);

  // Replica put with the same tag does not go back (t_new > t required).
  server.on_deliver(put_r);
  CHECK(server.stored().kind == PayloadKind::coded);
  CHECK(server.stored().tag == t5);

  // get_tag and get echo the stored state.
  Message gt;
  gt.kind = MsgKind::get_tag;
  gt.from = NodeId::client(2);
  gt.to = NodeId::server(3);
  gt.op = 2;
  gt.phase = Phase::query;
  StepResult r2 = server.on_deliver(gt);
  REQUIRE(r2.out.size() == 1);
  CHECK(r2.out[0].kind == MsgKind::get_tag_resp);
  CHECK(r2.out[0].tag == t5);
  Message g = gt;
  g.kind = MsgKind::get;
  g.phase = Phase::get;
  StepResult r3 = server.on_deliver(g);
  REQUIRE(r3.out.size() == 1);
  CHECK(r3.out[0].kind == MsgKind::get_resp);
  CHECK(r3.out[0].payload == PayloadKind::coded);
}

TEST_CASE("finalize marker converts the replica to this server's own symbol") {
  Codec codec(7, 3);
  ServerMachine server(Algorithm::alg2, kP712, codec, 4);
  Value v = test_value(kP712, 0xbc);
  Tag t5 = Tag::multi(5, 2);
  Message put_r;
  put_r.kind = MsgKind::put_replica;
  put_r.from = NodeId::client(2);
  put_r.to = NodeId::server(4);
  put_r.op = 9;
  put_r.phase = Phase::pre_write;
  put_r.tag = t5;
  put_r.payload = PayloadKind::replica;
  put_r.value = v;
  server.on_deliver(put_r);

  Message mark;
  mark.kind = MsgKind::finalize_mark;
  mark.from = NodeId::client(2);
  mark.to = NodeId::server(4);
  mark.op = 9;
  mark.phase = Phase::finalize;
  mark.tag = t5;
  StepResult r = server.on_deliver(mark);
  REQUIRE(r.out.size() == 1);
  CHECK(r.out[0].kind == MsgKind::ack);
  CHECK(server.stored().kind == PayloadKind::coded);
  // Bit-identical to the writer-side encode.
  CHECK(server.stored().symbol == codec.encode_one(v, 4));

  // A marker that outruns its replica acks without changing state.
  ServerMachine fresh(Algorithm::alg2, kP712, codec, 5);
  Tag before = fresh.stored().tag;
  Message early = mark;
  early.to = NodeId::server(5);
  StepResult r2 = fresh.on_deliver(early);
  REQUIRE(r2.out.size() == 1);
  CHECK(r2.out[0].kind == MsgKind::ack);
  CHECK(fresh.stored().tag == before);
  CHECK(fresh.stored().kind == PayloadKind::coded);
}

TEST_CASE("single-writer server keeps its symbol for equal coded tags") {
  Codec codec(7, 3);
  ServerMachine server(Algorithm::alg1, kP712, codec, 2);
  Value v = test_value(kP712, 0x42);
  Message put;
  put.kind = MsgKind::put_coded;
  put.from = NodeId::client(1);
  put.to = NodeId::server(2);
  put.op = 3;
  put.phase = Phase::put;
  put.tag = Tag::single(4);
  put.payload = PayloadKind::coded;
  put.symbol = codec.encode_one(v, 2);
  server.on_deliver(put);
  CHECK(server.stored().tag == Tag::single(4));
  Message equal = put;
  equal.symbol = codec.encode_one(test_value(kP712, 0x43), 2);
  server.on_deliver(equal);  // same tag: the strict rule keeps the old symbol
  CHECK(server.stored().symbol == codec.encode_one(v, 2));
}

TEST_CASE("multi-writer read: write_back shape depends on what was seen") {
  Codec codec(7, 3);
  Value v = test_value(kP712, 0x99);
  auto syms = codec.encode(v);
  Tag t = Tag::multi(4, 2);

  SUBCASE("replica-only responses run pre-write then finalize") {
    auto reader = make_reader(Algorithm::alg2, ReadMode::abort_on_miss, kP712, codec, 3, true);
    StepResult res = reader->invoke(OpKind::read, std::nullopt, 70);
    const Message& get = res.out[0];
    StepResult after;
    for (int s = 1; s <= 6; ++s)
      after = reader->on_deliver(get_resp_replica(s, get, t, v));
    REQUIRE(after.out.size() == 5);
    for (const Message& m : after.out) CHECK(m.kind == MsgKind::put_replica);
    StepResult fin = ack_from(*reader, after.out, 4);
    REQUIRE(fin.out.size() == 7);
    StepResult done = ack_from(*reader, fin.out, 6);
    REQUIRE(done.response);
    CHECK(*done.response->value == v);
  }

  SUBCASE("one coded response skips the pre-write") {
    auto reader = make_reader(Algorithm::alg2, ReadMode::abort_on_miss, kP712, codec, 3, true);
    StepResult res = reader->invoke(OpKind::read, std::nullopt, 71);
    const Message& get = res.out[0];
    StepResult after;
    for (int s = 1; s <= 5; ++s)
      after = reader->on_deliver(get_resp_replica(s, get, t, v));
    after = reader->on_deliver(get_resp(6, get, t, syms[5]));
    REQUIRE(after.out.size() == 7);
    int coded = 0, marks = 0;
    for (const Message& m : after.out)
      (m.kind == MsgKind::put_coded ? coded : marks) += 1;
    CHECK(coded == 2);
    CHECK(marks == 5);
    StepResult done = ack_from(*reader, after.out, 6);
    REQUIRE(done.response);
    CHECK(*done.response->value == v);
  }

  SUBCASE("a quorum of coded responses skips the write_back entirely") {
    auto reader = make_reader(Algorithm::alg2, ReadMode::abort_on_miss, kP712, codec, 3, true);
    StepResult res = reader->invoke(OpKind::read, std::nullopt, 72);
    const Message& get = res.out[0];
    StepResult after;
    for (int s = 1; s <= 6; ++s)
      after = reader->on_deliver(get_resp(s, get, t, syms[static_cast<std::size_t>(s - 1)]));
    CHECK(after.out.empty());
    REQUIRE(after.response);
    CHECK(*after.response->value == v);
    CHECK(after.response->tag == t);
  }
}

TEST_CASE("algorithm 2-A write queries then propagates coded symbols") {
  Codec codec(7, 3);
  auto writer = make_writer(Algorithm::alg2a, kP712, codec, 2, true);
  Value v = test_value(kP712, 0x17);
  StepResult res = writer->invoke(OpKind::write, v, 80);
  REQUIRE(res.out.size() == 7);
  for (const Message& m : res.out) CHECK(m.kind == MsgKind::get_tag);
  StepResult put;
  for (int s = 1; s <= 6; ++s)
    put = writer->on_deliver(get_tag_resp(s, res.out[0], Tag::initial(TagKind::multi)));
  REQUIRE(put.out.size() == 7);
  for (const Message& m : put.out) {
    CHECK(m.kind == MsgKind::put_coded);
    CHECK(m.tag == Tag::multi(1, 2));
  }
  StepResult done = ack_from(*writer, put.out, 6);
  REQUIRE(done.response);

  // A second writer that queries after this write sees its tag and goes
  // strictly above it.
  auto writer2 = make_writer(Algorithm::alg2a, kP712, codec, 3, true);
  StepResult res2 = writer2->invoke(OpKind::write, v, 81);
  StepResult put2;
  for (int s = 1; s <= 6; ++s)
    put2 = writer2->on_deliver(get_tag_resp(s, res2.out[0], Tag::multi(1, 2)));
  REQUIRE(put2.out.size() == 7);
  CHECK(put2.out[0].tag == Tag::multi(2, 3));
  CHECK(Tag::multi(1, 2) < put2.out[0].tag);
}

TEST_CASE("ABD baseline write and read") {
  SystemParams p = SystemParams::make_abd(1, 48);  // 3 servers, k = 1
  Codec codec(p.n_servers, 1);
  auto writer = make_writer(Algorithm::abd, p, codec, 1, true);
  Value v = test_value(p, 0x21);
  StepResult res = writer->invoke(OpKind::write, v, 90);
  REQUIRE(res.out.size() == 3);
  for (const Message& m : res.out) {
    CHECK(m.kind == MsgKind::put_replica);
    CHECK(m.value == v);
  }
  StepResult done = ack_from(*writer, res.out, 2);
  REQUIRE(done.response);
  CHECK(done.response->tag == Tag::single(1));

  auto reader = make_reader(Algorithm::abd, ReadMode::abort_on_miss, p, codec, 2, true);
  StepResult rres = reader->invoke(OpKind::read, std::nullopt, 91);
  const Message& get = rres.out[0];
  StepResult after;
  after = reader->on_deliver(get_resp_replica(1, get, Tag::single(1), v));
  after = reader->on_deliver(get_resp_replica(2, get, Tag::single(0), test_value(p, 0x01)));
  // Quorum of 2: picks the max tag and writes it back.
  REQUIRE(after.out.size() == 3);
  for (const Message& m : after.out) {
    CHECK(m.kind == MsgKind::put_replica);
    CHECK(m.tag == Tag::single(1));
  }
  StepResult rdone = ack_from(*reader, after.out, 2);
  REQUIRE(rdone.response);
  CHECK(*rdone.response->value == v);
}

TEST_CASE("stale messages from earlier operations are ignored") {
  Codec codec(7, 3);
  auto writer = make_writer(Algorithm::alg1, kP712, codec, 1, true);
  Value v = test_value(kP712, 0x31);
  StepResult first = writer->invoke(OpKind::write, v, 200);
  StepResult done = ack_from(*writer, first.out, 6);
  REQUIRE(done.response);
  StepResult second = writer->invoke(OpKind::write, v, 201);
  // A straggler ack from the first operation must not count.
  StepResult stale = writer->on_deliver(ack_for(first.out[6], 7));
  CHECK_FALSE(stale.response);
  StepResult fin = ack_from(*writer, second.out, 6);
  CHECK(fin.response);
}

TEST_CASE("fw_search honors the gamma condition") {
  // N=9, f=2, nu=3, k=2: tag 7 is decodable from two symbols but fails both
  // (i) (count 2 < f+1 = 3) and (ii) (five forced distinct higher tags > nu).
  SystemParams p = SystemParams::make(9, 2, 3, 16);
  REQUIRE(p.k == 2);
  Codec codec(9, 2);
  Value v = test_value(p, 0x70);
  auto syms = codec.encode(v);
  std::vector<ReadResponse> pool;
  pool.push_back({1, Tag::single(7), PayloadKind::coded, {}, syms[0]});
  pool.push_back({2, Tag::single(7), PayloadKind::coded, {}, syms[1]});
  for (int s = 3; s <= 7; ++s)
    pool.push_back({s, Tag::single(static_cast<std::uint64_t>(s + 5)), PayloadKind::coded, {},
                    codec.encode_one(test_value(p, static_cast<std::uint8_t>(s)), s)});

  // gamma below tag 7: condition (iii) admits the selection.
  auto found = fw_search(pool, Tag::single(5), p.quorum(), p.k, p.max_failures, p.liveness);
  REQUIRE(found);
  CHECK(found->tag == Tag::single(7));
  CHECK(found->rows.size() >= static_cast<std::size_t>(p.quorum()));

  // gamma above every decodable tag: nothing qualifies.
  auto none = fw_search(pool, Tag::single(20), p.quorum(), p.k, p.max_failures, p.liveness);
  CHECK_FALSE(none);
}

TEST_CASE("fw reader pools responses across iterations") {
  Codec codec(7, 3);
  auto reader = make_reader(Algorithm::alg1, ReadMode::fw, kP712, codec, 2, true);
  Value v5 = test_value(kP712, 0x55);
  Value v6 = test_value(kP712, 0x66);
  Value v7 = test_value(kP712, 0x77);
  auto s5 = codec.encode(v5);
  auto s6 = codec.encode(v6);
  auto s7 = codec.encode(v7);

  StepResult res = reader->invoke(OpKind::read, std::nullopt, 300);
  REQUIRE(res.out.size() == 7);
  CHECK(res.out[0].round == 1);
  const Message get1 = res.out[0];
  // Iteration 1: 2+2+2 split, nothing decodable.
  reader->on_deliver(get_resp(1, get1, Tag::single(5), s5[0]));
  reader->on_deliver(get_resp(2, get1, Tag::single(5), s5[1]));
  reader->on_deliver(get_resp(3, get1, Tag::single(6), s6[2]));
  reader->on_deliver(get_resp(4, get1, Tag::single(6), s6[3]));
  reader->on_deliver(get_resp(5, get1, Tag::single(7), s7[4]));
  StepResult next = reader->on_deliver(get_resp(6, get1, Tag::single(7), s7[5]));
  REQUIRE(next.out.size() == 7);
  CHECK(next.out[0].round == 2);
  CHECK(next.out[0].kind == MsgKind::get);
  CHECK(reader->busy());

  // Iteration 2: servers 1 and 2 moved to tag 7; pooled with the two tag-7
  // rows of iteration 1 that tag becomes decodable.
  const Message get2 = next.out[0];
  reader->on_deliver(get_resp(1, get2, Tag::single(7), s7[0]));
  reader->on_deliver(get_resp(2, get2, Tag::single(7), s7[1]));
  reader->on_deliver(get_resp(3, get2, Tag::single(6), s6[2]));
  reader->on_deliver(get_resp(4, get2, Tag::single(6), s6[3]));
  reader->on_deliver(get_resp(5, get2, Tag::single(7), s7[4]));
  StepResult wb = reader->on_deliver(get_resp(6, get2, Tag::single(7), s7[5]));
  REQUIRE(wb.out.size() == 7);
  CHECK(wb.out[0].kind == MsgKind::put_coded);
  CHECK(wb.out[0].tag == Tag::single(7));
  StepResult done = ack_from(*reader, wb.out, 6);
  REQUIRE(done.response);
  CHECK(*done.response->value == v7);
  CHECK(reader->iterations() == 2);
}

TEST_CASE("fw reader finishes in one iteration when the plain reader would") {
  Codec codec(7, 3);
  auto reader = make_reader(Algorithm::alg1, ReadMode::fw, kP712, codec, 2, true);
  Value v = test_value(kP712, 0x44);
  auto syms = codec.encode(v);
  StepResult res = reader->invoke(OpKind::read, std::nullopt, 301);
  const Message& get = res.out[0];
  StepResult after;
  for (int s = 1; s <= 6; ++s)
    after = reader->on_deliver(get_resp(s, get, Tag::single(2), syms[static_cast<std::size_t>(s - 1)]));
  REQUIRE(after.out.size() == 7);
  CHECK(after.out[0].kind == MsgKind::put_coded);
  StepResult done = ack_from(*reader, after.out, 6);
  REQUIRE(done.response);
  CHECK(*done.response->value == v);
  CHECK(reader->iterations() == 1);
}
