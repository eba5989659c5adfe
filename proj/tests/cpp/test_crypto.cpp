#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "linsbft/block.hpp"
#include "linsbft/crypto.hpp"
#include "linsbft/digest.hpp"
#include "linsbft/wire.hpp"

using namespace linsbft;

// Golden values below were produced by tools/oracles/encoding_oracle.py,
// which recomputes them from the documented byte layouts with hashlib only.

namespace {

Digest sha_of(const std::string& s) { return sha256(s); }

Block golden_block() {
    Block b;
    b.height = 7;
    b.round = 2;
    b.prehash = sha_of("parent");
    b.proposer = 3;
    b.txs.push_back(Transaction{5, Bytes{'a', 'l', 'p', 'h', 'a'}});
    std::string p2 = "bravo-payload";
    b.txs.push_back(Transaction{11, Bytes(p2.begin(), p2.end())});
    return b;
}

}  // namespace

TEST_CASE("sha256 matches the reference vector") {
    CHECK(sha256(std::string("abc")).hex() ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256(std::string("")).hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("transaction encoding is fee, length, payload, big-endian") {
    Transaction tx{7, Bytes{0x01, 0x02, 0x03, 0x04, 0x05}};
    CHECK(to_hex(tx.wire()) == "000000000000000700000005" "0102030405");

    Bytes wire = tx.wire();
    Reader r(wire);
    Transaction back = Transaction::decode(r);
    CHECK(back == tx);
}

TEST_CASE("block encoding and hash match the oracle") {
    Block b = golden_block();
    CHECK(to_hex(b.encode()) ==
          "00000000000000070000000000000002"
          "e47125968b3b71049fbc4802d1e40a71ea1359decfabacf70b34588037d4ff0c"
          "0000000300000002"
          "00000011000000000000000500000005616c706861"
          "00000019000000000000000b0000000d627261766f2d7061796c6f6164");
    CHECK(b.hash().hex() ==
          "56b04f1e352775b9c2b4bd5656af0e18d0fd16503c366929c39a319856a29c1c");

    Bytes enc = b.encode();
    Reader r(enc);
    Block back = Block::decode(r);
    CHECK(back.hash() == b.hash());
}

TEST_CASE("genesis block is the zero-field block, identical everywhere") {
    Block g = genesis_block();
    CHECK(g.height == 0);
    CHECK(g.prehash.is_zero());
    CHECK(g.txs.empty());
    CHECK(g.hash().hex() ==
          "d4817aa5497628e7c77e6b606107042bbba3130888c5f47a375e6179be789fbb");
}

TEST_CASE("certificate wire layout and the collector draw match the oracle") {
    VoteCertificate c;
    c.l = 7;
    c.v = 2;
    c.block_hash = golden_block().hash();
    c.ts.blob.v.fill(0xAB);

    CHECK(to_hex(c.wire()) ==
          "00000000000000070000000000000002"
          "56b04f1e352775b9c2b4bd5656af0e18d0fd16503c366929c39a319856a29c1c"
          "00000020"
          "abababababababababababababababababababababababababababababababab");

    const uint32_t n5[] = {2, 3, 2, 3, 4};
    for (uint64_t v = 0; v < 5; ++v)
        CHECK(select_collector(c.wire(), v, 5) == n5[v]);
    const uint32_t n9[] = {7, 2, 6};
    for (uint64_t v = 0; v < 3; ++v)
        CHECK(select_collector(c.wire(), v, 9) == n9[v]);
}

TEST_CASE("weighted draw picks stake intervals; equal stakes degenerate") {
    VoteCertificate c;
    c.l = 7;
    c.v = 2;
    c.block_hash = golden_block().hash();
    c.ts.blob.v.fill(0xAB);
    Bytes w = c.wire();

    const uint32_t w13[] = {1, 1, 1, 1, 1, 1};
    const uint32_t w5111[] = {1, 0, 0, 0, 1, 2};
    for (uint64_t v = 0; v < 6; ++v) {
        CHECK(select_collector_weighted(w, v, {1, 3}) == w13[v]);
        CHECK(select_collector_weighted(w, v, {5, 1, 1, 1}) == w5111[v]);
    }
    for (uint64_t v = 0; v < 32; ++v)
        CHECK(select_collector_weighted(w, v, {1, 1, 1, 1, 1}) ==
              select_collector(w, v, 5));
}

TEST_CASE("threshold aggregation needs t distinct signers") {
    SimDealerSuite suite;
    ThresholdKeySet ks = suite.keygen(5, 4, 99);
    Digest d = sha_of("payload");

    std::vector<PartialSig> parts;
    for (uint32_t i = 0; i < 3; ++i) parts.push_back(suite.partial_sign(ks, i, d));
    std::string err;
    CHECK(!suite.aggregate(ks, parts, &err));
    CHECK(!err.empty());

    // A duplicate share does not count twice.
    parts.push_back(suite.partial_sign(ks, 2, d));
    CHECK(!suite.aggregate(ks, parts));

    parts.push_back(suite.partial_sign(ks, 3, d));
    auto ts = suite.aggregate(ks, parts);
    REQUIRE(ts);
    CHECK(suite.ts_verify(ks, d, *ts));
    CHECK(!suite.ts_verify(ks, sha_of("other payload"), *ts));
}

TEST_CASE("a vote share is bound to height, round, and block") {
    SimDealerSuite suite;
    ThresholdKeySet ks = suite.keygen(5, 4, 7);
    Digest bh = golden_block().hash();
    Digest d = vote_digest(9, 1, bh);
    CHECK(d != vote_digest(9, 2, bh));
    CHECK(d != vote_digest(10, 1, bh));
    CHECK(d != vote_digest(9, 1, sha_of("x")));

    std::vector<PartialSig> parts;
    for (uint32_t i = 0; i < 4; ++i) parts.push_back(suite.partial_sign(ks, i, d));
    auto ts = suite.aggregate(ks, parts);
    REQUIRE(ts);
    // The certificate's round cannot be rewritten after aggregation.
    CHECK(suite.ts_verify(ks, vote_digest(9, 1, bh), *ts));
    CHECK(!suite.ts_verify(ks, vote_digest(9, 2, bh), *ts));
}

TEST_CASE("node signatures verify and reject tampering") {
    SimDealerSuite suite;
    ThresholdKeySet ks = suite.keygen(5, 4, 3);
    Bytes msg{'h', 'i'};
    Digest sig = suite.sign(ks, 1, msg);
    CHECK(suite.verify(ks, 1, msg, sig));
    CHECK(!suite.verify(ks, 2, msg, sig));
    Bytes other{'h', 'o'};
    CHECK(!suite.verify(ks, 1, other, sig));
    PartialSig p = suite.partial_sign(ks, 4, sha_of("d"));
    CHECK(suite.partial_verify(ks, p));
    p.signer = 3;
    CHECK(!suite.partial_verify(ks, p));
}

TEST_CASE("message envelope round-trips and tags are pinned") {
    VoteCertificate c;
    c.l = 3;
    c.v = 0;
    c.block_hash = sha_of("b3");
    c.ts.blob = sha_of("ts");

    Proposal p;
    p.l = 4;
    p.v = 0;
    p.block = golden_block();
    p.cert = c;
    p.cert_endorsement = sha_of("endorse");

    Message m;
    m.sender = 2;
    m.sender_sig = sha_of("sig");
    m.body = p;
    CHECK(m.tag() == MsgTag::Propose);

    Bytes wire = m.encode();
    CHECK(wire.front() == 1);  // Propose tag byte
    Message back = Message::decode(wire);
    CHECK(back.sender == 2);
    REQUIRE(std::holds_alternative<Proposal>(back.body));
    const Proposal& bp = std::get<Proposal>(back.body);
    CHECK(bp.l == 4);
    CHECK(bp.block.hash() == p.block.hash());
    CHECK(bp.cert == c);

    Vote vt;
    vt.l = 4;
    vt.v = 1;
    vt.block_hash = sha_of("bh");
    vt.partial.signer = 3;
    vt.partial.digest = sha_of("pd");
    vt.partial.blob = sha_of("pb");
    vt.cert = c;
    m.body = vt;
    CHECK(m.encode().front() == 2);  // Vote tag byte
    Message vb = Message::decode(m.encode());
    REQUIRE(std::holds_alternative<Vote>(vb.body));
    CHECK(std::get<Vote>(vb.body).partial.signer == 3);

    CHECK(uint8_t(MsgTag::Cert) == 3);
    CHECK(uint8_t(MsgTag::State) == 4);
    CHECK(uint8_t(MsgTag::SyncReq) == 5);
    CHECK(uint8_t(MsgTag::SyncResp) == 6);

    Bytes garbage{0x09, 0x01, 0x02};
    CHECK_THROWS(Message::decode(garbage));
}

TEST_CASE("certificate order: height first, round breaks ties") {
    VoteCertificate a, b;
    a.l = 5; a.v = 3;
    b.l = 6; b.v = 0;
    CHECK(higher_than(b, a));
    CHECK(!higher_than(a, b));
    b.l = 5; b.v = 4;
    CHECK(higher_than(b, a));
}
