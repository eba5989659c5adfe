#include "linsbft/block.hpp"

namespace linsbft {

Bytes Transaction::wire() const {
    Writer w;
    w.u64(fee);
    w.blob(payload);
    return w.take();
}

Transaction Transaction::decode(Reader& r) {
    Transaction tx;
    tx.fee = r.u64();
    tx.payload = r.blob();
    return tx;
}

Transaction make_join_tx(uint32_t node, uint64_t deposit, uint64_t fee) {
    Writer w;
    w.u8('J');
    w.u32(node);
    w.u64(deposit);
    Transaction tx;
    tx.fee = fee;
    tx.payload = w.take();
    return tx;
}

Transaction make_leave_tx(uint32_t node, uint64_t fee) {
    Writer w;
    w.u8('L');
    w.u32(node);
    Transaction tx;
    tx.fee = fee;
    tx.payload = w.take();
    return tx;
}

std::optional<JoinRequest> parse_join_tx(const Transaction& tx) {
    if (tx.payload.size() != 13 || tx.payload[0] != 'J') return std::nullopt;
    Reader r(tx.payload);
    r.u8();
    JoinRequest j;
    j.node = r.u32();
    j.deposit = r.u64();
    return j;
}

std::optional<uint32_t> parse_leave_tx(const Transaction& tx) {
    if (tx.payload.size() != 5 || tx.payload[0] != 'L') return std::nullopt;
    Reader r(tx.payload);
    r.u8();
    return r.u32();
}

Bytes Block::encode() const {
    Writer w;
    w.u64(height);
    w.u64(round);
    w.raw(prehash.bytes());
    w.u32(proposer);
    w.u32(uint32_t(txs.size()));
    for (const auto& tx : txs) w.blob(tx.wire());
    return w.take();
}

Digest Block::hash() const {
    if (!cached_hash_) cached_hash_ = sha256(encode());
    return *cached_hash_;
}

Block Block::decode(Reader& r) {
    Block b;
    b.height = r.u64();
    b.round = r.u64();
    b.prehash = Digest::from_bytes(r.raw(32));
    b.proposer = r.u32();
    uint32_t count = r.u32();
    b.txs.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        Bytes tw = r.blob();
        Reader tr(tw);
        b.txs.push_back(Transaction::decode(tr));
    }
    return b;
}

Block genesis_block() { return Block{}; }

bool larger_than(const Block& a, const Block& b) {
    return a.prehash == b.prehash && a.height == b.height && a.round > b.round;
}

}  // namespace linsbft
