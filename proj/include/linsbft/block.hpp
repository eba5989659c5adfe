#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "linsbft/bytes.hpp"
#include "linsbft/digest.hpp"

namespace linsbft {

// Opaque payload plus a declared fee. Validator-set changes ride in the
// payload under a one-byte tag (see join/leave helpers below).
struct Transaction {
    uint64_t fee = 0;
    Bytes payload;

    bool operator==(const Transaction&) const = default;

    Bytes wire() const;
    static Transaction decode(Reader& r);
};

// Validator-set change requests carried as transactions.
struct JoinRequest {
    uint32_t node = 0;
    uint64_t deposit = 0;
};

Transaction make_join_tx(uint32_t node, uint64_t deposit, uint64_t fee);
Transaction make_leave_tx(uint32_t node, uint64_t fee);
std::optional<JoinRequest> parse_join_tx(const Transaction& tx);
std::optional<uint32_t> parse_leave_tx(const Transaction& tx);

// Canonical encoding, big-endian: height u64, round u64, prehash 32 bytes,
// proposer u32, tx count u32, then each transaction length-prefixed. The
// block hash is SHA-256 over exactly these bytes. `round` is the round the
// block was created in and never changes when a lock re-proposes it later.
struct Block {
    uint64_t height = 0;
    uint64_t round = 0;
    Digest prehash;
    uint32_t proposer = 0;
    std::vector<Transaction> txs;

    bool operator==(const Block& o) const { return hash() == o.hash(); }

    Bytes encode() const;
    Digest hash() const;
    static Block decode(Reader& r);

private:
    mutable std::optional<Digest> cached_hash_;
};

// Height 0: zero prehash, proposer 0, empty payload. Identical everywhere.
Block genesis_block();

// Comparable-and-larger: same parent, created in a later round. Blocks on
// different parents are never "larger" than one another.
bool larger_than(const Block& a, const Block& b);

}  // namespace linsbft
