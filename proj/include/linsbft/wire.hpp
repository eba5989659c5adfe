#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "linsbft/block.hpp"
#include "linsbft/bytes.hpp"
#include "linsbft/crypto.hpp"
#include "linsbft/digest.hpp"

namespace linsbft {

// A round within a height. Total order by (l, v).
struct RoundId {
    uint64_t l = 0;
    uint64_t v = 0;

    auto operator<=>(const RoundId&) const = default;
};

// Preimage actually signed by a vote share: binds height and round to the
// block hash, so a certificate's round number cannot be rewritten after
// aggregation and a share cast in one round never counts toward another.
Digest vote_digest(uint64_t l, uint64_t v, const Digest& block_hash);

// Quorum certificate: n-f distinct validators signed vote_digest(l, v, H)
// in round (l, v). The wire bytes are the canonical serialization used for
// the collector draw and inside signed envelopes, so the layout is pinned:
// l u64, v u64, block hash 32 bytes, threshold signature length-prefixed.
struct VoteCertificate {
    uint64_t l = 0;
    uint64_t v = 0;
    Digest block_hash;
    ThresholdSig ts;

    bool operator==(const VoteCertificate&) const = default;
    RoundId rid() const { return {l, v}; }
    Bytes wire() const;
    static VoteCertificate decode(Reader& r);
};

// (l, v) lexicographic: later height wins, later round breaks ties.
bool higher_than(const VoteCertificate& a, const VoteCertificate& b);

// Deterministic certificate over the genesis block, derivable by every
// validator from the shared key set. It seeds the collector draw so height
// 2 onward runs the regular selection rule.
VoteCertificate genesis_cert(const CryptoSuite& suite, const ThresholdKeySet& ks);

struct Proposal {
    uint64_t l = 0;
    uint64_t v = 0;
    Block block;              // block.prehash must equal cert.block_hash
    VoteCertificate cert;     // certificate for the parent height
    Digest cert_endorsement;  // proposer's node-key signature over cert.wire()

    Bytes body() const;
    static Proposal decode(Reader& r);
};

struct Vote {
    uint64_t l = 0;
    uint64_t v = 0;
    Digest block_hash;       // block being voted
    PartialSig partial;      // over vote_digest(l, v, block_hash)
    VoteCertificate cert;    // sender's best certificate (catch-up signal)

    Bytes body() const;
    static Vote decode(Reader& r);
};

struct CertMsg {
    VoteCertificate cert;

    Bytes body() const;
    static CertMsg decode(Reader& r);
};

struct StateMsg {
    VoteCertificate cert;  // sender's best certificate
    uint64_t l = 0;        // sender's current height
    uint64_t v = 0;        // sender's current round at l

    Bytes body() const;
    static StateMsg decode(Reader& r);
};

struct SyncReq {
    uint64_t from_height = 0;

    Bytes body() const;
    static SyncReq decode(Reader& r);
};

struct SyncEntry {
    Block block;
    std::optional<VoteCertificate> cert;
};

struct SyncResp {
    uint64_t from_height = 0;
    std::vector<SyncEntry> entries;  // ascending heights, parent-chained

    Bytes body() const;
    static SyncResp decode(Reader& r);
};

enum class MsgTag : uint8_t {
    Propose = 1,
    Vote = 2,
    Cert = 3,
    State = 4,
    SyncReq = 5,
    SyncResp = 6,
};

using MsgBody = std::variant<Proposal, Vote, CertMsg, StateMsg, SyncReq, SyncResp>;

MsgTag tag_of(const MsgBody& b);
const char* tag_name(MsgTag t);

// Envelope: tag u8, body, sender u32, sender signature 32 bytes. The
// signature covers everything before it (tag, body, sender).
struct Message {
    uint32_t sender = 0;  // node id
    Digest sender_sig;
    MsgBody body;

    MsgTag tag() const { return tag_of(body); }
    Bytes encode() const;

    // Bytes the sender signature must cover.
    static Bytes preimage(const MsgBody& body, uint32_t sender);

    // Throws std::out_of_range / std::invalid_argument on malformed input.
    static Message decode(const Bytes& wire);
};

}  // namespace linsbft
