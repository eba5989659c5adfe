#include "linsbft/wire.hpp"

#include <stdexcept>

namespace linsbft {

Digest vote_digest(uint64_t l, uint64_t v, const Digest& block_hash) {
    Writer w;
    w.raw(str_bytes("vote"));
    w.u64(l);
    w.u64(v);
    w.raw(block_hash.v.data(), block_hash.v.size());
    return sha256(w.take());
}

Bytes VoteCertificate::wire() const {
    Writer w;
    w.u64(l);
    w.u64(v);
    w.raw(block_hash.v.data(), block_hash.v.size());
    w.blob(ts.blob.bytes());
    return w.take();
}

VoteCertificate VoteCertificate::decode(Reader& r) {
    VoteCertificate c;
    c.l = r.u64();
    c.v = r.u64();
    c.block_hash = Digest::from_bytes(r.raw(32));
    c.ts.blob = Digest::from_bytes(r.blob());
    return c;
}

bool higher_than(const VoteCertificate& a, const VoteCertificate& b) {
    if (a.l != b.l) return a.l > b.l;
    return a.v > b.v;
}

VoteCertificate genesis_cert(const CryptoSuite& suite, const ThresholdKeySet& ks) {
    Digest gh = genesis_block().hash();
    Digest vd = vote_digest(0, 0, gh);
    std::vector<PartialSig> parts;
    for (uint32_t i = 0; i < ks.t; ++i) parts.push_back(suite.partial_sign(ks, i, vd));
    auto ts = suite.aggregate(ks, parts);
    if (!ts) throw std::runtime_error("genesis certificate aggregation failed");
    return VoteCertificate{0, 0, gh, *ts};
}

Bytes Proposal::body() const {
    Writer w;
    w.u64(l);
    w.u64(v);
    w.blob(block.encode());
    w.blob(cert.wire());
    w.raw(cert_endorsement.v.data(), cert_endorsement.v.size());
    return w.take();
}

Proposal Proposal::decode(Reader& r) {
    Proposal p;
    p.l = r.u64();
    p.v = r.u64();
    Bytes blk = r.blob();
    Reader br(blk);
    p.block = Block::decode(br);
    if (!br.done()) throw std::invalid_argument("trailing bytes after block");
    Bytes cw = r.blob();
    Reader cr(cw);
    p.cert = VoteCertificate::decode(cr);
    if (!cr.done()) throw std::invalid_argument("trailing bytes after certificate");
    p.cert_endorsement = Digest::from_bytes(r.raw(32));
    return p;
}

Bytes Vote::body() const {
    Writer w;
    w.u64(l);
    w.u64(v);
    w.raw(block_hash.v.data(), block_hash.v.size());
    w.raw(partial.wire());
    w.blob(cert.wire());
    return w.take();
}

Vote Vote::decode(Reader& r) {
    Vote vt;
    vt.l = r.u64();
    vt.v = r.u64();
    vt.block_hash = Digest::from_bytes(r.raw(32));
    vt.partial = PartialSig::decode(r);
    Bytes cw = r.blob();
    Reader cr(cw);
    vt.cert = VoteCertificate::decode(cr);
    if (!cr.done()) throw std::invalid_argument("trailing bytes after certificate");
    return vt;
}

Bytes CertMsg::body() const {
    Writer w;
    w.blob(cert.wire());
    return w.take();
}

CertMsg CertMsg::decode(Reader& r) {
    CertMsg m;
    Bytes cw = r.blob();
    Reader cr(cw);
    m.cert = VoteCertificate::decode(cr);
    if (!cr.done()) throw std::invalid_argument("trailing bytes after certificate");
    return m;
}

Bytes StateMsg::body() const {
    Writer w;
    w.blob(cert.wire());
    w.u64(l);
    w.u64(v);
    return w.take();
}

StateMsg StateMsg::decode(Reader& r) {
    StateMsg s;
    Bytes cw = r.blob();
    Reader cr(cw);
    s.cert = VoteCertificate::decode(cr);
    if (!cr.done()) throw std::invalid_argument("trailing bytes after certificate");
    s.l = r.u64();
    s.v = r.u64();
    return s;
}

Bytes SyncReq::body() const {
    Writer w;
    w.u64(from_height);
    return w.take();
}

SyncReq SyncReq::decode(Reader& r) {
    SyncReq q;
    q.from_height = r.u64();
    return q;
}

Bytes SyncResp::body() const {
    Writer w;
    w.u64(from_height);
    w.u32(uint32_t(entries.size()));
    for (const SyncEntry& e : entries) {
        w.blob(e.block.encode());
        w.u8(e.cert ? 1 : 0);
        if (e.cert) w.blob(e.cert->wire());
    }
    return w.take();
}

SyncResp SyncResp::decode(Reader& r) {
    SyncResp s;
    s.from_height = r.u64();
    uint32_t count = r.u32();
    if (count > 4096) throw std::invalid_argument("oversized sync response");
    for (uint32_t i = 0; i < count; ++i) {
        SyncEntry e;
        Bytes blk = r.blob();
        Reader br(blk);
        e.block = Block::decode(br);
        if (!br.done()) throw std::invalid_argument("trailing bytes after block");
        if (r.u8()) {
            Bytes cw = r.blob();
            Reader cr(cw);
            e.cert = VoteCertificate::decode(cr);
            if (!cr.done()) throw std::invalid_argument("trailing bytes after certificate");
        }
        s.entries.push_back(std::move(e));
    }
    return s;
}

MsgTag tag_of(const MsgBody& b) {
    switch (b.index()) {
        case 0: return MsgTag::Propose;
        case 1: return MsgTag::Vote;
        case 2: return MsgTag::Cert;
        case 3: return MsgTag::State;
        case 4: return MsgTag::SyncReq;
        default: return MsgTag::SyncResp;
    }
}

const char* tag_name(MsgTag t) {
    switch (t) {
        case MsgTag::Propose: return "propose";
        case MsgTag::Vote: return "vote";
        case MsgTag::Cert: return "cert";
        case MsgTag::State: return "state";
        case MsgTag::SyncReq: return "syncreq";
        default: return "syncresp";
    }
}

static Bytes body_bytes(const MsgBody& b) {
    return std::visit([](const auto& m) { return m.body(); }, b);
}

Bytes Message::preimage(const MsgBody& body, uint32_t sender) {
    Writer w;
    w.u8(uint8_t(tag_of(body)));
    w.raw(body_bytes(body));
    w.u32(sender);
    return w.take();
}

Bytes Message::encode() const {
    Writer w;
    w.raw(preimage(body, sender));
    w.raw(sender_sig.v.data(), sender_sig.v.size());
    return w.take();
}

Message Message::decode(const Bytes& wire) {
    Reader r(wire);
    uint8_t tag = r.u8();
    Message m;
    switch (MsgTag(tag)) {
        case MsgTag::Propose: m.body = Proposal::decode(r); break;
        case MsgTag::Vote: m.body = Vote::decode(r); break;
        case MsgTag::Cert: m.body = CertMsg::decode(r); break;
        case MsgTag::State: m.body = StateMsg::decode(r); break;
        case MsgTag::SyncReq: m.body = SyncReq::decode(r); break;
        case MsgTag::SyncResp: m.body = SyncResp::decode(r); break;
        default: throw std::invalid_argument("unknown message tag");
    }
    m.sender = r.u32();
    m.sender_sig = Digest::from_bytes(r.raw(32));
    if (!r.done()) throw std::invalid_argument("trailing bytes after message");
    return m;
}

}  // namespace linsbft
