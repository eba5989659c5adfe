#include "linsbft/crypto.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace linsbft {

namespace {

// Domain-separated hash helper: H(label | parts...).
Digest derive(const char* label, std::initializer_list<Bytes> parts) {
    Writer w;
    w.raw(str_bytes(label));
    for (const auto& p : parts) w.blob(p);
    return sha256(w.bytes());
}

Bytes u64_bytes(uint64_t x) {
    Writer w;
    w.u64(x);
    return w.take();
}

Bytes u32_bytes(uint32_t x) {
    Writer w;
    w.u32(x);
    return w.take();
}

}  // namespace

Bytes PartialSig::wire() const {
    Writer w;
    w.u32(signer);
    w.raw(digest.bytes());
    w.blob(blob.bytes());
    return w.take();
}

PartialSig PartialSig::decode(Reader& r) {
    PartialSig p;
    p.signer = r.u32();
    p.digest = Digest::from_bytes(r.raw(32));
    p.blob = Digest::from_bytes(r.blob());
    return p;
}

ThresholdKeySet SimDealerSuite::keygen(uint32_t n, uint32_t t, uint64_t seed) const {
    if (n == 0) throw std::invalid_argument("keygen: n must be positive");
    if (t == 0 || t > n) throw std::invalid_argument("keygen: need 0 < t <= n");
    ThresholdKeySet ks;
    ks.n = n;
    ks.t = t;
    Digest root = derive("dealer-root", {u64_bytes(seed), u32_bytes(n), u32_bytes(t)});
    ks.group_secret = derive("group-secret", {root.bytes()});
    ks.group_public = derive("public", {ks.group_secret.bytes()});
    ks.share_secrets.reserve(n);
    ks.share_publics.reserve(n);
    ks.keys.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        Digest ss = derive("share", {ks.group_secret.bytes(), u32_bytes(i)});
        ks.share_secrets.push_back(ss);
        ks.share_publics.push_back(derive("public", {ss.bytes()}));
        KeyPair kp;
        kp.secret = derive("msg-key", {root.bytes(), u32_bytes(i)});
        kp.public_key = derive("public", {kp.secret.bytes()});
        ks.keys.push_back(kp);
    }
    return ks;
}

Digest SimDealerSuite::sign(const ThresholdKeySet& ks, uint32_t signer,
                            const Bytes& msg) const {
    if (signer >= ks.n) throw std::invalid_argument("sign: signer out of range");
    return derive("msg-sig", {ks.keys[signer].secret.bytes(), msg});
}

bool SimDealerSuite::verify(const ThresholdKeySet& ks, uint32_t signer,
                            const Bytes& msg, const Digest& sig) const {
    if (signer >= ks.n) return false;
    return sig == derive("msg-sig", {ks.keys[signer].secret.bytes(), msg});
}

PartialSig SimDealerSuite::partial_sign(const ThresholdKeySet& ks, uint32_t signer,
                                        const Digest& digest) const {
    if (signer >= ks.n) throw std::invalid_argument("partial_sign: signer out of range");
    PartialSig p;
    p.signer = signer;
    p.digest = digest;
    p.blob = derive("partial", {ks.share_secrets[signer].bytes(), digest.bytes()});
    return p;
}

bool SimDealerSuite::partial_verify(const ThresholdKeySet& ks,
                                    const PartialSig& p) const {
    if (p.signer >= ks.n) return false;
    return p.blob == derive("partial", {ks.share_secrets[p.signer].bytes(),
                                        p.digest.bytes()});
}

std::optional<ThresholdSig> SimDealerSuite::aggregate(
    const ThresholdKeySet& ks, const std::vector<PartialSig>& partials,
    std::string* err) const {
    auto fail = [&](const char* why) -> std::optional<ThresholdSig> {
        if (err) *err = why;
        return std::nullopt;
    };
    if (partials.empty()) return fail("no partials");
    const Digest& digest = partials.front().digest;
    std::set<uint32_t> signers;
    for (const auto& p : partials) {
        if (p.digest != digest) return fail("digest mismatch across partials");
        if (!partial_verify(ks, p)) return fail("invalid partial signature");
        signers.insert(p.signer);
    }
    if (signers.size() < ks.t) return fail("insufficient distinct signers");
    ThresholdSig sig;
    sig.blob = derive("aggregate", {ks.group_secret.bytes(), digest.bytes()});
    return sig;
}

bool SimDealerSuite::ts_verify(const ThresholdKeySet& ks, const Digest& digest,
                               const ThresholdSig& sig) const {
    return sig.blob == derive("aggregate", {ks.group_secret.bytes(), digest.bytes()});
}

uint32_t select_collector(const Bytes& cert_wire, uint64_t v, uint32_t n) {
    if (n == 0) throw std::invalid_argument("select_collector: empty validator set");
    Writer w;
    w.raw(cert_wire);
    w.u64(v);
    return uint32_t(sha256(w.bytes()).lead64() % n);
}

uint32_t select_collector_weighted(const Bytes& cert_wire, uint64_t v,
                                   const std::vector<uint64_t>& stakes) {
    if (stakes.empty())
        throw std::invalid_argument("select_collector_weighted: empty stake vector");
    uint64_t total = 0;
    for (uint64_t d : stakes) {
        if (d == 0)
            throw std::invalid_argument("select_collector_weighted: zero stake");
        total += d;
    }
    Writer w;
    w.raw(cert_wire);
    w.u64(v);
    uint64_t r = sha256(w.bytes()).lead64() % total;
    uint64_t acc = 0;
    for (size_t i = 0; i < stakes.size(); ++i) {
        acc += stakes[i];
        if (r < acc) return uint32_t(i);
    }
    throw std::logic_error("select_collector_weighted: interval walk fell through");
}

}  // namespace linsbft
