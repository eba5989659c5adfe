#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linsbft/bytes.hpp"
#include "linsbft/digest.hpp"

namespace linsbft {

// Per-validator message-signing key. The public half is derivable from the
// secret; verification goes through the key set (the dealer hands the whole
// set to every simulated validator, so holding it is how a node verifies).
struct KeyPair {
    Digest secret;
    Digest public_key;
};

// One validator's share of the threshold signature over `digest`.
struct PartialSig {
    uint32_t signer = 0;  // index within the key set's validator ordering
    Digest digest;
    Digest blob;

    Bytes wire() const;
    static PartialSig decode(Reader& r);
};

// Constant-size aggregate; the same 32 bytes regardless of n or t.
struct ThresholdSig {
    Digest blob;

    bool operator==(const ThresholdSig&) const = default;
};

// Everything the dealer hands out for one epoch: n message keys, n shares,
// and the group MAC secret the aggregate is bound to. Key material lives
// only in memory for the duration of a run.
struct ThresholdKeySet {
    uint32_t n = 0;
    uint32_t t = 0;  // distinct signers required to aggregate
    Digest group_secret;
    Digest group_public;
    std::vector<Digest> share_secrets;
    std::vector<Digest> share_publics;
    std::vector<KeyPair> keys;
};

// Signature operations the consensus engine depends on. The bundled
// implementation simulates a trusted dealer with hash MACs: deterministic,
// constant-size, and honest about not being hard to forge with the dealer
// secret in hand - which every simulated party has. A pairing-based scheme
// can be slotted in behind this same interface.
class CryptoSuite {
public:
    virtual ~CryptoSuite() = default;

    virtual ThresholdKeySet keygen(uint32_t n, uint32_t t, uint64_t seed) const = 0;

    virtual Digest sign(const ThresholdKeySet& ks, uint32_t signer,
                        const Bytes& msg) const = 0;
    virtual bool verify(const ThresholdKeySet& ks, uint32_t signer,
                        const Bytes& msg, const Digest& sig) const = 0;

    virtual PartialSig partial_sign(const ThresholdKeySet& ks, uint32_t signer,
                                    const Digest& digest) const = 0;
    virtual bool partial_verify(const ThresholdKeySet& ks,
                                const PartialSig& p) const = 0;

    // Requires at least t distinct valid signers over one shared digest;
    // duplicates from the same signer count once. On failure returns
    // nullopt and, if err is non-null, a short reason.
    virtual std::optional<ThresholdSig> aggregate(const ThresholdKeySet& ks,
                                                  const std::vector<PartialSig>& partials,
                                                  std::string* err = nullptr) const = 0;
    virtual bool ts_verify(const ThresholdKeySet& ks, const Digest& digest,
                           const ThresholdSig& sig) const = 0;
};

class SimDealerSuite final : public CryptoSuite {
public:
    ThresholdKeySet keygen(uint32_t n, uint32_t t, uint64_t seed) const override;
    Digest sign(const ThresholdKeySet& ks, uint32_t signer,
                const Bytes& msg) const override;
    bool verify(const ThresholdKeySet& ks, uint32_t signer, const Bytes& msg,
                const Digest& sig) const override;
    PartialSig partial_sign(const ThresholdKeySet& ks, uint32_t signer,
                            const Digest& digest) const override;
    bool partial_verify(const ThresholdKeySet& ks, const PartialSig& p) const override;
    std::optional<ThresholdSig> aggregate(const ThresholdKeySet& ks,
                                          const std::vector<PartialSig>& partials,
                                          std::string* err = nullptr) const override;
    bool ts_verify(const ThresholdKeySet& ks, const Digest& digest,
                   const ThresholdSig& sig) const override;
};

// Collector draw: hash the certificate's wire bytes concatenated with the
// round number (u64 big-endian) and reduce the leading 8 bytes mod n.
// Identical across validators holding the same cert bytes.
uint32_t select_collector(const Bytes& cert_wire, uint64_t v, uint32_t n);

// Stake-weighted variant: reduce mod the total stake D and pick the owner
// of the interval (sum_{j<i} d_j, sum_{j<=i} d_j]. With all stakes equal to
// one this degenerates to select_collector exactly, draw for draw.
uint32_t select_collector_weighted(const Bytes& cert_wire, uint64_t v,
                                   const std::vector<uint64_t>& stakes);

}  // namespace linsbft
