#pragma once

#include <array>
#include <compare>
#include <cstdint>

#include "linsbft/bytes.hpp"

namespace linsbft {

// 32-byte SHA-256 output. Used for block hashes, signature material and
// the collector draw.
struct Digest {
    std::array<uint8_t, 32> v{};

    auto operator<=>(const Digest&) const = default;

    bool is_zero() const {
        for (uint8_t b : v)
            if (b) return false;
        return true;
    }

    std::string hex() const { return to_hex(v.data(), v.size()); }
    // Short prefix used in traces; 16 hex chars = 64 bits, plenty at desk
    // scale and keeps lines readable.
    std::string short_hex() const { return hex().substr(0, 16); }

    Bytes bytes() const { return Bytes(v.begin(), v.end()); }

    static Digest from_bytes(const Bytes& b) {
        if (b.size() != 32) throw std::invalid_argument("digest must be 32 bytes");
        Digest d;
        std::copy(b.begin(), b.end(), d.v.begin());
        return d;
    }

    // Big-endian interpretation of the first 8 bytes; this is what the
    // collector draw reduces mod n (or mod total stake).
    uint64_t lead64() const {
        uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x = (x << 8) | v[size_t(i)];
        return x;
    }
};

Digest sha256(const uint8_t* p, size_t n);
Digest sha256(const Bytes& b);
Digest sha256(const std::string& s);

}  // namespace linsbft
