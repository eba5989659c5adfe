#include "linsbft/digest.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace linsbft {

Digest sha256(const uint8_t* p, size_t n) {
    Digest d;
    unsigned int len = 0;
    if (EVP_Digest(p, n, d.v.data(), &len, EVP_sha256(), nullptr) != 1 || len != 32)
        throw std::runtime_error("sha256 failed");
    return d;
}

Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

Digest sha256(const std::string& s) {
    return sha256(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

}  // namespace linsbft
