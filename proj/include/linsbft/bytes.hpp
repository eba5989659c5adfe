#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace linsbft {

using Bytes = std::vector<uint8_t>;

// Append-only big-endian encoder for the canonical wire layouts. All
// multi-byte integers on the wire are big-endian; variable-length fields
// carry a u32 length prefix.
class Writer {
public:
    void u8(uint8_t x) { buf_.push_back(x); }

    void u32(uint32_t x) {
        for (int i = 3; i >= 0; --i) buf_.push_back(uint8_t(x >> (8 * i)));
    }

    void u64(uint64_t x) {
        for (int i = 7; i >= 0; --i) buf_.push_back(uint8_t(x >> (8 * i)));
    }

    void raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
    void raw(const Bytes& b) { raw(b.data(), b.size()); }

    void blob(const Bytes& b) {
        u32(uint32_t(b.size()));
        raw(b);
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Matching cursor-style decoder. Throws std::out_of_range on truncated
// input; callers treat that as a malformed message.
class Reader {
public:
    explicit Reader(const Bytes& b) : buf_(b) {}

    uint8_t u8() {
        need(1);
        return buf_[pos_++];
    }

    uint32_t u32() {
        need(4);
        uint32_t x = 0;
        for (int i = 0; i < 4; ++i) x = (x << 8) | buf_[pos_++];
        return x;
    }

    uint64_t u64() {
        need(8);
        uint64_t x = 0;
        for (int i = 0; i < 8; ++i) x = (x << 8) | buf_[pos_++];
        return x;
    }

    Bytes raw(size_t n) {
        need(n);
        Bytes out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    Bytes blob() {
        uint32_t n = u32();
        if (n > remaining()) throw std::out_of_range("blob length exceeds input");
        return raw(n);
    }

    size_t remaining() const { return buf_.size() - pos_; }
    bool done() const { return pos_ == buf_.size(); }

private:
    void need(size_t n) const {
        if (buf_.size() - pos_ < n) throw std::out_of_range("truncated input");
    }

    const Bytes& buf_;
    size_t pos_ = 0;
};

inline std::string to_hex(const uint8_t* p, size_t n) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(n * 2);
    for (size_t i = 0; i < n; ++i) {
        s.push_back(digits[p[i] >> 4]);
        s.push_back(digits[p[i] & 0xf]);
    }
    return s;
}

inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

inline Bytes from_hex(const std::string& s) {
    if (s.size() % 2) throw std::invalid_argument("odd hex length");
    auto nib = [](char c) -> uint8_t {
        if (c >= '0' && c <= '9') return uint8_t(c - '0');
        if (c >= 'a' && c <= 'f') return uint8_t(c - 'a' + 10);
        if (c >= 'A' && c <= 'F') return uint8_t(c - 'A' + 10);
        throw std::invalid_argument("bad hex digit");
    };
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = uint8_t(nib(s[2 * i]) << 4 | nib(s[2 * i + 1]));
    return out;
}

inline Bytes str_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace linsbft
