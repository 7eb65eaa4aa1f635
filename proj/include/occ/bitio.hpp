#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "occ/errors.hpp"

namespace occ {

// Bit sequence packed MSB-first into bytes. The last byte is zero-padded.
// This packing order is part of the wire format and must not change.
class BitString {
public:
    BitString() = default;

    void push_back(bool bit) {
        if (nbits_ % 8 == 0) bytes_.push_back(0);
        if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (nbits_ % 8));
        ++nbits_;
    }

    // Appends the low `nbits` of `value`, most significant of those bits first.
    void append_bits(std::uint64_t value, std::uint32_t nbits) {
        for (std::uint32_t i = nbits; i-- > 0;) {
            push_back(((value >> i) & 1u) != 0);
        }
    }

    void append(const BitString& other) {
        for (std::size_t i = 0; i < other.size(); ++i) push_back(other.bit(i));
    }

    bool bit(std::size_t i) const {
        return (bytes_[i / 8] >> (7 - i % 8)) & 1u;
    }

    std::size_t size() const { return nbits_; }
    bool empty() const { return nbits_ == 0; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    static BitString from_bytes(std::vector<std::uint8_t> bytes, std::size_t nbits) {
        BitString s;
        s.bytes_ = std::move(bytes);
        s.nbits_ = nbits;
        return s;
    }

    bool operator==(const BitString& o) const {
        return nbits_ == o.nbits_ && bytes_ == o.bytes_;
    }

    std::string to_string() const {
        std::string out;
        out.reserve(nbits_);
        for (std::size_t i = 0; i < nbits_; ++i) out.push_back(bit(i) ? '1' : '0');
        return out;
    }

private:
    std::vector<std::uint8_t> bytes_;
    std::size_t nbits_ = 0;
};

// Sequential reader over an MSB-first packed bit buffer.
class BitReader {
public:
    BitReader(const std::uint8_t* data, std::size_t nbits) : data_(data), nbits_(nbits) {}
    explicit BitReader(const BitString& s) : BitReader(s.bytes().data(), s.size()) {}

    bool read_bit() {
        if (pos_ >= nbits_) throw IntegrityError("bitstream exhausted mid-codeword");
        bool b = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
        ++pos_;
        return b;
    }

    std::uint64_t read_bits(std::uint32_t n) {
        std::uint64_t v = 0;
        for (std::uint32_t i = 0; i < n; ++i) v = (v << 1) | (read_bit() ? 1u : 0u);
        return v;
    }

    std::size_t position() const { return pos_; }
    std::size_t remaining() const { return nbits_ - pos_; }

private:
    const std::uint8_t* data_;
    std::size_t nbits_;
    std::size_t pos_ = 0;
};

}  // namespace occ
