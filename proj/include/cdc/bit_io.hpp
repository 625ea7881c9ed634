#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cdc/error.hpp"

namespace cdc {

// Bits are packed least-significant-bit first within each byte; the first
// bit written lands in bit 0 of byte 0. Unused trailing bits are zero.
class BitWriter {
public:
    void put_bit(bool bit) {
        if (bit_count_ % 8 == 0) {
            bytes_.push_back(0);
        }
        if (bit) {
            bytes_.back() |= static_cast<std::uint8_t>(1u << (bit_count_ % 8));
        }
        ++bit_count_;
    }

    // Writes the low `width` bits of `value`, least significant first.
    void put_lsb_first(std::uint64_t value, unsigned width) {
        for (unsigned i = 0; i < width; ++i) {
            put_bit((value >> i) & 1u);
        }
    }

    // Writes the low `width` bits of `value`, most significant first.
    // Huffman codes go out this way so a decoder can extend a prefix one bit at a time.
    void put_msb_first(std::uint64_t value, unsigned width) {
        for (unsigned i = width; i-- > 0;) {
            put_bit((value >> i) & 1u);
        }
    }

    std::uint64_t bit_count() const noexcept { return bit_count_; }
    std::vector<std::uint8_t> take() noexcept { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t bit_count_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t bit_count)
        : bytes_(bytes), bit_count_(bit_count) {
        if ((bit_count + 7) / 8 > bytes.size()) {
            throw Error(Errc::CorruptStream, "bit count exceeds payload size");
        }
    }

    bool get_bit() {
        if (pos_ >= bit_count_) {
            throw Error(Errc::CorruptStream, "bit stream exhausted");
        }
        bool bit = (bytes_[pos_ / 8] >> (pos_ % 8)) & 1u;
        ++pos_;
        return bit;
    }

    std::uint64_t get_lsb_first(unsigned width) {
        std::uint64_t v = 0;
        for (unsigned i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(get_bit()) << i;
        }
        return v;
    }

    std::uint64_t position() const noexcept { return pos_; }
    std::uint64_t remaining() const noexcept { return bit_count_ - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t bit_count_;
    std::uint64_t pos_ = 0;
};

/// Number of bits used to store one cluster index: ceil(log2(m)), at least 1.
unsigned index_bit_width(std::uint64_t m) noexcept;

/// Packs each value into `width` bits, LSB-first. Result has ceil(n*width/8) bytes.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> values, unsigned width);
std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, unsigned width);

}  // namespace cdc
