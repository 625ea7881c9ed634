#include "cdc/bit_io.hpp"

#include <bit>

namespace cdc {

unsigned index_bit_width(std::uint64_t m) noexcept {
    if (m <= 2) {
        return 1;
    }
    return static_cast<unsigned>(std::bit_width(m - 1));
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint32_t> values, unsigned width) {
    BitWriter w;
    for (auto v : values) {
        w.put_lsb_first(v, width);
    }
    return w.take();
}

std::vector<std::uint32_t> unpack_bits(std::span<const std::uint8_t> bytes, std::size_t count, unsigned width) {
    const std::uint64_t bits = static_cast<std::uint64_t>(count) * width;
    if ((bits + 7) / 8 != bytes.size()) {
        throw Error(Errc::CorruptStream, "packed array size does not match element count");
    }
    BitReader r(bytes, bits);
    std::vector<std::uint32_t> out(count);
    for (auto& v : out) {
        v = static_cast<std::uint32_t>(r.get_lsb_first(width));
    }
    return out;
}

}  // namespace cdc
