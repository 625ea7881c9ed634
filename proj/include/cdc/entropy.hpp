#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cdc/byte_io.hpp"
#include "cdc/quantization.hpp"

namespace cdc {

using Symbol = std::uint32_t;

struct SymbolHistogram {
    std::map<Symbol, std::uint64_t> counts;  // zero counts are never stored

    static SymbolHistogram of(std::span<const Symbol> symbols);
    std::uint64_t total() const noexcept;
    std::size_t alphabet_size() const noexcept { return counts.size(); }
};

/// Empirical entropy in bits per symbol; 0 for empty or single-symbol input.
double empirical_entropy(const SymbolHistogram& hist) noexcept;

/// Canonical prefix code defined by per-symbol code lengths. Codes are
/// assigned in (length, symbol) order, consecutive within a length.
class HuffmanCodeTable {
public:
    struct Code {
        std::uint64_t bits = 0;
        std::uint8_t length = 0;
    };

    HuffmanCodeTable() = default;

    /// Throws CorruptStream if the lengths cannot form a complete prefix code
    /// (a lone symbol must have length 1).
    explicit HuffmanCodeTable(std::map<Symbol, std::uint8_t> lengths);

    const std::map<Symbol, std::uint8_t>& lengths() const noexcept { return lengths_; }
    bool empty() const noexcept { return lengths_.empty(); }
    std::size_t size() const noexcept { return lengths_.size(); }

    /// Throws UnknownSymbol when absent.
    Code code(Symbol s) const;

    /// Reads one symbol, extending the code a bit at a time.
    template <typename NextBit>
    Symbol decode_one(NextBit&& next_bit) const;

    friend bool operator==(const HuffmanCodeTable& a, const HuffmanCodeTable& b) { return a.lengths_ == b.lengths_; }

private:
    std::map<Symbol, std::uint8_t> lengths_;
    std::map<Symbol, Code> codes_;
    std::vector<Symbol> sorted_;                 // symbols in canonical order
    std::vector<std::uint64_t> first_code_;      // per length
    std::vector<std::uint32_t> first_index_;     // per length, into sorted_
    std::vector<std::uint32_t> count_;           // per length
};

/// Optimal code lengths by repeated merging of the two lightest subtrees;
/// ties go to the lower count, then the lower smallest contained symbol.
HuffmanCodeTable build_table(const SymbolHistogram& hist);

struct EncodedStream {
    HuffmanCodeTable table;
    std::uint64_t bit_count = 0;
    std::vector<std::uint8_t> payload;  // ceil(bit_count / 8) bytes, LSB-first

    friend bool operator==(const EncodedStream&, const EncodedStream&) = default;
};

EncodedStream encode(std::span<const Symbol> symbols, const HuffmanCodeTable& table);
std::vector<Symbol> decode(const EncodedStream& stream, std::size_t expected_count);

/// Builds a table from the sequence itself and encodes it. Empty input gives
/// an empty table and a 0-bit stream.
EncodedStream encode_with_own_table(std::span<const Symbol> symbols);

/// True when the table fits the on-disk form (u16 symbol count, u16 symbols).
bool serializable(const SymbolHistogram& hist) noexcept;

/// Table: count u16, then (symbol u16, length u8) sorted by symbol.
void write_table(ByteWriter& w, const HuffmanCodeTable& table);
HuffmanCodeTable read_table(ByteReader& r);

/// Stream: table, bit_count u64, payload bytes.
void write_stream(ByteWriter& w, const EncodedStream& s);
EncodedStream read_stream(ByteReader& r);

enum class EntropyMode : std::uint8_t {
    None = 0,
    SplitValues = 1,
    Indices = 2,
};

/// Entropy-coded form of a quantized layer's index table and column indices.
struct QuantizedStreams {
    EntropyMode mode = EntropyMode::SplitValues;
    std::vector<float> real_dict;               // split mode: sorted distinct centroid real parts
    std::vector<float> imag_dict;               // split mode: sorted distinct centroid imaginary parts
    std::vector<EncodedStream> value_streams;   // split: {real, imag}; indices: {index}
    std::optional<EncodedStream> col_idx;       // absent when the column alphabet is too large to table

    friend bool operator==(const QuantizedStreams&, const QuantizedStreams&) = default;
};

/// Distinct centroid components sorted by value. Entries are distinct by bit
/// pattern, so +0 and -0 stay separate.
std::vector<float> distinct_components(const Codebook& cb, bool real);

QuantizedStreams encode_quantized(const QuantizedLayer& q, EntropyMode mode);

/// Recovers the per-nonzero codebook indices. In split mode each (real, imag)
/// pair maps to the lowest codebook index holding exactly those components.
std::vector<std::uint32_t> decode_indices(const QuantizedStreams& s, const Codebook& cb, std::size_t nnz);

std::vector<std::uint32_t> decode_col_idx(const QuantizedStreams& s, std::size_t nnz);

// --- template definitions ---

template <typename NextBit>
Symbol HuffmanCodeTable::decode_one(NextBit&& next_bit) const {
    std::uint64_t code = 0;
    for (std::size_t len = 1; len < count_.size(); ++len) {
        code = (code << 1) | static_cast<std::uint64_t>(next_bit());
        if (count_[len] != 0 && code >= first_code_[len] && code - first_code_[len] < count_[len]) {
            return sorted_[first_index_[len] + (code - first_code_[len])];
        }
    }
    throw Error(Errc::CorruptStream, "bit pattern matches no code");
}

}  // namespace cdc
