#include "cdc/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

#include "cdc/bit_io.hpp"
#include "cdc/error.hpp"

namespace cdc {

namespace {

constexpr std::uint8_t kMaxCodeLength = 63;

std::vector<Symbol> raw_col_symbols(std::span<const std::uint32_t> v) { return {v.begin(), v.end()}; }

}  // namespace

SymbolHistogram SymbolHistogram::of(std::span<const Symbol> symbols) {
    SymbolHistogram h;
    for (auto s : symbols) ++h.counts[s];
    return h;
}

std::uint64_t SymbolHistogram::total() const noexcept {
    std::uint64_t t = 0;
    for (const auto& [s, c] : counts) t += c;
    return t;
}

double empirical_entropy(const SymbolHistogram& hist) noexcept {
    const double total = static_cast<double>(hist.total());
    double h = 0.0;
    for (const auto& [s, c] : hist.counts) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

HuffmanCodeTable::HuffmanCodeTable(std::map<Symbol, std::uint8_t> lengths) : lengths_(std::move(lengths)) {
    if (lengths_.empty()) return;

    std::vector<std::pair<std::uint8_t, Symbol>> order;
    order.reserve(lengths_.size());
    std::uint8_t max_len = 0;
    for (const auto& [sym, len] : lengths_) {
        if (len == 0 || len > kMaxCodeLength) {
            throw Error(Errc::CorruptStream, "code length " + std::to_string(len) + " out of range");
        }
        order.emplace_back(len, sym);
        max_len = std::max(max_len, len);
    }
    if (lengths_.size() == 1) {
        if (max_len != 1) throw Error(Errc::CorruptStream, "single-symbol code must have length 1");
    } else {
        // Kraft sum scaled by 2^63 must be exactly 2^63 for a complete code.
        std::uint64_t kraft = 0;
        for (const auto& [len, sym] : order) kraft += std::uint64_t{1} << (kMaxCodeLength - len);
        if (kraft != std::uint64_t{1} << kMaxCodeLength) {
            throw Error(Errc::CorruptStream, "code lengths do not form a complete prefix code");
        }
    }
    std::sort(order.begin(), order.end());

    first_code_.assign(max_len + 1u, 0);
    first_index_.assign(max_len + 1u, 0);
    count_.assign(max_len + 1u, 0);
    sorted_.reserve(order.size());

    std::uint64_t code = 0;
    std::uint8_t prev_len = order.front().first;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto [len, sym] = order[i];
        if (i > 0) {
            ++code;
            code <<= (len - prev_len);
        }
        if (count_[len] == 0) {
            first_code_[len] = code;
            first_index_[len] = static_cast<std::uint32_t>(i);
        }
        ++count_[len];
        codes_[sym] = {code, len};
        sorted_.push_back(sym);
        prev_len = len;
    }
}

HuffmanCodeTable::Code HuffmanCodeTable::code(Symbol s) const {
    auto it = codes_.find(s);
    if (it == codes_.end()) {
        throw Error(Errc::UnknownSymbol, "symbol " + std::to_string(s) + " not in code table");
    }
    return it->second;
}

HuffmanCodeTable build_table(const SymbolHistogram& hist) {
    if (hist.counts.empty()) {
        throw Error(Errc::EmptyHistogram, "cannot build a code for an empty alphabet");
    }
    std::map<Symbol, std::uint8_t> lengths;
    if (hist.counts.size() == 1) {
        lengths[hist.counts.begin()->first] = 1;
        return HuffmanCodeTable(std::move(lengths));
    }

    // (weight, smallest symbol, node id); leaves per node tracked for depth updates.
    using Node = std::tuple<std::uint64_t, Symbol, std::size_t>;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
    std::vector<std::vector<Symbol>> leaves;
    for (const auto& [sym, count] : hist.counts) {
        heap.emplace(count, sym, leaves.size());
        leaves.push_back({sym});
        lengths[sym] = 0;
    }
    while (heap.size() > 1) {
        auto [wa, sa, a] = heap.top();
        heap.pop();
        auto [wb, sb, b] = heap.top();
        heap.pop();
        std::vector<Symbol> merged = std::move(leaves[a]);
        merged.insert(merged.end(), leaves[b].begin(), leaves[b].end());
        leaves[b].clear();
        for (auto s : merged) {
            if (++lengths[s] > kMaxCodeLength) {
                throw Error(Errc::SizeExceeded, "code length exceeds 63 bits");
            }
        }
        heap.emplace(wa + wb, std::min(sa, sb), leaves.size());
        leaves.push_back(std::move(merged));
    }
    return HuffmanCodeTable(std::move(lengths));
}

EncodedStream encode(std::span<const Symbol> symbols, const HuffmanCodeTable& table) {
    BitWriter w;
    for (auto s : symbols) {
        const auto c = table.code(s);
        w.put_msb_first(c.bits, c.length);
    }
    EncodedStream out;
    out.table = table;
    out.bit_count = w.bit_count();
    out.payload = w.take();
    return out;
}

std::vector<Symbol> decode(const EncodedStream& stream, std::size_t expected_count) {
    BitReader r(stream.payload, stream.bit_count);
    std::vector<Symbol> out;
    out.reserve(expected_count);
    for (std::size_t i = 0; i < expected_count; ++i) {
        out.push_back(stream.table.decode_one([&] { return r.get_bit(); }));
    }
    if (r.remaining() != 0) {
        throw Error(Errc::CorruptStream, std::to_string(r.remaining()) + " bits left after last symbol");
    }
    return out;
}

EncodedStream encode_with_own_table(std::span<const Symbol> symbols) {
    if (symbols.empty()) return {};
    return encode(symbols, build_table(SymbolHistogram::of(symbols)));
}

bool serializable(const SymbolHistogram& hist) noexcept {
    return hist.counts.size() <= std::numeric_limits<std::uint16_t>::max() &&
           (hist.counts.empty() || hist.counts.rbegin()->first <= std::numeric_limits<std::uint16_t>::max());
}

void write_table(ByteWriter& w, const HuffmanCodeTable& table) {
    if (table.size() > std::numeric_limits<std::uint16_t>::max()) {
        throw Error(Errc::SizeExceeded, "code table has more than 65535 symbols");
    }
    w.u16(static_cast<std::uint16_t>(table.size()));
    for (const auto& [sym, len] : table.lengths()) {
        if (sym > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(Errc::SizeExceeded, "symbol " + std::to_string(sym) + " does not fit 16 bits");
        }
        w.u16(static_cast<std::uint16_t>(sym));
        w.u8(len);
    }
}

HuffmanCodeTable read_table(ByteReader& r) {
    const auto n = r.u16();
    std::map<Symbol, std::uint8_t> lengths;
    Symbol prev = 0;
    for (std::uint16_t i = 0; i < n; ++i) {
        const Symbol sym = r.u16();
        const auto len = r.u8();
        if (i > 0 && sym <= prev) {
            throw Error(Errc::CorruptStream, "code table symbols not strictly increasing");
        }
        lengths[sym] = len;
        prev = sym;
    }
    return HuffmanCodeTable(std::move(lengths));
}

void write_stream(ByteWriter& w, const EncodedStream& s) {
    write_table(w, s.table);
    w.u64(s.bit_count);
    w.bytes(s.payload);
}

EncodedStream read_stream(ByteReader& r) {
    EncodedStream s;
    s.table = read_table(r);
    s.bit_count = r.u64();
    if (s.bit_count > std::numeric_limits<std::uint64_t>::max() - 7) {
        throw Error(Errc::CorruptStream, "bit count overflows");
    }
    auto bytes = r.bytes(static_cast<std::size_t>((s.bit_count + 7) / 8));
    s.payload.assign(bytes.begin(), bytes.end());
    return s;
}

std::vector<float> distinct_components(const Codebook& cb, bool real) {
    std::vector<float> v;
    v.reserve(cb.size());
    for (auto c : cb.centroids) v.push_back(real ? c.re : c.im);
    auto key = [](float f) { return std::make_pair(f, std::bit_cast<std::uint32_t>(f)); };
    std::sort(v.begin(), v.end(), [&](float a, float b) { return key(a) < key(b); });
    v.erase(std::unique(v.begin(), v.end(),
                        [](float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }),
            v.end());
    return v;
}

namespace {

std::vector<Symbol> component_ranks(const QuantizedLayer& q, const std::vector<float>& dict, bool real) {
    std::map<std::uint32_t, Symbol> rank;
    for (std::size_t i = 0; i < dict.size(); ++i) rank[std::bit_cast<std::uint32_t>(dict[i])] = static_cast<Symbol>(i);
    std::vector<Symbol> out;
    out.reserve(q.nnz());
    for (auto idx : q.indices) {
        const auto c = q.codebook.centroids[idx];
        out.push_back(rank.at(std::bit_cast<std::uint32_t>(real ? c.re : c.im)));
    }
    return out;
}

}  // namespace

QuantizedStreams encode_quantized(const QuantizedLayer& q, EntropyMode mode) {
    q.validate();
    QuantizedStreams s;
    s.mode = mode;
    switch (mode) {
        case EntropyMode::SplitValues: {
            s.real_dict = distinct_components(q.codebook, true);
            s.imag_dict = distinct_components(q.codebook, false);
            s.value_streams.push_back(encode_with_own_table(component_ranks(q, s.real_dict, true)));
            s.value_streams.push_back(encode_with_own_table(component_ranks(q, s.imag_dict, false)));
            break;
        }
        case EntropyMode::Indices:
            s.value_streams.push_back(encode_with_own_table(q.indices));
            break;
        case EntropyMode::None:
            throw Error(Errc::InvalidConfig, "entropy mode 'none' has no streams");
    }
    if (serializable(SymbolHistogram::of(q.col_idx))) {
        s.col_idx = encode_with_own_table(raw_col_symbols(q.col_idx));
    }
    return s;
}

std::vector<std::uint32_t> decode_indices(const QuantizedStreams& s, const Codebook& cb, std::size_t nnz) {
    switch (s.mode) {
        case EntropyMode::Indices: {
            if (s.value_streams.size() != 1) throw Error(Errc::CorruptStream, "index mode needs one stream");
            return decode(s.value_streams[0], nnz);
        }
        case EntropyMode::SplitValues: {
            if (s.value_streams.size() != 2) throw Error(Errc::CorruptStream, "split mode needs two streams");
            const auto re = decode(s.value_streams[0], nnz);
            const auto im = decode(s.value_streams[1], nnz);
            std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> lookup;
            for (std::size_t i = cb.size(); i-- > 0;) {
                const auto c = cb.centroids[i];
                lookup[{std::bit_cast<std::uint32_t>(c.re), std::bit_cast<std::uint32_t>(c.im)}] =
                    static_cast<std::uint32_t>(i);
            }
            std::vector<std::uint32_t> out(nnz);
            for (std::size_t k = 0; k < nnz; ++k) {
                if (re[k] >= s.real_dict.size() || im[k] >= s.imag_dict.size()) {
                    throw Error(Errc::CorruptStream, "component rank outside dictionary");
                }
                auto it = lookup.find({std::bit_cast<std::uint32_t>(s.real_dict[re[k]]),
                                       std::bit_cast<std::uint32_t>(s.imag_dict[im[k]])});
                if (it == lookup.end()) {
                    throw Error(Errc::CorruptStream, "component pair is not a codebook entry");
                }
                out[k] = it->second;
            }
            return out;
        }
        case EntropyMode::None:
            break;
    }
    throw Error(Errc::CorruptStream, "no entropy-coded streams");
}

std::vector<std::uint32_t> decode_col_idx(const QuantizedStreams& s, std::size_t nnz) {
    if (!s.col_idx) throw Error(Errc::CorruptStream, "column index stream missing");
    return decode(*s.col_idx, nnz);
}

}  // namespace cdc
