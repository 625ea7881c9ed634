#include "cdc/container.hpp"

#include <fnmatch.h>
#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "cdc/bit_io.hpp"
#include "cdc/byte_io.hpp"
#include "cdc/error.hpp"
#include "cdc/parallel.hpp"

namespace cdc {

namespace {

constexpr char kCcnzMagic[4] = {'C', 'C', 'N', 'Z'};

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::size_t parse_count(const std::string& s) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v == 0 || v > kMaxClusters) {
        throw Error(Errc::InvalidConfig, "bad cluster count '" + s + "' (expected 1..65535)");
    }
    return v;
}

double parse_threshold(const std::string& s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size() || !(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::InvalidConfig, "bad threshold '" + s + "'");
    }
}

template <typename T, typename Parse>
LayerOverrides<T> parse_overrides(const std::string& text, T fallback, Parse parse, bool allow_default) {
    LayerOverrides<T> spec{fallback, {}};
    if (trim(text).empty()) return spec;
    for (const auto& item : split(text, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            if (!allow_default) throw Error(Errc::InvalidConfig, "expected pattern=value, got '" + item + "'");
            spec.fallback = parse(item);
            continue;
        }
        auto pattern = trim(item.substr(0, eq));
        if (pattern.empty()) throw Error(Errc::InvalidConfig, "empty layer pattern in '" + item + "'");
        spec.patterns.emplace_back(std::move(pattern), parse(trim(item.substr(eq + 1))));
    }
    return spec;
}

[[noreturn]] void rethrow_for_layer(const std::string& layer, const char* stage) {
    try {
        throw;
    } catch (const Error& e) {
        throw Error(e.code(), "layer '" + layer + "' (" + stage + "): " + e.what());
    }
}

void write_points(ByteWriter& w, std::span<const ComplexScalar> values) {
    for (auto v : values) {
        w.f32(v.re);
        w.f32(v.im);
    }
}

std::vector<ComplexScalar> read_points(std::span<const std::uint8_t> bytes, std::size_t count) {
    if (bytes.size() != count * 8) {
        throw Error(Errc::CorruptStream, "expected " + std::to_string(count * 8) + " value bytes, found " +
                                             std::to_string(bytes.size()));
    }
    ByteReader r(bytes, Errc::CorruptStream);
    std::vector<ComplexScalar> out(count);
    for (auto& v : out) {
        v.re = r.f32();
        v.im = r.f32();
    }
    return out;
}

std::vector<std::uint32_t> read_u32s(std::span<const std::uint8_t> bytes, std::size_t count) {
    if (bytes.size() != count * 4) {
        throw Error(Errc::CorruptStream, "expected " + std::to_string(count * 4) + " index bytes, found " +
                                             std::to_string(bytes.size()));
    }
    ByteReader r(bytes, Errc::CorruptStream);
    std::vector<std::uint32_t> out(count);
    for (auto& v : out) v = r.u32();
    return out;
}

void write_dict(ByteWriter& w, const std::vector<float>& dict) {
    w.u16(static_cast<std::uint16_t>(dict.size()));
    for (auto f : dict) w.f32(f);
}

std::vector<float> read_dict(ByteReader& r) {
    std::vector<float> dict(r.u16());
    for (auto& f : dict) f = r.f32();
    return dict;
}

void expect_end(const ByteReader& r, const char* what) {
    if (!r.at_end()) {
        throw Error(Errc::CorruptStream, std::to_string(r.remaining()) + " trailing bytes in " + what + " section");
    }
}

struct Structure {
    std::vector<std::uint32_t> row_ptr;
    std::vector<std::uint32_t> col_idx;
};

Structure decode_structure(const LayerRecord& rec) {
    Structure s;
    if (rec.flags & kLayerDense) {
        if (static_cast<std::uint64_t>(rec.rows) * rec.cols != rec.nnz) {
            throw Error(Errc::CorruptStream, "dense layer nnz does not equal rows x cols");
        }
        if (!rec.sections[kRowPtr].empty() || !rec.sections[kColIdx].empty()) {
            throw Error(Errc::CorruptStream, "dense layer carries structure sections");
        }
        s.row_ptr.resize(static_cast<std::size_t>(rec.rows) + 1);
        for (std::uint32_t r = 0; r <= rec.rows; ++r) s.row_ptr[r] = r * rec.cols;
        s.col_idx.resize(rec.nnz);
        for (std::size_t k = 0; k < rec.nnz; ++k) s.col_idx[k] = static_cast<std::uint32_t>(k % rec.cols);
        return s;
    }
    s.row_ptr = read_u32s(rec.sections[kRowPtr], static_cast<std::size_t>(rec.rows) + 1);
    if (rec.flags & kLayerColHuffman) {
        ByteReader r(rec.sections[kColIdx], Errc::CorruptStream);
        auto stream = read_stream(r);
        expect_end(r, "col_idx");
        s.col_idx = decode(stream, rec.nnz);
    } else {
        s.col_idx = read_u32s(rec.sections[kColIdx], rec.nnz);
    }
    return s;
}

Codebook decode_codebook(const LayerRecord& rec) {
    Codebook cb;
    cb.centroids = read_points(rec.sections[kCodebook], rec.clusters);
    cb.validate();
    return cb;
}

std::vector<std::uint32_t> decode_index_table(const LayerRecord& rec, const Codebook& cb) {
    const auto& bytes = rec.sections[kValues];
    if (!(rec.flags & kLayerHuffman)) {
        return unpack_bits(bytes, rec.nnz, index_bit_width(rec.clusters));
    }
    QuantizedStreams s;
    s.mode = rec.entropy;
    ByteReader r(bytes, Errc::CorruptStream);
    if (rec.entropy == EntropyMode::SplitValues) {
        s.real_dict = read_dict(r);
        s.imag_dict = read_dict(r);
        s.value_streams.push_back(read_stream(r));
        s.value_streams.push_back(read_stream(r));
    } else if (rec.entropy == EntropyMode::Indices) {
        s.value_streams.push_back(read_stream(r));
    } else {
        throw Error(Errc::CorruptStream, "huffman layer without an entropy mode");
    }
    expect_end(r, "values");
    return decode_indices(s, cb, rec.nnz);
}

}  // namespace

template <typename T>
T LayerOverrides<T>::for_layer(const std::string& name) const {
    for (const auto& [pattern, value] : patterns) {
        if (glob_match(pattern, name)) return value;
    }
    return fallback;
}

template struct LayerOverrides<std::size_t>;
template struct LayerOverrides<double>;

bool glob_match(const std::string& pattern, const std::string& name) {
    return ::fnmatch(pattern.c_str(), name.c_str(), 0) == 0;
}

ClusterSpec parse_cluster_spec(const std::string& text, std::size_t fallback) {
    return parse_overrides<std::size_t>(text, fallback, parse_count, true);
}

ThresholdSpec parse_threshold_overrides(const std::string& text, double fallback) {
    return parse_overrides<double>(text, fallback, parse_threshold, false);
}

void PipelineConfig::validate() const {
    prune.validate();
    for (const auto& [pattern, t] : threshold_overrides) {
        if (!(t >= 0.0) || !std::isfinite(t)) {
            throw Error(Errc::InvalidConfig, "threshold override for '" + pattern + "' must be >= 0");
        }
    }
    auto check_count = [](std::size_t m) {
        if (m == 0 || m > kMaxClusters) {
            throw Error(Errc::InvalidConfig, "cluster count " + std::to_string(m) + " outside [1, 65535]");
        }
    };
    check_count(clusters.fallback);
    for (const auto& [p, m] : clusters.patterns) check_count(m);
    if (stages.huffman && entropy_mode != EntropyMode::None && !stages.quantize) {
        throw Error(Errc::InvalidConfig, "huffman coding requires the quantize stage");
    }
    if (!(kmeans.rel_tol >= 0.0)) {
        throw Error(Errc::InvalidConfig, "rel_tol must be >= 0");
    }
}

StageSet PipelineConfig::effective_stages() const noexcept {
    StageSet s = stages;
    if (entropy_mode == EntropyMode::None) s.huffman = false;
    return s;
}

double PipelineConfig::threshold_for(const std::string& layer) const {
    if (!stages.prune) return 0.0;
    for (const auto& [pattern, t] : threshold_overrides) {
        if (glob_match(pattern, layer)) return t;
    }
    return prune.threshold;
}

PipelineConfig identity_config() {
    PipelineConfig cfg;
    cfg.prune.threshold = 0.0;
    cfg.stages = {true, false, false};
    cfg.entropy_mode = EntropyMode::None;
    return cfg;
}

std::uint64_t LayerRecord::header_bytes() const noexcept {
    // name len + name + rank + extents + flags + entropy + threshold
    // + rows/cols/nnz/clusters + four section lengths
    return 2 + name.size() + 1 + 4 * shape.size() + 1 + 1 + 8 + 16 + 8 * kSectionCount;
}

std::uint64_t CompressedModel::file_bytes() const noexcept {
    std::uint64_t n = kCcnzFixedOverhead;
    for (const auto& l : layers) n += l.total_bytes();
    return n;
}

std::uint64_t CompressedModel::payload_bytes() const noexcept {
    std::uint64_t n = 0;
    for (const auto& l : layers) n += l.payload_bytes();
    return n;
}

std::vector<LayerArtifacts> run_stages(const RawModel& model, const PipelineConfig& cfg) {
    cfg.validate();
    model.validate();
    const auto stages = cfg.effective_stages();
    std::vector<LayerArtifacts> out(model.layers.size());
    // Whole layers go to workers; a lone layer gets the threads for its k-means.
    const unsigned layer_threads = model.layers.size() > 1 ? cfg.threads : 1u;
    KMeansParams km = cfg.kmeans;
    km.threads = model.layers.size() > 1 ? 1u : cfg.threads;

    parallel_items(model.layers.size(), layer_threads, [&](std::size_t i) {
        const auto& layer = model.layers[i];
        auto& a = out[i];
        a.name = layer.name();
        a.shape = layer.shape();
        a.weights = layer.size();
        a.threshold = cfg.threshold_for(layer.name());
        try {
            PruneConfig pc{a.threshold, cfg.prune.key};
            a.sparse = prune(layer, pc);
        } catch (...) {
            rethrow_for_layer(a.name, "prune");
        }
        if (!stages.quantize) return;
        try {
            a.quantized = quantize_layer(a.sparse, cfg.clusters.for_layer(a.name), cfg.init, km, a.shape);
        } catch (...) {
            rethrow_for_layer(a.name, "quantize");
        }
        if (!stages.huffman) return;
        try {
            a.streams = encode_quantized(a.quantized->layer, cfg.entropy_mode);
        } catch (...) {
            rethrow_for_layer(a.name, "huffman");
        }
    });
    return out;
}

LayerRecord encode_layer(const LayerArtifacts& a, StageSet stages, EntropyMode mode) {
    if ((stages.quantize && !a.quantized) || (stages.huffman && (!a.streams || !stages.quantize))) {
        throw Error(Errc::InvalidConfig, "layer '" + a.name + "' lacks artifacts for the requested stages");
    }
    LayerRecord rec;
    rec.name = a.name;
    rec.shape = a.shape;
    rec.threshold = a.threshold;
    rec.rows = a.sparse.rows;
    rec.cols = a.sparse.cols;
    rec.nnz = static_cast<std::uint32_t>(a.sparse.nnz());
    rec.entropy = stages.huffman ? mode : EntropyMode::None;
    rec.flags = stages.prune ? kLayerPruned : 0;
    const bool dense = static_cast<std::uint64_t>(rec.rows) * rec.cols == rec.nnz;
    if (dense) rec.flags |= kLayerDense;

    if (!dense) {
        ByteWriter rp;
        for (auto v : a.sparse.row_ptr) rp.u32(v);
        rec.sections[kRowPtr] = rp.take();
        ByteWriter ci;
        for (auto v : a.sparse.col_idx) ci.u32(v);
        rec.sections[kColIdx] = ci.take();
        if (stages.huffman && a.streams->col_idx) {
            ByteWriter coded;
            write_stream(coded, *a.streams->col_idx);
            if (coded.size() < rec.sections[kColIdx].size()) {
                rec.flags |= kLayerColHuffman;
                rec.sections[kColIdx] = coded.take();
            }
        }
    }

    if (!stages.quantize) {
        ByteWriter vw;
        write_points(vw, a.sparse.values);
        rec.sections[kValues] = vw.take();
        return rec;
    }

    const auto& q = a.quantized->layer;
    rec.flags |= kLayerQuantized;
    rec.clusters = static_cast<std::uint32_t>(q.codebook.size());
    ByteWriter cb;
    write_points(cb, q.codebook.centroids);
    rec.sections[kCodebook] = cb.take();

    rec.sections[kValues] = pack_bits(q.indices, index_bit_width(rec.clusters));
    if (!stages.huffman) return rec;

    // Entropy coding is kept only where it wins; split streams over a large
    // 2D codebook can cost more than the packed index table.
    const auto& s = *a.streams;
    ByteWriter vw;
    if (s.mode == EntropyMode::SplitValues) {
        write_dict(vw, s.real_dict);
        write_dict(vw, s.imag_dict);
    }
    for (const auto& st : s.value_streams) write_stream(vw, st);
    if (vw.size() < rec.sections[kValues].size()) {
        rec.flags |= kLayerHuffman;
        rec.sections[kValues] = vw.take();
    } else {
        rec.entropy = EntropyMode::None;
    }
    return rec;
}

ConfigEcho echo_config(const PipelineConfig& cfg) {
    ConfigEcho e;
    const auto stages = cfg.effective_stages();
    e.threshold = stages.prune ? cfg.prune.threshold : 0.0;
    e.prune_key = cfg.prune.key;
    e.init = cfg.init.kind;
    e.entropy = stages.huffman ? cfg.entropy_mode : EntropyMode::None;
    e.stages = stages.bits();
    e.seed = cfg.init.seed;
    e.max_iters = cfg.kmeans.max_iters;
    e.rel_tol = cfg.kmeans.rel_tol;
    return e;
}

CompressedModel compress(const RawModel& model, const PipelineConfig& cfg) {
    const auto artifacts = run_stages(model, cfg);
    CompressedModel c;
    c.config = echo_config(cfg);
    c.layers.reserve(artifacts.size());
    for (const auto& a : artifacts) {
        c.layers.push_back(encode_layer(a, cfg.effective_stages(), cfg.entropy_mode));
    }
    return c;
}

QuantizedLayer decode_quantized(const LayerRecord& rec) {
    if (!(rec.flags & kLayerQuantized)) {
        throw Error(Errc::InvalidArgument, "layer '" + rec.name + "' is not quantized");
    }
    try {
        const auto dims = matrixize(rec.shape);
        if (dims.rows != rec.rows || dims.cols != rec.cols) {
            throw Error(Errc::ShapeMismatch, "record dimensions disagree with shape");
        }
        auto st = decode_structure(rec);
        QuantizedLayer q;
        q.rows = rec.rows;
        q.cols = rec.cols;
        q.row_ptr = std::move(st.row_ptr);
        q.col_idx = std::move(st.col_idx);
        q.original_shape = rec.shape;
        q.codebook = decode_codebook(rec);
        q.indices = decode_index_table(rec, q.codebook);
        q.validate();
        return q;
    } catch (...) {
        rethrow_for_layer(rec.name, "decode");
    }
}

ComplexTensor decode_layer(const LayerRecord& rec) {
    if (rec.flags & kLayerQuantized) {
        auto q = decode_quantized(rec);
        try {
            return densify(dequantize_layer(q), rec.shape, rec.name);
        } catch (...) {
            rethrow_for_layer(rec.name, "decode");
        }
    }
    try {
        auto st = decode_structure(rec);
        SparseComplexMatrix s;
        s.rows = rec.rows;
        s.cols = rec.cols;
        s.row_ptr = std::move(st.row_ptr);
        s.col_idx = std::move(st.col_idx);
        s.values = read_points(rec.sections[kValues], rec.nnz);
        return densify(s, rec.shape, rec.name);
    } catch (...) {
        rethrow_for_layer(rec.name, "decode");
    }
}

RawModel decompress(const CompressedModel& c) {
    RawModel m;
    m.layers.reserve(c.layers.size());
    for (const auto& rec : c.layers) m.layers.push_back(decode_layer(rec));
    m.validate();
    return m;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) noexcept {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = ::crc32(crc, bytes.data() + off, chunk);
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize(const CompressedModel& c) {
    ByteWriter w;
    w.chars({kCcnzMagic, 4});
    w.u16(kCcnzVersion);
    w.u16(c.config.stages);
    w.u32(static_cast<std::uint32_t>(c.layers.size()));
    w.u32(0);  // CRC placeholder

    const auto& e = c.config;
    w.f64(e.threshold);
    w.u8(static_cast<std::uint8_t>(e.prune_key));
    w.u8(static_cast<std::uint8_t>(e.init));
    w.u8(static_cast<std::uint8_t>(e.entropy));
    w.u8(e.stages);
    w.u64(e.seed);
    w.u32(e.max_iters);
    w.f64(e.rel_tol);

    for (const auto& l : c.layers) {
        if (l.name.size() > std::numeric_limits<std::uint16_t>::max() ||
            l.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
            throw Error(Errc::InvalidArgument, "layer '" + l.name + "' name or rank too large");
        }
        w.u16(static_cast<std::uint16_t>(l.name.size()));
        w.chars(l.name);
        w.u8(static_cast<std::uint8_t>(l.shape.size()));
        for (auto d : l.shape) w.u32(d);
        w.u8(l.flags);
        w.u8(static_cast<std::uint8_t>(l.entropy));
        w.f64(l.threshold);
        w.u32(l.rows);
        w.u32(l.cols);
        w.u32(l.nnz);
        w.u32(l.clusters);
        for (const auto& s : l.sections) w.u64(s.size());
        for (const auto& s : l.sections) w.bytes(s);
    }

    auto bytes = w.take();
    const auto crc = crc32_of(std::span(bytes).subspan(kCcnzHeaderSize));
    for (int i = 0; i < 4; ++i) bytes[12 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
    return bytes;
}

CompressedModel deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || !std::equal(kCcnzMagic, kCcnzMagic + 4, bytes.begin())) {
        throw Error(Errc::MagicMismatch, "not a CCNZ file");
    }
    ByteReader r(bytes, Errc::TruncatedFile);
    r.bytes(4);
    const auto version = r.u16();
    if (version != kCcnzVersion) {
        throw Error(Errc::VersionUnsupported, "CCNZ version " + std::to_string(version));
    }
    const auto flags = r.u16();
    const auto count = r.u32();
    const auto crc = r.u32();
    if (crc32_of(bytes.subspan(kCcnzHeaderSize)) != crc) {
        throw Error(Errc::ChecksumMismatch, "payload CRC32 does not match header");
    }

    CompressedModel c;
    auto& e = c.config;
    e.threshold = r.f64();
    e.prune_key = static_cast<PruneKey>(r.u8());
    e.init = static_cast<InitKind>(r.u8());
    e.entropy = static_cast<EntropyMode>(r.u8());
    e.stages = r.u8();
    e.seed = r.u64();
    e.max_iters = r.u32();
    e.rel_tol = r.f64();
    if (e.stages != flags) {
        throw Error(Errc::CorruptStream, "header flags disagree with config echo");
    }

    c.layers.reserve(std::min<std::size_t>(count, 4096));
    for (std::uint32_t i = 0; i < count; ++i) {
        LayerRecord l;
        l.name = r.chars(r.u16());
        l.shape.resize(r.u8());
        for (auto& d : l.shape) d = r.u32();
        l.flags = r.u8();
        l.entropy = static_cast<EntropyMode>(r.u8());
        l.threshold = r.f64();
        l.rows = r.u32();
        l.cols = r.u32();
        l.nnz = r.u32();
        l.clusters = r.u32();
        std::array<std::uint64_t, kSectionCount> lens{};
        for (auto& n : lens) n = r.u64();
        for (std::size_t s = 0; s < kSectionCount; ++s) {
            if (lens[s] > r.remaining()) {
                throw Error(Errc::TruncatedFile, "layer '" + l.name + "' section runs past end of file");
            }
            auto b = r.bytes(static_cast<std::size_t>(lens[s]));
            l.sections[s].assign(b.begin(), b.end());
        }
        c.layers.push_back(std::move(l));
    }
    if (!r.at_end()) {
        throw Error(Errc::CorruptStream, std::to_string(r.remaining()) + " trailing bytes after last layer");
    }
    return c;
}

void write_container(const CompressedModel& c, const std::string& path) {
    write_file(path, serialize(c));
}

CompressedModel read_container(const std::string& path) {
    return deserialize(read_file(path));
}

}  // namespace cdc
