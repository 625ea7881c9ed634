#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdc/entropy.hpp"
#include "cdc/pruning.hpp"
#include "cdc/quantization.hpp"
#include "cdc/tensor.hpp"

namespace cdc {

/// A default value plus glob-pattern overrides keyed on layer name.
/// The first matching pattern wins.
template <typename T>
struct LayerOverrides {
    T fallback{};
    std::vector<std::pair<std::string, T>> patterns;

    T for_layer(const std::string& name) const;
};

using ClusterSpec = LayerOverrides<std::size_t>;
using ThresholdSpec = LayerOverrides<double>;

/// Parses "100", "conv*=100,dense*=256" or "64,conv*=100". Patterns without a
/// bare default fall back to `fallback`.
ClusterSpec parse_cluster_spec(const std::string& text, std::size_t fallback = 256);
ThresholdSpec parse_threshold_overrides(const std::string& text, double fallback);

bool glob_match(const std::string& pattern, const std::string& name);

struct StageSet {
    bool prune = true;
    bool quantize = true;
    bool huffman = true;

    std::uint8_t bits() const noexcept {
        return static_cast<std::uint8_t>((prune ? 1 : 0) | (quantize ? 2 : 0) | (huffman ? 4 : 0));
    }
    static StageSet from_bits(std::uint8_t b) noexcept { return {(b & 1) != 0, (b & 2) != 0, (b & 4) != 0}; }

    friend bool operator==(const StageSet&, const StageSet&) = default;
};

struct PipelineConfig {
    PruneConfig prune;                       // threshold here is the global default
    std::vector<std::pair<std::string, double>> threshold_overrides;
    ClusterSpec clusters{256, {}};
    InitScheme init = InitScheme::linear(InitKind::LinearNegative);
    KMeansParams kmeans;                     // kmeans.threads is ignored; see `threads`
    EntropyMode entropy_mode = EntropyMode::SplitValues;
    StageSet stages;
    unsigned threads = 1;

    /// Throws InvalidConfig (e.g. huffman without quantize).
    void validate() const;

    /// Stages actually applied: huffman is dropped when entropy_mode is None.
    StageSet effective_stages() const noexcept;

    double threshold_for(const std::string& layer) const;
};

/// Identity pipeline: prune at threshold 0, nothing else.
PipelineConfig identity_config();

enum LayerFlag : std::uint8_t {
    kLayerPruned = 1u << 0,
    kLayerQuantized = 1u << 1,
    kLayerHuffman = 1u << 2,
    kLayerDense = 1u << 3,      // every position stored; row_ptr/col_idx omitted
    kLayerColHuffman = 1u << 4, // col_idx section is an encoded stream
};

enum Section : std::size_t { kRowPtr = 0, kColIdx = 1, kCodebook = 2, kValues = 3, kSectionCount = 4 };

/// One layer of a CCNZ container: fixed header fields plus raw section bytes.
struct LayerRecord {
    std::string name;
    Shape shape;
    std::uint8_t flags = 0;
    EntropyMode entropy = EntropyMode::None;
    double threshold = 0.0;
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::uint32_t nnz = 0;
    std::uint32_t clusters = 0;
    std::array<std::vector<std::uint8_t>, kSectionCount> sections;

    std::uint64_t header_bytes() const noexcept;
    std::uint64_t structure_bytes() const noexcept { return sections[kRowPtr].size() + sections[kColIdx].size(); }
    std::uint64_t payload_bytes() const noexcept { return sections[kCodebook].size() + sections[kValues].size(); }
    std::uint64_t total_bytes() const noexcept { return header_bytes() + structure_bytes() + payload_bytes(); }

    friend bool operator==(const LayerRecord&, const LayerRecord&) = default;
};

struct ConfigEcho {
    double threshold = 0.0;
    PruneKey prune_key = PruneKey::Modulus;
    InitKind init = InitKind::LinearNegative;
    EntropyMode entropy = EntropyMode::None;
    std::uint8_t stages = 0;
    std::uint64_t seed = 0;
    std::uint32_t max_iters = 0;
    double rel_tol = 0.0;

    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

inline constexpr std::uint16_t kCcnzVersion = 1;
inline constexpr std::size_t kCcnzHeaderSize = 16;
inline constexpr std::size_t kConfigEchoSize = 32;
inline constexpr std::size_t kCcnzFixedOverhead = kCcnzHeaderSize + kConfigEchoSize;

struct CompressedModel {
    ConfigEcho config;
    std::vector<LayerRecord> layers;

    /// Exact serialized size: fixed overhead plus every record.
    std::uint64_t file_bytes() const noexcept;
    std::uint64_t payload_bytes() const noexcept;

    friend bool operator==(const CompressedModel&, const CompressedModel&) = default;
};

/// Intermediate products of the pipeline for one layer.
struct LayerArtifacts {
    std::string name;
    Shape shape;
    double threshold = 0.0;
    std::uint64_t weights = 0;
    SparseComplexMatrix sparse;
    std::optional<QuantizeResult> quantized;
    std::optional<QuantizedStreams> streams;
};

/// Prune and quantize (and entropy-code when enabled) every layer. Layers run
/// in parallel; results are in model order and independent of thread count.
std::vector<LayerArtifacts> run_stages(const RawModel& model, const PipelineConfig& cfg);

/// Serializes one layer as it would be stored with only `stages` applied.
/// `stages` must be a prefix of what `a` carries.
LayerRecord encode_layer(const LayerArtifacts& a, StageSet stages, EntropyMode mode);

ConfigEcho echo_config(const PipelineConfig& cfg);

CompressedModel compress(const RawModel& model, const PipelineConfig& cfg);
RawModel decompress(const CompressedModel& c);

/// Decodes one record back to a dense tensor.
ComplexTensor decode_layer(const LayerRecord& rec);

/// Decodes one record to its quantized form; throws if the layer is not quantized.
QuantizedLayer decode_quantized(const LayerRecord& rec);

std::vector<std::uint8_t> serialize(const CompressedModel& c);
CompressedModel deserialize(std::span<const std::uint8_t> bytes);

void write_container(const CompressedModel& c, const std::string& path);
CompressedModel read_container(const std::string& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace cdc
