#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdc/container.hpp"

namespace cdc {

/// Size of the model after one pipeline stage. Payload counts only what
/// encodes weight values (codebooks, value/index streams, their code tables);
/// file counts the whole container, including sparse structure and headers.
struct StageSize {
    std::string stage;  // raw, pruned, quantized, huffman
    std::uint64_t payload_bytes = 0;
    std::uint64_t file_bytes = 0;
    double payload_ratio = 1.0;  // raw payload / this payload
    double file_ratio = 1.0;     // raw file / this file
    double reduction = 1.0;      // previous stage payload / this payload
};

struct StreamEntropy {
    std::string stream;  // index, real, imag, col
    double bits_per_symbol = 0.0;
    std::size_t alphabet = 0;
};

struct LayerReport {
    std::string name;
    Shape shape;
    std::uint64_t weights = 0;
    std::uint64_t nnz = 0;
    double threshold = 0.0;
    double pruning_ratio = 0.0;
    std::size_t clusters = 0;
    unsigned index_bits = 0;
    bool all_pruned = false;
    std::optional<KMeansReport> kmeans;
    std::vector<StreamEntropy> entropies;
    std::uint64_t payload_bytes = 0;    // in the final container
    std::uint64_t structure_bytes = 0;  // row_ptr + col_idx in the final container
    std::uint64_t record_bytes = 0;     // whole record in the final container
};

struct StageReport {
    std::uint64_t raw_bytes = 0;
    std::vector<StageSize> stages;
    std::vector<LayerReport> layers;
    // Expected but not guaranteed: a codebook-heavy configuration can exceed the pruned size.
    bool quantized_within_pruned = true;
    bool sizes_monotone = true;

    const StageSize* stage(const std::string& name) const noexcept;
    double compression_ratio() const noexcept { return stages.empty() ? 1.0 : stages.back().payload_ratio; }
};

struct ReportRun {
    StageReport report;
    CompressedModel container;
};

/// Runs the pipeline once and measures each enabled stage. The returned
/// container is the same as compress(model, cfg).
ReportRun run_report(const RawModel& model, const PipelineConfig& cfg);
StageReport report(const RawModel& model, const PipelineConfig& cfg);

/// Per-layer statistics recovered from a stored container.
std::vector<LayerReport> inspect(const CompressedModel& c);

std::vector<StreamEntropy> stream_entropies(const QuantizedLayer& q, EntropyMode mode, bool dense);

/// Serialized CWT size of `model` (header plus every layer record).
std::uint64_t raw_file_bytes(const RawModel& model) noexcept;

struct SweepPoint {
    double threshold = 0.0;
    double pruning_ratio = 0.0;
    std::uint64_t nnz = 0;
};

/// Whole-model pruning ratio at each threshold.
std::vector<SweepPoint> threshold_sweep(const RawModel& model, const std::vector<double>& thresholds, PruneKey key,
                                        unsigned threads = 1);

struct LayerDiff {
    std::string name;
    double max_distance = 0.0;
    double rms_distance = 0.0;
};

/// Elementwise |a - b| per layer, matched by name. Throws ShapeMismatch when
/// the models do not hold the same layers and shapes.
std::vector<LayerDiff> diff_models(const RawModel& a, const RawModel& b);

std::string format_table(const StageReport& r);
std::string format_kv(const StageReport& r);
std::string format_inspect(const std::vector<LayerReport>& layers);

}  // namespace cdc
