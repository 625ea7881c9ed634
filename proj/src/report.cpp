#include "cdc/report.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "cdc/bit_io.hpp"
#include "cdc/error.hpp"
#include "cdc/parallel.hpp"

namespace cdc {

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string human_bytes(std::uint64_t n) {
    if (n < 1024) return std::to_string(n) + " B";
    if (n < 1024 * 1024) return fmt("%.1f KiB", static_cast<double>(n) / 1024.0);
    return fmt("%.2f MiB", static_cast<double>(n) / (1024.0 * 1024.0));
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::vector<Symbol> component_symbols(const QuantizedLayer& q, bool real) {
    const auto dict = distinct_components(q.codebook, real);
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

StreamEntropy measure(std::string name, std::span<const Symbol> symbols) {
    const auto h = SymbolHistogram::of(symbols);
    return {std::move(name), empirical_entropy(h), h.alphabet_size()};
}

StageSize measure_stage(std::string name, const std::vector<LayerArtifacts>& artifacts, StageSet stages,
                        EntropyMode mode) {
    StageSize s;
    s.stage = std::move(name);
    s.file_bytes = kCcnzFixedOverhead;
    for (const auto& a : artifacts) {
        const auto rec = encode_layer(a, stages, mode);
        s.payload_bytes += rec.payload_bytes();
        s.file_bytes += rec.total_bytes();
    }
    return s;
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? std::numeric_limits<double>::infinity() : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

const StageSize* StageReport::stage(const std::string& name) const noexcept {
    for (const auto& s : stages) {
        if (s.stage == name) return &s;
    }
    return nullptr;
}

std::vector<StreamEntropy> stream_entropies(const QuantizedLayer& q, EntropyMode mode, bool dense) {
    std::vector<StreamEntropy> out;
    out.push_back(measure("index", q.indices));
    if (mode == EntropyMode::SplitValues) {
        out.push_back(measure("real", component_symbols(q, true)));
        out.push_back(measure("imag", component_symbols(q, false)));
    }
    if (!dense) out.push_back(measure("col", q.col_idx));
    return out;
}

std::uint64_t raw_file_bytes(const RawModel& model) noexcept {
    std::uint64_t n = kCwtHeaderSize;
    for (const auto& l : model.layers) n += 2 + l.name().size() + 1 + 4 * l.shape().size() + 8 * l.size();
    return n;
}

ReportRun run_report(const RawModel& model, const PipelineConfig& cfg) {
    const auto artifacts = run_stages(model, cfg);
    const auto stages = cfg.effective_stages();

    ReportRun run;
    auto& rep = run.report;
    rep.raw_bytes = total_raw_bytes(model);
    rep.stages.push_back({"raw", rep.raw_bytes, raw_file_bytes(model), 1.0, 1.0, 1.0});

    if (stages.prune) {
        rep.stages.push_back(measure_stage("pruned", artifacts, {stages.prune, false, false}, cfg.entropy_mode));
    }
    if (stages.quantize) {
        rep.stages.push_back(measure_stage("quantized", artifacts, {stages.prune, true, false}, cfg.entropy_mode));
    }
    run.container.config = echo_config(cfg);
    for (const auto& a : artifacts) run.container.layers.push_back(encode_layer(a, stages, cfg.entropy_mode));
    if (stages.huffman) {
        StageSize s{"huffman", run.container.payload_bytes(), run.container.file_bytes(), 1.0, 1.0, 1.0};
        rep.stages.push_back(s);
    }

    const auto& raw = rep.stages.front();
    for (std::size_t i = 0; i < rep.stages.size(); ++i) {
        auto& s = rep.stages[i];
        s.payload_ratio = ratio(raw.payload_bytes, s.payload_bytes);
        s.file_ratio = ratio(raw.file_bytes, s.file_bytes);
        s.reduction = i == 0 ? 1.0 : ratio(rep.stages[i - 1].payload_bytes, s.payload_bytes);
        if (i > 0 && s.payload_bytes > rep.stages[i - 1].payload_bytes) {
            if (s.stage == "quantized") {
                rep.quantized_within_pruned = false;
            }
            rep.sizes_monotone = false;
        }
    }

    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        const auto& a = artifacts[i];
        const auto& rec = run.container.layers[i];
        LayerReport lr;
        lr.name = a.name;
        lr.shape = a.shape;
        lr.weights = a.weights;
        lr.nnz = a.sparse.nnz();
        lr.threshold = a.threshold;
        lr.pruning_ratio = a.weights == 0 ? 0.0 : static_cast<double>(a.weights - lr.nnz) / static_cast<double>(a.weights);
        lr.all_pruned = lr.nnz == 0;
        if (a.quantized) {
            const auto& q = a.quantized->layer;
            lr.clusters = q.codebook.size();
            lr.index_bits = lr.clusters ? index_bit_width(lr.clusters) : 0;
            lr.kmeans = a.quantized->report;
            lr.entropies = stream_entropies(q, cfg.entropy_mode, (rec.flags & kLayerDense) != 0);
        }
        lr.payload_bytes = rec.payload_bytes();
        lr.structure_bytes = rec.structure_bytes();
        lr.record_bytes = rec.total_bytes();
        rep.layers.push_back(std::move(lr));
    }
    return run;
}

StageReport report(const RawModel& model, const PipelineConfig& cfg) { return run_report(model, cfg).report; }

std::vector<LayerReport> inspect(const CompressedModel& c) {
    std::vector<LayerReport> out;
    for (const auto& rec : c.layers) {
        LayerReport lr;
        lr.name = rec.name;
        lr.shape = rec.shape;
        lr.weights = element_count(rec.shape);
        lr.nnz = rec.nnz;
        lr.threshold = rec.threshold;
        lr.pruning_ratio = lr.weights == 0 ? 0.0 : static_cast<double>(lr.weights - lr.nnz) / static_cast<double>(lr.weights);
        lr.all_pruned = rec.nnz == 0;
        if (rec.flags & kLayerQuantized) {
            const auto q = decode_quantized(rec);
            lr.clusters = q.codebook.size();
            lr.index_bits = lr.clusters ? index_bit_width(lr.clusters) : 0;
            lr.entropies = stream_entropies(q, c.config.entropy, (rec.flags & kLayerDense) != 0);
        }
        lr.payload_bytes = rec.payload_bytes();
        lr.structure_bytes = rec.structure_bytes();
        lr.record_bytes = rec.total_bytes();
        out.push_back(std::move(lr));
    }
    return out;
}

std::vector<SweepPoint> threshold_sweep(const RawModel& model, const std::vector<double>& thresholds, PruneKey key,
                                        unsigned threads) {
    std::vector<SweepPoint> out(thresholds.size());
    const auto total = model.weight_count();
    parallel_items(thresholds.size(), threads, [&](std::size_t i) {
        std::uint64_t nnz = 0;
        for (const auto& layer : model.layers) nnz += prune(layer, {thresholds[i], key}).nnz();
        out[i] = {thresholds[i], total == 0 ? 0.0 : static_cast<double>(total - nnz) / static_cast<double>(total), nnz};
    });
    return out;
}

std::vector<LayerDiff> diff_models(const RawModel& a, const RawModel& b) {
    if (a.layers.size() != b.layers.size()) {
        throw Error(Errc::ShapeMismatch, "models hold " + std::to_string(a.layers.size()) + " and " +
                                             std::to_string(b.layers.size()) + " layers");
    }
    std::vector<LayerDiff> out;
    for (const auto& la : a.layers) {
        const auto* lb = b.find(la.name());
        if (lb == nullptr || lb->shape() != la.shape()) {
            throw Error(Errc::ShapeMismatch, "layer '" + la.name() + "' missing or reshaped in second model");
        }
        LayerDiff d{la.name(), 0.0, 0.0};
        const auto va = la.values();
        const auto vb = lb->values();
        double sum2 = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) {
            const double d2 = squared_distance(to_point(va[i]), to_point(vb[i]));
            sum2 += d2;
            d.max_distance = std::max(d.max_distance, std::sqrt(d2));
        }
        d.rms_distance = va.empty() ? 0.0 : std::sqrt(sum2 / static_cast<double>(va.size()));
        out.push_back(d);
    }
    return out;
}

std::string format_table(const StageReport& r) {
    std::ostringstream os;
    os << pad("stage", 10, true) << pad("payload", 14) << pad("ratio", 9) << pad("step", 8) << pad("file", 14)
       << pad("file ratio", 12) << "\n";
    for (const auto& s : r.stages) {
        os << pad(s.stage, 10, true) << pad(human_bytes(s.payload_bytes), 14) << pad(fmt("%.2f", s.payload_ratio), 9)
           << pad(fmt("%.2f", s.reduction), 8) << pad(human_bytes(s.file_bytes), 14)
           << pad(fmt("%.2f", s.file_ratio), 12) << "\n";
    }
    os << "\n"
       << pad("layer", 20, true) << pad("weights", 10) << pad("nnz", 10) << pad("pruned", 8) << pad("m", 7)
       << pad("bits", 5) << pad("iters", 6) << pad("wcss", 12) << pad("entropy(b/sym)", 28) << "\n";
    for (const auto& l : r.layers) {
        std::string ent;
        for (const auto& e : l.entropies) {
            if (!ent.empty()) ent += " ";
            ent += e.stream + "=" + fmt("%.2f", e.bits_per_symbol);
        }
        os << pad(l.name, 20, true) << pad(std::to_string(l.weights), 10) << pad(std::to_string(l.nnz), 10)
           << pad(fmt("%.1f%%", 100.0 * l.pruning_ratio), 8) << pad(l.clusters ? std::to_string(l.clusters) : "-", 7)
           << pad(l.index_bits ? std::to_string(l.index_bits) : "-", 5)
           << pad(l.kmeans ? std::to_string(l.kmeans->iterations) : "-", 6)
           << pad(l.kmeans ? fmt("%.4g", l.kmeans->final_wcss) : "-", 12) << "  " << ent;
        if (l.all_pruned) os << "  [all pruned]";
        os << "\n";
    }
    if (!r.quantized_within_pruned) {
        os << "note: quantized payload exceeds pruned payload (codebook-heavy configuration)\n";
    }
    return os.str();
}

std::string format_kv(const StageReport& r) {
    std::ostringstream os;
    os << "raw_bytes: " << r.raw_bytes << "\n";
    for (const auto& s : r.stages) {
        os << "stage." << s.stage << ".payload_bytes: " << s.payload_bytes << "\n";
        os << "stage." << s.stage << ".file_bytes: " << s.file_bytes << "\n";
        os << "stage." << s.stage << ".payload_ratio: " << fmt("%.6f", s.payload_ratio) << "\n";
        os << "stage." << s.stage << ".file_ratio: " << fmt("%.6f", s.file_ratio) << "\n";
        os << "stage." << s.stage << ".reduction: " << fmt("%.6f", s.reduction) << "\n";
    }
    os << "compression_ratio: " << fmt("%.6f", r.compression_ratio()) << "\n";
    os << "quantized_within_pruned: " << (r.quantized_within_pruned ? "true" : "false") << "\n";
    for (const auto& l : r.layers) {
        const std::string p = "layer." + l.name + ".";
        os << p << "weights: " << l.weights << "\n";
        os << p << "nnz: " << l.nnz << "\n";
        os << p << "threshold: " << fmt("%.9g", l.threshold) << "\n";
        os << p << "pruning_ratio: " << fmt("%.6f", l.pruning_ratio) << "\n";
        os << p << "clusters: " << l.clusters << "\n";
        os << p << "index_bits: " << l.index_bits << "\n";
        if (l.kmeans) {
            os << p << "kmeans.iterations: " << l.kmeans->iterations << "\n";
            os << p << "kmeans.final_wcss: " << fmt("%.9g", l.kmeans->final_wcss) << "\n";
            os << p << "kmeans.converged: " << (l.kmeans->converged ? "true" : "false") << "\n";
            os << p << "kmeans.max_distance: " << fmt("%.9g", l.kmeans->max_assignment_distance) << "\n";
        }
        for (const auto& e : l.entropies) {
            os << p << "entropy." << e.stream << ": " << fmt("%.6f", e.bits_per_symbol) << "\n";
        }
        os << p << "payload_bytes: " << l.payload_bytes << "\n";
        os << p << "structure_bytes: " << l.structure_bytes << "\n";
        os << p << "record_bytes: " << l.record_bytes << "\n";
    }
    return os.str();
}

std::string format_inspect(const std::vector<LayerReport>& layers) {
    std::ostringstream os;
    os << pad("layer", 20, true) << pad("shape", 16) << pad("nnz", 10) << pad("m", 7) << pad("bits", 5)
       << pad("payload", 12) << pad("struct", 12) << "  entropy(b/sym)\n";
    for (const auto& l : layers) {
        std::string ent;
        for (const auto& e : l.entropies) {
            if (!ent.empty()) ent += " ";
            ent += e.stream + "=" + fmt("%.2f", e.bits_per_symbol);
        }
        os << pad(l.name, 20, true) << pad(shape_to_string(l.shape), 16) << pad(std::to_string(l.nnz), 10)
           << pad(l.clusters ? std::to_string(l.clusters) : "-", 7)
           << pad(l.index_bits ? std::to_string(l.index_bits) : "-", 5) << pad(human_bytes(l.payload_bytes), 12)
           << pad(human_bytes(l.structure_bytes), 12) << "  " << ent << "\n";
    }
    return os.str();
}

}  // namespace cdc
