// cdc: command-line front end for the complex-weight compressor.

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cdc/byte_io.hpp"
#include "cdc/container.hpp"
#include "cdc/error.hpp"
#include "cdc/parallel.hpp"
#include "cdc/report.hpp"
#include "cdc/tensor.hpp"

namespace {

using namespace cdc;

// Raised for bad flag values discovered after CLI11 has finished parsing.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::map<std::string, PruneKey> kPruneKeys{
    {"modulus", PruneKey::Modulus}, {"real", PruneKey::RealPart}, {"imag", PruneKey::ImagPart}};

const std::map<std::string, InitKind> kInits{
    {"forgy", InitKind::Forgy},
    {"density", InitKind::Density},
    {"linear-h", InitKind::LinearHorizontal},
    {"linear-v", InitKind::LinearVertical},
    {"linear-pos", InitKind::LinearPositive},
    {"linear-neg", InitKind::LinearNegative},
    {"linear-horizontal", InitKind::LinearHorizontal},
    {"linear-vertical", InitKind::LinearVertical},
    {"linear-positive", InitKind::LinearPositive},
    {"linear-negative", InitKind::LinearNegative},
};

const std::map<std::string, EntropyMode> kEntropy{
    {"split", EntropyMode::SplitValues}, {"indices", EntropyMode::Indices}, {"none", EntropyMode::None}};

struct CompressOpts {
    std::string input;
    std::string output;
    double threshold = 0.03;
    PruneKey prune_key = PruneKey::Modulus;
    std::string clusters = "256";
    std::string layer_thresholds;
    InitKind init = InitKind::LinearNegative;
    std::uint64_t seed = 0;
    EntropyMode entropy = EntropyMode::SplitValues;
    bool skip_prune = false;
    bool skip_quantize = false;
    bool skip_huffman = false;
    unsigned threads = default_thread_count();
    std::uint32_t max_iters = 300;
    double rel_tol = 1e-6;
    std::string report = "table";
};

void add_pipeline_flags(CLI::App* cmd, CompressOpts& o) {
    cmd->add_option("-t,--threshold", o.threshold, "pruning threshold")->capture_default_str()->check(CLI::NonNegativeNumber);
    cmd->add_option("--prune-key", o.prune_key, "quantity compared with the threshold")
        ->transform(CLI::CheckedTransformer(kPruneKeys))
        ->default_str("modulus");
    cmd->add_option("-c,--clusters", o.clusters, "cluster count, e.g. 100 or \"conv*=100,dense*=256\"")
        ->capture_default_str();
    cmd->add_option("--layer-threshold", o.layer_thresholds, "per-layer thresholds, e.g. \"fc*=0.01\"");
    cmd->add_option("--init", o.init, "centroid initialization")
        ->transform(CLI::CheckedTransformer(kInits))
        ->default_str("linear-neg");
    cmd->add_option("--seed", o.seed, "seed for forgy initialization")->capture_default_str();
    cmd->add_option("--entropy", o.entropy, "entropy coding of the quantized layers")
        ->transform(CLI::CheckedTransformer(kEntropy))
        ->default_str("split");
    cmd->add_flag("--skip-prune", o.skip_prune, "disable pruning");
    cmd->add_flag("--skip-quantize", o.skip_quantize, "disable weight sharing (implies --skip-huffman)");
    cmd->add_flag("--skip-huffman", o.skip_huffman, "store packed indices without entropy coding");
    cmd->add_option("-j,--threads", o.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", o.max_iters, "k-means iteration cap")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--rel-tol", o.rel_tol, "k-means relative WCSS tolerance")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--report", o.report, "report format")->check(CLI::IsMember({"table", "kv", "none"}))->capture_default_str();
}

PipelineConfig build_config(const CompressOpts& o) {
    PipelineConfig cfg;
    try {
        cfg.prune = {o.threshold, o.prune_key};
        cfg.clusters = parse_cluster_spec(o.clusters);
        if (!o.layer_thresholds.empty()) {
            const auto spec = parse_threshold_overrides(o.layer_thresholds, o.threshold);
            cfg.threshold_overrides = spec.patterns;
        }
        cfg.init = o.init == InitKind::Forgy ? InitScheme::forgy(o.seed) : InitScheme{o.init, o.seed};
        cfg.kmeans.max_iters = o.max_iters;
        cfg.kmeans.rel_tol = o.rel_tol;
        cfg.entropy_mode = o.entropy;
        cfg.stages.prune = !o.skip_prune;
        cfg.stages.quantize = !o.skip_quantize;
        cfg.stages.huffman = !o.skip_huffman && !o.skip_quantize;
        cfg.threads = o.threads;
        cfg.validate();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

void print_report(const StageReport& r, const std::string& format) {
    if (format == "table") std::cout << format_table(r);
    if (format == "kv") std::cout << format_kv(r);
}

int run_compress(const CompressOpts& o) {
    const auto cfg = build_config(o);
    const auto model = load_raw(o.input);
    const auto run = run_report(model, cfg);
    write_container(run.container, o.output);
    print_report(run.report, o.report);
    return 0;
}

int run_report_only(const CompressOpts& o) {
    const auto cfg = build_config(o);
    print_report(report(load_raw(o.input), cfg), o.report == "none" ? "table" : o.report);
    return 0;
}

bool is_container(const std::string& path) {
    const auto bytes = read_file(path);
    return bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "CCNZ");
}

RawModel load_any(const std::string& path) {
    return is_container(path) ? decompress(read_container(path)) : load_raw(path);
}

int run_stats(const std::string& input, const std::vector<std::string>& diff) {
    if (!diff.empty()) {
        const auto d = diff_models(load_any(diff[0]), load_any(diff[1]));
        double max_d = 0.0;
        for (const auto& l : d) {
            std::printf("layer.%s.max_distance: %.9g\n", l.name.c_str(), l.max_distance);
            std::printf("layer.%s.rms_distance: %.9g\n", l.name.c_str(), l.rms_distance);
            max_d = std::max(max_d, l.max_distance);
        }
        std::printf("max_distance: %.9g\n", max_d);
        return 0;
    }
    const auto model = load_any(input);
    std::uint64_t zeros = 0;
    for (const auto& l : model.layers) {
        const auto v = l.values();
        const auto z = std::count_if(v.begin(), v.end(), [](ComplexScalar w) { return w.re == 0.0f && w.im == 0.0f; });
        double sum = 0.0;
        double max_mod = 0.0;
        for (auto w : v) {
            sum += static_cast<double>(w.re) * w.re + static_cast<double>(w.im) * w.im;
            max_mod = std::max(max_mod, w.modulus());
        }
        zeros += static_cast<std::uint64_t>(z);
        const char* n = l.name().c_str();
        std::printf("layer.%s.shape: %s\n", n, shape_to_string(l.shape()).c_str());
        std::printf("layer.%s.weights: %zu\n", n, v.size());
        std::printf("layer.%s.zeros: %lld\n", n, static_cast<long long>(z));
        std::printf("layer.%s.rms_modulus: %.9g\n", n, v.empty() ? 0.0 : std::sqrt(sum / static_cast<double>(v.size())));
        std::printf("layer.%s.max_modulus: %.9g\n", n, max_mod);
    }
    std::printf("layers: %zu\n", model.layers.size());
    std::printf("weights: %llu\n", static_cast<unsigned long long>(model.weight_count()));
    std::printf("zeros: %llu\n", static_cast<unsigned long long>(zeros));
    std::printf("raw_bytes: %llu\n", static_cast<unsigned long long>(raw_file_bytes(model)));
    return 0;
}

int run_inspect(const std::string& input) {
    const auto c = read_container(input);
    std::cout << format_inspect(inspect(c));
    std::printf("file_bytes: %llu\npayload_bytes: %llu\n", static_cast<unsigned long long>(c.file_bytes()),
                static_cast<unsigned long long>(c.payload_bytes()));
    return 0;
}

int run_sweep(const std::string& input, const std::vector<double>& thresholds, PruneKey key, unsigned threads) {
    const auto pts = threshold_sweep(load_raw(input), thresholds, key, threads);
    std::printf("%-12s %-14s %s\n", "threshold", "pruned_pct", "nnz");
    for (const auto& p : pts) {
        std::printf("%-12g %-14.4f %llu\n", p.threshold, 100.0 * p.pruning_ratio, static_cast<unsigned long long>(p.nnz));
    }
    return 0;
}

Shape parse_extents(const std::string& text) {
    Shape s;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoul(part, &used);
            if (used != part.size() || v == 0 || v > 0xFFFFFFFFul) throw std::invalid_argument(part);
            s.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw UsageError("bad extent '" + part + "' in '" + text + "'");
        }
    }
    if (s.empty() || s.size() > 255) throw UsageError("bad shape '" + text + "'");
    return s;
}

int run_synth(const std::string& output, const std::vector<std::string>& layers, double sigma, std::uint64_t seed) {
    RawModel m;
    std::mt19937_64 rng(seed);
    for (const auto& spec : layers) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("layer spec '" + spec + "' is not NAME=AxBx...");
        const auto shape = parse_extents(spec.substr(eq + 1));
        std::normal_distribution<double> dist(0.0, sigma);
        std::vector<ComplexScalar> v(element_count(shape));
        for (auto& w : v) {
            w.re = static_cast<float>(dist(rng));
            w.im = static_cast<float>(dist(rng));
        }
        m.layers.emplace_back(spec.substr(0, eq), shape, std::move(v));
    }
    m.validate();
    save_raw(m, output);
    std::printf("layers: %zu\nweights: %llu\n", m.layers.size(), static_cast<unsigned long long>(m.weight_count()));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compress complex-valued network weights: prune, share, entropy-code."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cdc 0.1.0");

    CompressOpts co;
    auto* compress_cmd = app.add_subcommand("compress", "CWT -> CCNZ, printing the per-stage report");
    compress_cmd->add_option("-i,--input", co.input, "raw model (.cwt)")->required()->check(CLI::ExistingFile);
    compress_cmd->add_option("-o,--output", co.output, "container to write (.ccnz)")->required();
    add_pipeline_flags(compress_cmd, co);

    CompressOpts ro;
    auto* report_cmd = app.add_subcommand("report", "per-stage sizes without writing a container");
    report_cmd->add_option("-i,--input", ro.input, "raw model (.cwt)")->required()->check(CLI::ExistingFile);
    add_pipeline_flags(report_cmd, ro);

    std::string d_in;
    std::string d_out;
    auto* decompress_cmd = app.add_subcommand("decompress", "CCNZ -> CWT");
    decompress_cmd->add_option("-i,--input", d_in, "container (.ccnz)")->required()->check(CLI::ExistingFile);
    decompress_cmd->add_option("-o,--output", d_out, "raw model to write (.cwt)")->required();

    std::string s_in;
    std::vector<std::string> s_diff;
    auto* stats_cmd = app.add_subcommand("stats", "weight statistics, or distances between two models");
    auto* s_in_opt = stats_cmd->add_option("input", s_in, "model (.cwt or .ccnz)")->check(CLI::ExistingFile);
    auto* s_diff_opt = stats_cmd->add_option("--diff", s_diff, "two models to compare")->expected(2)->check(CLI::ExistingFile);
    s_in_opt->excludes(s_diff_opt);
    stats_cmd->callback([&] {
        if (s_in.empty() && s_diff.empty()) throw CLI::RequiredError("input or --diff");
    });

    std::string i_in;
    auto* inspect_cmd = app.add_subcommand("inspect", "per-layer contents of a container");
    inspect_cmd->add_option("input", i_in, "container (.ccnz)")->required()->check(CLI::ExistingFile);

    std::string w_in;
    std::vector<double> w_thresholds{0.01, 0.02, 0.03, 0.04, 0.05};
    PruneKey w_key = PruneKey::Modulus;
    unsigned w_threads = default_thread_count();
    auto* sweep_cmd = app.add_subcommand("sweep", "pruning ratio over a list of thresholds");
    sweep_cmd->add_option("-i,--input", w_in, "raw model (.cwt)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--thresholds", w_thresholds, "comma-separated thresholds")
        ->delimiter(',')
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--prune-key", w_key, "quantity compared with the threshold")
        ->transform(CLI::CheckedTransformer(kPruneKeys))
        ->default_str("modulus");
    sweep_cmd->add_option("-j,--threads", w_threads, "worker threads")->check(CLI::PositiveNumber);

    std::string y_out;
    std::vector<std::string> y_layers;
    double y_sigma = 0.02;
    std::uint64_t y_seed = 1;
    auto* synth_cmd = app.add_subcommand("synth", "write a model of Gaussian complex weights");
    synth_cmd->add_option("-o,--output", y_out, "raw model to write (.cwt)")->required();
    synth_cmd->add_option("--layer", y_layers, "NAME=AxBx... (repeatable)")->required();
    synth_cmd->add_option("--sigma", y_sigma, "standard deviation of each component")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", y_seed, "random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*compress_cmd) return run_compress(co);
        if (*report_cmd) return run_report_only(ro);
        if (*decompress_cmd) {
            save_raw(decompress(read_container(d_in)), d_out);
            return 0;
        }
        if (*stats_cmd) return run_stats(s_in, s_diff);
        if (*inspect_cmd) return run_inspect(i_in);
        if (*sweep_cmd) return run_sweep(w_in, w_thresholds, w_key, w_threads);
        if (*synth_cmd) return run_synth(y_out, y_layers, y_sigma, y_seed);
    } catch (const UsageError& e) {
        std::cerr << "cdc: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "cdc: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
