#include <algorithm>
#include <filesystem>
#include <random>

#include "cdc/container.hpp"
#include "cdc/error.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cdc;

namespace {

Errc code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected cdc::Error");
    return Errc::InvalidArgument;
}

PipelineConfig full_config(std::size_t m, double threshold, EntropyMode mode = EntropyMode::SplitValues) {
    PipelineConfig cfg;
    cfg.prune.threshold = threshold;
    cfg.clusters = {m, {}};
    cfg.entropy_mode = mode;
    return cfg;
}

}  // namespace

TEST_CASE("cluster and threshold specs") {
    auto c = parse_cluster_spec("100");
    CHECK(c.for_layer("anything") == 100);
    c = parse_cluster_spec("conv*=100,dense*=256", 64);
    CHECK(c.for_layer("conv1") == 100);
    CHECK(c.for_layer("dense_out") == 256);
    CHECK(c.for_layer("bn") == 64);
    c = parse_cluster_spec("32, stage1.*=90 ,stage2.*=100");
    CHECK(c.for_layer("stage1.conv") == 90);
    CHECK(c.for_layer("stage3.conv") == 32);
    CHECK_THROWS_AS(parse_cluster_spec("0"), Error);
    CHECK_THROWS_AS(parse_cluster_spec("conv*=70000"), Error);
    CHECK_THROWS_AS(parse_cluster_spec("abc"), Error);

    auto t = parse_threshold_overrides("fc*=0.01", 0.03);
    CHECK(t.for_layer("fc1") == 0.01);
    CHECK(t.for_layer("conv") == 0.03);
    CHECK_THROWS_AS(parse_threshold_overrides("0.5", 0.0), Error);
}

TEST_CASE("config validation") {
    PipelineConfig cfg;
    cfg.stages = {true, false, true};
    CHECK(code_of([&] { cfg.validate(); }) == Errc::InvalidConfig);
    cfg.entropy_mode = EntropyMode::None;
    CHECK_NOTHROW(cfg.validate());
    CHECK_FALSE(cfg.effective_stages().huffman);
}

TEST_CASE("identity pipeline round-trips bit-exactly") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = testing::random_model(rng);
        const auto c = compress(m, identity_config());
        const auto back = decompress(deserialize(serialize(c)));
        REQUIRE(back.layers.size() == m.layers.size());
        for (std::size_t i = 0; i < m.layers.size(); ++i) CHECK(back.layers[i] == m.layers[i]);
        for (const auto& rec : c.layers) CHECK((rec.flags & kLayerDense) != 0);
    }
}

TEST_CASE("empty model container") {
    const auto c = compress(RawModel{}, full_config(16, 0.01));
    const auto bytes = serialize(c);
    CHECK(bytes.size() == kCcnzFixedOverhead);
    CHECK(c.file_bytes() == bytes.size());
    CHECK(deserialize(bytes) == c);
    CHECK(decompress(c).layers.empty());
}

TEST_CASE("toy corner layer: 2 centroids and a 1-bit packed index table") {
    RawModel m;
    m.layers.emplace_back("toy", Shape{2, 2}, std::vector<ComplexScalar>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    auto cfg = full_config(2, 0.0);
    cfg.stages.huffman = false;
    cfg.init = InitScheme::linear(InitKind::LinearHorizontal);
    const auto c = compress(m, cfg);
    REQUIRE(c.layers.size() == 1);
    const auto& rec = c.layers[0];
    CHECK(rec.clusters == 2);
    CHECK(rec.sections[kCodebook].size() == 16);
    CHECK(rec.sections[kValues].size() == 1);  // 4 indices x 1 bit
    CHECK(rec.sections[kRowPtr].empty());      // dense: no structure
    CHECK(rec.sections[kColIdx].empty());
    // left column {0, j} and right column {1, 1+j}
    const auto q = decode_quantized(rec);
    CHECK(q.indices[0] == q.indices[2]);
    CHECK(q.indices[1] == q.indices[3]);
    CHECK(q.indices[0] != q.indices[1]);
    const auto out = decompress(c);
    CHECK(out.layers[0].values()[0] == ComplexScalar{0, 0.5f});
    CHECK(out.layers[0].values()[3] == ComplexScalar{1, 0.5f});
}

TEST_CASE("property: pruned positions are zero, the rest are codebook members") {
    std::mt19937_64 rng(17);
    const EntropyMode modes[] = {EntropyMode::SplitValues, EntropyMode::Indices, EntropyMode::None};
    for (int trial = 0; trial < 30; ++trial) {
        const auto m = testing::random_model(rng);
        auto cfg = full_config(1 + rng() % 20, 0.04, modes[trial % 3]);
        const auto c = compress(m, cfg);
        const auto back = decompress(deserialize(serialize(c)));
        for (std::size_t l = 0; l < m.layers.size(); ++l) {
            const auto q = decode_quantized(c.layers[l]);
            const auto orig = m.layers[l].values();
            const auto got = back.layers[l].values();
            for (std::size_t i = 0; i < orig.size(); ++i) {
                if (orig[i].modulus() < 0.04) {
                    CHECK(got[i] == ComplexScalar{0, 0});
                } else {
                    CHECK(std::find(q.codebook.centroids.begin(), q.codebook.centroids.end(), got[i]) !=
                          q.codebook.centroids.end());
                }
            }
        }
    }
}

TEST_CASE("huffman changes size but never values") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        RawModel m;
        m.layers.push_back(testing::gaussian_tensor("a", {32, 3, 3}, 0.05, rng()));
        m.layers.push_back(testing::gaussian_tensor("b", {100}, 0.05, rng()));
        auto with = full_config(24, 0.03);
        auto without = with;
        without.stages.huffman = false;
        auto idx = with;
        idx.entropy_mode = EntropyMode::Indices;
        const auto a = decompress(compress(m, with));
        const auto b = decompress(compress(m, without));
        const auto c = decompress(compress(m, idx));
        for (std::size_t l = 0; l < 2; ++l) {
            CHECK(a.layers[l] == b.layers[l]);
            CHECK(c.layers[l] == b.layers[l]);
        }
    }
}

TEST_CASE("quantization disabled keeps exact sparse values") {
    const auto t = testing::gaussian_tensor("g", {20, 20}, 0.05, 3);
    RawModel m;
    m.layers.push_back(t);
    auto cfg = full_config(8, 0.05);
    cfg.stages = {true, false, false};
    const auto back = decompress(compress(m, cfg));
    const auto orig = t.values();
    const auto got = back.layers[0].values();
    for (std::size_t i = 0; i < orig.size(); ++i) {
        CHECK(got[i] == (orig[i].modulus() < 0.05 ? ComplexScalar{0, 0} : orig[i]));
    }
}

TEST_CASE("all-pruned layers stay decodable") {
    RawModel m;
    m.layers.emplace_back("tiny", Shape{3, 3}, std::vector<ComplexScalar>(9, ComplexScalar{1e-4f, 0}));
    for (auto mode : {EntropyMode::SplitValues, EntropyMode::Indices, EntropyMode::None}) {
        const auto c = compress(m, full_config(4, 0.1, mode));
        CHECK(c.layers[0].nnz == 0);
        CHECK(c.layers[0].clusters == 0);
        const auto back = decompress(deserialize(serialize(c)));
        for (auto v : back.layers[0].values()) CHECK(v == ComplexScalar{0, 0});
    }
}

TEST_CASE("container size is overhead plus per-layer accounting") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = testing::random_model(rng);
        const auto c = compress(m, full_config(1 + rng() % 30, 0.03));
        std::uint64_t sum = 0;
        for (const auto& rec : c.layers) {
            sum += rec.total_bytes();
        }
        const auto bytes = serialize(c);
        CHECK(bytes.size() == kCcnzFixedOverhead + sum);
        CHECK(bytes.size() == c.file_bytes());
    }
}

TEST_CASE("write/read is byte-identical and corruption is caught") {
    std::mt19937_64 rng(31);
    const auto m = testing::random_model(rng);
    const auto c = compress(m, full_config(8, 0.02));
    const auto path = (std::filesystem::temp_directory_path() / "cdc_test_rt.ccnz").string();
    write_container(c, path);
    const auto again = read_container(path);
    CHECK(again == c);
    CHECK(serialize(again) == serialize(c));

    auto bytes = serialize(c);
    for (std::size_t pos = kCcnzHeaderSize; pos < bytes.size(); pos += 7) {
        auto broken = bytes;
        broken[pos] ^= 0x10;
        CHECK(code_of([&] { deserialize(broken); }) == Errc::ChecksumMismatch);
    }
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(code_of([&] { deserialize(bad_magic); }) == Errc::MagicMismatch);
    auto bad_version = bytes;
    bad_version[4] = 9;
    CHECK(code_of([&] { deserialize(bad_version); }) == Errc::VersionUnsupported);
    auto truncated = bytes;
    truncated.resize(10);
    CHECK(code_of([&] { deserialize(truncated); }) == Errc::TruncatedFile);
}

TEST_CASE("corrupt sections are reported with the layer name") {
    RawModel m;
    m.layers.push_back(testing::gaussian_tensor("victim", {10, 10}, 0.05, 1));
    auto c = compress(m, full_config(4, 0.03));
    c.layers[0].sections[kValues].pop_back();
    try {
        decompress(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("victim") != std::string::npos);
        CHECK((e.code() == Errc::CorruptStream || e.code() == Errc::TruncatedFile));
    }
}

TEST_CASE("per-layer thresholds and cluster counts") {
    RawModel m;
    m.layers.push_back(testing::gaussian_tensor("conv1", {8, 8}, 0.05, 1));
    m.layers.push_back(testing::gaussian_tensor("fc", {8, 8}, 0.05, 2));
    auto cfg = full_config(16, 0.0);
    cfg.clusters = parse_cluster_spec("16,conv*=4");
    cfg.threshold_overrides = {{"fc", 10.0}};
    const auto c = compress(m, cfg);
    CHECK(c.layers[0].clusters == 4);
    CHECK(c.layers[0].nnz == 64);
    CHECK(c.layers[1].nnz == 0);
    CHECK(c.layers[1].threshold == 10.0);
}

TEST_CASE("wide rank-1 layers store raw columns when the alphabet exceeds 16 bits") {
    RawModel m;
    m.layers.push_back(testing::gaussian_tensor("wide", {70000}, 0.05, 4));
    const auto c = compress(m, full_config(8, 0.04));
    CHECK((c.layers[0].flags & kLayerColHuffman) == 0);
    CHECK(c.layers[0].sections[kColIdx].size() == 4 * c.layers[0].nnz);
    const auto back = decompress(c);
    CHECK(back.layers[0].shape() == Shape{70000});
}

TEST_CASE("thread count does not change the container") {
    std::mt19937_64 rng(37);
    RawModel m;
    for (int i = 0; i < 5; ++i) m.layers.push_back(testing::gaussian_tensor("l" + std::to_string(i), {16, 16}, 0.05, rng()));
    auto cfg = full_config(12, 0.02);
    cfg.init = InitScheme::forgy(99);
    cfg.threads = 1;
    const auto a = serialize(compress(m, cfg));
    cfg.threads = 4;
    CHECK(serialize(compress(m, cfg)) == a);
}

TEST_CASE("entropy coding never grows a section") {
    std::mt19937_64 rng(41);
    for (std::size_t m : {2u, 16u, 256u}) {
        RawModel model;
        model.layers.push_back(testing::gaussian_tensor("w", {64, 64}, 0.02, rng()));
        for (auto mode : {EntropyMode::SplitValues, EntropyMode::Indices}) {
            auto cfg = full_config(m, 0.01, mode);
            cfg.kmeans.max_iters = 20;
            auto packed = cfg;
            packed.stages.huffman = false;
            const auto h = compress(model, cfg).layers[0];
            const auto p = compress(model, packed).layers[0];
            CHECK(h.sections[kValues].size() <= p.sections[kValues].size());
            CHECK(h.sections[kColIdx].size() <= p.sections[kColIdx].size());
            CHECK(((h.flags & kLayerHuffman) != 0) == (h.entropy != EntropyMode::None));
            CHECK(decode_layer(h) == decode_layer(p));
        }
    }
}
