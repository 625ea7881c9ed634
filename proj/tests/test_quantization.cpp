#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cdc/error.hpp"
#include "cdc/oracle.hpp"
#include "cdc/quantization.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cdc;

namespace {

const InitScheme kAllSchemes[] = {
    InitScheme::forgy(11),
    InitScheme::density(11),
    InitScheme::linear(InitKind::LinearHorizontal),
    InitScheme::linear(InitKind::LinearVertical),
    InitScheme::linear(InitKind::LinearPositive),
    InitScheme::linear(InitKind::LinearNegative),
};

KMeansParams exact_params() {
    KMeansParams p;
    p.rel_tol = 0.0;
    p.max_iters = 1000;
    return p;
}

std::vector<ComplexScalar> corners() { return {{0, 0}, {1, 0}, {0, 1}, {1, 1}}; }

}  // namespace

TEST_CASE("zero-variance input yields copies of the point for every scheme") {
    const std::vector<ComplexScalar> pts(5, ComplexScalar{1, 1});
    for (const auto& s : kAllSchemes) {
        const auto cb = init_centroids(pts, 3, s);
        REQUIRE(cb.size() == 3);
        for (auto c : cb.centroids) CHECK(c == ComplexScalar{1, 1});
    }
}

TEST_CASE("horizontal line through two points") {
    const auto cb = init_centroids(std::vector<ComplexScalar>{{0, 0}, {4, 0}}, 3,
                                   InitScheme::linear(InitKind::LinearHorizontal));
    REQUIRE(cb.size() == 3);
    CHECK(cb.centroids[0] == ComplexScalar{0, 0});
    CHECK(cb.centroids[1] == ComplexScalar{2, 0});
    CHECK(cb.centroids[2] == ComplexScalar{4, 0});
}

TEST_CASE("positive inclined line on the diagonal") {
    const std::vector<ComplexScalar> pts{{1, 1}, {2, 2}, {3, 3}};
    const auto line = fit_support_line(to_points(pts), InitKind::LinearPositive);
    CHECK(line.origin.x == doctest::Approx(2.0));
    CHECK(line.origin.y == doctest::Approx(2.0));
    CHECK(line.direction.y / line.direction.x == doctest::Approx(1.0));

    const auto c = seed_centroids(to_points(pts), 2, InitScheme::linear(InitKind::LinearPositive));
    CHECK(c[0].x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c[0].y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c[1].x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c[1].y == doctest::Approx(3.0).epsilon(1e-12));

    // Negative scheme flips the sign on the same data.
    const auto neg = fit_support_line(to_points(pts), InitKind::LinearNegative);
    CHECK(neg.direction.y / neg.direction.x == doctest::Approx(-1.0));
}

TEST_CASE("inclined slope falls back when the regression slope is zero") {
    // Uncorrelated cross: s = 0, stddev ratio = 2.
    const std::vector<ComplexScalar> pts{{-1, 0}, {1, 0}, {0, -2}, {0, 2}};
    const auto line = fit_support_line(to_points(pts), InitKind::LinearPositive);
    CHECK(line.direction.y / line.direction.x == doctest::Approx(2.0));
    // Vertical column: var(re) = 0, slope falls back to 1.
    const std::vector<ComplexScalar> col{{0, -1}, {0, 0}, {0, 3}};
    const auto l2 = fit_support_line(to_points(col), InitKind::LinearNegative);
    CHECK(l2.direction.y / l2.direction.x == doctest::Approx(-1.0));
}

TEST_CASE("single centroid sits at the segment midpoint") {
    const std::vector<ComplexScalar> pts{{0, 0}, {4, 0}, {1, 0}};
    const auto cb = init_centroids(pts, 1, InitScheme::linear(InitKind::LinearHorizontal));
    CHECK(cb.centroids[0] == ComplexScalar{2, 0});
}

TEST_CASE("forgy picks distinct data points and is seed-deterministic") {
    std::mt19937_64 rng(3);
    const auto pts = testing::random_points(rng, 50);
    const auto a = seed_centroids(pts, 10, InitScheme::forgy(5));
    const auto b = seed_centroids(pts, 10, InitScheme::forgy(5));
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::find(pts.begin(), pts.end(), a[i]) != pts.end());
        for (std::size_t j = 0; j < i; ++j) CHECK(!(a[i] == a[j]));
    }
    CHECK(!(seed_centroids(pts, 10, InitScheme::forgy(6)) == a));

    // More clusters than distinct points: every distinct point appears.
    const std::vector<Point2> two{{0, 0}, {1, 1}, {0, 0}};
    const auto c = seed_centroids(two, 4, InitScheme::forgy(1));
    CHECK(c.size() == 4);
    CHECK(std::find(c.begin(), c.end(), Point2{1, 1}) != c.end());
    CHECK(std::find(c.begin(), c.end(), Point2{0, 0}) != c.end());
}

TEST_CASE("density seeds follow equal-mass quantiles along the principal axis") {
    // Points on the x axis: principal axis is horizontal through the mean (2.5, 0).
    const std::vector<Point2> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}};
    const auto c = seed_centroids(pts, 2, InitScheme::density(0));
    // quantiles at 0.25 and 0.75 of the order statistics: h = 1.25 and 3.75
    CHECK(c[0].x == doctest::Approx(1.25));
    CHECK(c[1].x == doctest::Approx(3.75));
    CHECK(c[0].y == doctest::Approx(0.0));
}

TEST_CASE("empty input and bad counts") {
    std::vector<ComplexScalar> none;
    CHECK_THROWS_AS(init_centroids(none, 2, InitScheme::forgy(0)), Error);
    CHECK_THROWS_AS(kmeans2d(none, 2, InitScheme::forgy(0), {}), Error);
    try {
        kmeans2d(none, 2, InitScheme::forgy(0), {});
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyInput);
    }
    SparseComplexMatrix s = empty_sparse({1, 1});
    CHECK_THROWS_AS(quantize_layer(s, 0, InitScheme::forgy(0), {}), Error);
    CHECK_THROWS_AS(quantize_layer(s, 70000, InitScheme::forgy(0), {}), Error);
}

TEST_CASE("unit-square corners reach the oracle optimum") {
    const auto pts = corners();
    const auto oracle_best = oracle::brute_force_kmeans(testing::as_complex(to_points(pts)), 2);
    CHECK(oracle_best.optimal_wcss == doctest::Approx(1.0));
    const auto r = kmeans2d(pts, 2, InitScheme::linear(InitKind::LinearHorizontal), exact_params());
    CHECK(r.report.final_wcss == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.report.converged);
}

TEST_CASE("m equal to the distinct-point count gives zero WCSS") {
    std::mt19937_64 rng(8);
    for (const auto& s : kAllSchemes) {
        auto pts = testing::random_points(rng, 6);
        pts.push_back(pts[2]);  // a duplicate
        const auto r = kmeans2d(pts, 6, s, exact_params());
        CHECK(r.report.final_wcss == 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) CHECK(r.centroids[r.assignments[i]] == pts[i]);
    }
}

TEST_CASE("m = 1 gives the mean and the total scatter") {
    std::mt19937_64 rng(9);
    const auto pts = testing::random_points(rng, 40);
    const auto r = kmeans2d(pts, 1, InitScheme::linear(InitKind::LinearVertical), exact_params());
    const auto cpts = testing::as_complex(pts);
    CHECK(r.report.final_wcss == doctest::Approx(oracle::total_scatter(cpts)).epsilon(1e-12));
    double mx = 0, my = 0;
    for (auto p : pts) {
        mx += p.x;
        my += p.y;
    }
    CHECK(r.centroids[0].x == doctest::Approx(mx / 40));
    CHECK(r.centroids[0].y == doctest::Approx(my / 40));
}

TEST_CASE("property: trace is non-increasing and the result is a fixed point") {
    std::mt19937_64 rng(1234);
    std::uniform_int_distribution<int> sz(1, 300);
    std::uniform_int_distribution<int> mm(1, 12);
    for (int trial = 0; trial < 60; ++trial) {
        const auto pts = testing::random_points(rng, sz(rng));
        const auto& scheme = kAllSchemes[trial % 6];
        const auto r = kmeans2d(pts, mm(rng), scheme, exact_params());
        const auto& tr = r.report.wcss_trace;
        REQUIRE(!tr.empty());
        for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1]);
        CHECK(r.report.final_wcss <= tr.back());
        CHECK(r.report.converged);
        // Re-assign against the final centroids: nothing moves.
        for (std::size_t i = 0; i < pts.size(); ++i) {
            double best = INFINITY;
            std::uint32_t arg = 0;
            for (std::size_t j = 0; j < r.centroids.size(); ++j) {
                const double d = squared_distance(pts[i], r.centroids[j]);
                if (d < best) {
                    best = d;
                    arg = static_cast<std::uint32_t>(j);
                }
            }
            CHECK(arg == r.assignments[i]);
        }
    }
}

TEST_CASE("property: results do not depend on thread count") {
    std::mt19937_64 rng(77);
    const auto pts = testing::random_points(rng, 20000);
    KMeansParams p1;
    p1.threads = 1;
    KMeansParams p4 = p1;
    p4.threads = 4;
    for (const auto& s : {InitScheme::forgy(3), InitScheme::linear(InitKind::LinearNegative)}) {
        const auto a = kmeans2d(pts, 16, s, p1);
        const auto b = kmeans2d(pts, 16, s, p4);
        CHECK(a.centroids == b.centroids);
        CHECK(a.assignments == b.assignments);
        CHECK(a.report.wcss_trace == b.report.wcss_trace);
    }
}

TEST_CASE("lloyd never beats the brute-force optimum on small inputs") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n = static_cast<std::size_t>(2 + trial % 7);
        const auto m = static_cast<std::size_t>(1 + trial % 3);
        const auto pts = testing::random_points(rng, n);
        const auto best = oracle::brute_force_kmeans(testing::as_complex(pts), m);
        for (const auto& s : kAllSchemes) {
            const auto r = kmeans2d(pts, m, s, exact_params());
            CHECK(r.report.final_wcss >= best.optimal_wcss * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("quantize_layer clusters only stored nonzeros") {
    SparseComplexMatrix s = empty_sparse({2, 3});
    s.row_ptr = {0, 2, 3};
    s.col_idx = {0, 2, 1};
    s.values = {{2, -3}, {2, -3}, {2, -3}};
    const auto q = quantize_layer(s, 1, InitScheme::forgy(0), {});
    CHECK(q.layer.codebook.centroids == std::vector<ComplexScalar>{{2, -3}});
    CHECK(q.layer.indices == std::vector<std::uint32_t>{0, 0, 0});
    CHECK(q.layer.original_shape == Shape{2, 3});

    const auto empty = quantize_layer(empty_sparse({3, 3}), 8, InitScheme::forgy(0), {});
    CHECK(empty.layer.codebook.size() == 0);
    CHECK(empty.layer.indices.empty());
    CHECK(dequantize_layer(empty.layer) == empty_sparse({3, 3}));
}

TEST_CASE("corner layer partitions like the oracle") {
    // 2 x 1 rectangle: the left/right split is the unique optimum.
    const std::vector<ComplexScalar> rect{{0, 0}, {2, 0}, {0, 1}, {2, 1}};
    const auto s = prune(ComplexTensor("c", {2, 2}, rect), {0.0, PruneKey::Modulus});
    const auto best = oracle::brute_force_kmeans(testing::as_complex(to_points(rect)), 2);
    CHECK(best.optimal_wcss == doctest::Approx(1.0));

    const auto q = quantize_layer(s, 2, InitScheme::linear(InitKind::LinearHorizontal), exact_params());
    CHECK(q.report.final_wcss == doctest::Approx(best.optimal_wcss));
    // Same partition up to label renaming.
    const auto& idx = q.layer.indices;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK((idx[i] == idx[j]) == (best.optimal_partition[i] == best.optimal_partition[j]));
        }
    }
    // Other seeds may stop in a local optimum (e.g. vertical seeds split top/bottom), never below it.
    for (const auto& scheme : kAllSchemes) {
        CHECK(quantize_layer(s, 2, scheme, exact_params()).report.final_wcss >= best.optimal_wcss - 1e-12);
    }
}

TEST_CASE("dequantize maps indices through the codebook") {
    QuantizedLayer q;
    q.rows = 1;
    q.cols = 3;
    q.row_ptr = {0, 3};
    q.col_idx = {0, 1, 2};
    q.codebook.centroids = {{1, 1}, {2, 2}};
    q.indices = {0, 1, 1};
    const auto s = dequantize_layer(q);
    CHECK(s.values == std::vector<ComplexScalar>{{1, 1}, {2, 2}, {2, 2}});

    q.indices = {0, 2, 1};
    try {
        dequantize_layer(q);
        FAIL("expected IndexOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::IndexOutOfRange);
    }
}

TEST_CASE("reconstruction error is bounded by the reported max distance") {
    const auto t = testing::gaussian_tensor("g", {40, 40}, 0.05, 5);
    const auto s = prune(t, {0.02, PruneKey::Modulus});
    const auto q = quantize_layer(s, 32, InitScheme::linear(InitKind::LinearNegative), {});
    const auto back = dequantize_layer(q.layer);
    CHECK(back.col_idx == s.col_idx);
    CHECK(back.row_ptr == s.row_ptr);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.nnz(); ++k) {
        CHECK(std::find(q.layer.codebook.centroids.begin(), q.layer.codebook.centroids.end(), back.values[k]) !=
              q.layer.codebook.centroids.end());
        worst = std::max(worst, std::sqrt(squared_distance(to_point(s.values[k]), to_point(back.values[k]))));
    }
    CHECK(worst <= q.report.max_assignment_distance);
    CHECK(worst == q.report.max_assignment_distance);
}

TEST_CASE("linear seeds are collinear and evenly spaced") {
    std::mt19937_64 rng(21);
    for (auto kind : {InitKind::LinearHorizontal, InitKind::LinearVertical, InitKind::LinearPositive,
                      InitKind::LinearNegative}) {
        const auto pts = testing::random_points(rng, 200);
        const auto c = seed_centroids(pts, 17, InitScheme::linear(kind));
        const double span = std::sqrt(squared_distance(c.front(), c.back()));
        const double step = span / 16.0;
        const Point2 d{(c.back().x - c.front().x) / span, (c.back().y - c.front().y) / span};
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double ox = c[k].x - c.front().x;
            const double oy = c[k].y - c.front().y;
            CHECK(std::abs(ox * d.y - oy * d.x) / span < 1e-12);
            if (k > 0) {
                CHECK(std::abs(std::sqrt(squared_distance(c[k], c[k - 1])) - step) / step < 1e-9);
            }
        }
    }
}
