#include "cdc/quantization.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <tuple>

#include "cdc/error.hpp"
#include "cdc/parallel.hpp"

namespace cdc {

namespace {

// Assignment is split across threads only above this many point-centroid pairs.
constexpr std::size_t kParallelWork = 1u << 16;

struct Moments {
    Point2 mean;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
};

Moments moments(std::span<const Point2> points) {
    Moments mo;
    const double n = static_cast<double>(points.size());
    for (auto p : points) {
        mo.mean.x += p.x;
        mo.mean.y += p.y;
    }
    mo.mean.x /= n;
    mo.mean.y /= n;
    for (auto p : points) {
        const double dx = p.x - mo.mean.x;
        const double dy = p.y - mo.mean.y;
        mo.sxx += dx * dx;
        mo.syy += dy * dy;
        mo.sxy += dx * dy;
    }
    return mo;
}

Point2 along(const SupportLine& line, double t) noexcept {
    return {line.origin.x + t * line.direction.x, line.origin.y + t * line.direction.y};
}

double project(const SupportLine& line, Point2 p) noexcept {
    return (p.x - line.origin.x) * line.direction.x + (p.y - line.origin.y) * line.direction.y;
}

// Unbiased draw from [0, n) on top of the fully specified mt19937_64 engine,
// so seeded runs reproduce across standard library implementations.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
        r = rng();
    } while (r >= limit);
    return r % n;
}

std::vector<Point2> forgy(std::span<const Point2> points, std::size_t m, std::uint64_t seed) {
    // Distinct values in first-occurrence order.
    std::vector<std::tuple<std::uint64_t, std::uint64_t, std::size_t>> keyed;
    keyed.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        keyed.emplace_back(std::bit_cast<std::uint64_t>(points[i].x), std::bit_cast<std::uint64_t>(points[i].y), i);
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::size_t> firsts;
    for (std::size_t i = 0; i < keyed.size(); ++i) {
        if (i == 0 || std::get<0>(keyed[i]) != std::get<0>(keyed[i - 1]) ||
            std::get<1>(keyed[i]) != std::get<1>(keyed[i - 1])) {
            firsts.push_back(std::get<2>(keyed[i]));
        }
    }
    std::sort(firsts.begin(), firsts.end());

    std::mt19937_64 rng(seed);
    const std::size_t distinct = firsts.size();
    const std::size_t take = std::min(m, distinct);
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + bounded(rng, distinct - i);
        std::swap(firsts[i], firsts[j]);
    }
    std::vector<Point2> out;
    out.reserve(m);
    for (std::size_t i = 0; i < take; ++i) out.push_back(points[firsts[i]]);
    while (out.size() < m) {
        out.push_back(points[firsts[bounded(rng, distinct)]]);
    }
    return out;
}

std::vector<Point2> evenly_spaced(std::span<const Point2> points, std::size_t m, const SupportLine& line) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto p : points) {
        const double t = project(line, p);
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    std::vector<Point2> out(m);
    if (m == 1) {
        out[0] = along(line, 0.5 * (lo + hi));
        return out;
    }
    const double span = hi - lo;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = (k + 1 == m) ? hi : lo + span * static_cast<double>(k) / static_cast<double>(m - 1);
        out[k] = along(line, t);
    }
    return out;
}

// Centroids at the midpoints of m equal-mass bins of the projected data,
// using linear interpolation between order statistics.
std::vector<Point2> density(std::span<const Point2> points, std::size_t m, const SupportLine& line) {
    std::vector<double> t(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) t[i] = project(line, points[i]);
    std::sort(t.begin(), t.end());
    const double last = static_cast<double>(t.size() - 1);
    std::vector<Point2> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double q = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
        const double h = q * last;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const auto hi = std::min(lo + 1, t.size() - 1);
        const double frac = h - static_cast<double>(lo);
        out[k] = along(line, t[lo] + frac * (t[hi] - t[lo]));
    }
    return out;
}

void assign_nearest(std::span<const Point2> points, std::span<const Point2> centroids,
                    std::span<std::uint32_t> assignment, std::span<double> dist2, unsigned threads) {
    const auto work = points.size() * centroids.size();
    parallel_chunks(points.size(), work >= kParallelWork ? threads : 1u, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const Point2 p = points[i];
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_j = 0;
            for (std::size_t j = 0; j < centroids.size(); ++j) {
                const double d = squared_distance(p, centroids[j]);
                if (d < best) {
                    best = d;
                    best_j = static_cast<std::uint32_t>(j);
                }
            }
            assignment[i] = best_j;
            dist2[i] = best;
        }
    });
}

}  // namespace

std::vector<Point2> to_points(std::span<const ComplexScalar> values) {
    std::vector<Point2> out(values.size());
    std::transform(values.begin(), values.end(), out.begin(), to_point);
    return out;
}

void Codebook::validate() const {
    if (centroids.size() > kMaxClusters) {
        throw Error(Errc::SizeExceeded, "codebook holds more than 65535 centroids");
    }
    for (auto c : centroids) {
        if (!c.finite()) throw Error(Errc::NonFiniteWeight, "non-finite centroid");
    }
}

std::string init_kind_name(InitKind kind) {
    switch (kind) {
        case InitKind::Forgy: return "forgy";
        case InitKind::Density: return "density";
        case InitKind::LinearHorizontal: return "linear-h";
        case InitKind::LinearVertical: return "linear-v";
        case InitKind::LinearPositive: return "linear-pos";
        case InitKind::LinearNegative: return "linear-neg";
    }
    return "unknown";
}

bool is_linear(InitKind kind) noexcept {
    return kind == InitKind::LinearHorizontal || kind == InitKind::LinearVertical ||
           kind == InitKind::LinearPositive || kind == InitKind::LinearNegative;
}

SupportLine fit_support_line(std::span<const Point2> points, InitKind kind) {
    if (points.empty()) {
        throw Error(Errc::EmptyInput, "cannot fit a line to zero points");
    }
    const auto mo = moments(points);
    SupportLine line{mo.mean, {1.0, 0.0}};
    switch (kind) {
        case InitKind::LinearHorizontal:
        case InitKind::Forgy:
            break;
        case InitKind::LinearVertical:
            line.direction = {0.0, 1.0};
            break;
        case InitKind::LinearPositive:
        case InitKind::LinearNegative: {
            double k = mo.sxx > 0.0 ? std::fabs(mo.sxy / mo.sxx) : 0.0;
            if (k == 0.0) {
                k = mo.sxx > 0.0 ? std::sqrt(mo.syy / mo.sxx) : 0.0;
                if (!std::isfinite(k) || k == 0.0) k = 1.0;
            }
            const double slope = kind == InitKind::LinearPositive ? k : -k;
            const double norm = std::hypot(1.0, slope);
            line.direction = {1.0 / norm, slope / norm};
            break;
        }
        case InitKind::Density: {
            const double theta = 0.5 * std::atan2(2.0 * mo.sxy, mo.sxx - mo.syy);
            line.direction = {std::cos(theta), std::sin(theta)};
            break;
        }
    }
    return line;
}

std::vector<Point2> seed_centroids(std::span<const Point2> points, std::size_t m, const InitScheme& scheme) {
    if (points.empty()) {
        throw Error(Errc::EmptyInput, "no points to seed centroids from");
    }
    if (m == 0) {
        throw Error(Errc::InvalidArgument, "cluster count must be >= 1");
    }
    if (scheme.kind == InitKind::Forgy) {
        return forgy(points, m, scheme.seed);
    }
    const auto line = fit_support_line(points, scheme.kind);
    if (scheme.kind == InitKind::Density) {
        return density(points, m, line);
    }
    return evenly_spaced(points, m, line);
}

Codebook init_centroids(std::span<const ComplexScalar> points, std::size_t m, const InitScheme& scheme) {
    const auto pts = to_points(points);
    Codebook cb;
    for (auto c : seed_centroids(pts, m, scheme)) cb.centroids.push_back(to_scalar(c));
    return cb;
}

double wcss(std::span<const Point2> points, std::span<const Point2> centroids,
            std::span<const std::uint32_t> assignments) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        total += squared_distance(points[i], centroids[assignments[i]]);
    }
    return total;
}

KMeansResult lloyd(std::span<const Point2> points, std::vector<Point2> initial, const KMeansParams& params) {
    if (points.empty()) {
        throw Error(Errc::EmptyInput, "k-means on zero points");
    }
    if (initial.empty()) {
        throw Error(Errc::InvalidArgument, "k-means needs at least one centroid");
    }
    const std::size_t n = points.size();
    const std::size_t m = initial.size();

    KMeansResult res;
    res.centroids = std::move(initial);
    auto& centroids = res.centroids;
    auto& report = res.report;

    std::vector<std::uint32_t> assignment(n);
    std::vector<std::uint32_t> previous;
    std::vector<double> dist2(n);
    std::vector<std::size_t> counts(m);
    std::vector<Point2> sums(m);

    for (std::uint32_t iter = 1; iter <= std::max<std::uint32_t>(params.max_iters, 1); ++iter) {
        assign_nearest(points, centroids, assignment, dist2, params.threads);

        std::fill(counts.begin(), counts.end(), 0);
        for (auto a : assignment) ++counts[a];
        for (std::size_t j = 0; j < m; ++j) {
            if (counts[j] != 0) continue;
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i) {
                if (dist2[i] > dist2[far]) far = i;
            }
            if (dist2[far] == 0.0) break;  // every point already sits on its centroid
            --counts[assignment[far]];
            centroids[j] = points[far];
            assignment[far] = static_cast<std::uint32_t>(j);
            dist2[far] = 0.0;
            counts[j] = 1;
        }

        double total = 0.0;
        for (auto d : dist2) total += d;
        report.wcss_trace.push_back(total);
        report.iterations = iter;

        const bool stable = assignment == previous;

        std::fill(sums.begin(), sums.end(), Point2{});
        for (std::size_t i = 0; i < n; ++i) {
            sums[assignment[i]].x += points[i].x;
            sums[assignment[i]].y += points[i].y;
        }
        for (std::size_t j = 0; j < m; ++j) {
            if (counts[j] == 0) continue;
            const double c = static_cast<double>(counts[j]);
            centroids[j] = {sums[j].x / c, sums[j].y / c};
        }

        if (stable) {
            report.converged = true;
            break;
        }
        const auto& trace = report.wcss_trace;
        if (trace.size() >= 2) {
            const double prev = trace[trace.size() - 2];
            if (prev <= 0.0 || (prev - total) / prev < params.rel_tol) {
                report.converged = true;
                break;
            }
        }
        previous = assignment;
    }

    res.assignments = std::move(assignment);
    report.final_wcss = wcss(points, centroids, res.assignments);
    double max_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_d2 = std::max(max_d2, squared_distance(points[i], centroids[res.assignments[i]]));
    }
    report.max_assignment_distance = std::sqrt(max_d2);
    return res;
}

KMeansResult kmeans2d(std::span<const Point2> points, std::size_t m, const InitScheme& scheme,
                      const KMeansParams& params) {
    return lloyd(points, seed_centroids(points, m, scheme), params);
}

KMeansResult kmeans2d(std::span<const ComplexScalar> points, std::size_t m, const InitScheme& scheme,
                      const KMeansParams& params) {
    const auto pts = to_points(points);
    return kmeans2d(pts, m, scheme, params);
}

void QuantizedLayer::validate() const {
    codebook.validate();
    if (row_ptr.size() != static_cast<std::size_t>(rows) + 1 || row_ptr.front() != 0 ||
        row_ptr.back() != indices.size() || col_idx.size() != indices.size()) {
        throw Error(Errc::CorruptStream, "quantized layer structure is inconsistent");
    }
    for (auto i : indices) {
        if (i >= codebook.size()) {
            throw Error(Errc::IndexOutOfRange,
                        "index " + std::to_string(i) + " >= codebook size " + std::to_string(codebook.size()));
        }
    }
}

QuantizeResult quantize_layer(const SparseComplexMatrix& sparse, std::size_t m, const InitScheme& scheme,
                              const KMeansParams& params, Shape original_shape) {
    if (m == 0 || m > kMaxClusters) {
        throw Error(Errc::InvalidArgument, "cluster count must be in [1, 65535], got " + std::to_string(m));
    }
    sparse.validate();
    QuantizeResult out;
    auto& q = out.layer;
    q.rows = sparse.rows;
    q.cols = sparse.cols;
    q.row_ptr = sparse.row_ptr;
    q.col_idx = sparse.col_idx;
    q.original_shape = original_shape.empty() ? Shape{sparse.rows, sparse.cols} : std::move(original_shape);
    if (sparse.nnz() == 0) {
        out.report.converged = true;
        return out;
    }

    const auto points = to_points(sparse.values);
    auto km = kmeans2d(points, m, scheme, params);
    for (auto c : km.centroids) q.codebook.centroids.push_back(to_scalar(c));
    q.indices = std::move(km.assignments);
    out.report = std::move(km.report);

    double max_d2 = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        max_d2 = std::max(max_d2, squared_distance(points[i], to_point(q.codebook.centroids[q.indices[i]])));
    }
    out.report.max_assignment_distance = std::sqrt(max_d2);
    return out;
}

SparseComplexMatrix dequantize_layer(const QuantizedLayer& q) {
    q.validate();
    SparseComplexMatrix s;
    s.rows = q.rows;
    s.cols = q.cols;
    s.row_ptr = q.row_ptr;
    s.col_idx = q.col_idx;
    s.values.reserve(q.indices.size());
    for (auto i : q.indices) s.values.push_back(q.codebook.centroids[i]);
    return s;
}

}  // namespace cdc
