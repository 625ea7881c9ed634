#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdc/pruning.hpp"
#include "cdc/tensor.hpp"

namespace cdc {

/// Point in the plane: x is the real part, y the imaginary part.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 to_point(ComplexScalar w) noexcept {
    return {static_cast<double>(w.re), static_cast<double>(w.im)};
}
inline ComplexScalar to_scalar(Point2 p) noexcept {
    return {static_cast<float>(p.x), static_cast<float>(p.y)};
}
inline double squared_distance(Point2 a, Point2 b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy;
}

std::vector<Point2> to_points(std::span<const ComplexScalar> values);

inline constexpr std::size_t kMaxClusters = 65535;

/// Shared complex weights. Index i of the index table refers to centroids[i].
struct Codebook {
    std::vector<ComplexScalar> centroids;

    std::size_t size() const noexcept { return centroids.size(); }
    void validate() const;

    friend bool operator==(const Codebook&, const Codebook&) = default;
};

enum class InitKind : std::uint8_t {
    Forgy = 0,
    Density = 1,
    LinearHorizontal = 2,
    LinearVertical = 3,
    LinearPositive = 4,
    LinearNegative = 5,
};

struct InitScheme {
    InitKind kind = InitKind::LinearNegative;
    std::uint64_t seed = 0;  // used by Forgy; carried by Density for reproducibility bookkeeping

    static InitScheme forgy(std::uint64_t seed) { return {InitKind::Forgy, seed}; }
    static InitScheme density(std::uint64_t seed) { return {InitKind::Density, seed}; }
    static InitScheme linear(InitKind kind) { return {kind, 0}; }

    friend bool operator==(const InitScheme&, const InitScheme&) = default;
};

std::string init_kind_name(InitKind kind);
bool is_linear(InitKind kind) noexcept;

/// Straight line through `origin` with unit `direction`.
struct SupportLine {
    Point2 origin;
    Point2 direction;
};

/// Support line for a linear or density scheme (Forgy has none).
/// Horizontal: im = mean(im). Vertical: re = mean(re). Inclined: through the
/// mean with slope +|s| / -|s|, s the least-squares slope of im on re.
/// Density: principal axis through the mean.
SupportLine fit_support_line(std::span<const Point2> points, InitKind kind);

/// Initial centroids in double precision. Degenerate (all-equal) inputs yield
/// m copies of that point.
std::vector<Point2> seed_centroids(std::span<const Point2> points, std::size_t m, const InitScheme& scheme);

/// Same as seed_centroids, rounded to binary32.
Codebook init_centroids(std::span<const ComplexScalar> points, std::size_t m, const InitScheme& scheme);

struct KMeansParams {
    std::uint32_t max_iters = 300;
    double rel_tol = 1e-6;
    unsigned threads = 1;
};

struct KMeansReport {
    std::uint32_t iterations = 0;
    double final_wcss = 0.0;
    bool converged = false;
    std::vector<double> wcss_trace;       // one entry per Lloyd iteration
    double max_assignment_distance = 0.0; // max |w - assigned centroid|
};

struct KMeansResult {
    std::vector<Point2> centroids;
    std::vector<std::uint32_t> assignments;
    KMeansReport report;
};

/// Lloyd iterations from explicit starting centroids.
///
/// Each round assigns every point to its nearest centroid (ties go to the
/// lowest index), moves each empty cluster onto the point farthest from its
/// current centroid, records the WCSS, then replaces each centroid with the
/// mean of its members. Stops when the assignment no longer changes, when the
/// relative WCSS decrease falls below rel_tol, or after max_iters rounds.
/// Output is bit-identical for any thread count.
KMeansResult lloyd(std::span<const Point2> points, std::vector<Point2> initial, const KMeansParams& params);

KMeansResult kmeans2d(std::span<const Point2> points, std::size_t m, const InitScheme& scheme,
                      const KMeansParams& params);
KMeansResult kmeans2d(std::span<const ComplexScalar> points, std::size_t m, const InitScheme& scheme,
                      const KMeansParams& params);

double wcss(std::span<const Point2> points, std::span<const Point2> centroids,
            std::span<const std::uint32_t> assignments);

/// CSR structure with values replaced by indices into a shared codebook.
struct QuantizedLayer {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint32_t> row_ptr;
    std::vector<std::uint32_t> col_idx;
    Codebook codebook;
    std::vector<std::uint32_t> indices;  // one per stored nonzero, CSR order
    Shape original_shape;

    std::size_t nnz() const noexcept { return indices.size(); }
    void validate() const;

    friend bool operator==(const QuantizedLayer&, const QuantizedLayer&) = default;
};

struct QuantizeResult {
    QuantizedLayer layer;
    KMeansReport report;
};

/// Clusters the stored nonzeros of `sparse` into m shared weights. An empty
/// layer produces an empty codebook and index table. The report's
/// max_assignment_distance is measured against the binary32 codebook.
QuantizeResult quantize_layer(const SparseComplexMatrix& sparse, std::size_t m, const InitScheme& scheme,
                              const KMeansParams& params, Shape original_shape = {});

SparseComplexMatrix dequantize_layer(const QuantizedLayer& q);

}  // namespace cdc
