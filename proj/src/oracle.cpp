#include "cdc/oracle.hpp"

#include <cmath>
#include <limits>

#include "cdc/error.hpp"

namespace cdc::oracle {

namespace {

double labelled_wcss(std::span<const std::complex<double>> points, const std::vector<std::uint32_t>& labels,
                     std::size_t m) {
    std::vector<std::complex<double>> mean(m);
    std::vector<double> count(m, 0.0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        mean[labels[i]] += points[i];
        count[labels[i]] += 1.0;
    }
    for (std::size_t k = 0; k < m; ++k) {
        if (count[k] > 0) mean[k] /= count[k];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) total += std::norm(points[i] - mean[labels[i]]);
    return total;
}

}  // namespace

OracleResult brute_force_kmeans(std::span<const std::complex<double>> points, std::size_t m) {
    if (points.empty() || m == 0) {
        throw Error(Errc::EmptyInput, "oracle needs at least one point and one cluster");
    }
    if (points.size() > kMaxPoints || m > kMaxClusters) {
        throw Error(Errc::SizeExceeded, "oracle is limited to 8 points and 3 clusters");
    }
    const std::size_t n = points.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= m;

    OracleResult best;
    best.optimal_wcss = std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> labels(n);
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<std::uint32_t>(c % m);
            c /= m;
        }
        const double w = labelled_wcss(points, labels, m);
        if (w < best.optimal_wcss) {
            best.optimal_wcss = w;
            best.optimal_partition = labels;
        }
    }
    return best;
}

double total_scatter(std::span<const std::complex<double>> points) {
    if (points.empty()) return 0.0;
    std::complex<double> mean;
    for (auto p : points) mean += p;
    mean /= static_cast<double>(points.size());
    double total = 0.0;
    for (auto p : points) total += std::norm(p - mean);
    return total;
}

double entropy(const std::map<std::uint64_t, std::uint64_t>& counts) {
    double total = 0.0;
    for (const auto& [s, c] : counts) total += static_cast<double>(c);
    double h = 0.0;
    for (const auto& [s, c] : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

double rayleigh_cdf(double t, double sigma) {
    if (t <= 0.0) return 0.0;
    if (std::isinf(t)) return 1.0;
    return -std::expm1(-(t * t) / (2.0 * sigma * sigma));
}

}  // namespace cdc::oracle
