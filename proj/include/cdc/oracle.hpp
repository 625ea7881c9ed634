#pragma once

// Reference computations for tests. Nothing here calls into the compression
// code paths; each result comes from exhaustive search or a closed form.

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace cdc::oracle {

inline constexpr std::size_t kMaxPoints = 8;
inline constexpr std::size_t kMaxClusters = 3;

struct OracleResult {
    double optimal_wcss = 0.0;
    std::vector<std::uint32_t> optimal_partition;
};

/// Exact k-means optimum by enumerating all m^n labelings (empty clusters
/// allowed), centroids at the cluster means. Throws SizeExceeded above
/// 8 points or 3 clusters, EmptyInput for no points or m == 0.
OracleResult brute_force_kmeans(std::span<const std::complex<double>> points, std::size_t m);

/// Sum of squared distances to the mean of all points.
double total_scatter(std::span<const std::complex<double>> points);

/// Shannon entropy in bits per symbol of the given occurrence counts.
double entropy(const std::map<std::uint64_t, std::uint64_t>& counts);

/// P(|w| <= t) when both components of w are i.i.d. Normal(0, sigma^2).
double rayleigh_cdf(double t, double sigma);

}  // namespace cdc::oracle
