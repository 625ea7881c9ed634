#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cdc/quantization.hpp"
#include "cdc/tensor.hpp"

namespace cdc::testing {

inline std::vector<ComplexScalar> gaussian_values(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<ComplexScalar> v(n);
    for (auto& w : v) {
        w.re = static_cast<float>(dist(rng));
        w.im = static_cast<float>(dist(rng));
    }
    return v;
}

inline ComplexTensor gaussian_tensor(std::string name, Shape shape, double sigma, std::uint64_t seed) {
    const auto n = element_count(shape);
    return ComplexTensor(std::move(name), std::move(shape), gaussian_values(n, sigma, seed));
}

/// Random model: 1-4 layers of rank 1-4 with small extents.
inline RawModel random_model(std::mt19937_64& rng, double sigma = 0.05) {
    std::uniform_int_distribution<int> layers(1, 4);
    std::uniform_int_distribution<int> rank(1, 4);
    std::uniform_int_distribution<std::uint32_t> extent(1, 9);
    RawModel m;
    const int nl = layers(rng);
    for (int l = 0; l < nl; ++l) {
        Shape s(rank(rng));
        for (auto& e : s) e = extent(rng);
        m.layers.push_back(gaussian_tensor("layer" + std::to_string(l), s, sigma, rng()));
    }
    return m;
}

inline std::vector<std::complex<double>> as_complex(const std::vector<Point2>& pts) {
    std::vector<std::complex<double>> out;
    for (auto p : pts) out.emplace_back(p.x, p.y);
    return out;
}

inline std::vector<Point2> random_points(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point2> pts(n);
    for (auto& p : pts) p = {u(rng), u(rng)};
    return pts;
}

}  // namespace cdc::testing
