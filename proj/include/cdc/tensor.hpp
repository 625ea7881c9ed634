#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cdc {

/// One complex weight, stored as a pair of binary32 components.
struct ComplexScalar {
    float re = 0.0f;
    float im = 0.0f;

    double modulus() const noexcept { return std::hypot(static_cast<double>(re), static_cast<double>(im)); }
    bool finite() const noexcept { return std::isfinite(re) && std::isfinite(im); }

    // Bitwise: +0 and -0 differ, identical NaN payloads compare equal.
    friend bool operator==(ComplexScalar a, ComplexScalar b) noexcept {
        return std::bit_cast<std::uint32_t>(a.re) == std::bit_cast<std::uint32_t>(b.re) &&
               std::bit_cast<std::uint32_t>(a.im) == std::bit_cast<std::uint32_t>(b.im);
    }
};

using Shape = std::vector<std::uint32_t>;

/// Number of elements described by `shape`; 0 for an empty shape.
std::uint64_t element_count(const Shape& shape) noexcept;

std::string shape_to_string(const Shape& shape);

/// A named dense tensor of complex weights in row-major order.
///
/// The shape must be non-empty with every extent >= 1, and the value count
/// must equal the product of the extents. Both are checked on construction.
class ComplexTensor {
public:
    ComplexTensor(std::string name, Shape shape, std::vector<ComplexScalar> values);

    const std::string& name() const noexcept { return name_; }
    const Shape& shape() const noexcept { return shape_; }
    std::span<const ComplexScalar> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;

private:
    std::string name_;
    Shape shape_;
    std::vector<ComplexScalar> values_;
};

struct RawModel {
    std::vector<ComplexTensor> layers;
    // In-memory only; the CWT format has no metadata section.
    std::map<std::string, std::string> metadata;

    /// Throws DuplicateLayer on repeated names, NonFiniteWeight on NaN/Inf.
    void validate() const;

    const ComplexTensor* find(const std::string& name) const noexcept;

    std::uint64_t weight_count() const noexcept;
};

inline constexpr std::uint32_t kCwtVersion = 1;
inline constexpr std::size_t kCwtHeaderSize = 16;

std::vector<std::uint8_t> encode_raw(const RawModel& model);
RawModel decode_raw(std::span<const std::uint8_t> bytes);

RawModel load_raw(const std::string& path);
void save_raw(const RawModel& model, const std::string& path);

/// Sum over layers of 8 bytes per weight (two binary32 components), headers excluded.
std::uint64_t total_raw_bytes(const RawModel& model) noexcept;

}  // namespace cdc
