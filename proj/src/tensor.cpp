#include "cdc/tensor.hpp"

#include <limits>
#include <set>

#include "cdc/byte_io.hpp"
#include "cdc/error.hpp"

namespace cdc {

namespace {

constexpr char kCwtMagic[4] = {'C', 'W', 'T', '0'};

void check_finite(const ComplexTensor& t) {
    auto values = t.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i].finite()) {
            throw Error(Errc::NonFiniteWeight,
                        "layer '" + t.name() + "' flat index " + std::to_string(i));
        }
    }
}

}  // namespace

std::uint64_t element_count(const Shape& shape) noexcept {
    if (shape.empty()) {
        return 0;
    }
    std::uint64_t n = 1;
    for (auto e : shape) {
        n *= e;
    }
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

ComplexTensor::ComplexTensor(std::string name, Shape shape, std::vector<ComplexScalar> values)
    : name_(std::move(name)), shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_.empty()) {
        throw Error(Errc::ShapeMismatch, "layer '" + name_ + "' has an empty shape");
    }
    for (auto e : shape_) {
        if (e == 0) {
            throw Error(Errc::ShapeMismatch, "layer '" + name_ + "' has a zero extent");
        }
    }
    if (element_count(shape_) != values_.size()) {
        throw Error(Errc::ShapeMismatch, "layer '" + name_ + "' shape " + shape_to_string(shape_) +
                                             " does not match " + std::to_string(values_.size()) + " values");
    }
}

void RawModel::validate() const {
    std::set<std::string> seen;
    for (const auto& layer : layers) {
        if (!seen.insert(layer.name()).second) {
            throw Error(Errc::DuplicateLayer, "layer name '" + layer.name() + "' repeats");
        }
        check_finite(layer);
    }
}

const ComplexTensor* RawModel::find(const std::string& name) const noexcept {
    for (const auto& layer : layers) {
        if (layer.name() == name) return &layer;
    }
    return nullptr;
}

std::uint64_t RawModel::weight_count() const noexcept {
    std::uint64_t n = 0;
    for (const auto& layer : layers) n += layer.size();
    return n;
}

std::vector<std::uint8_t> encode_raw(const RawModel& model) {
    model.validate();
    ByteWriter w;
    w.chars({kCwtMagic, 4});
    w.u32(kCwtVersion);
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    w.u32(0);
    for (const auto& layer : model.layers) {
        if (layer.name().size() > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(Errc::InvalidArgument, "layer name longer than 65535 bytes");
        }
        if (layer.shape().size() > std::numeric_limits<std::uint8_t>::max()) {
            throw Error(Errc::InvalidArgument, "layer '" + layer.name() + "' rank exceeds 255");
        }
        w.u16(static_cast<std::uint16_t>(layer.name().size()));
        w.chars(layer.name());
        w.u8(static_cast<std::uint8_t>(layer.shape().size()));
        for (auto e : layer.shape()) w.u32(e);
        for (auto v : layer.values()) {
            w.f32(v.re);
            w.f32(v.im);
        }
    }
    return w.take();
}

RawModel decode_raw(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, Errc::TruncatedFile);
    if (bytes.size() < 4 || !std::equal(kCwtMagic, kCwtMagic + 4, bytes.begin())) {
        throw Error(Errc::MagicMismatch, "not a CWT file");
    }
    r.bytes(4);
    const auto version = r.u32();
    if (version != kCwtVersion) {
        throw Error(Errc::VersionUnsupported, "CWT version " + std::to_string(version));
    }
    const auto count = r.u32();
    r.u32();  // reserved

    RawModel model;
    model.layers.reserve(std::min<std::size_t>(count, 4096));
    for (std::uint32_t l = 0; l < count; ++l) {
        auto name = r.chars(r.u16());
        const auto rank = r.u8();
        Shape shape(rank);
        for (auto& e : shape) e = r.u32();
        const auto n = element_count(shape);
        if (n * 8 > r.remaining()) {
            throw Error(Errc::TruncatedFile, "layer '" + name + "' weights run past end of file");
        }
        std::vector<ComplexScalar> values(n);
        for (auto& v : values) {
            v.re = r.f32();
            v.im = r.f32();
        }
        ComplexTensor t(std::move(name), std::move(shape), std::move(values));
        check_finite(t);
        model.layers.push_back(std::move(t));
    }
    model.validate();
    return model;
}

RawModel load_raw(const std::string& path) {
    auto bytes = read_file(path);
    return decode_raw(bytes);
}

void save_raw(const RawModel& model, const std::string& path) {
    auto bytes = encode_raw(model);
    write_file(path, bytes);
}

std::uint64_t total_raw_bytes(const RawModel& model) noexcept {
    return model.weight_count() * 8;
}

}  // namespace cdc
