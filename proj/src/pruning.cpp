#include "cdc/pruning.hpp"

#include <cmath>
#include <limits>

#include "cdc/error.hpp"

namespace cdc {

void PruneConfig::validate() const {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
        throw Error(Errc::InvalidConfig, "prune threshold must be finite and >= 0");
    }
}

double prune_key_value(ComplexScalar w, PruneKey key) noexcept {
    switch (key) {
        case PruneKey::Modulus: return w.modulus();
        case PruneKey::RealPart: return std::fabs(static_cast<double>(w.re));
        case PruneKey::ImagPart: return std::fabs(static_cast<double>(w.im));
    }
    return w.modulus();
}

MatrixShape matrixize(const Shape& shape) {
    if (shape.empty()) {
        throw Error(Errc::ShapeMismatch, "cannot matrixize an empty shape");
    }
    if (shape.size() == 1) {
        return {1, shape[0]};
    }
    std::uint64_t cols = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) cols *= shape[i];
    if (cols > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(Errc::SizeExceeded, "matrix column count exceeds 32 bits");
    }
    return {shape[0], static_cast<std::uint32_t>(cols)};
}

void SparseComplexMatrix::validate() const {
    if (row_ptr.size() != static_cast<std::size_t>(rows) + 1) {
        throw Error(Errc::CorruptStream, "row_ptr length is not rows + 1");
    }
    if (values.size() != col_idx.size()) {
        throw Error(Errc::CorruptStream, "values and col_idx lengths differ");
    }
    if (row_ptr.front() != 0 || row_ptr.back() != col_idx.size()) {
        throw Error(Errc::CorruptStream, "row_ptr does not span [0, nnz]");
    }
    for (std::uint32_t r = 0; r < rows; ++r) {
        if (row_ptr[r] > row_ptr[r + 1]) {
            throw Error(Errc::CorruptStream, "row_ptr decreases at row " + std::to_string(r));
        }
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (col_idx[k] >= cols || (k > row_ptr[r] && col_idx[k] <= col_idx[k - 1])) {
                throw Error(Errc::CorruptStream, "column indices invalid in row " + std::to_string(r));
            }
        }
    }
}

SparseComplexMatrix empty_sparse(MatrixShape dims) {
    SparseComplexMatrix m;
    m.rows = dims.rows;
    m.cols = dims.cols;
    m.row_ptr.assign(static_cast<std::size_t>(dims.rows) + 1, 0);
    return m;
}

SparseComplexMatrix prune(const ComplexTensor& tensor, const PruneConfig& cfg) {
    cfg.validate();
    const auto dims = matrixize(tensor.shape());
    SparseComplexMatrix out = empty_sparse(dims);
    auto values = tensor.values();
    std::size_t flat = 0;
    for (std::uint32_t r = 0; r < dims.rows; ++r) {
        for (std::uint32_t c = 0; c < dims.cols; ++c, ++flat) {
            const auto w = values[flat];
            if (prune_key_value(w, cfg.key) < cfg.threshold) {
                continue;
            }
            out.col_idx.push_back(c);
            out.values.push_back(w);
        }
        out.row_ptr[r + 1] = static_cast<std::uint32_t>(out.col_idx.size());
    }
    return out;
}

double pruning_ratio(const ComplexTensor& before, const SparseComplexMatrix& after) {
    const auto n = before.size();
    if (n == 0) return 0.0;
    return static_cast<double>(n - after.nnz()) / static_cast<double>(n);
}

ComplexTensor densify(const SparseComplexMatrix& sparse, const Shape& original_shape, std::string name) {
    const auto dims = matrixize(original_shape);
    if (dims.rows != sparse.rows || dims.cols != sparse.cols) {
        throw Error(Errc::ShapeMismatch, "sparse " + std::to_string(sparse.rows) + "x" +
                                             std::to_string(sparse.cols) + " vs shape " +
                                             shape_to_string(original_shape));
    }
    sparse.validate();
    std::vector<ComplexScalar> dense(static_cast<std::size_t>(dims.rows) * dims.cols);
    for (std::uint32_t r = 0; r < sparse.rows; ++r) {
        const std::size_t base = static_cast<std::size_t>(r) * sparse.cols;
        for (auto k = sparse.row_ptr[r]; k < sparse.row_ptr[r + 1]; ++k) {
            dense[base + sparse.col_idx[k]] = sparse.values[k];
        }
    }
    return ComplexTensor(std::move(name), original_shape, std::move(dense));
}

}  // namespace cdc
