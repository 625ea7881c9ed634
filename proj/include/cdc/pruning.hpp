#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdc/tensor.hpp"

namespace cdc {

enum class PruneKey : std::uint8_t {
    Modulus = 0,
    RealPart = 1,
    ImagPart = 2,
};

struct PruneConfig {
    double threshold = 0.0;
    PruneKey key = PruneKey::Modulus;

    void validate() const;
};

/// The quantity compared against the threshold for one weight.
double prune_key_value(ComplexScalar w, PruneKey key) noexcept;

struct MatrixShape {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
};

/// 2-D view used for CSR: rank 1 -> 1 x n, rank 2 as-is,
/// rank >= 3 -> extent0 x (product of the rest).
MatrixShape matrixize(const Shape& shape);

/// Compressed sparse row matrix of complex weights.
struct SparseComplexMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::uint32_t> row_ptr;  // rows + 1
    std::vector<std::uint32_t> col_idx;  // nnz
    std::vector<ComplexScalar> values;   // nnz

    std::size_t nnz() const noexcept { return col_idx.size(); }

    /// Structural CSR checks; throws CorruptStream on violation.
    void validate() const;

    friend bool operator==(const SparseComplexMatrix&, const SparseComplexMatrix&) = default;
};

/// Empty CSR matrix (all rows empty) of the given dimensions.
SparseComplexMatrix empty_sparse(MatrixShape dims);

/// Drops every weight whose key is strictly below the threshold. Survivors keep
/// their exact values; a result with nnz() == 0 is valid (all weights pruned).
SparseComplexMatrix prune(const ComplexTensor& tensor, const PruneConfig& cfg);

/// (n - nnz) / n.
double pruning_ratio(const ComplexTensor& before, const SparseComplexMatrix& after);

/// Scatters the CSR values back into a dense tensor; missing entries are 0+0j.
ComplexTensor densify(const SparseComplexMatrix& sparse, const Shape& original_shape, std::string name = {});

}  // namespace cdc
