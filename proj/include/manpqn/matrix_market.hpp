#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

namespace manpqn {

/// A real matrix in coordinate form, 0-based, symmetric storage already expanded.
struct SparseMatrix {
    struct Entry {
        std::int64_t row;
        std::int64_t col;
        double value;
    };

    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<Entry> entries;

    std::size_t nnz() const noexcept { return entries.size(); }
    /// Duplicate coordinates are summed.
    Eigen::SparseMatrix<double> to_eigen() const;
};

/// Parses a Matrix Market stream: `coordinate` or `array`, field `real` or
/// `integer`, symmetry `general` or `symmetric` (expanded to both triangles).
/// Errors raise ParseError carrying the 1-based line number.
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix load_matrix_market(const std::filesystem::path& path);

/// Writes `%%MatrixMarket matrix coordinate real general` with 1-based indices.
void write_matrix_market(std::ostream& out, const SparseMatrix& m);

}  // namespace manpqn
