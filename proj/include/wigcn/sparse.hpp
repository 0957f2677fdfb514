#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace wigcn {

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DenseVector = Eigen::VectorXd;

using index_t = std::uint32_t;

struct Triplet {
    index_t row;
    index_t col;
    double value;
};

/// Compressed sparse row matrix of doubles.
///
/// Column indices are strictly increasing inside every row and no explicit
/// zeros are stored. Instances are immutable once built.
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_(1, 0) {}

    /// Adopts CSR arrays after validating every structural invariant.
    /// Throws data_error on malformed input.
    SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                 std::vector<index_t> col_indices, std::vector<double> values);

    /// Sums duplicate coordinates and drops entries that end up exactly zero.
    static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> triplets);
    static SparseMatrix identity(std::size_t n);
    static SparseMatrix from_dense(const DenseMatrix& dense);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }
    std::size_t nnz() const { return values_.size(); }

    std::span<const std::size_t> row_offsets() const { return row_offsets_; }
    std::span<const index_t> col_indices() const { return col_indices_; }
    std::span<const double> values() const { return values_; }

    std::span<const index_t> row_cols(std::size_t row) const {
        return {col_indices_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
    }
    std::span<const double> row_values(std::size_t row) const {
        return {values_.data() + row_offsets_[row], row_offsets_[row + 1] - row_offsets_[row]};
    }

    /// Value at (row, col), zero when not stored.
    double at(std::size_t row, std::size_t col) const;

    /// Per-row sums of stored values. For a 0/1 matrix this is the vertex degree.
    std::vector<double> row_sums() const;

    bool is_symmetric(double tolerance) const;

    DenseMatrix to_dense() const;

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<index_t> col_indices_;
    std::vector<double> values_;
};

/// Row sums of a matrix, one entry per vertex.
using DegreeVector = std::vector<double>;

SparseMatrix transpose(const SparseMatrix& m);

/// Sparse-sparse product (Gustavson row accumulation).
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);

/// D^{-1/2} M D^{-1/2}; zero degrees map to zero scale instead of infinity.
SparseMatrix symmetric_normalize(const SparseMatrix& m, const DegreeVector& degrees);

/// S * M. Each output row accumulates in stored column order, so results are
/// bit-reproducible.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& m);

/// S^T * M without materializing the transpose.
DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& m);

}  // namespace wigcn
