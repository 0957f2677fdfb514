#include "wigcn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wigcn/error.hpp"

namespace wigcn {

SparseMatrix::SparseMatrix(std::size_t n_rows, std::size_t n_cols, std::vector<std::size_t> row_offsets,
                           std::vector<index_t> col_indices, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (row_offsets_.size() != n_rows_ + 1) {
        throw data_error("sparse matrix: row_offsets must have n_rows+1 entries");
    }
    if (row_offsets_.front() != 0 || row_offsets_.back() != values_.size() ||
        col_indices_.size() != values_.size()) {
        throw data_error("sparse matrix: offsets do not match stored value count");
    }
    for (std::size_t r = 0; r < n_rows_; ++r) {
        if (row_offsets_[r] > row_offsets_[r + 1]) {
            throw data_error("sparse matrix: row_offsets decrease at row " + std::to_string(r));
        }
        for (std::size_t p = row_offsets_[r]; p < row_offsets_[r + 1]; ++p) {
            if (col_indices_[p] >= n_cols_) {
                throw data_error("sparse matrix: column index out of range in row " + std::to_string(r));
            }
            if (p > row_offsets_[r] && col_indices_[p] <= col_indices_[p - 1]) {
                throw data_error("sparse matrix: columns not strictly increasing in row " + std::to_string(r));
            }
            if (values_[p] == 0.0) {
                throw data_error("sparse matrix: explicit zero stored in row " + std::to_string(r));
            }
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows, std::size_t n_cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= n_rows || t.col >= n_cols) {
            throw data_error("sparse matrix: triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                             ") out of range");
        }
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    std::vector<std::size_t> offsets(n_rows + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());

    std::size_t i = 0;
    while (i < triplets.size()) {
        const index_t row = triplets[i].row;
        const index_t col = triplets[i].col;
        double sum = 0.0;
        for (; i < triplets.size() && triplets[i].row == row && triplets[i].col == col; ++i) {
            sum += triplets[i].value;
        }
        if (sum != 0.0) {
            cols.push_back(col);
            vals.push_back(sum);
            ++offsets[row + 1];
        }
    }
    for (std::size_t r = 0; r < n_rows; ++r) {
        offsets[r + 1] += offsets[r];
    }
    return SparseMatrix(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<index_t> cols(n);
    for (std::size_t i = 0; i <= n; ++i) {
        offsets[i] = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
        cols[i] = static_cast<index_t>(i);
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    std::vector<std::size_t> offsets(static_cast<std::size_t>(dense.rows()) + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;
    for (Eigen::Index r = 0; r < dense.rows(); ++r) {
        for (Eigen::Index c = 0; c < dense.cols(); ++c) {
            if (dense(r, c) != 0.0) {
                cols.push_back(static_cast<index_t>(c));
                vals.push_back(dense(r, c));
            }
        }
        offsets[r + 1] = vals.size();
    }
    return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
    auto cols = row_cols(row);
    auto it = std::lower_bound(cols.begin(), cols.end(), static_cast<index_t>(col));
    if (it == cols.end() || *it != col) {
        return 0.0;
    }
    return values_[row_offsets_[row] + static_cast<std::size_t>(it - cols.begin())];
}

std::vector<double> SparseMatrix::row_sums() const {
    std::vector<double> sums(n_rows_, 0.0);
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (double v : row_values(r)) {
            sums[r] += v;
        }
    }
    return sums;
}

bool SparseMatrix::is_symmetric(double tolerance) const {
    if (n_rows_ != n_cols_) {
        return false;
    }
    for (std::size_t r = 0; r < n_rows_; ++r) {
        auto cols = row_cols(r);
        auto vals = row_values(r);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            const std::size_t c = cols[p];
            auto mirror = row_cols(c);
            if (!std::binary_search(mirror.begin(), mirror.end(), static_cast<index_t>(r))) {
                return false;
            }
            if (std::abs(at(c, r) - vals[p]) > tolerance) {
                return false;
            }
        }
    }
    return true;
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix out = DenseMatrix::Zero(n_rows_, n_cols_);
    for (std::size_t r = 0; r < n_rows_; ++r) {
        auto cols = row_cols(r);
        auto vals = row_values(r);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            out(r, cols[p]) = vals[p];
        }
    }
    return out;
}

SparseMatrix transpose(const SparseMatrix& m) {
    std::vector<std::size_t> offsets(m.n_cols() + 1, 0);
    for (index_t c : m.col_indices()) {
        ++offsets[c + 1];
    }
    for (std::size_t c = 0; c < m.n_cols(); ++c) {
        offsets[c + 1] += offsets[c];
    }
    std::vector<index_t> cols(m.nnz());
    std::vector<double> vals(m.nnz());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        auto rc = m.row_cols(r);
        auto rv = m.row_values(r);
        for (std::size_t p = 0; p < rc.size(); ++p) {
            const std::size_t dst = cursor[rc[p]]++;
            cols[dst] = static_cast<index_t>(r);
            vals[dst] = rv[p];
        }
    }
    return SparseMatrix(m.n_cols(), m.n_rows(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.n_cols() != b.n_rows()) {
        throw data_error("sparse multiply: inner dimensions " + std::to_string(a.n_cols()) + " and " +
                         std::to_string(b.n_rows()) + " differ");
    }
    std::vector<std::size_t> offsets(a.n_rows() + 1, 0);
    std::vector<index_t> cols;
    std::vector<double> vals;

    std::vector<double> accumulator(b.n_cols(), 0.0);
    std::vector<char> occupied(b.n_cols(), 0);
    std::vector<index_t> touched;

    for (std::size_t r = 0; r < a.n_rows(); ++r) {
        touched.clear();
        auto ac = a.row_cols(r);
        auto av = a.row_values(r);
        for (std::size_t p = 0; p < ac.size(); ++p) {
            auto bc = b.row_cols(ac[p]);
            auto bv = b.row_values(ac[p]);
            for (std::size_t q = 0; q < bc.size(); ++q) {
                if (!occupied[bc[q]]) {
                    occupied[bc[q]] = 1;
                    touched.push_back(bc[q]);
                }
                accumulator[bc[q]] += av[p] * bv[q];
            }
        }
        std::sort(touched.begin(), touched.end());
        for (index_t c : touched) {
            if (accumulator[c] != 0.0) {
                cols.push_back(c);
                vals.push_back(accumulator[c]);
            }
            accumulator[c] = 0.0;
            occupied[c] = 0;
        }
        offsets[r + 1] = vals.size();
    }
    return SparseMatrix(a.n_rows(), b.n_cols(), std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix symmetric_normalize(const SparseMatrix& m, const DegreeVector& degrees) {
    if (m.n_rows() != m.n_cols() || degrees.size() != m.n_rows()) {
        throw data_error("symmetric_normalize: matrix must be square and match the degree vector");
    }
    std::vector<double> scale(degrees.size());
    for (std::size_t i = 0; i < degrees.size(); ++i) {
        scale[i] = degrees[i] > 0.0 ? 1.0 / std::sqrt(degrees[i]) : 0.0;
    }
    std::vector<Triplet> triplets;
    triplets.reserve(m.nnz());
    for (std::size_t r = 0; r < m.n_rows(); ++r) {
        auto rc = m.row_cols(r);
        auto rv = m.row_values(r);
        for (std::size_t p = 0; p < rc.size(); ++p) {
            // The scale product commutes exactly, so symmetric input stays bit-symmetric.
            const double v = rv[p] * (scale[r] * scale[rc[p]]);
            if (v != 0.0) {
                triplets.push_back({static_cast<index_t>(r), rc[p], v});
            }
        }
    }
    return SparseMatrix::from_triplets(m.n_rows(), m.n_cols(), std::move(triplets));
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& m) {
    if (s.n_cols() != static_cast<std::size_t>(m.rows())) {
        throw data_error("spmm: sparse has " + std::to_string(s.n_cols()) + " columns but dense has " +
                         std::to_string(m.rows()) + " rows");
    }
    DenseMatrix out = DenseMatrix::Zero(s.n_rows(), m.cols());
    for (std::size_t r = 0; r < s.n_rows(); ++r) {
        auto rc = s.row_cols(r);
        auto rv = s.row_values(r);
        auto dst = out.row(static_cast<Eigen::Index>(r));
        for (std::size_t p = 0; p < rc.size(); ++p) {
            dst.noalias() += rv[p] * m.row(rc[p]);
        }
    }
    return out;
}

DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& m) {
    if (s.n_rows() != static_cast<std::size_t>(m.rows())) {
        throw data_error("spmm_transposed: sparse has " + std::to_string(s.n_rows()) + " rows but dense has " +
                         std::to_string(m.rows()) + " rows");
    }
    DenseMatrix out = DenseMatrix::Zero(s.n_cols(), m.cols());
    for (std::size_t r = 0; r < s.n_rows(); ++r) {
        auto rc = s.row_cols(r);
        auto rv = s.row_values(r);
        auto src = m.row(static_cast<Eigen::Index>(r));
        for (std::size_t p = 0; p < rc.size(); ++p) {
            out.row(rc[p]).noalias() += rv[p] * src;
        }
    }
    return out;
}

}  // namespace wigcn
