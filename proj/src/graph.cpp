#include "wigcn/graph.hpp"

#include <string>
#include <vector>

#include "wigcn/error.hpp"

namespace wigcn {

namespace {

void require_binary(const SparseMatrix& r) {
    for (double v : r.values()) {
        if (v != 1.0) {
            throw data_error("interaction matrix must be binary");
        }
    }
}

// [[upper_left, upper_right], [lower_left, lower_right]] from four blocks whose
// shapes tile an (n_top + n_bottom) square.
SparseMatrix assemble_blocks(const SparseMatrix* upper_left, const SparseMatrix* upper_right,
                             const SparseMatrix* lower_left, const SparseMatrix* lower_right, std::size_t n_top,
                             std::size_t n_bottom) {
    const std::size_t n = n_top + n_bottom;
    std::vector<Triplet> triplets;
    auto add = [&](const SparseMatrix* block, std::size_t row0, std::size_t col0) {
        if (block == nullptr) {
            return;
        }
        for (std::size_t r = 0; r < block->n_rows(); ++r) {
            auto cols = block->row_cols(r);
            auto vals = block->row_values(r);
            for (std::size_t p = 0; p < cols.size(); ++p) {
                triplets.push_back(
                    {static_cast<index_t>(row0 + r), static_cast<index_t>(col0 + cols[p]), vals[p]});
            }
        }
    };
    add(upper_left, 0, 0);
    add(upper_right, 0, n_top);
    add(lower_left, n_top, 0);
    add(lower_right, n_top, n_top);
    return SparseMatrix::from_triplets(n, n, std::move(triplets));
}

}  // namespace

SparseMatrix build_interaction_matrix(std::span<const Interaction> interactions, std::size_t n_users,
                                      std::size_t n_items) {
    std::vector<Triplet> triplets;
    triplets.reserve(interactions.size());
    for (const auto& [user, item] : interactions) {
        if (user >= n_users || item >= n_items) {
            throw data_error("interaction (" + std::to_string(user) + ", " + std::to_string(item) +
                             ") out of range for " + std::to_string(n_users) + " users and " +
                             std::to_string(n_items) + " items");
        }
        triplets.push_back({user, item, 1.0});
    }
    // Summing would turn duplicates into counts; collapse them to 1 instead.
    auto summed = SparseMatrix::from_triplets(n_users, n_items, std::move(triplets));
    std::vector<double> ones(summed.nnz(), 1.0);
    return SparseMatrix(n_users, n_items, {summed.row_offsets().begin(), summed.row_offsets().end()},
                        {summed.col_indices().begin(), summed.col_indices().end()}, std::move(ones));
}

SparseMatrix co_interaction(const SparseMatrix& r, Side side) {
    require_binary(r);
    const SparseMatrix rt = transpose(r);
    return side == Side::user ? multiply(r, rt) : multiply(rt, r);
}

SparseMatrix normalize_l1(const SparseMatrix& w) {
    std::vector<double> scaled(w.values().begin(), w.values().end());
    for (std::size_t r = 0; r < w.n_rows(); ++r) {
        double norm = 0.0;
        for (double v : w.row_values(r)) {
            if (v < 0.0) {
                throw data_error("normalize_l1: negative value in row " + std::to_string(r));
            }
            norm += v;
        }
        for (std::size_t p = w.row_offsets()[r]; p < w.row_offsets()[r + 1]; ++p) {
            scaled[p] /= norm;
        }
    }
    return SparseMatrix(w.n_rows(), w.n_cols(), {w.row_offsets().begin(), w.row_offsets().end()},
                        {w.col_indices().begin(), w.col_indices().end()}, std::move(scaled));
}

SparseMatrix build_gamma(const SparseMatrix& r) {
    const SparseMatrix rt = transpose(r);
    const SparseMatrix adjacency = assemble_blocks(nullptr, &r, &rt, nullptr, r.n_rows(), r.n_cols());
    return symmetric_normalize(adjacency, adjacency.row_sums());
}

SparseMatrix build_delta(const SparseMatrix& w_users, const SparseMatrix& w_items, std::size_t n_users,
                         std::size_t n_items) {
    if (w_users.n_rows() != n_users || w_users.n_cols() != n_users) {
        throw data_error("build_delta: user block is " + std::to_string(w_users.n_rows()) + "x" +
                         std::to_string(w_users.n_cols()) + ", expected " + std::to_string(n_users) + "x" +
                         std::to_string(n_users));
    }
    if (w_items.n_rows() != n_items || w_items.n_cols() != n_items) {
        throw data_error("build_delta: item block is " + std::to_string(w_items.n_rows()) + "x" +
                         std::to_string(w_items.n_cols()) + ", expected " + std::to_string(n_items) + "x" +
                         std::to_string(n_items));
    }
    for (const SparseMatrix* block : {&w_users, &w_items}) {
        for (double v : block->values()) {
            if (v < 0.0) {
                throw data_error("build_delta: co-interaction weights must be non-negative");
            }
        }
    }
    const SparseMatrix stacked = assemble_blocks(&w_users, nullptr, nullptr, &w_items, n_users, n_items);
    return symmetric_normalize(stacked, stacked.row_sums());
}

GraphInputs build_graph_inputs(const SparseMatrix& r) {
    GraphInputs inputs;
    inputs.n_users = r.n_rows();
    inputs.n_items = r.n_cols();
    inputs.gamma = build_gamma(r);
    // Raw counts keep delta symmetric. Its degrees are the row L1 masses of B.
    inputs.delta = build_delta(co_interaction(r, Side::user), co_interaction(r, Side::item), r.n_rows(),
                               r.n_cols());
    return inputs;
}

}  // namespace wigcn
