#pragma once

#include <cstddef>
#include <span>

#include "wigcn/sparse.hpp"

namespace wigcn {

/// A user-item interaction in dense index space.
struct Interaction {
    index_t user;
    index_t item;
};

enum class Side { user, item };

/// The two propagation inputs over the stacked (users, items) vertex set.
///
/// gamma is the normalized bipartite adjacency: zero on the user-user and
/// item-item blocks. delta is the normalized block-diagonal co-interaction
/// matrix: zero on the user-item blocks. Both are symmetric.
struct GraphInputs {
    SparseMatrix gamma;
    SparseMatrix delta;
    std::size_t n_users = 0;
    std::size_t n_items = 0;

    std::size_t n_vertices() const { return n_users + n_items; }
};

/// Binary n_users x n_items matrix. Duplicate pairs collapse to a single 1.
SparseMatrix build_interaction_matrix(std::span<const Interaction> interactions, std::size_t n_users,
                                      std::size_t n_items);

/// R R^T for Side::user, R^T R for Side::item. Entry (a, b) counts shared
/// neighbours; the diagonal holds each vertex's degree.
SparseMatrix co_interaction(const SparseMatrix& r, Side side);

/// Divides every row by its L1 norm. Zero rows stay zero.
SparseMatrix normalize_l1(const SparseMatrix& w);

/// D^{-1/2} A D^{-1/2} with A = [[0, R], [R^T, 0]] and D from A's row sums.
SparseMatrix build_gamma(const SparseMatrix& r);

/// D^{-1/2} B D^{-1/2} with B = [[W_U, 0], [0, W_I]] and D from B's own row sums.
SparseMatrix build_delta(const SparseMatrix& w_users, const SparseMatrix& w_items, std::size_t n_users,
                         std::size_t n_items);

/// Full pipeline from the interaction matrix: gamma from R, delta from the raw
/// co-interaction counts of both sides.
GraphInputs build_graph_inputs(const SparseMatrix& r);

}  // namespace wigcn
