#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "wigcn/error.hpp"
#include "wigcn/graph.hpp"
#include "wigcn/sparse.hpp"

using namespace wigcn;

namespace {

SparseMatrix two_by_two() { return build_interaction_matrix(std::vector<Interaction>{{0, 0}, {0, 1}, {1, 1}}, 2, 2); }

void check_structure(const SparseMatrix& s) {
    const auto offsets = s.row_offsets();
    REQUIRE(offsets.size() == s.n_rows() + 1);
    CHECK(offsets.back() == s.nnz());
    for (std::size_t r = 0; r < s.n_rows(); ++r) {
        CHECK(offsets[r] <= offsets[r + 1]);
        auto cols = s.row_cols(r);
        for (std::size_t p = 0; p < cols.size(); ++p) {
            CHECK(cols[p] < s.n_cols());
            if (p > 0) CHECK(cols[p] > cols[p - 1]);
        }
    }
    for (double v : s.values()) CHECK(v != 0.0);
}

}  // namespace

TEST_CASE("sparse matrix rejects malformed CSR arrays") {
    CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), data_error);
    CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), data_error);
    CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), data_error);
    CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {0}, {0.0}), data_error);
    CHECK_NOTHROW(SparseMatrix(1, 2, {0, 2}, {0, 1}, {1.0, 2.0}));
}

TEST_CASE("from_triplets sums duplicates and drops cancelled entries") {
    auto s = SparseMatrix::from_triplets(2, 2, {{1, 1, 2.0}, {0, 1, 1.0}, {1, 1, 3.0}, {0, 0, 1.0}, {0, 0, -1.0}});
    check_structure(s);
    CHECK(s.nnz() == 2);
    CHECK(s.at(0, 1) == 1.0);
    CHECK(s.at(1, 1) == 5.0);
    CHECK(s.at(0, 0) == 0.0);
}

TEST_CASE("build_interaction_matrix") {
    SUBCASE("hand example") {
        auto r = two_by_two();
        check_structure(r);
        CHECK(r.to_dense() == (DenseMatrix(2, 2) << 1, 1, 0, 1).finished());
    }
    SUBCASE("empty input gives an empty matrix") {
        auto r = build_interaction_matrix(std::vector<Interaction>{}, 1, 1);
        CHECK(r.n_rows() == 1);
        CHECK(r.n_cols() == 1);
        CHECK(r.nnz() == 0);
    }
    SUBCASE("duplicates collapse to one") {
        auto r = build_interaction_matrix(std::vector<Interaction>{{0, 0}, {0, 0}}, 1, 1);
        CHECK(r.nnz() == 1);
        CHECK(r.at(0, 0) == 1.0);
    }
    SUBCASE("out of range ids name the pair") {
        try {
            build_interaction_matrix(std::vector<Interaction>{{0, 0}, {3, 1}}, 2, 2);
            FAIL("expected data_error");
        } catch (const data_error& e) {
            CHECK(std::string(e.what()).find("(3, 1)") != std::string::npos);
        }
    }
}

TEST_CASE("co_interaction") {
    auto r = two_by_two();
    CHECK(co_interaction(r, Side::user).to_dense() == (DenseMatrix(2, 2) << 2, 1, 1, 1).finished());
    CHECK(co_interaction(r, Side::item).to_dense() == (DenseMatrix(2, 2) << 1, 1, 1, 2).finished());

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        auto pairs = oracle::random_interactions(8, 10, 0.35, rng);
        auto dense = oracle::dense_interactions(pairs, 8, 10);
        auto sparse = build_interaction_matrix(pairs, 8, 10);
        auto wu = co_interaction(sparse, Side::user);
        auto wi = co_interaction(sparse, Side::item);
        CHECK(oracle::max_abs_diff(oracle::to_grid(wu), oracle::common_neighbours(dense, true)) == 0.0);
        CHECK(oracle::max_abs_diff(oracle::to_grid(wi), oracle::common_neighbours(dense, false)) == 0.0);
        CHECK(wu.is_symmetric(0.0));
        const auto deg = sparse.row_sums();
        for (std::size_t a = 0; a < 8; ++a) {
            CHECK(wu.at(a, a) == deg[a]);
            for (std::size_t b = 0; b < 8; ++b) CHECK(wu.at(a, b) <= std::min(deg[a], deg[b]));
        }
    }
}

TEST_CASE("normalize_l1") {
    auto w = SparseMatrix::from_dense((DenseMatrix(2, 2) << 2, 1, 1, 1).finished());
    auto n = normalize_l1(w);
    CHECK(n.at(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(n.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(n.at(1, 0) == 0.5);
    CHECK(n.at(1, 1) == 0.5);

    auto id = normalize_l1(SparseMatrix::identity(3));
    CHECK(id.to_dense() == DenseMatrix::Identity(3, 3));

    auto with_zero_row = SparseMatrix::from_dense((DenseMatrix(2, 2) << 0, 0, 4, 1).finished());
    auto z = normalize_l1(with_zero_row);
    CHECK(z.row_cols(0).empty());
    CHECK(z.row_sums()[1] == doctest::Approx(1.0));

    CHECK_THROWS_AS(normalize_l1(SparseMatrix::from_dense((DenseMatrix(1, 2) << 1, -1).finished())), data_error);
}

TEST_CASE("normalize_l1 rows have unit or zero L1 norm") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> value(0.0, 5.0);
    std::bernoulli_distribution keep(0.3);
    for (int trial = 0; trial < 20; ++trial) {
        DenseMatrix d = DenseMatrix::Zero(12, 9);
        for (Eigen::Index r = 0; r < d.rows(); ++r)
            for (Eigen::Index c = 0; c < d.cols(); ++c)
                if (keep(rng)) d(r, c) = value(rng);
        for (double s : normalize_l1(SparseMatrix::from_dense(d)).row_sums()) {
            CHECK((s == 0.0 || std::abs(s - 1.0) < 1e-14));
        }
    }
}

TEST_CASE("build_gamma") {
    SUBCASE("single edge") {
        auto g = build_gamma(build_interaction_matrix(std::vector<Interaction>{{0, 0}}, 1, 1));
        CHECK(g.to_dense() == (DenseMatrix(2, 2) << 0, 1, 1, 0).finished());
    }
    SUBCASE("one user, two items") {
        auto g = build_gamma(build_interaction_matrix(std::vector<Interaction>{{0, 0}, {0, 1}}, 1, 2));
        CHECK(g.at(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
        CHECK(g.at(0, 2) == doctest::Approx(0.7071067811865476).epsilon(1e-15));
        CHECK(g.at(2, 0) == g.at(0, 2));
    }
    SUBCASE("all-ones R gives 1/sqrt(nm) on bipartite blocks") {
        std::vector<Interaction> all;
        for (index_t u = 0; u < 4; ++u)
            for (index_t i = 0; i < 6; ++i) all.push_back({u, i});
        auto g = build_gamma(build_interaction_matrix(all, 4, 6));
        for (std::size_t u = 0; u < 4; ++u)
            for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(g.at(u, 4 + i) - 1.0 / std::sqrt(24.0)) < 1e-15);
    }
    SUBCASE("random instances match the dense oracle") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            auto pairs = oracle::random_interactions(7, 9, 0.3, rng);
            auto g = build_gamma(build_interaction_matrix(pairs, 7, 9));
            check_structure(g);
            CHECK(g.is_symmetric(1e-12));
            CHECK(oracle::max_abs_diff(oracle::to_grid(g), oracle::gamma(oracle::dense_interactions(pairs, 7, 9))) <
                  1e-12);
        }
    }
}

TEST_CASE("build_delta") {
    SUBCASE("unit diagonals give the identity") {
        auto d = build_delta(SparseMatrix::identity(1), SparseMatrix::identity(1), 1, 1);
        CHECK(d.to_dense() == DenseMatrix::Identity(2, 2));
    }
    SUBCASE("2x2 example matches the dense oracle") {
        auto r = two_by_two();
        auto d = build_delta(co_interaction(r, Side::user), co_interaction(r, Side::item), 2, 2);
        auto dense_r = oracle::dense_interactions({{0, 0}, {0, 1}, {1, 1}}, 2, 2);
        auto expected =
            oracle::delta(oracle::common_neighbours(dense_r, true), oracle::common_neighbours(dense_r, false));
        CHECK(oracle::max_abs_diff(oracle::to_grid(d), expected) < 1e-12);
        CHECK(d.is_symmetric(1e-12));
        // Off-diagonal blocks are zero.
        for (std::size_t u = 0; u < 2; ++u)
            for (std::size_t i = 2; i < 4; ++i) CHECK(d.at(u, i) == 0.0);
    }
    SUBCASE("an all-zero block stays zero") {
        SparseMatrix zero_users = SparseMatrix::from_triplets(2, 2, {});
        auto d = build_delta(zero_users, SparseMatrix::identity(3), 2, 3);
        for (std::size_t r = 0; r < 2; ++r) CHECK(d.row_cols(r).empty());
        CHECK(d.at(2, 2) == 1.0);
        for (double v : d.values()) CHECK(std::isfinite(v));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(build_delta(SparseMatrix::identity(2), SparseMatrix::identity(2), 3, 2), data_error);
        CHECK_THROWS_AS(build_delta(SparseMatrix::identity(2), SparseMatrix::identity(2), 2, 1), data_error);
    }
}

TEST_CASE("build_graph_inputs has the documented block structure") {
    std::mt19937_64 rng(5);
    auto pairs = oracle::random_interactions(6, 8, 0.3, rng);
    auto inputs = build_graph_inputs(build_interaction_matrix(pairs, 6, 8));
    CHECK(inputs.n_vertices() == 14);
    for (std::size_t a = 0; a < 14; ++a)
        for (std::size_t b = 0; b < 14; ++b) {
            const bool same_side = (a < 6) == (b < 6);
            if (same_side) CHECK(inputs.gamma.at(a, b) == 0.0);
            else CHECK(inputs.delta.at(a, b) == 0.0);
        }
}

TEST_CASE("zero-degree vertices produce zero rows") {
    // User 1 and item 2 have no interactions.
    auto r = build_interaction_matrix(std::vector<Interaction>{{0, 0}, {0, 1}, {2, 1}}, 3, 3);
    auto inputs = build_graph_inputs(r);
    for (std::size_t v : {std::size_t{1}, std::size_t{5}}) {
        CHECK(inputs.gamma.row_cols(v).empty());
        CHECK(inputs.delta.row_cols(v).empty());
    }
    for (double v : inputs.gamma.values()) CHECK(std::isfinite(v));
}

TEST_CASE("spmm") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> normal;
    DenseMatrix m(16, 8);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);

    CHECK(spmm(SparseMatrix::identity(16), m) == m);
    CHECK(spmm(SparseMatrix::from_triplets(5, 16, {}), m) == DenseMatrix::Zero(5, 8));
    CHECK_THROWS_AS(spmm(SparseMatrix::identity(4), m), data_error);

    std::bernoulli_distribution keep(0.25);
    for (std::size_t n : {std::size_t{3}, std::size_t{16}, std::size_t{40}, std::size_t{64}}) {
        DenseMatrix s = DenseMatrix::Zero(n, n);
        DenseMatrix x(n, 8);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (keep(rng)) s.data()[i] = normal(rng);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
        const auto sparse = SparseMatrix::from_dense(s);
        const auto expected = oracle::matmul(oracle::to_grid(s), oracle::to_grid(x));
        CHECK(oracle::max_abs_diff(oracle::to_grid(spmm(sparse, x)), expected) < 1e-12);
        const auto expected_t = oracle::matmul(oracle::to_grid(DenseMatrix(s.transpose())), oracle::to_grid(x));
        CHECK(oracle::max_abs_diff(oracle::to_grid(spmm_transposed(sparse, x)), expected_t) < 1e-12);
        CHECK(transpose(sparse).to_dense() == s.transpose());
    }
}
