#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wigcn/data.hpp"
#include "wigcn/graph.hpp"
#include "wigcn/model.hpp"
#include "wigcn/training.hpp"

namespace fixtures {

using namespace wigcn;

// Dataset with identity id maps from explicit per-user train/test lists.
inline InteractionDataset make_dataset(std::vector<std::vector<index_t>> train, std::vector<std::vector<index_t>> test,
                                       std::size_t n_items) {
    InteractionDataset ds;
    ds.n_users = train.size();
    ds.n_items = n_items;
    test.resize(train.size());
    for (auto& s : train) std::sort(s.begin(), s.end());
    for (auto& s : test) std::sort(s.begin(), s.end());
    ds.train_positives = std::move(train);
    ds.test_positives = std::move(test);
    std::vector<std::int64_t> users(ds.n_users), items(n_items);
    std::iota(users.begin(), users.end(), 0);
    std::iota(items.begin(), items.end(), 0);
    ds.user_ids = IdMap(users);
    ds.item_ids = IdMap(items);
    return ds;
}

// Two-community benchmark: 40 users and 60 items split evenly into two
// blocks. With `shared_items` every user of a block interacts with the same 10
// randomly chosen items of that block; otherwise each user draws their own 10.
inline std::vector<RawInteraction> two_block_interactions(std::uint64_t seed, bool shared_items = true) {
    constexpr int kUsers = 40, kItems = 60, kBlocks = 2, kPerUser = 10;
    constexpr int users_per_block = kUsers / kBlocks, items_per_block = kItems / kBlocks;
    std::mt19937_64 rng(seed);
    std::vector<RawInteraction> out;
    std::vector<std::vector<int>> block_items(kBlocks);
    for (int b = 0; b < kBlocks; ++b) {
        std::vector<int> pool(items_per_block);
        std::iota(pool.begin(), pool.end(), b * items_per_block);
        std::shuffle(pool.begin(), pool.end(), rng);
        block_items[b].assign(pool.begin(), pool.begin() + kPerUser);
    }
    for (int u = 0; u < kUsers; ++u) {
        const int b = u / users_per_block;
        std::vector<int> chosen = block_items[b];
        if (!shared_items) {
            std::vector<int> pool(items_per_block);
            std::iota(pool.begin(), pool.end(), b * items_per_block);
            std::shuffle(pool.begin(), pool.end(), rng);
            chosen.assign(pool.begin(), pool.begin() + kPerUser);
        }
        for (int i : chosen) out.push_back({u, i});
    }
    return out;
}

struct TinyInstance {
    InteractionDataset dataset;
    GraphInputs inputs;
    ModelParams params;
    std::vector<BprTriple> batch;
    TrainConfig config;
};

// Random instance with at most 5 users, 6 items, d <= 4 and at most 2 layers.
inline TinyInstance random_tiny_instance(std::uint64_t seed, Variant variant) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const std::size_t n_users = pick(2, 5), n_items = pick(3, 6);
    std::vector<std::vector<index_t>> train(n_users);
    std::bernoulli_distribution keep(0.4);
    for (std::size_t u = 0; u < n_users; ++u) {
        for (std::size_t i = 0; i < n_items; ++i)
            if (keep(rng)) train[u].push_back(static_cast<index_t>(i));
        if (train[u].empty()) train[u].push_back(static_cast<index_t>(pick(0, static_cast<int>(n_items) - 1)));
        if (train[u].size() == n_items) train[u].pop_back();
    }
    TinyInstance t;
    t.dataset = make_dataset(train, {}, n_items);
    t.inputs = build_graph_inputs(t.dataset.train_matrix());
    t.config.d = pick(1, 4);
    t.config.n_layers = pick(1, 2);
    t.config.lambda_reg = 1e-3;
    t.config.variant = variant;
    t.config.leaky_slope = 0.2;
    t.params = init_params(n_users, n_items, t.config.d, t.config.n_layers, seed * 7 + 1);
    std::normal_distribution<double> normal(0.0, 0.5);
    for (auto& layer : t.params.layers)
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = normal(rng);
    // Larger embeddings so that the ranking term dominates the penalty.
    t.params.e0 *= 2.0;
    t.batch = BprSampler(t.dataset).sample(static_cast<std::size_t>(pick(1, 4)), rng);
    return t;
}

struct GradCheckReport {
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
    double worst_relative_error = 0.0;
    std::string worst_entry;
};

// Central differences of an extended-precision reference loss against the
// analytic gradients. Entries whose +-h evaluations straddle an activation
// kink are skipped.
inline GradCheckReport finite_difference_check(const TinyInstance& t, double h = 1e-5, double min_grad = 1e-8) {
    const auto gamma = oracle::to_grid(t.inputs.gamma);
    const auto delta = oracle::to_grid(t.inputs.delta);
    const auto analytic = compute_gradients(t.params, t.inputs, t.batch, t.config);
    const auto grad_blocks = parameter_blocks(analytic.grads);

    GradCheckReport report;
    ModelParams probe = t.params;
    auto blocks = parameter_blocks(probe);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (std::size_t x = 0; x < blocks[b].size(); ++x) {
            const double a = grad_blocks[b][x];
            if (std::abs(a) <= min_grad) continue;
            const double original = blocks[b][x];
            blocks[b][x] = original + h;
            const double up_x = blocks[b][x];
            const auto up = oracle::reference_loss(probe, gamma, delta, t.config.variant, t.config.leaky_slope,
                                                   t.batch, t.config.lambda_reg);
            blocks[b][x] = original - h;
            const double down_x = blocks[b][x];
            const auto down = oracle::reference_loss(probe, gamma, delta, t.config.variant, t.config.leaky_slope,
                                                     t.batch, t.config.lambda_reg);
            blocks[b][x] = original;
            if (up.pre_signs != down.pre_signs) {
                ++report.skipped_kinks;
                continue;
            }
            const double numeric = static_cast<double>((up.loss - down.loss) / (static_cast<long double>(up_x) - down_x));
            const double rel = std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric));
            ++report.checked;
            if (rel > report.worst_relative_error) {
                report.worst_relative_error = rel;
                report.worst_entry = parameter_block_name(b) + "[" + std::to_string(x) + "]";
            }
        }
    }
    return report;
}

}  // namespace fixtures
