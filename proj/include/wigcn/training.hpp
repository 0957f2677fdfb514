#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "wigcn/data.hpp"
#include "wigcn/graph.hpp"
#include "wigcn/model.hpp"

namespace wigcn {

struct BprTriple {
    index_t user;
    index_t pos_item;
    index_t neg_item;
};

struct TrainConfig {
    std::size_t d = 64;
    std::size_t n_layers = 3;
    double learning_rate = 1e-3;
    double lambda_reg = 1e-5;
    std::size_t batch_size = 1024;
    std::size_t epochs = 0;
    std::uint64_t seed = 0;
    double leaky_slope = kDefaultLeakySlope;
    Variant variant = Variant::wigcn;

    /// Throws usage_error when a value is out of range.
    void validate() const;
};

/// Same shapes as ModelParams.
using Gradients = ModelParams;

/// Draws BPR triples. The user of each triple is the owner of a uniformly
/// chosen training interaction, so users are weighted by degree; negatives are
/// uniform over all items with rejection.
class BprSampler {
public:
    /// Throws data_error when no user has both a positive and a non-interacted item.
    explicit BprSampler(const InteractionDataset& dataset);

    std::vector<BprTriple> sample(std::size_t batch_size, std::mt19937_64& rng) const;

private:
    const InteractionDataset* dataset_;
    std::vector<Interaction> pool_;
};

std::vector<BprTriple> sample_bpr_batch(const InteractionDataset& dataset, std::size_t batch_size,
                                        std::mt19937_64& rng);

/// Squared L2 norm over every trainable block.
double l2_penalty(const ModelParams& params);

/// mean over the batch of -ln sigmoid(score(u,i) - score(u,j)), plus
/// lambda * ||params||^2. An empty batch contributes zero ranking loss.
double bpr_loss(const ForwardTrace& trace, std::span<const BprTriple> batch, const ModelParams& params,
                double lambda_reg);

struct LossAndGradients {
    double loss = 0.0;
    Gradients grads;
};

/// Runs forward, evaluates bpr_loss and back-propagates it into every block.
LossAndGradients compute_gradients(const ModelParams& params, const GraphInputs& inputs,
                                   std::span<const BprTriple> batch, const TrainConfig& config);

class AdamState {
public:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-8;

    explicit AdamState(const ModelParams& shape_like);

    std::uint64_t step_count() const { return step_; }
    const ModelParams& first_moment() const { return m_; }
    const ModelParams& second_moment() const { return v_; }

    /// Bias-corrected Adam update applied in place.
    void step(ModelParams& params, const Gradients& grads, double learning_rate);

private:
    ModelParams m_;
    ModelParams v_;
    std::uint64_t step_ = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double mean_loss = 0.0;
    double wall_seconds = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&, const ModelParams&)>;

std::size_t batches_per_epoch(std::size_t n_train, std::size_t batch_size);

/// Each epoch runs batches_per_epoch() freshly sampled mini-batches. Throws
/// numerical_error naming the epoch if the loss diverges.
TrainResult train(const InteractionDataset& dataset, const GraphInputs& inputs, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace wigcn
