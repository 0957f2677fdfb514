#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wigcn/graph.hpp"
#include "wigcn/sparse.hpp"

namespace wigcn {

/// Propagation rule used by forward().
///
///  - wigcn:         E' = LeakyReLU(G E W1 + D G E W2 + b)
///  - ngcf_like:     E' = LeakyReLU(G E W1 + b)
///  - lightgcn_like: E' = G E, final embedding is the mean over layers
///
/// where G is the normalized adjacency and D the normalized co-interaction matrix.
enum class Variant { wigcn, ngcf_like, lightgcn_like };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);

constexpr double kDefaultLeakySlope = 0.2;

struct LayerParams {
    DenseMatrix w1;
    DenseMatrix w2;
    DenseVector bias;
};

/// Layer-0 embeddings (users stacked above items) and the per-layer weights.
struct ModelParams {
    DenseMatrix e0;
    std::vector<LayerParams> layers;
    std::size_t n_users = 0;
    std::size_t n_items = 0;

    std::size_t embedding_dim() const { return static_cast<std::size_t>(e0.cols()); }
    std::size_t n_layers() const { return layers.size(); }

    /// Same shapes, every entry zero.
    ModelParams zeros_like() const;
};

/// Every trainable block as a flat mutable span, in checkpoint order:
/// e0, then per layer w1, w2, bias.
std::vector<std::span<double>> parameter_blocks(ModelParams& params);
std::vector<std::span<const double>> parameter_blocks(const ModelParams& params);
std::string parameter_block_name(std::size_t block_index);

/// He-normal initialization: each block with fan-in f is drawn from N(0, 2/f).
/// Weight matrices use their input width as fan-in; the embedding table uses its
/// row count (the one-hot input width), matching the usual embedding-layer
/// convention. Biases start at zero.
ModelParams init_params(std::size_t n_users, std::size_t n_items, std::size_t d, std::size_t n_layers,
                        std::uint64_t seed);

/// Intermediates retained for the backward pass.
struct ForwardTrace {
    Variant variant = Variant::wigcn;
    double leaky_slope = kDefaultLeakySlope;
    std::size_t n_users = 0;
    std::size_t n_items = 0;

    std::vector<DenseMatrix> layer_inputs;    // E^(0) .. E^(L-1)
    std::vector<DenseMatrix> propagated;      // G E^(k-1)
    std::vector<DenseMatrix> weighted;        // D G E^(k-1); empty unless wigcn
    std::vector<DenseMatrix> pre_activations; // argument of LeakyReLU; empty for lightgcn_like
    DenseMatrix final_embedding;              // E*

    std::size_t n_layers() const { return propagated.size(); }
};

ForwardTrace forward(const ModelParams& params, const GraphInputs& inputs, Variant variant,
                     double leaky_slope = kDefaultLeakySlope);

/// Scores of one user against every item: rows n_users.. of E* dotted with the user row.
DenseVector predict_scores(const ForwardTrace& trace, std::size_t user_index);

DenseMatrix leaky_relu(const DenseMatrix& x, double slope);

/// 1 where x >= 0, slope where x < 0. The derivative at exactly 0 is fixed to 1.
DenseMatrix leaky_relu_derivative(const DenseMatrix& x, double slope);

}  // namespace wigcn
