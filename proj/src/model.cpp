#include "wigcn/model.hpp"

#include <cmath>
#include <random>

#include "wigcn/error.hpp"

namespace wigcn {

namespace {

bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

void fill_he_normal(double* data, std::size_t count, std::size_t fan_in, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = normal(rng);
    }
}

}  // namespace

std::string_view to_string(Variant variant) {
    switch (variant) {
        case Variant::wigcn:
            return "wigcn";
        case Variant::ngcf_like:
            return "ngcf_like";
        case Variant::lightgcn_like:
            return "lightgcn_like";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "wigcn") return Variant::wigcn;
    if (name == "ngcf_like") return Variant::ngcf_like;
    if (name == "lightgcn_like") return Variant::lightgcn_like;
    throw usage_error("unknown variant '" + std::string(name) + "' (expected wigcn, ngcf_like or lightgcn_like)");
}

ModelParams ModelParams::zeros_like() const {
    ModelParams out;
    out.n_users = n_users;
    out.n_items = n_items;
    out.e0 = DenseMatrix::Zero(e0.rows(), e0.cols());
    out.layers.reserve(layers.size());
    for (const auto& layer : layers) {
        out.layers.push_back({DenseMatrix::Zero(layer.w1.rows(), layer.w1.cols()),
                              DenseMatrix::Zero(layer.w2.rows(), layer.w2.cols()),
                              DenseVector::Zero(layer.bias.size())});
    }
    return out;
}

std::vector<std::span<double>> parameter_blocks(ModelParams& params) {
    std::vector<std::span<double>> blocks;
    blocks.reserve(1 + 3 * params.layers.size());
    blocks.emplace_back(params.e0.data(), static_cast<std::size_t>(params.e0.size()));
    for (auto& layer : params.layers) {
        blocks.emplace_back(layer.w1.data(), static_cast<std::size_t>(layer.w1.size()));
        blocks.emplace_back(layer.w2.data(), static_cast<std::size_t>(layer.w2.size()));
        blocks.emplace_back(layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }
    return blocks;
}

std::vector<std::span<const double>> parameter_blocks(const ModelParams& params) {
    std::vector<std::span<const double>> blocks;
    for (auto block : parameter_blocks(const_cast<ModelParams&>(params))) {
        blocks.emplace_back(block.data(), block.size());
    }
    return blocks;
}

std::string parameter_block_name(std::size_t block_index) {
    if (block_index == 0) {
        return "e0";
    }
    const std::size_t layer = (block_index - 1) / 3 + 1;
    static constexpr const char* kNames[] = {"w1", "w2", "bias"};
    return std::string(kNames[(block_index - 1) % 3]) + "[layer " + std::to_string(layer) + "]";
}

ModelParams init_params(std::size_t n_users, std::size_t n_items, std::size_t d, std::size_t n_layers,
                        std::uint64_t seed) {
    if (n_users == 0 || n_items == 0) {
        throw data_error("init_params: need at least one user and one item");
    }
    if (d == 0 || n_layers == 0) {
        throw usage_error("init_params: embedding size and layer count must be at least 1");
    }
    std::mt19937_64 rng(seed);
    ModelParams params;
    params.n_users = n_users;
    params.n_items = n_items;
    params.e0.resize(static_cast<Eigen::Index>(n_users + n_items), static_cast<Eigen::Index>(d));
    // User and item tables are separate blocks with their own fan-in.
    fill_he_normal(params.e0.data(), n_users * d, n_users, rng);
    fill_he_normal(params.e0.data() + n_users * d, n_items * d, n_items, rng);

    params.layers.resize(n_layers);
    for (auto& layer : params.layers) {
        layer.w1.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        layer.w2.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        fill_he_normal(layer.w1.data(), d * d, d, rng);
        fill_he_normal(layer.w2.data(), d * d, d, rng);
        layer.bias = DenseVector::Zero(static_cast<Eigen::Index>(d));
    }
    return params;
}

DenseMatrix leaky_relu(const DenseMatrix& x, double slope) {
    return x.unaryExpr([slope](double v) { return v >= 0.0 ? v : slope * v; });
}

DenseMatrix leaky_relu_derivative(const DenseMatrix& x, double slope) {
    return x.unaryExpr([slope](double v) { return v >= 0.0 ? 1.0 : slope; });
}

ForwardTrace forward(const ModelParams& params, const GraphInputs& inputs, Variant variant, double leaky_slope) {
    const std::size_t n = inputs.n_vertices();
    if (static_cast<std::size_t>(params.e0.rows()) != n || params.n_users != inputs.n_users ||
        params.n_items != inputs.n_items) {
        throw data_error("forward: parameters are for " + std::to_string(params.n_users) + " users and " +
                         std::to_string(params.n_items) + " items, graph has " + std::to_string(inputs.n_users) +
                         " users and " + std::to_string(inputs.n_items) + " items");
    }
    if (inputs.gamma.n_rows() != n || inputs.gamma.n_cols() != n) {
        throw data_error("forward: adjacency matrix does not match the vertex count");
    }
    if (variant == Variant::wigcn && (inputs.delta.n_rows() != n || inputs.delta.n_cols() != n)) {
        throw data_error("forward: co-interaction matrix does not match the vertex count");
    }

    ForwardTrace trace;
    trace.variant = variant;
    trace.leaky_slope = leaky_slope;
    trace.n_users = inputs.n_users;
    trace.n_items = inputs.n_items;

    const std::size_t n_layers = params.layers.size();
    std::vector<DenseMatrix> outputs;
    outputs.reserve(n_layers + 1);
    outputs.push_back(params.e0);

    for (std::size_t k = 0; k < n_layers; ++k) {
        const DenseMatrix& input = outputs.back();
        trace.layer_inputs.push_back(input);
        DenseMatrix propagated = spmm(inputs.gamma, input);

        if (variant == Variant::lightgcn_like) {
            if (!all_finite(propagated)) {
                throw numerical_error("forward: non-finite values in layer " + std::to_string(k + 1));
            }
            trace.propagated.push_back(propagated);
            outputs.push_back(std::move(propagated));
            continue;
        }

        const LayerParams& layer = params.layers[k];
        if (layer.w1.rows() != input.cols() || layer.bias.size() != layer.w1.cols() ||
            (variant == Variant::wigcn && (layer.w2.rows() != input.cols() || layer.w2.cols() != layer.w1.cols()))) {
            throw data_error("forward: weight shapes of layer " + std::to_string(k + 1) +
                             " do not match its input width " + std::to_string(input.cols()));
        }
        DenseMatrix pre = propagated * layer.w1;
        if (variant == Variant::wigcn) {
            DenseMatrix weighted = spmm(inputs.delta, propagated);
            pre.noalias() += weighted * layer.w2;
            trace.weighted.push_back(std::move(weighted));
        }
        pre.rowwise() += layer.bias.transpose();
        if (!all_finite(pre)) {
            throw numerical_error("forward: non-finite values in layer " + std::to_string(k + 1));
        }
        trace.propagated.push_back(std::move(propagated));
        outputs.push_back(leaky_relu(pre, leaky_slope));
        trace.pre_activations.push_back(std::move(pre));
    }

    if (variant == Variant::lightgcn_like) {
        DenseMatrix mean = DenseMatrix::Zero(outputs[0].rows(), outputs[0].cols());
        for (const auto& layer_output : outputs) {
            mean += layer_output;
        }
        trace.final_embedding = mean / static_cast<double>(outputs.size());
    } else {
        Eigen::Index width = 0;
        for (const auto& layer_output : outputs) {
            width += layer_output.cols();
        }
        trace.final_embedding.resize(static_cast<Eigen::Index>(n), width);
        Eigen::Index col = 0;
        for (const auto& layer_output : outputs) {
            trace.final_embedding.middleCols(col, layer_output.cols()) = layer_output;
            col += layer_output.cols();
        }
    }
    return trace;
}

DenseVector predict_scores(const ForwardTrace& trace, std::size_t user_index) {
    if (user_index >= trace.n_users) {
        throw data_error("predict_scores: user index " + std::to_string(user_index) + " out of range (" +
                         std::to_string(trace.n_users) + " users)");
    }
    const auto items = trace.final_embedding.middleRows(static_cast<Eigen::Index>(trace.n_users),
                                                        static_cast<Eigen::Index>(trace.n_items));
    return items * trace.final_embedding.row(static_cast<Eigen::Index>(user_index)).transpose();
}

}  // namespace wigcn
