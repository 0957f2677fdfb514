#include "wigcn/training.hpp"

#include <chrono>
#include <cmath>

#include "wigcn/error.hpp"

namespace wigcn {

namespace {

// -ln(sigmoid(x)) without overflow for large |x|.
double neg_log_sigmoid(double x) {
    return x >= 0.0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void check_triple(const BprTriple& t, std::size_t n_users, std::size_t n_items) {
    if (t.user >= n_users || t.pos_item >= n_items || t.neg_item >= n_items) {
        throw data_error("BPR triple (" + std::to_string(t.user) + ", " + std::to_string(t.pos_item) + ", " +
                         std::to_string(t.neg_item) + ") out of range");
    }
}

double ranking_loss(const ForwardTrace& trace, std::span<const BprTriple> batch) {
    const auto& e = trace.final_embedding;
    const auto offset = static_cast<Eigen::Index>(trace.n_users);
    double total = 0.0;
    for (const auto& t : batch) {
        check_triple(t, trace.n_users, trace.n_items);
        const auto user = e.row(t.user);
        const double margin = user.dot(e.row(offset + t.pos_item)) - user.dot(e.row(offset + t.neg_item));
        total += neg_log_sigmoid(margin);
    }
    return batch.empty() ? 0.0 : total / static_cast<double>(batch.size());
}

}  // namespace

void TrainConfig::validate() const {
    if (d == 0) throw usage_error("embedding size d must be at least 1");
    if (n_layers == 0) throw usage_error("n_layers must be at least 1");
    if (!(learning_rate > 0.0)) throw usage_error("learning_rate must be positive");
    if (!(lambda_reg >= 0.0)) throw usage_error("lambda_reg must be non-negative");
    if (batch_size == 0) throw usage_error("batch_size must be at least 1");
    if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw usage_error("leaky_slope must lie in [0, 1)");
}

BprSampler::BprSampler(const InteractionDataset& dataset) : dataset_(&dataset) {
    for (std::size_t u = 0; u < dataset.n_users; ++u) {
        const auto& positives = dataset.train_positives[u];
        if (positives.empty() || positives.size() >= dataset.n_items) {
            continue;
        }
        for (index_t item : positives) {
            pool_.push_back({static_cast<index_t>(u), item});
        }
    }
    if (pool_.empty()) {
        throw data_error("BPR sampler: no user has both a training positive and a non-interacted item");
    }
}

std::vector<BprTriple> BprSampler::sample(std::size_t batch_size, std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> pick_pair(0, pool_.size() - 1);
    std::uniform_int_distribution<index_t> pick_item(0, static_cast<index_t>(dataset_->n_items - 1));
    std::vector<BprTriple> batch;
    batch.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
        const Interaction& pair = pool_[pick_pair(rng)];
        const auto& positives = dataset_->train_positives[pair.user];
        index_t negative = 0;
        do {
            negative = pick_item(rng);
        } while (std::binary_search(positives.begin(), positives.end(), negative));
        batch.push_back({pair.user, pair.item, negative});
    }
    return batch;
}

std::vector<BprTriple> sample_bpr_batch(const InteractionDataset& dataset, std::size_t batch_size,
                                        std::mt19937_64& rng) {
    return BprSampler(dataset).sample(batch_size, rng);
}

double l2_penalty(const ModelParams& params) {
    double total = 0.0;
    for (auto block : parameter_blocks(params)) {
        for (double v : block) total += v * v;
    }
    return total;
}

double bpr_loss(const ForwardTrace& trace, std::span<const BprTriple> batch, const ModelParams& params,
                double lambda_reg) {
    const double loss = ranking_loss(trace, batch) + lambda_reg * l2_penalty(params);
    if (!std::isfinite(loss)) {
        throw numerical_error("BPR loss is not finite");
    }
    return loss;
}

LossAndGradients compute_gradients(const ModelParams& params, const GraphInputs& inputs,
                                   std::span<const BprTriple> batch, const TrainConfig& config) {
    const ForwardTrace trace = forward(params, inputs, config.variant, config.leaky_slope);
    LossAndGradients result;
    result.loss = bpr_loss(trace, batch, params, config.lambda_reg);
    result.grads = params.zeros_like();
    Gradients& grads = result.grads;

    // d loss / d E*
    const DenseMatrix& e = trace.final_embedding;
    DenseMatrix d_final = DenseMatrix::Zero(e.rows(), e.cols());
    const auto offset = static_cast<Eigen::Index>(trace.n_users);
    const double scale = batch.empty() ? 0.0 : 1.0 / static_cast<double>(batch.size());
    for (const auto& t : batch) {
        const Eigen::Index u = t.user;
        const Eigen::Index i = offset + t.pos_item;
        const Eigen::Index j = offset + t.neg_item;
        const double margin = e.row(u).dot(e.row(i)) - e.row(u).dot(e.row(j));
        const double g = -sigmoid(-margin) * scale;
        d_final.row(u) += g * (e.row(i) - e.row(j));
        d_final.row(i) += g * e.row(u);
        d_final.row(j) -= g * e.row(u);
    }

    const std::size_t n_layers = trace.n_layers();
    std::vector<DenseMatrix> d_outputs(n_layers + 1);

    if (config.variant == Variant::lightgcn_like) {
        const double share = 1.0 / static_cast<double>(n_layers + 1);
        for (auto& d : d_outputs) d = d_final * share;
        for (std::size_t k = n_layers; k >= 1; --k) {
            d_outputs[k - 1] += spmm_transposed(inputs.gamma, d_outputs[k]);
        }
    } else {
        Eigen::Index col = 0;
        d_outputs[0] = d_final.middleCols(col, params.e0.cols());
        col += params.e0.cols();
        for (std::size_t k = 1; k <= n_layers; ++k) {
            const Eigen::Index width = trace.pre_activations[k - 1].cols();
            d_outputs[k] = d_final.middleCols(col, width);
            col += width;
        }
        for (std::size_t k = n_layers; k >= 1; --k) {
            const LayerParams& layer = params.layers[k - 1];
            LayerParams& g_layer = grads.layers[k - 1];
            const DenseMatrix d_pre =
                d_outputs[k].cwiseProduct(leaky_relu_derivative(trace.pre_activations[k - 1], config.leaky_slope));

            g_layer.w1.noalias() = trace.propagated[k - 1].transpose() * d_pre;
            g_layer.bias = d_pre.colwise().sum().transpose();
            DenseMatrix d_propagated = d_pre * layer.w1.transpose();
            if (config.variant == Variant::wigcn) {
                g_layer.w2.noalias() = trace.weighted[k - 1].transpose() * d_pre;
                const DenseMatrix d_weighted = d_pre * layer.w2.transpose();
                d_propagated += spmm_transposed(inputs.delta, d_weighted);
            }
            d_outputs[k - 1] += spmm_transposed(inputs.gamma, d_propagated);
        }
    }
    grads.e0 = std::move(d_outputs[0]);

    auto grad_blocks = parameter_blocks(grads);
    const auto param_blocks = parameter_blocks(params);
    for (std::size_t b = 0; b < grad_blocks.size(); ++b) {
        for (std::size_t x = 0; x < grad_blocks[b].size(); ++x) {
            grad_blocks[b][x] += 2.0 * config.lambda_reg * param_blocks[b][x];
            if (!std::isfinite(grad_blocks[b][x])) {
                throw numerical_error("non-finite gradient in " + parameter_block_name(b));
            }
        }
    }
    return result;
}

AdamState::AdamState(const ModelParams& shape_like) : m_(shape_like.zeros_like()), v_(shape_like.zeros_like()) {}

void AdamState::step(ModelParams& params, const Gradients& grads, double learning_rate) {
    auto p_blocks = parameter_blocks(params);
    const auto g_blocks = parameter_blocks(grads);
    auto m_blocks = parameter_blocks(m_);
    auto v_blocks = parameter_blocks(v_);
    if (p_blocks.size() != g_blocks.size()) {
        throw data_error("adam: gradient block count does not match parameters");
    }
    ++step_;
    const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
    const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
    for (std::size_t b = 0; b < p_blocks.size(); ++b) {
        if (p_blocks[b].size() != g_blocks[b].size()) {
            throw data_error("adam: shape mismatch in " + parameter_block_name(b));
        }
        for (std::size_t x = 0; x < p_blocks[b].size(); ++x) {
            const double g = g_blocks[b][x];
            double& m = m_blocks[b][x];
            double& v = v_blocks[b][x];
            m = kBeta1 * m + (1.0 - kBeta1) * g;
            v = kBeta2 * v + (1.0 - kBeta2) * g * g;
            const double m_hat = m / correction1;
            const double v_hat = v / correction2;
            p_blocks[b][x] -= learning_rate * m_hat / (std::sqrt(v_hat) + kEpsilon);
        }
    }
}

std::size_t batches_per_epoch(std::size_t n_train, std::size_t batch_size) {
    return std::max<std::size_t>(1, (n_train + batch_size - 1) / batch_size);
}

TrainResult train(const InteractionDataset& dataset, const GraphInputs& inputs, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    if (dataset.n_train() == 0) {
        throw data_error("train: training set is empty");
    }
    TrainResult result;
    result.params = init_params(dataset.n_users, dataset.n_items, config.d, config.n_layers, config.seed);
    if (config.epochs == 0) {
        return result;
    }

    const BprSampler sampler(dataset);
    std::mt19937_64 rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
    AdamState adam(result.params);
    const std::size_t n_batches = batches_per_epoch(dataset.n_train(), config.batch_size);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        try {
            for (std::size_t b = 0; b < n_batches; ++b) {
                const auto batch = sampler.sample(config.batch_size, rng);
                auto step = compute_gradients(result.params, inputs, batch, config);
                loss_sum += step.loss;
                adam.step(result.params, step.grads, config.learning_rate);
            }
        } catch (const numerical_error& e) {
            throw numerical_error("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
        }
        EpochRecord record;
        record.epoch = epoch;
        record.mean_loss = loss_sum / static_cast<double>(n_batches);
        record.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (!std::isfinite(record.mean_loss)) {
            throw numerical_error("training diverged at epoch " + std::to_string(epoch));
        }
        result.history.push_back(record);
        if (on_epoch) {
            on_epoch(record, result.params);
        }
    }
    return result;
}

}  // namespace wigcn
