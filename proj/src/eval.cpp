#include "wigcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wigcn/error.hpp"

namespace wigcn {

namespace {

double f1_score(double precision, double recall) {
    return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

std::size_t count_hits(std::span<const index_t> recommended, std::span<const index_t> relevant) {
    std::size_t hits = 0;
    for (index_t item : recommended) {
        if (std::binary_search(relevant.begin(), relevant.end(), item)) ++hits;
    }
    return hits;
}

}  // namespace

std::vector<index_t> topk_ranking(std::span<const double> scores, std::span<const index_t> excluded, std::size_t k) {
    std::vector<index_t> candidates;
    candidates.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::binary_search(excluded.begin(), excluded.end(), static_cast<index_t>(i))) {
            candidates.push_back(static_cast<index_t>(i));
        }
    }
    auto better = [&](index_t a, index_t b) { return scores[a] != scores[b] ? scores[a] > scores[b] : a < b; };
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      better);
    candidates.resize(take);
    return candidates;
}

PrecisionRecall precision_recall_f1(std::span<const index_t> recommended, std::span<const index_t> relevant,
                                    std::size_t list_length) {
    const std::size_t denominator = list_length > 0 ? list_length : recommended.size();
    PrecisionRecall out;
    if (denominator == 0 || relevant.empty()) {
        return out;
    }
    const auto hits = static_cast<double>(count_hits(recommended, relevant));
    out.precision = hits / static_cast<double>(denominator);
    out.recall = hits / static_cast<double>(relevant.size());
    out.f1 = f1_score(out.precision, out.recall);
    return out;
}

double ndcg_at_k(std::span<const index_t> recommended, std::span<const index_t> relevant, std::size_t k) {
    double dcg = 0.0;
    const std::size_t depth = std::min(k, recommended.size());
    for (std::size_t pos = 0; pos < depth; ++pos) {
        if (std::binary_search(relevant.begin(), relevant.end(), recommended[pos])) {
            dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
        }
    }
    double ideal = 0.0;
    const std::size_t ideal_depth = std::min(k, relevant.size());
    for (std::size_t pos = 0; pos < ideal_depth; ++pos) {
        ideal += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    }
    return ideal > 0.0 ? dcg / ideal : 0.0;
}

RankingMetrics evaluate_scores(const UserScorer& scorer, const InteractionDataset& dataset, std::size_t k) {
    if (k == 0) {
        throw usage_error("evaluation cutoff k must be at least 1");
    }
    RankingMetrics metrics;
    metrics.k = k;
    double precision_sum = 0.0;
    double recall_sum = 0.0;
    double ndcg_sum = 0.0;
    for (std::size_t u = 0; u < dataset.n_users; ++u) {
        const auto& relevant = dataset.test_positives[u];
        if (relevant.empty()) {
            continue;
        }
        const std::vector<double> scores = scorer(u);
        if (scores.size() != dataset.n_items) {
            throw data_error("scorer returned " + std::to_string(scores.size()) + " scores for " +
                             std::to_string(dataset.n_items) + " items");
        }
        const auto ranked = topk_ranking(scores, dataset.train_positives[u], k);
        const auto pr = precision_recall_f1(ranked, relevant, k);
        precision_sum += pr.precision;
        recall_sum += pr.recall;
        ndcg_sum += ndcg_at_k(ranked, relevant, k);
        ++metrics.n_users_evaluated;
    }
    if (metrics.n_users_evaluated == 0) {
        throw data_error("evaluation: no user has a test interaction");
    }
    const auto n = static_cast<double>(metrics.n_users_evaluated);
    metrics.precision = precision_sum / n;
    metrics.recall = recall_sum / n;
    metrics.ndcg = ndcg_sum / n;
    metrics.f1 = f1_score(metrics.precision, metrics.recall);
    return metrics;
}

RankingMetrics evaluate_model(const ForwardTrace& trace, const InteractionDataset& dataset, std::size_t k) {
    if (trace.n_users != dataset.n_users || trace.n_items != dataset.n_items) {
        throw data_error("evaluate_model: model has " + std::to_string(trace.n_users) + " users and " +
                         std::to_string(trace.n_items) + " items, dataset has " + std::to_string(dataset.n_users) +
                         " and " + std::to_string(dataset.n_items));
    }
    return evaluate_scores(
        [&](std::size_t u) {
            const DenseVector scores = predict_scores(trace, u);
            return std::vector<double>(scores.data(), scores.data() + scores.size());
        },
        dataset, k);
}

ErrorMetrics mae_rmse(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size()) {
        throw data_error("mae_rmse: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(actual.size()) + " targets");
    }
    if (predicted.empty()) {
        throw data_error("mae_rmse: need at least one value");
    }
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double diff = predicted[i] - actual[i];
        abs_sum += std::abs(diff);
        sq_sum += diff * diff;
    }
    const auto n = static_cast<double>(predicted.size());
    return {abs_sum / n, std::sqrt(sq_sum / n)};
}

}  // namespace wigcn
