#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wigcn/data.hpp"
#include "wigcn/model.hpp"

namespace wigcn {

constexpr std::size_t kDefaultEvalK = 20;

struct RankingMetrics {
    std::size_t k = kDefaultEvalK;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double ndcg = 0.0;
    std::size_t n_users_evaluated = 0;
};

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct ErrorMetrics {
    double mae = 0.0;
    double rmse = 0.0;
};

/// Indices of the k best scores outside `excluded` (sorted ascending), by
/// descending score with ties going to the lower index. Shorter than k when
/// fewer candidates exist.
std::vector<index_t> topk_ranking(std::span<const double> scores, std::span<const index_t> excluded, std::size_t k);

/// `relevant` must be sorted. Precision divides hits by `list_length`, which
/// defaults to the length of the recommendation list.
PrecisionRecall precision_recall_f1(std::span<const index_t> recommended, std::span<const index_t> relevant,
                                    std::size_t list_length = 0);

/// Binary-gain NDCG with a 1/log2(rank+1) discount over the first k positions.
double ndcg_at_k(std::span<const index_t> recommended, std::span<const index_t> relevant, std::size_t k);

/// Scores of every item for a user.
using UserScorer = std::function<std::vector<double>(std::size_t user)>;

/// Per-user top-k evaluation over users with at least one test positive,
/// excluding their training positives. Precision@k uses k as the denominator.
/// Results are unweighted means; f1 is derived from the mean precision and recall.
RankingMetrics evaluate_scores(const UserScorer& scorer, const InteractionDataset& dataset, std::size_t k);

RankingMetrics evaluate_model(const ForwardTrace& trace, const InteractionDataset& dataset, std::size_t k);

ErrorMetrics mae_rmse(std::span<const double> predicted, std::span<const double> actual);

}  // namespace wigcn
