#pragma once
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lore/rng.hpp"
#include "lore/types.hpp"

namespace lore {

enum class RecommenderKind { OracleAffinity, EmpiricalCtr, MfLite, Popularity };

RecommenderKind parse_recommender(std::string_view tag);
std::string_view recommender_tag(RecommenderKind kind);

struct MfConfig {
    std::size_t dims = 8;
    std::size_t epochs = 5;
    double learning_rate = 0.05;
    double regularization = 0.01;
    double init_stddev = 0.1;
    std::size_t retrain_every = 5; // rounds between retrains inside a simulation
};

struct RecommenderConfig {
    RecommenderKind kind = RecommenderKind::OracleAffinity;
    std::size_t k = 5;
    Round candidate_window = 1; // rounds of fresh items eligible; 0 = whole corpus
    std::size_t min_exposure = 0; // per alive creator per round; 0 disables the re-ranker
    MfConfig mf;
};

/// User factors plus item factors split as genre factor + per-item residual,
/// so items created after the last retrain still get a genre-level score.
struct MfModel {
    std::size_t dims = 0;
    std::vector<double> user_factors;  // users x dims
    std::vector<double> genre_factors; // genres x dims
    std::vector<double> item_factors;  // trained items x dims
    std::vector<double> epoch_loss;

    double score(UserId user, const Item &item) const;
};

/// Squared-loss MF over (user, clicked item, 1) positives and one sampled
/// non-clicked item (label 0) per positive.
MfModel train_mf(const ClickLog &log, std::span<const Item> corpus, std::size_t users, std::size_t genres,
                 const MfConfig &config, Rng &rng);

struct ScoredItem {
    ItemId item = 0;
    double score = 0.0;
};

struct RecommendContext {
    std::span<const Item> corpus;
    std::span<const ItemId> candidates;
    const MfModel *mf = nullptr;
};

/// Smoothed click-through rate (clicks + 1) / (impressions + 2).
double smoothed_ctr(const Item &item);

double item_score(const UserRecord &user, const Item &item, RecommenderKind kind, const MfModel *mf);

/// Top-k candidates by score, ties broken by lowest ItemId.
std::vector<ScoredItem> recommend_scored(const UserRecord &user, const RecommendContext &ctx, std::size_t k,
                                         RecommenderKind kind);
std::vector<ItemId> recommend(const UserRecord &user, const RecommendContext &ctx, std::size_t k,
                              RecommenderKind kind);

/// Items created within the last `window` rounds up to and including `round`.
std::vector<ItemId> candidate_items(std::span<const Item> corpus, Round round, Round window);

struct RerankResult {
    std::vector<std::vector<ScoredItem>> lists;
    bool feasible = true;
    std::string error;
    std::size_t swaps = 0;
};

/// Greedy minimum-exposure re-ranking: replaces the lowest-scored slots held
/// by over-exposed creators until every alive creator with a candidate item
/// appears at least `guarantee` times. Infeasible guarantees leave the lists
/// untouched and report an error.
RerankResult min_exposure_rerank(std::vector<std::vector<ScoredItem>> lists, std::span<const Item> corpus,
                                 std::span<const ItemId> candidates, const std::vector<bool> &alive,
                                 std::size_t guarantee);

} // namespace lore
