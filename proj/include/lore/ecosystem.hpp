#pragma once
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lore/audience.hpp"
#include "lore/creator_models.hpp"
#include "lore/recommender.hpp"
#include "lore/rng.hpp"
#include "lore/types.hpp"

namespace lore {

enum class InitialHistory {
    Uniform,    // bootstrap genres drawn uniformly from all genres
    LeastLiked, // drawn from the genres with the lowest total user affinity
};

struct FallbackShare {
    FallbackModel model = FallbackModel::RandomHistory;
    double weight = 1.0;
};

struct CreatorPopulationConfig {
    std::size_t creators = 50;
    double activity_prob = 0.9;
    double activity_spread = 0.0;
    double trust_mean = 0.5;
    double trust_stddev = 1.0; // of the parent normal, truncated to [0,1]
    InitialHistory initial_history = InitialHistory::Uniform;
    std::size_t history_items = 1;
    std::size_t least_liked_pool = 3;
    std::vector<FallbackShare> fallback_mix{{FallbackModel::RandomHistory, 1.0}};
};

struct EcosystemConfig {
    std::size_t genres = 14;
    PopulationConfig users;
    CreatorPopulationConfig creators;
    CreatorModelConfig creator_models;
    ClickModelParams clicks;
    RecommenderConfig recommender;
    std::uint32_t churn_threshold = 10;
};

void validate(const EcosystemConfig &config);

struct EcosystemState {
    Round round = 0;
    std::vector<CreatorRecord> creators;
    std::vector<UserRecord> users;
    std::vector<Item> corpus;
    ClickLog clicks;
    RngStreams rng;
    EcosystemConfig config;
    MfModel mf;
};

struct FollowObservation {
    CreatorId creator = 0;
    bool followed = false;
};

struct CreatedRecord {
    CreatorId creator = 0;
    GenreId genre = 0;
    bool followed = false;
    Suggestion suggested;
    ItemId item = 0;
};

struct UserClick {
    UserId user = 0;
    ItemId item = 0;
};

/// Everything observable about one finished round; also the event-log row.
struct RoundOutcome {
    Round round = 0;
    std::uint64_t reward = 0;
    std::vector<CreatedRecord> created;
    std::vector<CreatorId> departures;
    std::vector<UserClick> clicks;
    std::vector<FollowObservation> follows;
    std::string rerank_error;
};

/// Builds the initial world. `population_seed` fixes users, creators and the
/// bootstrap history; `dynamics_seed` seeds the per-subsystem streams.
EcosystemState make_ecosystem(const EcosystemConfig &config, std::uint64_t population_seed,
                              std::uint64_t dynamics_seed);
/// Same, with a fixed user table instead of the generator.
EcosystemState make_ecosystem(const EcosystemConfig &config, std::optional<std::vector<UserRecord>> users,
                              std::uint64_t population_seed, std::uint64_t dynamics_seed);

/// Runs one interaction round in place: suggestions, creation, recommendation,
/// clicks, churn, trust dynamics, then advances the round counter.
RoundOutcome step(EcosystemState &state, const PlatformAction &action);

/// Updates zero-click streaks from this round's creations and clicks and
/// retires creators whose streak reached the churn threshold.
std::vector<CreatorId> apply_churn(EcosystemState &state);

/// MDP observation: genre created in the last finished round (nullopt when
/// the creator did not create) and the supplied trust estimates.
Observation observe(const EcosystemState &state, std::span<const double> trust_estimates);

std::size_t alive_creators(const EcosystemState &state);

} // namespace lore
