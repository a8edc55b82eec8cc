#pragma once
#include <filesystem>
#include <span>
#include <vector>

#include "lore/rng.hpp"
#include "lore/types.hpp"

namespace lore {

/// Logistic click model: p = logistic(bias + affinity_weight * affinity[genre]
/// + quality_weight * quality).
struct ClickModelParams {
    double bias = -2.0;
    double affinity_weight = 3.0;
    double quality_weight = 1.0;
    double quality_stddev = 0.5; // item quality ~ Normal(0, quality_stddev^2) at creation
};

enum class AffinityModel { Favorite, Dirichlet };

struct PopulationConfig {
    std::size_t users = 100;
    std::size_t genres = 14;
    AffinityModel model = AffinityModel::Favorite;
    double favorite_strength = 1.0;
    double noise = 0.2;          // stddev of non-favorite affinities, truncated to +-strength/2
    double skew = 0.0;           // probability a user's favorite is forced to genre 0
    std::size_t disliked_genres = 0; // trailing genres nobody favors
    double disliked_affinity = -1.0;
    double dirichlet_alpha = 0.5;
    double activity_prob = 0.8;
    double activity_spread = 0.0; // per-user activity ~ U[p - spread, p + spread], clamped
};

double logistic(double x);

double click_probability(const UserRecord &user, const Item &item, const ClickModelParams &params);

/// Independent Bernoulli click per recommended item, in list order.
std::vector<ItemId> sample_clicks(const UserRecord &user, std::span<const Item> corpus,
                                  std::span<const ItemId> recommended,
                                  const ClickModelParams &params, Rng &rng);

std::vector<UserRecord> generate_population(const PopulationConfig &config, Rng &rng);

/// Reads `user_id,affinity_0..affinity_{G-1},activity_prob` rows (header required).
std::vector<UserRecord> load_population_csv(const std::filesystem::path &path, std::size_t genres);

/// Genre with the largest affinity; lowest index on ties.
GenreId favorite_genre(const UserRecord &user);

} // namespace lore
