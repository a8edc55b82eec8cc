#include "lore/audience.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "lore/error.hpp"

namespace lore {

double logistic(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double click_probability(const UserRecord &user, const Item &item, const ClickModelParams &params) {
    const double affinity = user.genre_affinity.at(item.genre);
    return logistic(params.bias + params.affinity_weight * affinity + params.quality_weight * item.quality);
}

std::vector<ItemId> sample_clicks(const UserRecord &user, std::span<const Item> corpus,
                                  std::span<const ItemId> recommended,
                                  const ClickModelParams &params, Rng &rng) {
    std::vector<ItemId> clicked;
    for (ItemId id : recommended) {
        if (bernoulli(rng, click_probability(user, corpus[id], params))) clicked.push_back(id);
    }
    return clicked;
}

namespace {

std::vector<double> dirichlet(Rng &rng, std::size_t n, double alpha) {
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (auto &x : w) {
        x = gamma(rng);
        total += x;
    }
    if (total <= 0.0) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(n));
        return w;
    }
    for (auto &x : w) x /= total;
    return w;
}

} // namespace

std::vector<UserRecord> generate_population(const PopulationConfig &config, Rng &rng) {
    if (config.genres == 0) throw ConfigError("population: genres must be positive");
    if (config.disliked_genres >= config.genres)
        throw ConfigError("population: disliked_genres must leave at least one favorable genre");
    if (config.skew < 0.0 || config.skew > 1.0) throw ConfigError("population: skew must lie in [0,1]");

    const std::size_t favorable = config.genres - config.disliked_genres;
    const double half = 0.5 * config.favorite_strength;
    std::vector<UserRecord> users(config.users);
    for (std::size_t u = 0; u < config.users; ++u) {
        auto &user = users[u];
        user.id = static_cast<UserId>(u);
        user.genre_affinity.assign(config.genres, 0.0);

        const bool forced = uniform01(rng) < config.skew;
        GenreId favorite = forced ? 0 : static_cast<GenreId>(uniform_index(rng, favorable));

        if (config.model == AffinityModel::Favorite) {
            for (std::size_t g = 0; g < favorable; ++g) {
                double n = config.noise > 0 ? normal(rng, 0.0, config.noise) : 0.0;
                user.genre_affinity[g] = std::clamp(n, -half, half * 0.999);
            }
            user.genre_affinity[favorite] = config.favorite_strength;
        } else {
            auto w = dirichlet(rng, favorable, config.dirichlet_alpha);
            auto top = static_cast<GenreId>(std::max_element(w.begin(), w.end()) - w.begin());
            if (forced) std::swap(w[0], w[top]);
            for (std::size_t g = 0; g < favorable; ++g)
                user.genre_affinity[g] = config.favorite_strength * w[g] * static_cast<double>(favorable);
        }
        for (std::size_t g = favorable; g < config.genres; ++g) user.genre_affinity[g] = config.disliked_affinity;

        double p = config.activity_prob;
        if (config.activity_spread > 0) p += config.activity_spread * (2.0 * uniform01(rng) - 1.0);
        user.activity_prob = std::clamp(p, 0.0, 1.0);
    }
    return users;
}

std::vector<UserRecord> load_population_csv(const std::filesystem::path &path, std::size_t genres) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open population CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty population CSV: " + path.string());

    std::vector<UserRecord> users;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != genres + 2)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(genres + 2) + " columns");
        UserRecord user;
        try {
            user.id = static_cast<UserId>(std::stoul(cells[0]));
            for (std::size_t g = 0; g < genres; ++g) user.genre_affinity.push_back(std::stod(cells[1 + g]));
            user.activity_prob = std::stod(cells.back());
        } catch (const std::exception &) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
        }
        if (user.id != users.size())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": user ids must be 0..n-1 in order");
        if (user.activity_prob < 0.0 || user.activity_prob > 1.0)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": activity_prob outside [0,1]");
        for (double a : user.genre_affinity)
            if (!std::isfinite(a)) throw ConfigError(path.string() + ": non-finite affinity");
        users.push_back(std::move(user));
    }
    return users;
}

GenreId favorite_genre(const UserRecord &user) {
    const auto &a = user.genre_affinity;
    return static_cast<GenreId>(std::max_element(a.begin(), a.end()) - a.begin());
}

} // namespace lore
