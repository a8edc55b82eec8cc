#include "lore/creator_models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lore/error.hpp"

namespace lore {

FallbackModel parse_fallback(std::string_view tag) {
    if (tag == "random_history") return FallbackModel::RandomHistory;
    if (tag == "most_history_click") return FallbackModel::MostHistoryClick;
    if (tag == "cfd") return FallbackModel::Cfd;
    if (tag == "simuline") return FallbackModel::SimuLine;
    throw ConfigError("unknown creator fallback model: '" + std::string(tag) + "'");
}

std::string_view fallback_tag(FallbackModel model) {
    switch (model) {
    case FallbackModel::RandomHistory: return "random_history";
    case FallbackModel::MostHistoryClick: return "most_history_click";
    case FallbackModel::Cfd: return "cfd";
    case FallbackModel::SimuLine: return "simuline";
    }
    return "random_history";
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> p(logits.size());
    if (logits.empty()) return p;
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - top);
        total += p[i];
    }
    for (auto &x : p) x /= total;
    return p;
}

std::size_t sample_weighted(std::span<const double> weights, Rng &rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return uniform_index(rng, weights.size());
    double u = uniform01(rng) * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return i;
    }
    // rounding left u >= 0: return the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

GenreId fallback_random_history(const CreatorRecord &creator, std::size_t genres, Rng &rng) {
    std::vector<GenreId> distinct;
    for (const auto &h : creator.history) distinct.push_back(h.genre);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.empty()) return static_cast<GenreId>(uniform_index(rng, genres));
    return distinct[uniform_index(rng, distinct.size())];
}

GenreId fallback_most_history_click(const CreatorRecord &creator) {
    if (creator.history.empty()) return 0;
    GenreId top_genre = 0;
    for (const auto &h : creator.history) top_genre = std::max(top_genre, h.genre);
    // -1 marks genres the creator never produced
    std::vector<std::int64_t> sums(top_genre + 1, -1);
    for (const auto &h : creator.history)
        sums[h.genre] = std::max<std::int64_t>(sums[h.genre], 0) + static_cast<std::int64_t>(h.clicks);
    return static_cast<GenreId>(std::max_element(sums.begin(), sums.end()) - sums.begin());
}

CfdState cfd_absorb(const CfdState &state, std::span<const double> feedback) {
    CfdState next = state;
    const std::size_t n = std::min(feedback.size(), next.genre_logits.size());
    for (std::size_t g = 0; g < n; ++g) next.genre_logits[g] += state.learning_rate * feedback[g];
    return next;
}

std::pair<GenreId, CfdState> fallback_cfd(const CfdState &state, std::span<const double> feedback, Rng &rng) {
    if (!(state.learning_rate >= 0.0)) throw ConfigError("cfd: learning_rate must be nonnegative");
    CfdState next = cfd_absorb(state, feedback);
    const auto p = softmax(next.genre_logits);
    return {static_cast<GenreId>(sample_weighted(p, rng)), std::move(next)};
}

std::vector<double> simuline_probabilities(const SimuLineState &state) {
    std::vector<double> p(state.recent_clicks.size());
    double total = 0.0;
    for (std::size_t g = 0; g < p.size(); ++g) {
        p[g] = state.recent_clicks[g] + state.smoothing;
        total += p[g];
    }
    if (!(total > 0.0)) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
        return p;
    }
    for (auto &x : p) x /= total;
    return p;
}

GenreId fallback_simuline(const SimuLineState &state, Rng &rng) {
    if (state.smoothing < 0.0) throw ConfigError("simuline: smoothing must be nonnegative");
    return static_cast<GenreId>(sample_weighted(simuline_probabilities(state), rng));
}

CreatorDecision decide(CreatorRecord &creator, Suggestion suggestion, std::size_t genres, Rng &rng) {
    std::vector<double> pending;
    if (creator.fallback == FallbackModel::Cfd) {
        pending = creator.last_round_feedback;
        creator.last_round_feedback.assign(genres, 0.0);
    }

    if (!suggestion.is_none() && suggestion.genre() < genres && bernoulli(rng, creator.trust_true)) {
        if (creator.fallback == FallbackModel::Cfd) creator.cfd = cfd_absorb(creator.cfd, pending);
        return {suggestion.genre(), true};
    }

    switch (creator.fallback) {
    case FallbackModel::RandomHistory: return {fallback_random_history(creator, genres, rng), false};
    case FallbackModel::MostHistoryClick: return {fallback_most_history_click(creator), false};
    case FallbackModel::Cfd: {
        auto [genre, next] = fallback_cfd(creator.cfd, pending, rng);
        creator.cfd = std::move(next);
        return {genre, false};
    }
    case FallbackModel::SimuLine: return {fallback_simuline(creator.simuline, rng), false};
    }
    throw ConfigError("unknown creator fallback model");
}

double update_trust(double trust, bool followed, double r_prev, double r_curr, TrustUpdateRule rule) {
    if (rule == TrustUpdateRule::ClickDelta && !followed) return trust;
    if (r_prev <= 0.0) return trust;
    return std::clamp(trust + (r_curr - r_prev) / r_prev, 0.0, 1.0);
}

void init_fallback_state(CreatorRecord &creator, const CreatorModelConfig &config) {
    creator.cfd.learning_rate = config.cfd_learning_rate;
    creator.cfd.genre_logits.assign(config.genres, 0.0);
    for (const auto &h : creator.history)
        if (h.genre < config.genres) creator.cfd.genre_logits[h.genre] += config.cfd_history_weight;
    creator.simuline.smoothing = config.simuline_smoothing;
    creator.simuline.recent_clicks.assign(config.genres, 0.0);
    creator.last_round_feedback.assign(config.genres, 0.0);
}

} // namespace lore
