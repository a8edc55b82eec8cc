#include "lore/ecosystem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lore/error.hpp"

namespace lore {

void validate(const EcosystemConfig &config) {
    if (config.genres == 0) throw ConfigError("genres must be positive");
    if (config.users.genres != config.genres) throw ConfigError("users.genres must equal genres");
    if (config.creator_models.genres != config.genres) throw ConfigError("creator_models.genres must equal genres");
    if (config.recommender.k == 0) throw ConfigError("recommender.k must be >= 1");
    if (config.churn_threshold == 0) throw ConfigError("churn_threshold must be >= 1");
    const auto &c = config.creators;
    if (c.activity_prob < 0.0 || c.activity_prob > 1.0) throw ConfigError("creators.activity_prob outside [0,1]");
    if (config.users.activity_prob < 0.0 || config.users.activity_prob > 1.0)
        throw ConfigError("users.activity_prob outside [0,1]");
    if (c.fallback_mix.empty()) throw ConfigError("creators.fallback_mix must not be empty");
    double total = 0.0;
    for (const auto &share : c.fallback_mix) {
        if (share.weight < 0.0) throw ConfigError("creators.fallback_mix weights must be nonnegative");
        total += share.weight;
    }
    if (!(total > 0.0)) throw ConfigError("creators.fallback_mix weights must not all be zero");
    if (c.initial_history == InitialHistory::LeastLiked && (c.least_liked_pool == 0 || c.least_liked_pool > config.genres))
        throw ConfigError("creators.least_liked_pool must be in [1, genres]");
    if (config.creator_models.cfd_learning_rate < 0.0) throw ConfigError("cfd learning rate must be nonnegative");
    if (config.creator_models.simuline_smoothing < 0.0) throw ConfigError("simuline smoothing must be nonnegative");
}

namespace {

std::vector<GenreId> least_liked_genres(const std::vector<UserRecord> &users, std::size_t genres, std::size_t pool) {
    std::vector<double> total(genres, 0.0);
    for (const auto &u : users)
        for (std::size_t g = 0; g < genres; ++g) total[g] += u.genre_affinity[g];
    std::vector<GenreId> order(genres);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](GenreId a, GenreId b) { return total[a] < total[b]; });
    order.resize(pool);
    return order;
}

} // namespace

EcosystemState make_ecosystem(const EcosystemConfig &config, std::uint64_t population_seed,
                              std::uint64_t dynamics_seed) {
    return make_ecosystem(config, std::nullopt, population_seed, dynamics_seed);
}

EcosystemState make_ecosystem(const EcosystemConfig &config, std::optional<std::vector<UserRecord>> users,
                              std::uint64_t population_seed, std::uint64_t dynamics_seed) {
    validate(config);
    EcosystemState state;
    state.config = config;
    state.rng = RngStreams(dynamics_seed);
    Rng init = make_stream(population_seed, "init");
    // trust has its own stream so scenarios differing only in the trust
    // distribution share every other population draw
    Rng trust_rng = make_stream(population_seed, "trust");

    if (users) {
        for (const auto &u : *users)
            if (u.genre_affinity.size() != config.genres)
                throw ConfigError("user table has " + std::to_string(u.genre_affinity.size()) +
                                  " affinity columns, config has " + std::to_string(config.genres) + " genres");
        state.users = std::move(*users);
        state.config.users.users = state.users.size();
    } else {
        state.users = generate_population(config.users, init);
    }
    state.clicks.genre_totals.assign(config.genres, 0);

    const auto &cc = config.creators;
    std::vector<GenreId> pool;
    if (cc.initial_history == InitialHistory::LeastLiked) {
        pool = least_liked_genres(state.users, config.genres, cc.least_liked_pool);
    } else {
        pool.resize(config.genres);
        std::iota(pool.begin(), pool.end(), 0);
    }
    std::vector<double> mix_weights;
    for (const auto &share : cc.fallback_mix) mix_weights.push_back(share.weight);

    state.creators.resize(cc.creators);
    for (std::size_t c = 0; c < cc.creators; ++c) {
        auto &creator = state.creators[c];
        creator.id = static_cast<CreatorId>(c);
        creator.trust_true = sample_truncated_gaussian(cc.trust_mean, cc.trust_stddev, 0.0, 1.0, trust_rng);
        double p = cc.activity_prob;
        if (cc.activity_spread > 0) p += cc.activity_spread * (2.0 * uniform01(init) - 1.0);
        creator.activity_prob = std::clamp(p, 0.0, 1.0);
        creator.fallback = cc.fallback_mix[sample_weighted(mix_weights, init)].model;
        for (std::size_t h = 0; h < cc.history_items; ++h) {
            Item item;
            item.id = static_cast<ItemId>(state.corpus.size());
            item.creator = creator.id;
            item.genre = pool[uniform_index(init, pool.size())];
            item.round_created = -1;
            item.quality = normal(init, 0.0, config.clicks.quality_stddev);
            state.corpus.push_back(item);
            creator.history.push_back({item.id, item.genre, 0});
            creator.last_created = item.genre;
        }
        init_fallback_state(creator, config.creator_models);
    }
    return state;
}

std::size_t alive_creators(const EcosystemState &state) {
    return static_cast<std::size_t>(
        std::count_if(state.creators.begin(), state.creators.end(), [](const CreatorRecord &c) { return c.alive; }));
}

std::vector<CreatorId> apply_churn(EcosystemState &state) {
    std::vector<CreatorId> departed;
    for (auto &creator : state.creators) {
        if (!creator.alive) continue;
        if (creator.clicks_this_round > 0) {
            creator.zero_click_streak = 0;
        } else if (creator.last_created) {
            ++creator.zero_click_streak;
        }
        if (creator.zero_click_streak >= state.config.churn_threshold) {
            creator.alive = false;
            departed.push_back(creator.id);
        }
    }
    return departed;
}

Observation observe(const EcosystemState &state, std::span<const double> trust_estimates) {
    Observation obs;
    obs.created.reserve(state.creators.size());
    for (const auto &c : state.creators) obs.created.push_back(c.alive ? c.last_created : std::nullopt);
    obs.trust.assign(trust_estimates.begin(), trust_estimates.end());
    return obs;
}

RoundOutcome step(EcosystemState &state, const PlatformAction &action) {
    const auto &config = state.config;
    const std::size_t genres = config.genres;
    if (action.size() != state.creators.size())
        throw ConfigError("action has " + std::to_string(action.size()) + " entries for " +
                          std::to_string(state.creators.size()) + " creators");

    RoundOutcome out;
    out.round = state.round;

    // (1) creator activity: one draw per creator slot keeps the stream aligned
    std::vector<bool> creator_active(state.creators.size());
    for (std::size_t c = 0; c < state.creators.size(); ++c)
        creator_active[c] = bernoulli(state.rng.creator_activity, state.creators[c].activity_prob);

    // (2) creation
    for (std::size_t c = 0; c < state.creators.size(); ++c) {
        auto &creator = state.creators[c];
        creator.clicks_this_round = 0;
        creator.last_created.reset();
        if (!creator.alive || !creator_active[c]) continue;
        const Suggestion suggestion = action[c].code() <= genres ? action[c] : Suggestion::none();
        const CreatorDecision decision = decide(creator, suggestion, genres, state.rng.creator_decision);

        Item item;
        item.id = static_cast<ItemId>(state.corpus.size());
        item.creator = creator.id;
        item.genre = decision.genre;
        item.round_created = state.round;
        item.quality = normal(state.rng.content, 0.0, config.clicks.quality_stddev);
        state.corpus.push_back(item);
        creator.history.push_back({item.id, item.genre, 0});
        creator.last_created = item.genre;

        out.created.push_back({creator.id, decision.genre, decision.followed, suggestion, item.id});
        if (!suggestion.is_none()) out.follows.push_back({creator.id, decision.followed});
    }

    // (3) user activity
    std::vector<bool> user_active(state.users.size());
    for (std::size_t u = 0; u < state.users.size(); ++u)
        user_active[u] = bernoulli(state.rng.user_activity, state.users[u].activity_prob);

    // (4) recommendation
    const auto &rc = config.recommender;
    if (rc.kind == RecommenderKind::MfLite && rc.mf.retrain_every > 0 &&
        state.round % static_cast<Round>(rc.mf.retrain_every) == 0) {
        state.mf = train_mf(state.clicks, state.corpus, state.users.size(), genres, rc.mf, state.rng.recommender);
    }
    const auto candidates = candidate_items(state.corpus, state.round, rc.candidate_window);
    RecommendContext ctx{state.corpus, candidates, &state.mf};
    std::vector<UserId> served;
    std::vector<std::vector<ScoredItem>> lists;
    for (std::size_t u = 0; u < state.users.size(); ++u) {
        if (!user_active[u]) continue;
        served.push_back(static_cast<UserId>(u));
        lists.push_back(recommend_scored(state.users[u], ctx, rc.k, rc.kind));
    }
    if (rc.min_exposure > 0) {
        std::vector<bool> alive(state.creators.size());
        for (std::size_t c = 0; c < alive.size(); ++c) alive[c] = state.creators[c].alive;
        auto reranked = min_exposure_rerank(std::move(lists), state.corpus, candidates, alive, rc.min_exposure);
        lists = std::move(reranked.lists);
        out.rerank_error = std::move(reranked.error);
    }

    // (5) clicks
    if (state.clicks.per_round_totals.size() <= static_cast<std::size_t>(state.round))
        state.clicks.per_round_totals.resize(static_cast<std::size_t>(state.round) + 1, 0);
    for (std::size_t i = 0; i < served.size(); ++i) {
        const UserId u = served[i];
        std::vector<ItemId> ids;
        ids.reserve(lists[i].size());
        for (const auto &s : lists[i]) {
            ids.push_back(s.item);
            ++state.corpus[s.item].impressions;
        }
        for (ItemId id : sample_clicks(state.users[u], state.corpus, ids, config.clicks, state.rng.click)) {
            auto &item = state.corpus[id];
            ++item.total_clicks;
            auto &creator = state.creators[item.creator];
            ++creator.clicks_this_round;
            auto it = std::lower_bound(creator.history.begin(), creator.history.end(), id,
                                       [](const HistoryEntry &h, ItemId v) { return h.item < v; });
            if (it != creator.history.end() && it->item == id) ++it->clicks;
            ++state.clicks.genre_totals[item.genre];
            state.clicks.records.push_back({id, u, state.round});
            out.clicks.push_back({u, id});
        }
    }
    out.reward = out.clicks.size();
    state.clicks.per_round_totals[static_cast<std::size_t>(state.round)] = out.reward;

    // per-genre feedback for the click-driven fallback models
    for (auto &creator : state.creators) std::fill(creator.last_round_feedback.begin(), creator.last_round_feedback.end(), 0.0);
    for (const auto &click : out.clicks) {
        const auto &item = state.corpus[click.item];
        auto &fb = state.creators[item.creator].last_round_feedback;
        if (item.genre < fb.size()) fb[item.genre] += 1.0;
    }
    for (auto &creator : state.creators) creator.simuline.recent_clicks = creator.last_round_feedback;

    // (6) churn
    out.departures = apply_churn(state);

    // (7) trust dynamics
    if (config.creator_models.dynamic_trust) {
        for (const auto &rec : out.created) {
            auto &creator = state.creators[rec.creator];
            creator.trust_true =
                update_trust(creator.trust_true, rec.followed, static_cast<double>(creator.clicks_prev_round),
                             static_cast<double>(creator.clicks_this_round), config.creator_models.trust_rule);
        }
    }
    for (auto &creator : state.creators) creator.clicks_prev_round = creator.clicks_this_round;

    // (8)
    ++state.round;
    return out;
}

} // namespace lore
