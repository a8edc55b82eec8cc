#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "lore/error.hpp"
#include "lore/io.hpp"

using namespace lore;

namespace {

EcosystemConfig small_config(std::size_t creators, std::size_t users, std::size_t genres) {
    EcosystemConfig cfg;
    cfg.genres = genres;
    cfg.users.users = users;
    cfg.users.genres = genres;
    cfg.creators.creators = creators;
    cfg.creator_models.genres = genres;
    return cfg;
}

} // namespace

TEST_CASE("a fully trusting creator with no users follows and earns nothing") {
    auto cfg = small_config(1, 0, 3);
    cfg.creators.activity_prob = 1.0;
    auto st = make_ecosystem(cfg, 1, 2);
    st.creators[0].trust_true = 1.0;
    const auto before = st.corpus.size();
    const auto out = step(st, {Suggestion::genre(2)});
    CHECK(st.corpus.size() == before + 1);
    CHECK(st.corpus.back().genre == 2);
    CHECK(out.reward == 0);
    REQUIRE(out.follows.size() == 1);
    CHECK(out.follows[0].followed);
}

TEST_CASE("inactive creators change nothing") {
    auto cfg = small_config(4, 5, 2);
    cfg.creators.activity_prob = 0.0;
    auto st = make_ecosystem(cfg, 1, 2);
    const auto before = st.corpus.size();
    PlatformAction a(4, Suggestion::genre(1));
    const auto out = step(st, a);
    CHECK(st.corpus.size() == before);
    CHECK(out.reward == 0);
    CHECK(out.follows.empty());
    CHECK_THROWS_AS(step(st, PlatformAction(3)), ConfigError);
}

TEST_CASE("one round matches a hand-traced replay of the same RNG streams") {
    auto cfg = small_config(3, 5, 2);
    cfg.creators.activity_prob = 0.7;
    cfg.users.activity_prob = 0.8;
    const std::uint64_t dyn = 99;
    auto st = make_ecosystem(cfg, 4, dyn);
    const auto start = st;
    const PlatformAction action{Suggestion::none(), Suggestion::genre(1), Suggestion::genre(0)};
    const auto out = step(st, action);

    // Replay: activity, decisions (trust gate then random-history fallback),
    // quality, user activity, oracle top-k over this round's items, clicks.
    RngStreams rng(dyn);
    std::vector<Item> fresh;
    std::vector<bool> active;
    for (const auto &c : start.creators) active.push_back(bernoulli(rng.creator_activity, c.activity_prob));
    for (std::size_t c = 0; c < 3; ++c) {
        if (!active[c]) continue;
        const auto &cr = start.creators[c];
        GenreId g;
        bool followed = false;
        if (!action[c].is_none() && bernoulli(rng.creator_decision, cr.trust_true)) {
            g = action[c].genre();
            followed = true;
        } else {
            std::vector<GenreId> distinct;
            for (const auto &h : cr.history)
                if (std::find(distinct.begin(), distinct.end(), h.genre) == distinct.end()) distinct.push_back(h.genre);
            std::sort(distinct.begin(), distinct.end());
            g = distinct[uniform_index(rng.creator_decision, distinct.size())];
        }
        Item it;
        it.id = static_cast<ItemId>(start.corpus.size() + fresh.size());
        it.creator = static_cast<CreatorId>(c);
        it.genre = g;
        it.quality = normal(rng.content, 0.0, cfg.clicks.quality_stddev);
        fresh.push_back(it);
        (void)followed;
    }
    std::uint64_t reward = 0;
    std::vector<bool> user_active;
    for (const auto &u : start.users) user_active.push_back(bernoulli(rng.user_activity, u.activity_prob));
    for (std::size_t u = 0; u < start.users.size(); ++u) {
        if (!user_active[u]) continue;
        auto list = fresh;
        std::sort(list.begin(), list.end(), [&](const Item &a, const Item &b) {
            const double sa = start.users[u].genre_affinity[a.genre] + a.quality;
            const double sb = start.users[u].genre_affinity[b.genre] + b.quality;
            return sa != sb ? sa > sb : a.id < b.id;
        });
        if (list.size() > cfg.recommender.k) list.resize(cfg.recommender.k);
        for (const auto &it : list) {
            const double z = cfg.clicks.bias + cfg.clicks.affinity_weight * start.users[u].genre_affinity[it.genre] +
                             cfg.clicks.quality_weight * it.quality;
            reward += bernoulli(rng.click, 1.0 / (1.0 + std::exp(-z)));
        }
    }
    CHECK(out.created.size() == fresh.size());
    for (std::size_t i = 0; i < fresh.size(); ++i) CHECK(out.created[i].genre == fresh[i].genre);
    CHECK(out.reward == reward);
}

TEST_CASE("churn counts creation rounds only") {
    auto cfg = small_config(1, 0, 2);
    auto st = make_ecosystem(cfg, 1, 1);
    auto &c = st.creators[0];

    c.zero_click_streak = 9;
    c.last_created = 0;
    c.clicks_this_round = 0;
    CHECK(apply_churn(st) == std::vector<CreatorId>{0});
    CHECK(!c.alive);

    c.alive = true;
    c.zero_click_streak = 9;
    c.last_created.reset();
    CHECK(apply_churn(st).empty());
    CHECK(c.zero_click_streak == 9);

    c.clicks_this_round = 1; // a click on any of its items resets the streak
    CHECK(apply_churn(st).empty());
    CHECK(c.zero_click_streak == 0);
}

TEST_CASE("observe and encode-facing observation") {
    auto cfg = small_config(2, 0, 3);
    auto st = make_ecosystem(cfg, 1, 1);
    st.creators[0].last_created = 1;
    st.creators[1].alive = false;
    const std::vector<double> trust{0.7, 0.2};
    const auto obs = observe(st, trust);
    CHECK(obs.created[0] == std::optional<GenreId>(1));
    CHECK(!obs.created[1].has_value());
    CHECK(obs.trust == trust);
}

TEST_CASE("invariants over a random run: conservation, growth, monotone clicks, absorbing churn") {
    auto cfg = small_config(12, 30, 4);
    cfg.creators.activity_prob = 0.7;
    cfg.churn_threshold = 3;
    cfg.users.disliked_genres = 2;
    cfg.recommender.candidate_window = 2;
    auto st = make_ecosystem(cfg, 5, 6);
    Rng rng = make_stream(3, "policy");
    std::vector<bool> departed(12, false);
    for (int r = 0; r < 60; ++r) {
        PlatformAction a(12);
        for (auto &s : a) s = Suggestion(static_cast<std::uint32_t>(uniform_index(rng, 5)));
        const auto corpus_before = st.corpus.size();
        const auto records_before = st.clicks.records.size();
        std::vector<std::uint64_t> clicks_before;
        for (const auto &i : st.corpus) clicks_before.push_back(i.total_clicks);
        const auto out = step(st, a);
        CHECK(out.reward == st.clicks.records.size() - records_before);
        CHECK(st.corpus.size() - corpus_before == out.created.size());
        for (std::size_t i = 0; i < clicks_before.size(); ++i) CHECK(st.corpus[i].total_clicks >= clicks_before[i]);
        for (const auto &c : out.created) CHECK(!departed[c.creator]);
        for (auto d : out.departures) departed[d] = true;
        for (const auto &c : out.created)
            if (c.followed) CHECK(Suggestion::genre(c.genre) == a[c.creator]);
    }
}

TEST_CASE("snapshot round trip reproduces the continuation exactly") {
    auto cfg = small_config(6, 20, 3);
    cfg.creators.fallback_mix = {{FallbackModel::Cfd, 1.0}, {FallbackModel::SimuLine, 1.0}};
    cfg.recommender.kind = RecommenderKind::MfLite;
    cfg.creator_models.dynamic_trust = true;
    auto st = make_ecosystem(cfg, 2, 3);
    for (int r = 0; r < 7; ++r) step(st, PlatformAction(6, Suggestion::genre(static_cast<GenreId>(r % 3))));

    const auto path = std::filesystem::temp_directory_path() / "lore_snapshot_test.json";
    save_snapshot(st, path, {{"config_hash", "00ff"}, {"seed", 2}});
    auto loaded = load_snapshot(path);
    std::filesystem::remove(path);
    CHECK(snapshot_json(loaded) == snapshot_json(st));
    for (int r = 0; r < 8; ++r) {
        const PlatformAction a(6, Suggestion::genre(static_cast<GenreId>((r + 1) % 3)));
        const auto x = step(st, a), y = step(loaded, a);
        CHECK(round_event_json(x) == round_event_json(y));
    }

    auto doc = snapshot_json(st);
    doc["version"] = 99;
    CHECK_THROWS_AS(snapshot_from_json(doc), ConfigError);
}

TEST_CASE("identical seeds give identical trajectories") {
    auto cfg = small_config(8, 15, 3);
    auto a = make_ecosystem(cfg, 7, 8), b = make_ecosystem(cfg, 7, 8);
    for (int r = 0; r < 20; ++r) {
        const PlatformAction act(8, Suggestion::genre(1));
        CHECK(round_event_json(step(a, act)) == round_event_json(step(b, act)));
    }
}

TEST_CASE("least-liked initial history draws from the least-liked pool") {
    auto cfg = small_config(20, 40, 6);
    cfg.users.disliked_genres = 2;
    cfg.creators.initial_history = InitialHistory::LeastLiked;
    cfg.creators.least_liked_pool = 2;
    const auto st = make_ecosystem(cfg, 1, 1);
    for (const auto &c : st.creators) {
        REQUIRE(c.history.size() == 1);
        CHECK(c.history[0].genre >= 4);
    }
}
