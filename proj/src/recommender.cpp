#include "lore/recommender.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "lore/error.hpp"

namespace lore {

RecommenderKind parse_recommender(std::string_view tag) {
    if (tag == "oracle_affinity") return RecommenderKind::OracleAffinity;
    if (tag == "empirical_ctr") return RecommenderKind::EmpiricalCtr;
    if (tag == "mf_lite") return RecommenderKind::MfLite;
    if (tag == "popularity") return RecommenderKind::Popularity;
    throw ConfigError("unknown recommender kind: '" + std::string(tag) + "'");
}

std::string_view recommender_tag(RecommenderKind kind) {
    switch (kind) {
    case RecommenderKind::OracleAffinity: return "oracle_affinity";
    case RecommenderKind::EmpiricalCtr: return "empirical_ctr";
    case RecommenderKind::MfLite: return "mf_lite";
    case RecommenderKind::Popularity: return "popularity";
    }
    return "oracle_affinity";
}

double MfModel::score(UserId user, const Item &item) const {
    if (dims == 0 || (user + 1) * dims > user_factors.size()) return 0.0;
    const double *u = &user_factors[user * dims];
    double s = 0.0;
    const bool has_genre = (item.genre + 1) * dims <= genre_factors.size();
    const bool has_item = (item.id + 1) * dims <= item_factors.size();
    for (std::size_t d = 0; d < dims; ++d) {
        double v = 0.0;
        if (has_genre) v += genre_factors[item.genre * dims + d];
        if (has_item) v += item_factors[item.id * dims + d];
        s += u[d] * v;
    }
    return s;
}

MfModel train_mf(const ClickLog &log, std::span<const Item> corpus, std::size_t users, std::size_t genres,
                 const MfConfig &config, Rng &rng) {
    if (config.dims == 0) throw ConfigError("mf_lite: dims must be >= 1");
    MfModel model;
    model.dims = config.dims;
    model.user_factors.assign(users * config.dims, 0.0);
    model.genre_factors.assign(genres * config.dims, 0.0);
    model.item_factors.assign(corpus.size() * config.dims, 0.0);
    if (log.records.empty()) return model;

    for (auto &x : model.user_factors) x = normal(rng, 0.0, config.init_stddev);
    for (auto &x : model.genre_factors) x = normal(rng, 0.0, config.init_stddev);
    for (auto &x : model.item_factors) x = normal(rng, 0.0, config.init_stddev);

    std::unordered_set<std::uint64_t> clicked;
    clicked.reserve(log.records.size() * 2);
    for (const auto &r : log.records) clicked.insert(static_cast<std::uint64_t>(r.user) << 32 | r.item);

    const std::size_t d = config.dims;
    const double lr = config.learning_rate;
    const double reg = config.regularization;
    auto sgd = [&](UserId u, ItemId i, double label) {
        double *uf = &model.user_factors[u * d];
        double *gf = &model.genre_factors[corpus[i].genre * d];
        double *vf = &model.item_factors[i * d];
        double pred = 0.0;
        for (std::size_t k = 0; k < d; ++k) pred += uf[k] * (gf[k] + vf[k]);
        const double err = label - pred;
        for (std::size_t k = 0; k < d; ++k) {
            const double u_old = uf[k];
            const double item_vec = gf[k] + vf[k];
            uf[k] += lr * (err * item_vec - reg * u_old);
            gf[k] += lr * (err * u_old - reg * gf[k]);
            vf[k] += lr * (err * u_old - reg * vf[k]);
        }
        return err * err;
    };

    std::vector<std::size_t> order(log.records.size());
    for (std::size_t e = 0; e < config.epochs; ++e) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);
        double loss = 0.0;
        for (std::size_t idx : order) {
            const auto &rec = log.records[idx];
            if (rec.user >= users || rec.item >= corpus.size()) continue;
            loss += sgd(rec.user, rec.item, 1.0);
            // one negative: an item this user never clicked (bounded retries)
            for (int attempt = 0; attempt < 8; ++attempt) {
                auto neg = static_cast<ItemId>(uniform_index(rng, corpus.size()));
                if (!clicked.contains(static_cast<std::uint64_t>(rec.user) << 32 | neg)) {
                    loss += sgd(rec.user, neg, 0.0);
                    break;
                }
            }
        }
        model.epoch_loss.push_back(loss / static_cast<double>(2 * order.size()));
    }
    return model;
}

double smoothed_ctr(const Item &item) {
    return (static_cast<double>(item.total_clicks) + 1.0) / (static_cast<double>(item.impressions) + 2.0);
}

double item_score(const UserRecord &user, const Item &item, RecommenderKind kind, const MfModel *mf) {
    switch (kind) {
    case RecommenderKind::OracleAffinity: return user.genre_affinity.at(item.genre) + item.quality;
    case RecommenderKind::EmpiricalCtr: return smoothed_ctr(item);
    case RecommenderKind::Popularity: return static_cast<double>(item.total_clicks);
    case RecommenderKind::MfLite: return mf ? mf->score(user.id, item) : 0.0;
    }
    return 0.0;
}

namespace {

bool ranks_before(const ScoredItem &a, const ScoredItem &b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
}

} // namespace

std::vector<ScoredItem> recommend_scored(const UserRecord &user, const RecommendContext &ctx, std::size_t k,
                                         RecommenderKind kind) {
    if (k == 0) throw ConfigError("recommend: k must be >= 1");
    std::vector<ScoredItem> scored;
    scored.reserve(ctx.candidates.size());
    for (ItemId id : ctx.candidates) scored.push_back({id, item_score(user, ctx.corpus[id], kind, ctx.mf)});
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
    scored.resize(n);
    return scored;
}

std::vector<ItemId> recommend(const UserRecord &user, const RecommendContext &ctx, std::size_t k,
                              RecommenderKind kind) {
    std::vector<ItemId> ids;
    for (const auto &s : recommend_scored(user, ctx, k, kind)) ids.push_back(s.item);
    return ids;
}

std::vector<ItemId> candidate_items(std::span<const Item> corpus, Round round, Round window) {
    std::vector<ItemId> ids;
    const Round earliest = window <= 0 ? std::numeric_limits<Round>::min() : round - window + 1;
    for (const auto &item : corpus)
        if (item.round_created >= earliest && item.round_created <= round) ids.push_back(item.id);
    return ids;
}

RerankResult min_exposure_rerank(std::vector<std::vector<ScoredItem>> lists, std::span<const Item> corpus,
                                 std::span<const ItemId> candidates, const std::vector<bool> &alive,
                                 std::size_t guarantee) {
    RerankResult result;
    if (guarantee == 0) {
        result.lists = std::move(lists);
        return result;
    }

    const std::size_t creators = alive.size();
    std::vector<std::vector<ItemId>> own_items(creators);
    for (ItemId id : candidates) {
        const auto c = corpus[id].creator;
        if (c < creators && alive[c]) own_items[c].push_back(id);
    }
    std::size_t eligible = 0;
    std::size_t slots = 0;
    for (std::size_t c = 0; c < creators; ++c) eligible += own_items[c].empty() ? 0 : 1;
    for (const auto &l : lists) slots += l.size();

    if (guarantee * eligible > slots) {
        result.lists = std::move(lists);
        result.feasible = false;
        result.error = "min-exposure guarantee " + std::to_string(guarantee) + " x " + std::to_string(eligible) +
                       " creators exceeds " + std::to_string(slots) + " slots";
        return result;
    }

    std::vector<std::size_t> exposure(creators, 0);
    for (const auto &l : lists)
        for (const auto &s : l) {
            const auto c = corpus[s.item].creator;
            if (c < creators) ++exposure[c];
        }

    const auto original = lists;
    auto contains = [](const std::vector<ScoredItem> &l, ItemId id) {
        return std::any_of(l.begin(), l.end(), [id](const ScoredItem &s) { return s.item == id; });
    };

    for (std::size_t c = 0; c < creators; ++c) {
        if (own_items[c].empty()) continue;
        while (exposure[c] < guarantee) {
            // lowest-scored slot whose owner stays above the guarantee after losing it
            std::size_t best_list = lists.size(), best_slot = 0;
            ItemId best_item = 0;
            double best_score = std::numeric_limits<double>::infinity();
            for (std::size_t li = 0; li < lists.size(); ++li) {
                const ItemId *insert = nullptr;
                for (const ItemId &id : own_items[c])
                    if (!contains(lists[li], id)) {
                        insert = &id;
                        break;
                    }
                if (!insert) continue;
                for (std::size_t si = 0; si < lists[li].size(); ++si) {
                    const auto owner = corpus[lists[li][si].item].creator;
                    const bool donor_ok = owner >= creators || !alive[owner] || own_items[owner].empty() ||
                                          exposure[owner] > guarantee;
                    if (owner == c || !donor_ok) continue;
                    if (lists[li][si].score < best_score) {
                        best_score = lists[li][si].score;
                        best_list = li;
                        best_slot = si;
                        best_item = *insert;
                    }
                }
            }
            if (best_list == lists.size()) {
                result.lists = original;
                result.feasible = false;
                result.error = "min-exposure guarantee unreachable for creator " + std::to_string(c);
                result.swaps = 0;
                return result;
            }
            const auto donor = corpus[lists[best_list][best_slot].item].creator;
            if (donor < creators) --exposure[donor];
            lists[best_list][best_slot] = {best_item, best_score};
            ++exposure[c];
            ++result.swaps;
        }
    }
    result.lists = std::move(lists);
    return result;
}

} // namespace lore
