#include "lore/io.hpp"

#include <fstream>

#include "lore/error.hpp"

namespace lore {

using nlohmann::json;

json round_event_json(const RoundOutcome &outcome) {
    json created = json::array();
    for (const auto &c : outcome.created)
        created.push_back({{"creator", c.creator},
                           {"genre", c.genre},
                           {"followed", c.followed},
                           {"suggested", c.suggested.code()}});
    json clicks = json::array();
    for (const auto &c : outcome.clicks) clicks.push_back({{"user", c.user}, {"item", c.item}});
    return json{{"round", outcome.round},
                {"reward", outcome.reward},
                {"created", created},
                {"departures", outcome.departures},
                {"clicks", clicks}};
}

namespace {

json optional_genre(const std::optional<GenreId> &g) { return g ? json(*g) : json(nullptr); }

std::optional<GenreId> optional_genre(const json &j) {
    if (j.is_null()) return std::nullopt;
    return j.get<GenreId>();
}

json adam_json(const Adam &opt) {
    return json{{"learning_rate", opt.learning_rate}, {"beta1", opt.beta1},
                {"beta2", opt.beta2},                 {"epsilon", opt.epsilon},
                {"max_grad_norm", opt.max_grad_norm}, {"first_moment", opt.first_moment},
                {"second_moment", opt.second_moment}, {"steps", opt.steps}};
}

Adam adam_from_json(const json &j) {
    Adam opt;
    opt.learning_rate = j.at("learning_rate").get<double>();
    opt.beta1 = j.at("beta1").get<double>();
    opt.beta2 = j.at("beta2").get<double>();
    opt.epsilon = j.at("epsilon").get<double>();
    opt.max_grad_norm = j.at("max_grad_norm").get<double>();
    opt.first_moment = j.at("first_moment").get<std::vector<double>>();
    opt.second_moment = j.at("second_moment").get<std::vector<double>>();
    opt.steps = j.at("steps").get<std::uint64_t>();
    return opt;
}

json read_json(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json(const json &doc, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << doc.dump() << '\n';
}

} // namespace

json snapshot_json(const EcosystemState &state) {
    RunConfig wrapper;
    wrapper.ecosystem = state.config;

    json creators = json::array();
    for (const auto &c : state.creators) {
        json history = json::array();
        for (const auto &h : c.history) history.push_back({h.item, h.genre, h.clicks});
        creators.push_back({{"id", c.id},
                            {"trust_true", c.trust_true},
                            {"activity_prob", c.activity_prob},
                            {"history", history},
                            {"zero_click_streak", c.zero_click_streak},
                            {"alive", c.alive},
                            {"fallback", fallback_tag(c.fallback)},
                            {"cfd_logits", c.cfd.genre_logits},
                            {"cfd_learning_rate", c.cfd.learning_rate},
                            {"simuline_clicks", c.simuline.recent_clicks},
                            {"simuline_smoothing", c.simuline.smoothing},
                            {"last_created", optional_genre(c.last_created)},
                            {"last_round_feedback", c.last_round_feedback},
                            {"clicks_prev_round", c.clicks_prev_round},
                            {"clicks_this_round", c.clicks_this_round}});
    }
    json users = json::array();
    for (const auto &u : state.users)
        users.push_back({{"id", u.id}, {"genre_affinity", u.genre_affinity}, {"activity_prob", u.activity_prob}});
    json corpus = json::array();
    for (const auto &i : state.corpus)
        corpus.push_back({i.id, i.creator, i.genre, i.round_created, i.total_clicks, i.impressions, i.quality});
    json click_records = json::array();
    for (const auto &r : state.clicks.records) click_records.push_back({r.item, r.user, r.round});

    const auto &rng = state.rng;
    return json{{"format", "lore-ecosystem-snapshot"},
                {"version", kSnapshotVersion},
                {"config", config_to_json(wrapper)},
                {"round", state.round},
                {"creators", creators},
                {"users", users},
                {"corpus", corpus},
                {"clicks",
                 {{"records", click_records},
                  {"per_round_totals", state.clicks.per_round_totals},
                  {"genre_totals", state.clicks.genre_totals}}},
                {"rng",
                 {{"init", serialize_rng(rng.init)},
                  {"creator_activity", serialize_rng(rng.creator_activity)},
                  {"user_activity", serialize_rng(rng.user_activity)},
                  {"creator_decision", serialize_rng(rng.creator_decision)},
                  {"content", serialize_rng(rng.content)},
                  {"click", serialize_rng(rng.click)},
                  {"recommender", serialize_rng(rng.recommender)}}},
                {"mf",
                 {{"dims", state.mf.dims},
                  {"user_factors", state.mf.user_factors},
                  {"genre_factors", state.mf.genre_factors},
                  {"item_factors", state.mf.item_factors}}}};
}

EcosystemState snapshot_from_json(const json &doc) {
    if (doc.value("format", "") != "lore-ecosystem-snapshot") throw ConfigError("not an ecosystem snapshot");
    if (doc.at("version").get<int>() != kSnapshotVersion)
        throw ConfigError("unsupported snapshot version " + doc.at("version").dump());
    EcosystemState state;
    state.config = config_from_json(doc.at("config")).ecosystem;
    state.round = doc.at("round").get<Round>();
    for (const auto &j : doc.at("creators")) {
        CreatorRecord c;
        c.id = j.at("id").get<CreatorId>();
        c.trust_true = j.at("trust_true").get<double>();
        c.activity_prob = j.at("activity_prob").get<double>();
        for (const auto &h : j.at("history"))
            c.history.push_back({h.at(0).get<ItemId>(), h.at(1).get<GenreId>(), h.at(2).get<std::uint64_t>()});
        c.zero_click_streak = j.at("zero_click_streak").get<std::uint32_t>();
        c.alive = j.at("alive").get<bool>();
        c.fallback = parse_fallback(j.at("fallback").get<std::string>());
        c.cfd.genre_logits = j.at("cfd_logits").get<std::vector<double>>();
        c.cfd.learning_rate = j.at("cfd_learning_rate").get<double>();
        c.simuline.recent_clicks = j.at("simuline_clicks").get<std::vector<double>>();
        c.simuline.smoothing = j.at("simuline_smoothing").get<double>();
        c.last_created = optional_genre(j.at("last_created"));
        c.last_round_feedback = j.at("last_round_feedback").get<std::vector<double>>();
        c.clicks_prev_round = j.at("clicks_prev_round").get<std::uint64_t>();
        c.clicks_this_round = j.at("clicks_this_round").get<std::uint64_t>();
        state.creators.push_back(std::move(c));
    }
    for (const auto &j : doc.at("users"))
        state.users.push_back({j.at("id").get<UserId>(), j.at("genre_affinity").get<std::vector<double>>(),
                               j.at("activity_prob").get<double>()});
    for (const auto &j : doc.at("corpus"))
        state.corpus.push_back({j.at(0).get<ItemId>(), j.at(1).get<CreatorId>(), j.at(2).get<GenreId>(),
                                j.at(3).get<Round>(), j.at(4).get<std::uint64_t>(), j.at(5).get<std::uint64_t>(),
                                j.at(6).get<double>()});
    const auto &clicks = doc.at("clicks");
    for (const auto &r : clicks.at("records"))
        state.clicks.records.push_back({r.at(0).get<ItemId>(), r.at(1).get<UserId>(), r.at(2).get<Round>()});
    state.clicks.per_round_totals = clicks.at("per_round_totals").get<std::vector<std::uint64_t>>();
    state.clicks.genre_totals = clicks.at("genre_totals").get<std::vector<std::uint64_t>>();
    const auto &rng = doc.at("rng");
    state.rng.init = deserialize_rng(rng.at("init").get<std::string>());
    state.rng.creator_activity = deserialize_rng(rng.at("creator_activity").get<std::string>());
    state.rng.user_activity = deserialize_rng(rng.at("user_activity").get<std::string>());
    state.rng.creator_decision = deserialize_rng(rng.at("creator_decision").get<std::string>());
    state.rng.content = deserialize_rng(rng.at("content").get<std::string>());
    state.rng.click = deserialize_rng(rng.at("click").get<std::string>());
    state.rng.recommender = deserialize_rng(rng.at("recommender").get<std::string>());
    const auto &mf = doc.at("mf");
    state.mf.dims = mf.at("dims").get<std::size_t>();
    state.mf.user_factors = mf.at("user_factors").get<std::vector<double>>();
    state.mf.genre_factors = mf.at("genre_factors").get<std::vector<double>>();
    state.mf.item_factors = mf.at("item_factors").get<std::vector<double>>();
    return state;
}

void save_snapshot(const EcosystemState &state, const std::filesystem::path &path, const json &provenance) {
    auto doc = snapshot_json(state);
    if (provenance.is_object()) doc.update(provenance);
    write_json(doc, path);
}

EcosystemState load_snapshot(const std::filesystem::path &path) { return snapshot_from_json(read_json(path)); }

json mlp_json(const Mlp &net) {
    return json{{"inputs", net.input_size()},
                {"hidden", net.hidden_sizes()},
                {"outputs", net.output_size()},
                {"params", net.params}};
}

Mlp mlp_from_json(const json &doc) {
    Rng unused;
    Mlp net(doc.at("inputs").get<std::size_t>(), doc.at("hidden").get<std::vector<std::size_t>>(),
            doc.at("outputs").get<std::size_t>(), unused);
    auto params = doc.at("params").get<std::vector<double>>();
    if (params.size() != net.params.size()) throw ConfigError("network parameter count does not match its shape");
    net.params = std::move(params);
    return net;
}

json checkpoint_json(const Checkpoint &cp, const json &provenance) {
    json doc{{"format", "lore-checkpoint"},
                {"version", kCheckpointVersion},
                {"config", config_to_json(cp.config)},
                {"creators", cp.learner.creators},
                {"genres", cp.learner.genres},
                {"policy", mlp_json(cp.learner.policy)},
                {"value", mlp_json(cp.learner.value)},
                {"actor_optimizer", adam_json(cp.learner.actor_opt)},
                {"critic_optimizer", adam_json(cp.learner.critic_opt)},
                {"trust",
                 {{"steps_per_round", cp.trust.config().steps_per_round},
                  {"learning_rate", cp.trust.config().learning_rate},
                  {"half_life", cp.trust.config().half_life},
                  {"logits", cp.trust.params().logits},
                  {"weights", cp.trust.weights()},
                  {"follow_mass", cp.trust.follow_mass()}}},
                {"rng", serialize_rng(cp.rng)}};
    if (provenance.is_object())
        for (const auto &[k, v] : provenance.items()) doc[k] = v;
    return doc;
}

Checkpoint checkpoint_from_json(const json &doc) {
    if (doc.value("format", "") != "lore-checkpoint") throw ConfigError("not a checkpoint document");
    if (doc.at("version").get<int>() != kCheckpointVersion)
        throw ConfigError("unsupported checkpoint version " + doc.at("version").dump());
    Checkpoint cp;
    cp.config = config_from_json(doc.at("config"));
    cp.learner.creators = doc.at("creators").get<std::size_t>();
    cp.learner.genres = doc.at("genres").get<std::size_t>();
    cp.learner.policy = mlp_from_json(doc.at("policy"));
    cp.learner.value = mlp_from_json(doc.at("value"));
    cp.learner.actor_opt = adam_from_json(doc.at("actor_optimizer"));
    cp.learner.critic_opt = adam_from_json(doc.at("critic_optimizer"));
    const auto &t = doc.at("trust");
    TrustEstimatorConfig tc{t.at("steps_per_round").get<std::size_t>(), t.at("learning_rate").get<double>(),
                            t.at("half_life").get<double>()};
    auto logits = t.at("logits").get<std::vector<double>>();
    cp.trust = TrustEstimator(logits.size(), tc);
    cp.trust.restore({std::move(logits)}, t.at("weights").get<std::vector<double>>(),
                     t.at("follow_mass").get<std::vector<double>>());
    cp.rng = deserialize_rng(doc.at("rng").get<std::string>());
    return cp;
}

void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path, const json &provenance) {
    write_json(checkpoint_json(checkpoint, provenance), path);
}

Checkpoint load_checkpoint(const std::filesystem::path &path) { return checkpoint_from_json(read_json(path)); }

} // namespace lore
