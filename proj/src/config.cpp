#include "lore/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "lore/error.hpp"

namespace lore {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that
// leftovers can be rejected as unknown.
class Section {
public:
    Section(const json &doc, std::string path) : doc_(doc), path_(std::move(path)) {
        if (!doc_.is_null() && !doc_.is_object()) throw ConfigError(where() + " must be an object");
    }

    void get(const char *key, double &out) {
        if (const json *v = take(key)) {
            if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
            out = v->get<double>();
        }
    }
    void get(const char *key, std::size_t &out) {
        if (const json *v = take(key)) {
            if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
                throw ConfigError(where(key) + " must be a nonnegative integer");
            out = v->get<std::size_t>();
        }
    }
    void get(const char *key, std::uint32_t &out) {
        std::size_t wide = out;
        get(key, wide);
        out = static_cast<std::uint32_t>(wide);
    }
    void get(const char *key, std::int64_t &out) {
        if (const json *v = take(key)) {
            if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
            out = v->get<std::int64_t>();
        }
    }
    void get(const char *key, bool &out) {
        if (const json *v = take(key)) {
            if (!v->is_boolean()) throw ConfigError(where(key) + " must be true or false");
            out = v->get<bool>();
        }
    }
    void get(const char *key, std::string &out) {
        if (const json *v = take(key)) {
            if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
            out = v->get<std::string>();
        }
    }
    const json *raw(const char *key) { return take(key); }

    Section sub(const char *key) {
        const json *v = take(key);
        static const json empty;
        return Section(v ? *v : empty, path_.empty() ? key : path_ + "." + key);
    }

    void finish() const {
        if (!doc_.is_object()) return;
        for (auto it = doc_.begin(); it != doc_.end(); ++it)
            if (!used_.contains(it.key())) throw ConfigError("unknown config key: " + where(it.key().c_str()));
    }

    std::string where(const char *key = nullptr) const {
        if (!key) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json *take(const char *key) {
        if (!doc_.is_object() || !doc_.contains(key)) return nullptr;
        used_.insert(key);
        return &doc_.at(key);
    }

    const json &doc_;
    std::string path_;
    std::set<std::string> used_;
};

void require(bool ok, const std::string &message) {
    if (!ok) throw ConfigError(message);
}

} // namespace

RunConfig config_from_json(const json &doc) {
    RunConfig cfg;
    Section root(doc, "");
    root.get("name", cfg.name);
    root.get("seed", cfg.seed);
    std::string strategy = std::string(strategy_tag(cfg.strategy));
    root.get("strategy", strategy);
    cfg.strategy = parse_strategy(strategy);
    auto &eco = cfg.ecosystem;
    root.get("genres", eco.genres);
    root.get("churn_threshold", eco.churn_threshold);
    root.get("eval_rounds", cfg.eval_rounds);

    {
        auto s = root.sub("users");
        auto &u = eco.users;
        s.get("count", u.users);
        s.get("activity_prob", u.activity_prob);
        s.get("activity_spread", u.activity_spread);
        std::string model = u.model == AffinityModel::Favorite ? "favorite" : "dirichlet";
        s.get("affinity_model", model);
        require(model == "favorite" || model == "dirichlet", "users.affinity_model must be favorite|dirichlet");
        u.model = model == "favorite" ? AffinityModel::Favorite : AffinityModel::Dirichlet;
        s.get("favorite_strength", u.favorite_strength);
        s.get("noise", u.noise);
        s.get("skew", u.skew);
        s.get("disliked_genres", u.disliked_genres);
        s.get("disliked_affinity", u.disliked_affinity);
        s.get("dirichlet_alpha", u.dirichlet_alpha);
        s.get("csv", cfg.population_csv);
        s.finish();
    }
    {
        auto s = root.sub("creators");
        auto &c = eco.creators;
        s.get("count", c.creators);
        s.get("activity_prob", c.activity_prob);
        s.get("activity_spread", c.activity_spread);
        {
            auto t = s.sub("trust");
            t.get("mean", c.trust_mean);
            t.get("stddev", c.trust_stddev);
            t.finish();
        }
        std::string init = c.initial_history == InitialHistory::Uniform ? "uniform" : "least_liked";
        s.get("initial_history", init);
        require(init == "uniform" || init == "least_liked", "creators.initial_history must be uniform|least_liked");
        c.initial_history = init == "uniform" ? InitialHistory::Uniform : InitialHistory::LeastLiked;
        s.get("history_items", c.history_items);
        s.get("least_liked_pool", c.least_liked_pool);
        if (const json *mix = s.raw("fallback_mix")) {
            require(mix->is_object() && !mix->empty(), "creators.fallback_mix must be a nonempty object");
            c.fallback_mix.clear();
            for (auto it = mix->begin(); it != mix->end(); ++it) {
                require(it.value().is_number(), "creators.fallback_mix." + it.key() + " must be a number");
                c.fallback_mix.push_back({parse_fallback(it.key()), it.value().get<double>()});
            }
        }
        auto &m = eco.creator_models;
        s.get("dynamic_trust", m.dynamic_trust);
        std::string rule = m.trust_rule == TrustUpdateRule::ClickDelta ? "click_delta" : "any_creation";
        s.get("trust_rule", rule);
        require(rule == "click_delta" || rule == "any_creation", "creators.trust_rule must be click_delta|any_creation");
        m.trust_rule = rule == "click_delta" ? TrustUpdateRule::ClickDelta : TrustUpdateRule::AnyCreation;
        {
            auto t = s.sub("cfd");
            t.get("learning_rate", m.cfd_learning_rate);
            t.get("history_weight", m.cfd_history_weight);
            t.finish();
        }
        {
            auto t = s.sub("simuline");
            t.get("smoothing", m.simuline_smoothing);
            t.finish();
        }
        s.finish();
    }
    {
        auto s = root.sub("clicks");
        auto &p = eco.clicks;
        s.get("bias", p.bias);
        s.get("affinity_weight", p.affinity_weight);
        s.get("quality_weight", p.quality_weight);
        s.get("quality_stddev", p.quality_stddev);
        s.finish();
    }
    {
        auto s = root.sub("recommender");
        auto &r = eco.recommender;
        std::string kind(recommender_tag(r.kind));
        s.get("kind", kind);
        r.kind = parse_recommender(kind);
        s.get("k", r.k);
        s.get("candidate_window", r.candidate_window);
        s.get("min_exposure", r.min_exposure);
        auto m = s.sub("mf");
        m.get("dims", r.mf.dims);
        m.get("epochs", r.mf.epochs);
        m.get("learning_rate", r.mf.learning_rate);
        m.get("regularization", r.mf.regularization);
        m.get("init_stddev", r.mf.init_stddev);
        m.get("retrain_every", r.mf.retrain_every);
        m.finish();
        s.finish();
    }
    {
        auto s = root.sub("learner");
        auto &l = cfg.learner;
        if (const json *h = s.raw("hidden")) {
            require(h->is_array(), "learner.hidden must be an array of layer widths");
            l.hidden.clear();
            for (const auto &w : *h) {
                require(w.is_number_integer() && w.get<std::int64_t>() > 0, "learner.hidden widths must be positive");
                l.hidden.push_back(w.get<std::size_t>());
            }
        }
        s.get("gamma", l.gamma);
        s.get("lambda", l.lambda);
        s.get("clip_epsilon", l.clip_epsilon);
        s.get("actor_lr", l.actor_lr);
        s.get("critic_lr", l.critic_lr);
        s.get("rounds_per_buffer", l.rounds_per_buffer);
        s.get("epochs", l.epochs);
        std::string mode(surrogate_tag(l.mode));
        s.get("surrogate", mode);
        l.mode = parse_surrogate(mode);
        s.get("normalize_advantages", l.normalize_advantages);
        s.get("reward_scale", l.reward_scale);
        s.get("max_grad_norm", l.max_grad_norm);
        s.get("actor_output_scale", l.actor_output_scale);
        s.get("max_train_rounds", l.max_train_rounds);
        s.get("min_cycles", l.min_cycles);
        s.get("convergence_window", l.convergence_window);
        s.get("convergence_tolerance", l.convergence_tolerance);
        s.get("episode_rounds", l.episode_rounds);
        s.finish();
    }
    {
        auto s = root.sub("trust_estimator");
        s.get("steps_per_round", cfg.trust_estimator.steps_per_round);
        s.get("learning_rate", cfg.trust_estimator.learning_rate);
        s.get("half_life", cfg.trust_estimator.half_life);
        s.finish();
    }
    {
        auto s = root.sub("output");
        s.get("dir", cfg.output_dir);
        s.get("checkpoint", cfg.write_checkpoint);
        s.finish();
    }
    root.finish();

    eco.users.genres = eco.genres;
    eco.creator_models.genres = eco.genres;
    validate(cfg);
    return cfg;
}

json config_to_json(const RunConfig &cfg) {
    const auto &eco = cfg.ecosystem;
    const auto &u = eco.users;
    const auto &c = eco.creators;
    const auto &m = eco.creator_models;
    const auto &r = eco.recommender;
    const auto &l = cfg.learner;

    json mix = json::object();
    for (const auto &share : c.fallback_mix) mix[std::string(fallback_tag(share.model))] = share.weight;

    json users = {{"count", u.users},
                  {"activity_prob", u.activity_prob},
                  {"activity_spread", u.activity_spread},
                  {"affinity_model", u.model == AffinityModel::Favorite ? "favorite" : "dirichlet"},
                  {"favorite_strength", u.favorite_strength},
                  {"noise", u.noise},
                  {"skew", u.skew},
                  {"disliked_genres", u.disliked_genres},
                  {"disliked_affinity", u.disliked_affinity},
                  {"dirichlet_alpha", u.dirichlet_alpha}};
    if (!cfg.population_csv.empty()) users["csv"] = cfg.population_csv;

    return json{
        {"name", cfg.name},
        {"seed", cfg.seed},
        {"strategy", strategy_tag(cfg.strategy)},
        {"genres", eco.genres},
        {"churn_threshold", eco.churn_threshold},
        {"eval_rounds", cfg.eval_rounds},
        {"users", users},
        {"creators",
         {{"count", c.creators},
          {"activity_prob", c.activity_prob},
          {"activity_spread", c.activity_spread},
          {"trust", {{"mean", c.trust_mean}, {"stddev", c.trust_stddev}}},
          {"initial_history", c.initial_history == InitialHistory::Uniform ? "uniform" : "least_liked"},
          {"history_items", c.history_items},
          {"least_liked_pool", c.least_liked_pool},
          {"fallback_mix", mix},
          {"dynamic_trust", m.dynamic_trust},
          {"trust_rule", m.trust_rule == TrustUpdateRule::ClickDelta ? "click_delta" : "any_creation"},
          {"cfd", {{"learning_rate", m.cfd_learning_rate}, {"history_weight", m.cfd_history_weight}}},
          {"simuline", {{"smoothing", m.simuline_smoothing}}}}},
        {"clicks",
         {{"bias", eco.clicks.bias},
          {"affinity_weight", eco.clicks.affinity_weight},
          {"quality_weight", eco.clicks.quality_weight},
          {"quality_stddev", eco.clicks.quality_stddev}}},
        {"recommender",
         {{"kind", recommender_tag(r.kind)},
          {"k", r.k},
          {"candidate_window", r.candidate_window},
          {"min_exposure", r.min_exposure},
          {"mf",
           {{"dims", r.mf.dims},
            {"epochs", r.mf.epochs},
            {"learning_rate", r.mf.learning_rate},
            {"regularization", r.mf.regularization},
            {"init_stddev", r.mf.init_stddev},
            {"retrain_every", r.mf.retrain_every}}}}},
        {"learner",
         {{"hidden", l.hidden},
          {"gamma", l.gamma},
          {"lambda", l.lambda},
          {"clip_epsilon", l.clip_epsilon},
          {"actor_lr", l.actor_lr},
          {"critic_lr", l.critic_lr},
          {"rounds_per_buffer", l.rounds_per_buffer},
          {"epochs", l.epochs},
          {"surrogate", surrogate_tag(l.mode)},
          {"normalize_advantages", l.normalize_advantages},
          {"reward_scale", l.reward_scale},
          {"max_grad_norm", l.max_grad_norm},
          {"actor_output_scale", l.actor_output_scale},
          {"max_train_rounds", l.max_train_rounds},
          {"min_cycles", l.min_cycles},
          {"convergence_window", l.convergence_window},
          {"convergence_tolerance", l.convergence_tolerance},
          {"episode_rounds", l.episode_rounds}}},
        {"trust_estimator",
         {{"steps_per_round", cfg.trust_estimator.steps_per_round},
          {"learning_rate", cfg.trust_estimator.learning_rate},
          {"half_life", cfg.trust_estimator.half_life}}},
        {"output", {{"dir", cfg.output_dir}, {"checkpoint", cfg.write_checkpoint}}},
    };
}

void validate(const RunConfig &cfg) {
    const auto &eco = cfg.ecosystem;
    require(eco.users.genres == eco.genres && eco.creator_models.genres == eco.genres,
            "internal: genre counts out of sync");
    validate(eco);
    cfg.learner.validate();
    require(eco.creators.creators > 0, "creators.count must be positive");
    require(eco.creators.trust_stddev > 0.0, "creators.trust.stddev must be positive");
    require(truncated_gaussian_mass(eco.creators.trust_mean, eco.creators.trust_stddev, 0.0, 1.0) >= 1e-6,
            "creators.trust: truncated normal has negligible mass on [0,1]");
    require(eco.users.skew >= 0.0 && eco.users.skew <= 1.0, "users.skew must lie in [0,1]");
    require(eco.users.disliked_genres < eco.genres, "users.disliked_genres must be below genres");
    require(cfg.trust_estimator.learning_rate > 0.0, "trust_estimator.learning_rate must be positive");
    require(cfg.trust_estimator.half_life >= 0.0, "trust_estimator.half_life must be nonnegative");
    require(cfg.eval_rounds > 0, "eval_rounds must be positive");
    if (eco.recommender.kind == RecommenderKind::MfLite) require(eco.recommender.mf.dims >= 1, "recommender.mf.dims must be >= 1");
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(doc);
}

void save_config(const RunConfig &config, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config: " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

std::uint64_t config_hash(const RunConfig &config) { return fnv1a(config_to_json(config).dump()); }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace {

RunConfig steering_base() {
    RunConfig cfg;
    cfg.name = "steering-demo";
    cfg.strategy = StrategyKind::Lore;
    auto &eco = cfg.ecosystem;
    eco.genres = 14;
    eco.users.genres = 14;
    eco.users.users = 100;
    eco.users.disliked_genres = 3;
    eco.users.disliked_affinity = -1.0;
    eco.users.noise = 0.2;
    eco.creators.creators = 50;
    eco.creators.activity_prob = 0.9;
    eco.creators.trust_mean = 0.5;
    eco.creators.trust_stddev = 1.0;
    eco.creators.initial_history = InitialHistory::LeastLiked;
    eco.creators.least_liked_pool = 3;
    eco.creators.history_items = 1;
    eco.creator_models.genres = 14;
    eco.recommender.kind = RecommenderKind::OracleAffinity;
    eco.recommender.k = 5;
    eco.recommender.candidate_window = 1;
    eco.churn_threshold = 10;
    cfg.learner.hidden = {64, 64};
    cfg.learner.actor_lr = 1e-3;
    cfg.learner.max_train_rounds = 3000;
    cfg.learner.min_cycles = 150;
    cfg.eval_rounds = 100;
    return cfg;
}

} // namespace

std::vector<std::string> preset_names() {
    return {"steering-demo", "steering-cfd", "steering-simuline", "skewed-audience",
            "dynamic-trust-0.4", "dynamic-trust-0.6", "dynamic-trust-0.8", "tiny"};
}

RunConfig preset(std::string_view name) {
    if (name == "steering-demo") return steering_base();
    if (name == "steering-cfd" || name == "steering-simuline") {
        auto cfg = steering_base();
        cfg.name = std::string(name);
        cfg.ecosystem.creators.fallback_mix = {
            {name == "steering-cfd" ? FallbackModel::Cfd : FallbackModel::SimuLine, 1.0}};
        return cfg;
    }
    if (name == "skewed-audience") {
        auto cfg = steering_base();
        cfg.name = "skewed-audience";
        cfg.ecosystem.users.disliked_genres = 0;
        cfg.ecosystem.users.skew = 0.6;
        cfg.ecosystem.creators.initial_history = InitialHistory::Uniform;
        return cfg;
    }
    if (name.starts_with("dynamic-trust")) {
        auto cfg = steering_base();
        double mean = 0.6;
        if (name.size() > std::string_view("dynamic-trust").size()) {
            const auto suffix = name.substr(std::string_view("dynamic-trust-").size());
            try {
                mean = std::stod(std::string(suffix));
            } catch (const std::exception &) {
                throw ConfigError("unknown preset: '" + std::string(name) + "'");
            }
        }
        cfg.name = std::string(name);
        cfg.ecosystem.creators.trust_mean = mean;
        cfg.ecosystem.creator_models.dynamic_trust = true;
        return cfg;
    }
    if (name == "tiny") {
        RunConfig cfg;
        cfg.name = "tiny";
        cfg.strategy = StrategyKind::None;
        auto &eco = cfg.ecosystem;
        eco.genres = 3;
        eco.users.genres = 3;
        eco.users.users = 5;
        eco.creators.creators = 3;
        eco.creator_models.genres = 3;
        cfg.learner.hidden = {8};
        cfg.learner.rounds_per_buffer = 4;
        cfg.learner.epochs = 2;
        cfg.learner.max_train_rounds = 8;
        cfg.learner.episode_rounds = 4;
        cfg.eval_rounds = 3;
        return cfg;
    }
    throw ConfigError("unknown preset: '" + std::string(name) + "'");
}

} // namespace lore
