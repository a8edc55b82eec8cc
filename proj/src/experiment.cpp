#include "lore/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include "lore/audience.hpp"
#include "lore/error.hpp"
#include "lore/signaling.hpp"

namespace lore {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

} // namespace

Observation EcosystemEnv::observe(std::span<const double> trust_estimates) const {
    return lore::observe(state_, trust_estimates);
}

EnvStep EcosystemEnv::step(const PlatformAction &action) {
    last_ = lore::step(state_, action);
    return {static_cast<double>(last_.reward), last_.follows};
}

std::uint64_t evaluation_seed(std::uint64_t seed) { return mix_seed(seed, 0); }
std::uint64_t training_seed(std::uint64_t seed, std::uint64_t episode) { return mix_seed(seed, 1000 + episode); }

EcosystemState make_world(const RunConfig &config, std::uint64_t dynamics_seed) {
    std::optional<std::vector<UserRecord>> users;
    if (!config.population_csv.empty())
        users = load_population_csv(config.population_csv, config.ecosystem.genres);
    return make_ecosystem(config.ecosystem, std::move(users), config.seed, dynamics_seed);
}

EnvFactory training_factory(const RunConfig &config) {
    // Loading the user table once keeps episode resets cheap.
    std::optional<std::vector<UserRecord>> users;
    if (!config.population_csv.empty())
        users = load_population_csv(config.population_csv, config.ecosystem.genres);
    return [config, users](std::uint64_t episode) -> std::unique_ptr<Environment> {
        return std::make_unique<EcosystemEnv>(
            make_ecosystem(config.ecosystem, users, config.seed, training_seed(config.seed, episode)));
    };
}

TrustEstimatorConfig effective_trust_config(const RunConfig &config) {
    auto tc = config.trust_estimator;
    if (!config.ecosystem.creator_models.dynamic_trust) tc.half_life = 0.0;
    return tc;
}

PlatformAction baseline_action(StrategyKind strategy, const EcosystemState &state) {
    switch (strategy) {
    case StrategyKind::None: return no_signal(state.creators.size());
    case StrategyKind::MostClick: return most_click(state.clicks.genre_totals, state.creators.size());
    case StrategyKind::MostHistoryClick: return most_history_click(state.creators);
    case StrategyKind::Lore: break;
    }
    throw ConfigError("the lore strategy needs a trained policy");
}

TrainedModel train_policy(const RunConfig &config) {
    validate(config);
    Rng init = make_stream(config.seed, "learner-init");
    TrainedModel model;
    model.learner = make_learner(config.ecosystem.creators.creators, config.ecosystem.genres, config.learner, init);
    model.trust = TrustEstimator(config.ecosystem.creators.creators, effective_trust_config(config));
    model.rng = make_stream(config.seed, "policy");
    model.result = train(model.learner, model.trust, training_factory(config), config.learner, model.rng);
    if (model.result.diverged) throw NumericalError("training diverged: " + model.result.message);
    return model;
}

EvalResult evaluate(const RunConfig &config, const LearnerState *learner, TrustEstimator trust) {
    if (config.strategy == StrategyKind::Lore && learner == nullptr)
        throw ConfigError("the lore strategy needs a trained policy");
    EcosystemEnv env(make_world(config, evaluation_seed(config.seed)));
    Rng policy_rng = make_stream(config.seed, "policy-eval");
    MetricsTracker tracker(config.ecosystem.genres);
    EvalResult result;

    for (std::size_t r = 0; r < config.eval_rounds; ++r) {
        PlatformAction action;
        if (config.strategy == StrategyKind::Lore) {
            const auto state = encode(env.observe(trust.estimates()), config.ecosystem.genres);
            action = act(learner->policy, state, config.ecosystem.genres, policy_rng).action;
        } else {
            action = baseline_action(config.strategy, env.state());
        }
        env.step(action);
        const auto &outcome = env.last_outcome();
        trust.record(outcome.follows, outcome.round);
        trust.advance();
        tracker.add(outcome, trust.estimates());
        for (const auto &f : outcome.follows) result.follows.records.push_back({f.creator, outcome.round, f.followed});
        result.events.push_back(outcome);
    }
    result.metrics = tracker.rows();
    result.genre_counts = tracker.genre_counts();
    result.trust = std::move(trust);
    result.final_state = env.state();
    return result;
}

RunOutput execute(const RunConfig &config) {
    validate(config);
    RunOutput out;
    TrustEstimator trust(config.ecosystem.creators.creators, effective_trust_config(config));
    if (config.strategy == StrategyKind::Lore) {
        out.trained = train_policy(config);
        out.eval = evaluate(config, &out.trained->learner, out.trained->trust);
    } else {
        out.eval = evaluate(config, nullptr, trust);
    }

    auto &s = out.summary;
    s.name = config.name;
    s.strategy = config.strategy;
    s.seed = config.seed;
    const auto cum = cumulative_clicks(out.eval.events);
    s.final_clicks = cum.empty() ? 0 : cum.back();
    const bool any = std::any_of(out.eval.genre_counts.begin(), out.eval.genre_counts.end(),
                                 [](std::uint64_t c) { return c > 0; });
    s.diversity = any ? diversity(out.eval.genre_counts) : 0.0;
    s.active_creators = active_creators(out.eval.events);
    if (out.trained) {
        s.train_rounds = out.trained->result.rounds;
        s.train_cycles = out.trained->result.log.size();
        s.converged = out.trained->result.converged;
    }
    return out;
}

std::string provenance(const RunConfig &config) {
    return "config_hash=" + hex64(config_hash(config)) + ",seed=" + std::to_string(config.seed);
}

void write_metrics_csv(const RunConfig &config, const std::vector<MetricsRow> &rows,
                       const std::filesystem::path &path) {
    auto out = open_out(path);
    out << "# " << provenance(config) << '\n';
    out << "round,reward,cumulative_clicks,diversity_so_far,active_creators,mean_trust_estimate,follow_rate\n";
    for (const auto &r : rows)
        out << r.round << ',' << r.reward << ',' << r.cumulative_clicks << ',' << num(r.diversity_so_far) << ','
            << r.active_creators << ',' << num(r.mean_trust_estimate) << ',' << num(r.follow_rate) << '\n';
}

void write_events_jsonl(const RunConfig &config, const EventLog &events, const std::filesystem::path &path) {
    auto out = open_out(path);
    out << nlohmann::json{{"format", "lore-events"},
                          {"config_hash", hex64(config_hash(config))},
                          {"seed", config.seed}}
               .dump()
        << '\n';
    for (const auto &e : events) out << round_event_json(e).dump() << '\n';
}

void write_training_log(const RunConfig &config, const std::vector<TrainingLogRow> &rows,
                        const std::filesystem::path &path) {
    auto out = open_out(path);
    out << "# " << provenance(config) << '\n';
    out << "cycle,policy_loss,critic_loss,mean_reward,clip_fraction\n";
    for (const auto &r : rows)
        out << r.cycle << ',' << num(r.policy_loss) << ',' << num(r.critic_loss) << ',' << num(r.mean_reward) << ','
            << num(r.clip_fraction) << '\n';
}

namespace {

void write_summary_csv(const RunConfig &config, const RunSummary &s, const std::filesystem::path &path) {
    auto out = open_out(path);
    out << "# " << provenance(config) << '\n';
    out << "name,strategy,seed,final_clicks,diversity,active_creators,train_rounds,train_cycles,converged\n";
    out << s.name << ',' << strategy_tag(s.strategy) << ',' << s.seed << ',' << s.final_clicks << ','
        << num(s.diversity) << ',' << num(s.active_creators) << ',' << s.train_rounds << ',' << s.train_cycles << ','
        << (s.converged ? 1 : 0) << '\n';
}

void write_genres_per_creator(const RunConfig &config, const EventLog &events, std::size_t creators,
                              const std::filesystem::path &path) {
    auto out = open_out(path);
    out << "# " << provenance(config) << '\n';
    out << "creator_id,genres\n";
    const auto counts = genres_per_creator(created_genres(events, creators));
    for (std::size_t c = 0; c < counts.size(); ++c) out << c << ',' << counts[c] << '\n';
}

void write_follows(const RunConfig &config, const FollowDataset &data, const std::filesystem::path &path) {
    // Same body as save_follow_csv, preceded by the provenance line.
    auto out = open_out(path);
    out << "# " << provenance(config) << '\n';
    out << "creator_id,round,followed\n";
    for (const auto &r : data.records) out << r.creator << ',' << r.round << ',' << (r.followed ? 1 : 0) << '\n';
}

} // namespace

void write_outputs(const RunConfig &config, const RunOutput &output, const std::filesystem::path &dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    write_metrics_csv(config, output.eval.metrics, dir / "metrics.csv");
    write_events_jsonl(config, output.eval.events, dir / "events.jsonl");
    write_follows(config, output.eval.follows, dir / "follows.csv");
    write_genres_per_creator(config, output.eval.events, config.ecosystem.creators.creators,
                             dir / "genres_per_creator.csv");
    write_summary_csv(config, output.summary, dir / "summary.csv");
    if (output.trained) {
        write_training_log(config, output.trained->result.log, dir / "training_log.csv");
        if (config.write_checkpoint) {
            Checkpoint cp{config, output.trained->learner, output.trained->trust, output.trained->rng};
            save_checkpoint(cp, dir / "checkpoint.json",
                            {{"config_hash", hex64(config_hash(config))}, {"seed", config.seed}});
        }
    }
}

RunOutput run_experiment(const RunConfig &config, const std::filesystem::path &dir) {
    auto out = execute(config);
    write_outputs(config, out, dir);
    return out;
}

MeanSe mean_se(std::span<const double> values) {
    MeanSe r;
    if (values.empty()) return r;
    const double n = static_cast<double>(values.size());
    for (double v : values) r.mean += v;
    r.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return r;
}

namespace {

nlohmann::json environment_fields(const RunConfig &config) {
    auto doc = config_to_json(config);
    for (const char *key : {"name", "seed", "strategy", "output"}) doc.erase(key);
    return doc;
}

} // namespace

Comparison compare(const std::vector<RunConfig> &configs, const std::vector<std::uint64_t> &seeds,
                   const std::optional<std::filesystem::path> &out_dir) {
    if (configs.empty()) throw ConfigError("compare needs at least one config");
    if (seeds.empty()) throw ConfigError("compare needs at least one seed");
    const auto reference = environment_fields(configs.front());
    for (std::size_t i = 1; i < configs.size(); ++i) {
        const auto diff = nlohmann::json::diff(reference, environment_fields(configs[i]));
        if (!diff.empty())
            throw ConfigError("configs '" + configs.front().name + "' and '" + configs[i].name +
                              "' differ outside the strategy field (first difference at " +
                              diff.front().at("path").get<std::string>() + ")");
    }

    std::vector<RunConfig> jobs;
    for (const auto &c : configs)
        for (auto seed : seeds) {
            auto job = c;
            job.seed = seed;
            jobs.push_back(std::move(job));
        }

    Comparison result;
    result.provenance = "config_hash=";
    for (std::size_t i = 0; i < configs.size(); ++i)
        result.provenance += (i ? ";" : "") + hex64(config_hash(configs[i]));
    result.provenance += ",seed=";
    for (std::size_t i = 0; i < seeds.size(); ++i) result.provenance += (i ? ";" : "") + std::to_string(seeds[i]);
    result.runs.resize(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        try {
            const auto &job = jobs[static_cast<std::size_t>(i)];
            auto out = execute(job);
            if (out_dir) {
                const auto dir = *out_dir / (std::string(strategy_tag(job.strategy)) + "-seed" +
                                             std::to_string(job.seed));
                write_outputs(job, out, dir);
            }
            result.runs[static_cast<std::size_t>(i)] = out.summary;
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);

    std::map<std::string, std::vector<const RunSummary *>> groups;
    std::vector<std::string> order;
    for (const auto &r : result.runs) {
        const std::string tag(strategy_tag(r.strategy));
        if (!groups.count(tag)) order.push_back(tag);
        groups[tag].push_back(&r);
    }
    for (const auto &tag : order) {
        std::vector<double> clicks, div, an;
        for (const auto *r : groups[tag]) {
            clicks.push_back(static_cast<double>(r->final_clicks));
            div.push_back(r->diversity);
            an.push_back(r->active_creators);
        }
        result.rows.push_back({tag, clicks.size(), mean_se(clicks), mean_se(div), mean_se(an)});
    }
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const CompareRow &a, const CompareRow &b) { return a.clicks.mean > b.clicks.mean; });
    return result;
}

std::string format_summary(const RunSummary &s) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s seed %-6" PRIu64 " clicks %-8" PRIu64 " diversity %.4f  AN %.3f",
                  std::string(strategy_tag(s.strategy)).c_str(), s.seed, s.final_clicks, s.diversity,
                  s.active_creators);
    std::string line = buf;
    if (s.strategy == StrategyKind::Lore && s.train_rounds > 0)
        line += "  (trained " + std::to_string(s.train_rounds) + " rounds, " + std::to_string(s.train_cycles) +
                " cycles" + (s.converged ? ", converged)" : ", hit round cap)");
    return line;
}

std::string format_table(const Comparison &cmp) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-20s %5s  %-22s %-20s %-20s\n", "strategy", "runs", "final clicks",
                  "diversity (bits)", "active creators");
    out << buf;
    for (const auto &r : cmp.rows) {
        const auto cell = [](MeanSe m, int prec) {
            char b[64];
            std::snprintf(b, sizeof b, "%.*f +- %.*f", prec, m.mean, prec, m.se);
            return std::string(b);
        };
        std::snprintf(buf, sizeof buf, "%-20s %5zu  %-22s %-20s %-20s\n", r.strategy.c_str(), r.runs,
                      cell(r.clicks, 1).c_str(), cell(r.diversity, 4).c_str(), cell(r.active_creators, 3).c_str());
        out << buf;
    }
    return out.str();
}

void write_comparison_csv(const Comparison &cmp, const std::filesystem::path &path) {
    auto out = open_out(path);
    out << "# " << cmp.provenance << '\n';
    out << "strategy,runs,clicks_mean,clicks_se,diversity_mean,diversity_se,active_creators_mean,"
           "active_creators_se\n";
    for (const auto &r : cmp.rows)
        out << r.strategy << ',' << r.runs << ',' << num(r.clicks.mean) << ',' << num(r.clicks.se) << ','
            << num(r.diversity.mean) << ',' << num(r.diversity.se) << ',' << num(r.active_creators.mean) << ','
            << num(r.active_creators.se) << '\n';
}

} // namespace lore
