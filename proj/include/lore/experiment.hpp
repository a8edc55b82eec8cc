#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lore/config.hpp"
#include "lore/io.hpp"
#include "lore/learner.hpp"
#include "lore/metrics.hpp"

namespace lore {

/// Adapts an EcosystemState to the learner's Environment interface.
class EcosystemEnv : public Environment {
public:
    explicit EcosystemEnv(EcosystemState state) : state_(std::move(state)) {}

    std::size_t creators() const override { return state_.creators.size(); }
    std::size_t genres() const override { return state_.config.genres; }
    Observation observe(std::span<const double> trust_estimates) const override;
    EnvStep step(const PlatformAction &action) override;
    Round round() const override { return state_.round; }

    const EcosystemState &state() const { return state_; }
    const RoundOutcome &last_outcome() const { return last_; }

private:
    EcosystemState state_;
    RoundOutcome last_;
};

// Seeding: users, creators and bootstrap items depend only on the run seed,
// so training and evaluation face the same population. Dynamics differ:
// evaluation uses mix_seed(seed, 0), training episode e uses mix_seed(seed, 1000 + e).
std::uint64_t evaluation_seed(std::uint64_t seed);
std::uint64_t training_seed(std::uint64_t seed, std::uint64_t episode);

EcosystemState make_world(const RunConfig &config, std::uint64_t dynamics_seed);
EnvFactory training_factory(const RunConfig &config);

/// Trust-estimator settings for a run; decay only applies with dynamic trust.
TrustEstimatorConfig effective_trust_config(const RunConfig &config);

/// Action of a non-learned strategy in the current state.
PlatformAction baseline_action(StrategyKind strategy, const EcosystemState &state);

struct TrainedModel {
    LearnerState learner;
    TrustEstimator trust;
    TrainResult result;
    Rng rng; // training policy stream after the last collected round
};

TrainedModel train_policy(const RunConfig &config);

struct EvalResult {
    EventLog events;
    std::vector<MetricsRow> metrics;
    std::vector<std::uint64_t> genre_counts;
    FollowDataset follows;
    TrustEstimator trust;
    EcosystemState final_state;
};

/// Frozen-policy evaluation for config.eval_rounds rounds on the evaluation
/// environment. `learner` is required for the lore strategy and ignored
/// otherwise. The trust estimator keeps learning online.
EvalResult evaluate(const RunConfig &config, const LearnerState *learner, TrustEstimator trust);

struct RunSummary {
    std::string name;
    StrategyKind strategy = StrategyKind::None;
    std::uint64_t seed = 0;
    std::uint64_t final_clicks = 0;
    double diversity = 0.0; // over items created during evaluation; 0 if none
    double active_creators = 0.0;
    std::size_t train_rounds = 0;
    std::size_t train_cycles = 0;
    bool converged = false;
};

struct RunOutput {
    RunSummary summary;
    EvalResult eval;
    std::optional<TrainedModel> trained;
};

/// Train (lore only) then evaluate; no files are written.
RunOutput execute(const RunConfig &config);

/// One-line provenance tag, e.g. "config_hash=0123abcd...,seed=7".
std::string provenance(const RunConfig &config);

/// Writes metrics.csv, events.jsonl, follows.csv, genres_per_creator.csv,
/// summary.csv and, for lore, training_log.csv and checkpoint.json.
void write_outputs(const RunConfig &config, const RunOutput &output, const std::filesystem::path &dir);

void write_metrics_csv(const RunConfig &config, const std::vector<MetricsRow> &rows, const std::filesystem::path &path);
void write_events_jsonl(const RunConfig &config, const EventLog &events, const std::filesystem::path &path);
void write_training_log(const RunConfig &config, const std::vector<TrainingLogRow> &rows,
                        const std::filesystem::path &path);

RunOutput run_experiment(const RunConfig &config, const std::filesystem::path &dir);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0; // sample standard deviation / sqrt(n); 0 for n = 1
};

MeanSe mean_se(std::span<const double> values);

struct CompareRow {
    std::string strategy;
    std::size_t runs = 0;
    MeanSe clicks;
    MeanSe diversity;
    MeanSe active_creators;
};

struct Comparison {
    std::vector<RunSummary> runs; // config-major, then seed order
    std::vector<CompareRow> rows; // sorted by mean clicks, descending
    std::string provenance;       // config hashes and seeds, ';'-separated
};

/// Runs every (config, seed) pair, in parallel when OpenMP is available.
/// Configs must differ only in strategy (and name). When `out_dir` is set,
/// each run's files go to <out_dir>/<strategy>-seed<S>/.
Comparison compare(const std::vector<RunConfig> &configs, const std::vector<std::uint64_t> &seeds,
                   const std::optional<std::filesystem::path> &out_dir = std::nullopt);

std::string format_summary(const RunSummary &summary);
std::string format_table(const Comparison &comparison);
void write_comparison_csv(const Comparison &comparison, const std::filesystem::path &path);

} // namespace lore
