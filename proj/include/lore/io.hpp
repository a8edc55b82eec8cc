#pragma once
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "lore/config.hpp"
#include "lore/ecosystem.hpp"
#include "lore/learner.hpp"
#include "lore/trust_estimator.hpp"

namespace lore {

/// One event-log line: {round, reward, created, departures, clicks}.
nlohmann::json round_event_json(const RoundOutcome &outcome);

inline constexpr int kSnapshotVersion = 1;
inline constexpr int kCheckpointVersion = 1;

/// Versioned document holding the complete world, including RNG streams.
nlohmann::json snapshot_json(const EcosystemState &state);
EcosystemState snapshot_from_json(const nlohmann::json &doc);

void save_snapshot(const EcosystemState &state, const std::filesystem::path &path,
                   const nlohmann::json &provenance = {});
EcosystemState load_snapshot(const std::filesystem::path &path);

nlohmann::json mlp_json(const Mlp &net);
Mlp mlp_from_json(const nlohmann::json &doc);

/// Everything needed to resume: run config, network and optimizer blocks,
/// trust-estimator state, and the training policy RNG.
struct Checkpoint {
    RunConfig config;
    LearnerState learner;
    TrustEstimator trust;
    Rng rng;
};

nlohmann::json checkpoint_json(const Checkpoint &checkpoint, const nlohmann::json &provenance = {});
Checkpoint checkpoint_from_json(const nlohmann::json &doc);
void save_checkpoint(const Checkpoint &checkpoint, const std::filesystem::path &path,
                     const nlohmann::json &provenance = {});
Checkpoint load_checkpoint(const std::filesystem::path &path);

} // namespace lore
