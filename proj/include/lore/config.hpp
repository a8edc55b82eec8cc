#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lore/ecosystem.hpp"
#include "lore/learner.hpp"
#include "lore/signaling.hpp"
#include "lore/trust_estimator.hpp"

namespace lore {

struct RunConfig {
    std::string name = "custom";
    std::uint64_t seed = 1;
    StrategyKind strategy = StrategyKind::None;
    EcosystemConfig ecosystem;
    std::string population_csv; // optional user table replacing the generator
    LearnerHyper learner;
    TrustEstimatorConfig trust_estimator{20, 1.0, 20.0}; // half-life applies only with dynamic trust
    std::size_t eval_rounds = 100;
    std::string output_dir = "out";
    bool write_checkpoint = true;
};

/// Parses a config document. Missing keys keep their defaults; unknown keys
/// and out-of-range values raise ConfigError naming the offending path.
RunConfig config_from_json(const nlohmann::json &doc);
nlohmann::json config_to_json(const RunConfig &config);

RunConfig load_config(const std::filesystem::path &path);
void save_config(const RunConfig &config, const std::filesystem::path &path);

/// FNV-1a of the canonical serialization (provenance tag for outputs).
std::uint64_t config_hash(const RunConfig &config);
std::string hex64(std::uint64_t v);

void validate(const RunConfig &config);

/// Built-in scenarios: "steering-demo", "skewed-audience", "dynamic-trust"
/// (optionally suffixed with the trust mean, e.g. "dynamic-trust-0.6"),
/// "steering-cfd", "steering-simuline", and "tiny".
RunConfig preset(std::string_view name);
std::vector<std::string> preset_names();

} // namespace lore
