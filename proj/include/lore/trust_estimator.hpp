#pragma once
#include <filesystem>
#include <span>
#include <vector>

#include "lore/ecosystem.hpp"
#include "lore/types.hpp"

namespace lore {

struct FollowRecord {
    CreatorId creator = 0;
    Round round = 0;
    bool followed = false;
};

/// Follow / not-follow events for delivered non-null suggestions.
struct FollowDataset {
    std::vector<FollowRecord> records;
};

/// One free logit per creator; the estimate is logistic(logit), so a zero
/// logit is the 0.5 prior.
struct TrustParams {
    std::vector<double> logits;
};

double predict(const TrustParams &params, CreatorId creator);

/// Per-creator normalized, optionally age-decayed binary cross-entropy:
///   L = -sum_i (1/W_i) sum_{r in i} w_r [y_r log p_i + (1-y_r) log(1-p_i)]
/// with w_r = 0.5^((now - round_r) / half_life), or 1 when half_life <= 0.
/// Creators without records contribute nothing.
double trust_loss(const TrustParams &params, const FollowDataset &data, double half_life = 0.0, Round now = 0);
std::vector<double> trust_gradient(const TrustParams &params, const FollowDataset &data, double half_life = 0.0,
                                   Round now = 0);

/// Full-batch gradient descent on trust_loss. Parameters are resized to
/// cover every creator id in the dataset.
TrustParams fit(const FollowDataset &data, TrustParams params, std::size_t epochs, double learning_rate,
                double half_life = 0.0, Round now = 0);

struct TrustEstimatorConfig {
    std::size_t steps_per_round = 20;
    double learning_rate = 1.0;
    double half_life = 0.0; // rounds; 0 disables decay
};

/// Online estimator used inside the platform loop: records follow events and
/// takes a few gradient steps every round on sufficient statistics of the
/// (decayed) dataset.
class TrustEstimator {
public:
    TrustEstimator() = default;
    TrustEstimator(std::size_t creators, TrustEstimatorConfig config);

    void record(std::span<const FollowObservation> follows, Round round);
    /// Applies one round of decay and the configured gradient steps.
    void advance();

    std::vector<double> estimates() const;
    const FollowDataset &dataset() const { return dataset_; }
    const TrustParams &params() const { return params_; }
    const TrustEstimatorConfig &config() const { return config_; }
    TrustParams &mutable_params() { return params_; }

    /// Per-creator (decayed) observation weight W_i and follow mass K_i.
    const std::vector<double> &weights() const { return weight_; }
    const std::vector<double> &follow_mass() const { return follows_; }
    /// Reinstates a saved estimator; the raw record list is not restored.
    void restore(TrustParams params, std::vector<double> weights, std::vector<double> follow_mass);

private:
    TrustEstimatorConfig config_;
    TrustParams params_;
    FollowDataset dataset_;
    std::vector<double> weight_;  // W_i
    std::vector<double> follows_; // K_i
};

void save_follow_csv(const FollowDataset &data, const std::filesystem::path &path);
FollowDataset load_follow_csv(const std::filesystem::path &path);

} // namespace lore
