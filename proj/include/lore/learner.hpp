#pragma once
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lore/ecosystem.hpp"
#include "lore/network.hpp"
#include "lore/rng.hpp"
#include "lore/trust_estimator.hpp"
#include "lore/types.hpp"

namespace lore {

/// Row-major creators x (genres + 2) matrix: a one-hot block over
/// genres + {no item} followed by the predicted trust.
struct EncodedState {
    std::size_t creators = 0;
    std::size_t genres = 0;
    std::vector<double> values;

    std::size_t width() const { return genres + 2; }
};

EncodedState encode(const Observation &obs, std::size_t genres);
std::vector<std::optional<GenreId>> decode_genres(const EncodedState &state);

/// creators x (genres + 1) independent categorical rows over the suggestion set.
struct ActionDistribution {
    std::size_t creators = 0;
    std::size_t choices = 0;
    std::vector<double> probs;
    std::vector<double> log_probs;

    std::span<const double> row(std::size_t creator) const { return std::span(probs).subspan(creator * choices, choices); }
};

enum class SurrogateMode {
    StandardPpo,  // -min(rho * A, clip(rho) * A)
    ClippedRatio, // -min(rho, clip(rho)) * A, the advantage applied outside the min
};

SurrogateMode parse_surrogate(std::string_view tag);
std::string_view surrogate_tag(SurrogateMode mode);

struct LearnerHyper {
    std::vector<std::size_t> hidden{128, 128};
    double gamma = 0.95;
    double lambda = 0.95;
    double clip_epsilon = 0.2;
    double actor_lr = 3e-4;
    double critic_lr = 1e-3;
    std::size_t rounds_per_buffer = 16; // N
    std::size_t epochs = 10;            // M
    SurrogateMode mode = SurrogateMode::StandardPpo;
    bool normalize_advantages = true;
    double reward_scale = 0.01;
    double max_grad_norm = 0.0;
    double actor_output_scale = 0.01;

    std::size_t max_train_rounds = 3000; // hard cap T
    std::size_t min_cycles = 0;          // convergence rule is ignored before this many cycles
    std::size_t convergence_window = 10;
    double convergence_tolerance = 0.01;
    std::size_t episode_rounds = 100; // training environments are rebuilt after this many rounds

    void validate() const;
};

struct TransitionRecord {
    EncodedState state;
    PlatformAction action;
    double log_prob = 0.0; // joint, under the behavior policy
    EncodedState next_state;
    double reward = 0.0;
    bool done = false;        // terminal: no bootstrap from next_state
    bool episode_end = false; // truncation: bootstrap, but advantages do not flow across
};

using ReplayBuffer = std::vector<TransitionRecord>;

/// Actor maps an encoded state to creators * (genres + 1) logits; critic to one value.
struct LearnerState {
    Mlp policy;
    Mlp value;
    Adam actor_opt;
    Adam critic_opt;
    std::size_t creators = 0;
    std::size_t genres = 0;
};

LearnerState make_learner(std::size_t creators, std::size_t genres, const LearnerHyper &hyper, Rng &rng);

/// Row-wise softmax over the actor's logits for a batch of states.
std::vector<ActionDistribution> policy_distributions(const Mlp &policy, std::span<const EncodedState> states,
                                                     std::size_t genres);
ActionDistribution policy_distribution(const Mlp &policy, const EncodedState &state, std::size_t genres);

double joint_log_prob(const ActionDistribution &dist, const PlatformAction &action);

struct ActSample {
    PlatformAction action;
    double log_prob = 0.0;
    ActionDistribution distribution;
};

/// Samples one suggestion per creator from its row. Throws NumericalError on
/// non-finite network output.
ActSample act(const Mlp &policy, const EncodedState &state, std::size_t genres, Rng &rng);

/// Generalized advantage estimation over a buffer:
///   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
///   A_t = delta_t + gamma * lambda * (1 - done_t) * (1 - cut_t) * A_{t+1}
/// truncated at the buffer end.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const double> next_values, const std::vector<bool> &dones, double gamma,
                        double lambda, const std::vector<bool> &cuts = {});

/// Per-sample surrogate contribution (the negated objective term).
double surrogate_term(double ratio, double advantage, double epsilon, SurrogateMode mode);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad; // empty unless requested
    double mean_ratio = 1.0;
    double clip_fraction = 0.0;
};

/// Clipped surrogate summed over the buffer. Ratios use the joint action
/// probability of `policy` against `old_policy`.
LossGrad actor_loss(const Mlp &policy, const Mlp &old_policy, const ReplayBuffer &batch,
                    std::span<const double> advantages, double epsilon, SurrogateMode mode, std::size_t genres,
                    bool with_grad = true);

/// Sum of squared TD errors; the bootstrap target is held constant when
/// differentiating (semi-gradient).
LossGrad critic_loss(const Mlp &value, const ReplayBuffer &batch, double gamma, double reward_scale = 1.0,
                     bool with_grad = true);

std::vector<double> state_values(const Mlp &value, std::span<const EncodedState> states);

struct UpdateDiagnostics {
    double policy_loss = 0.0;
    double critic_loss = 0.0;
    double mean_ratio = 1.0;
    double clip_fraction = 0.0;
    std::size_t epochs_run = 0;
    bool aborted = false;
    std::string message;
};

/// M epochs of full-batch actor and critic steps on one buffer. The actor
/// snapshot used for ratios is taken once on entry. A non-finite loss or
/// gradient restores the entry parameters and reports `aborted`.
UpdateDiagnostics update(LearnerState &learner, const ReplayBuffer &buffer, const LearnerHyper &hyper);

/// Stops when |loss| fell by less than `tolerance` (relative) across the last
/// `window` values.
class ConvergenceDetector {
public:
    explicit ConvergenceDetector(std::size_t window = 10, double tolerance = 0.01)
        : window_(window), tolerance_(tolerance) {}

    /// Returns true once the rule fires for the pushed sequence.
    bool push(double policy_loss);
    std::size_t size() const { return history_.size(); }

private:
    std::size_t window_;
    double tolerance_;
    std::vector<double> history_;
};

struct EnvStep {
    double reward = 0.0;
    std::vector<FollowObservation> follows;
};

/// What the learner needs from a simulated platform.
class Environment {
public:
    virtual ~Environment() = default;
    virtual std::size_t creators() const = 0;
    virtual std::size_t genres() const = 0;
    virtual Observation observe(std::span<const double> trust_estimates) const = 0;
    virtual EnvStep step(const PlatformAction &action) = 0;
    virtual Round round() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t episode)>;

struct TrainingLogRow {
    std::size_t cycle = 0;
    double policy_loss = 0.0;
    double critic_loss = 0.0;
    double mean_reward = 0.0;
    double clip_fraction = 0.0;
    double mean_ratio = 1.0;
    std::size_t rounds = 0;
};

struct TrainResult {
    std::vector<TrainingLogRow> log;
    std::size_t rounds = 0;
    std::size_t episodes = 0;
    bool converged = false;
    bool diverged = false;
    std::string message;
};

/// Alternates N-round collection (fresh buffer per cycle) and M-epoch updates
/// until the convergence rule or the round cap fires. The trust estimator is
/// updated online every round and supplies the trust part of the state.
TrainResult train(LearnerState &learner, TrustEstimator &trust, const EnvFactory &factory,
                  const LearnerHyper &hyper, Rng &rng);

} // namespace lore
