#pragma once
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lore/rng.hpp"
#include "lore/types.hpp"

namespace lore {

struct CreatorDecision {
    GenreId genre = 0;
    bool followed = false;
};

/// How trust reacts to a round's click delta.
enum class TrustUpdateRule {
    ClickDelta,   // only rounds where the creator followed a suggestion
    AnyCreation,  // every creation round, followed or not
};

struct CreatorModelConfig {
    std::size_t genres = 0;
    double cfd_learning_rate = 0.1;
    double cfd_history_weight = 2.0; // initial logit mass per bootstrap history item
    double simuline_smoothing = 1.0;
    bool dynamic_trust = false;
    TrustUpdateRule trust_rule = TrustUpdateRule::ClickDelta;
};

FallbackModel parse_fallback(std::string_view tag);
std::string_view fallback_tag(FallbackModel model);

std::vector<double> softmax(std::span<const double> logits);

/// Index sampled from an unnormalized nonnegative weight vector; uniform if all weights vanish.
std::size_t sample_weighted(std::span<const double> weights, Rng &rng);

/// Trust-gated decision: a non-null suggestion is followed with probability
/// trust_true; otherwise the creator's fallback model picks the genre.
/// Consumes pending CFD feedback.
CreatorDecision decide(CreatorRecord &creator, Suggestion suggestion, std::size_t genres, Rng &rng);

GenreId fallback_random_history(const CreatorRecord &creator, std::size_t genres, Rng &rng);

/// Argmax of summed clicks per genre over the creator's own items; lowest
/// genre index on ties and for an empty history.
GenreId fallback_most_history_click(const CreatorRecord &creator);

/// logits += learning_rate * feedback, then sample from softmax(logits).
std::pair<GenreId, CfdState> fallback_cfd(const CfdState &state, std::span<const double> feedback, Rng &rng);
CfdState cfd_absorb(const CfdState &state, std::span<const double> feedback);

std::vector<double> simuline_probabilities(const SimuLineState &state);
GenreId fallback_simuline(const SimuLineState &state, Rng &rng);

/// Click-delta trust update, clamped to [0,1]. Unchanged when the creator did
/// not follow (ClickDelta rule) or when r_prev == 0.
double update_trust(double trust, bool followed, double r_prev, double r_curr,
                    TrustUpdateRule rule = TrustUpdateRule::ClickDelta);

/// Initializes fallback state (CFD logits, SimuLine counters) from the bootstrap history.
void init_fallback_state(CreatorRecord &creator, const CreatorModelConfig &config);

} // namespace lore
