#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "lore/ecosystem.hpp"

namespace lore {

using EventLog = std::vector<RoundOutcome>;

/// Prefix sums of per-round rewards.
std::vector<std::uint64_t> cumulative_clicks(const EventLog &log);

/// Shannon entropy in bits of the normalized counts (0 log 0 = 0).
/// Throws std::domain_error when every count is zero.
double diversity(std::span<const std::uint64_t> genre_counts);

/// Mean over rounds of the number of creators that created in that round.
double active_creators(const EventLog &log);

/// Distinct genres per creator, given each creator's list of created genres.
std::vector<std::size_t> genres_per_creator(const std::vector<std::vector<GenreId>> &created);

/// Genres each creator produced during the logged rounds.
std::vector<std::vector<GenreId>> created_genres(const EventLog &log, std::size_t creators);

struct MetricsRow {
    Round round = 0;
    std::uint64_t reward = 0;
    std::uint64_t cumulative_clicks = 0;
    double diversity_so_far = 0.0; // 0 until the first item is created
    std::size_t active_creators = 0;
    double mean_trust_estimate = 0.0;
    double follow_rate = 0.0; // followed / non-null suggestions delivered; 0 if none
};

/// Incrementally builds metrics rows from round outcomes.
class MetricsTracker {
public:
    explicit MetricsTracker(std::size_t genres) : genre_counts_(genres, 0) {}

    MetricsRow add(const RoundOutcome &outcome, std::span<const double> trust_estimates);

    const std::vector<MetricsRow> &rows() const { return rows_; }
    const std::vector<std::uint64_t> &genre_counts() const { return genre_counts_; }

private:
    std::vector<std::uint64_t> genre_counts_;
    std::vector<MetricsRow> rows_;
    std::uint64_t cumulative_ = 0;
};

} // namespace lore
