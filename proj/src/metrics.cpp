#include "lore/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lore {

std::vector<std::uint64_t> cumulative_clicks(const EventLog &log) {
    std::vector<std::uint64_t> out;
    out.reserve(log.size());
    std::uint64_t total = 0;
    for (const auto &r : log) {
        total += r.reward;
        out.push_back(total);
    }
    return out;
}

double diversity(std::span<const std::uint64_t> genre_counts) {
    std::uint64_t total = 0;
    for (auto c : genre_counts) total += c;
    if (total == 0) throw std::domain_error("diversity is undefined for all-zero genre counts");
    double h = 0.0;
    for (auto c : genre_counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

double active_creators(const EventLog &log) {
    if (log.empty()) return 0.0;
    double total = 0.0;
    for (const auto &r : log) total += static_cast<double>(r.created.size());
    return total / static_cast<double>(log.size());
}

std::vector<std::size_t> genres_per_creator(const std::vector<std::vector<GenreId>> &created) {
    std::vector<std::size_t> out;
    out.reserve(created.size());
    for (auto genres : created) {
        std::sort(genres.begin(), genres.end());
        out.push_back(static_cast<std::size_t>(std::unique(genres.begin(), genres.end()) - genres.begin()));
    }
    return out;
}

std::vector<std::vector<GenreId>> created_genres(const EventLog &log, std::size_t creators) {
    std::vector<std::vector<GenreId>> out(creators);
    for (const auto &r : log)
        for (const auto &c : r.created)
            if (c.creator < creators) out[c.creator].push_back(c.genre);
    return out;
}

MetricsRow MetricsTracker::add(const RoundOutcome &outcome, std::span<const double> trust_estimates) {
    MetricsRow row;
    row.round = outcome.round;
    row.reward = outcome.reward;
    cumulative_ += outcome.reward;
    row.cumulative_clicks = cumulative_;
    for (const auto &c : outcome.created)
        if (c.genre < genre_counts_.size()) ++genre_counts_[c.genre];
    const bool any = std::any_of(genre_counts_.begin(), genre_counts_.end(), [](auto c) { return c > 0; });
    row.diversity_so_far = any ? diversity(genre_counts_) : 0.0;
    row.active_creators = outcome.created.size();
    if (!trust_estimates.empty()) {
        double s = 0.0;
        for (double t : trust_estimates) s += t;
        row.mean_trust_estimate = s / static_cast<double>(trust_estimates.size());
    }
    if (!outcome.follows.empty()) {
        std::size_t followed = 0;
        for (const auto &f : outcome.follows) followed += f.followed ? 1 : 0;
        row.follow_rate = static_cast<double>(followed) / static_cast<double>(outcome.follows.size());
    }
    rows_.push_back(row);
    return row;
}

} // namespace lore
