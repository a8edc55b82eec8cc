#include "lore/signaling.hpp"

#include <algorithm>
#include <string>

#include "lore/error.hpp"

namespace lore {

StrategyKind parse_strategy(std::string_view tag) {
    if (tag == "none") return StrategyKind::None;
    if (tag == "most_click") return StrategyKind::MostClick;
    if (tag == "most_history_click") return StrategyKind::MostHistoryClick;
    if (tag == "lore") return StrategyKind::Lore;
    throw ConfigError("unknown strategy: '" + std::string(tag) + "'");
}

std::string_view strategy_tag(StrategyKind kind) {
    switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::MostClick: return "most_click";
    case StrategyKind::MostHistoryClick: return "most_history_click";
    case StrategyKind::Lore: return "lore";
    }
    return "none";
}

PlatformAction no_signal(std::size_t creators) { return PlatformAction(creators, Suggestion::none()); }

PlatformAction most_click(std::span<const std::uint64_t> genre_clicks, std::size_t creators) {
    auto top = std::max_element(genre_clicks.begin(), genre_clicks.end());
    if (top == genre_clicks.end() || *top == 0) return no_signal(creators);
    const auto genre = static_cast<GenreId>(top - genre_clicks.begin());
    return PlatformAction(creators, Suggestion::genre(genre));
}

PlatformAction most_history_click(std::span<const CreatorRecord> creators) {
    PlatformAction action(creators.size(), Suggestion::none());
    for (std::size_t c = 0; c < creators.size(); ++c) {
        const auto &history = creators[c].history;
        if (history.empty()) continue;
        // sums indexed by genre; -1 marks genres absent from the history
        GenreId top_genre = 0;
        for (const auto &h : history) top_genre = std::max(top_genre, h.genre);
        std::vector<std::int64_t> sums(top_genre + 1, -1);
        for (const auto &h : history) sums[h.genre] = std::max<std::int64_t>(sums[h.genre], 0) + static_cast<std::int64_t>(h.clicks);
        const auto best = static_cast<GenreId>(std::max_element(sums.begin(), sums.end()) - sums.begin());
        action[c] = Suggestion::genre(best);
    }
    return action;
}

bool action_in_range(const PlatformAction &action, std::size_t genres) {
    return std::all_of(action.begin(), action.end(), [genres](Suggestion s) { return s.code() <= genres; });
}

} // namespace lore
