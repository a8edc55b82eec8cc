#pragma once
#include <span>
#include <string_view>

#include "lore/types.hpp"

namespace lore {

/// Non-learned information-revelation strategies plus the learned one.
enum class StrategyKind { None, MostClick, MostHistoryClick, Lore };

StrategyKind parse_strategy(std::string_view tag);
std::string_view strategy_tag(StrategyKind kind);

/// Reveals nothing: every creator receives "no suggestion".
PlatformAction no_signal(std::size_t creators);

/// Every creator is pointed at the genre with the most cumulative clicks.
/// Ties go to the lowest genre; no clicks at all means no suggestion.
PlatformAction most_click(std::span<const std::uint64_t> genre_clicks, std::size_t creators);

/// Per creator, the genre with the most clicks among its own items; creators
/// with an empty history get no suggestion.
PlatformAction most_history_click(std::span<const CreatorRecord> creators);

bool action_in_range(const PlatformAction &action, std::size_t genres);

} // namespace lore
