#pragma once
#include <cstdint>
#include <optional>
#include <vector>

namespace lore {

using GenreId = std::uint32_t;
using CreatorId = std::uint32_t;
using UserId = std::uint32_t;
using ItemId = std::uint32_t;
using Round = std::int64_t;

/// Element of the platform's suggestion set: 0 is "no suggestion", i >= 1
/// means "produce genre i-1".
class Suggestion {
public:
    constexpr Suggestion() = default;
    constexpr explicit Suggestion(std::uint32_t code) : code_(code) {}

    static constexpr Suggestion none() { return Suggestion{0}; }
    static constexpr Suggestion genre(GenreId g) { return Suggestion{g + 1}; }

    constexpr std::uint32_t code() const { return code_; }
    constexpr bool is_none() const { return code_ == 0; }
    constexpr GenreId genre() const { return code_ - 1; }

    friend constexpr bool operator==(Suggestion, Suggestion) = default;

private:
    std::uint32_t code_ = 0;
};

/// One suggestion per creator; departed creators keep their slot.
using PlatformAction = std::vector<Suggestion>;

struct Item {
    ItemId id = 0;
    CreatorId creator = 0;
    GenreId genre = 0;
    Round round_created = 0; // -1 for bootstrap history items
    std::uint64_t total_clicks = 0;
    std::uint64_t impressions = 0;
    double quality = 0.0;
};

struct ClickRecord {
    ItemId item = 0;
    UserId user = 0;
    Round round = 0;
};

/// Sparse form of the binary click matrix: at most one record per (item, user, round).
struct ClickLog {
    std::vector<ClickRecord> records;
    std::vector<std::uint64_t> per_round_totals;
    std::vector<std::uint64_t> genre_totals; // cumulative clicks per genre since round 0

    std::uint64_t total() const { return records.size(); }
};

enum class FallbackModel { RandomHistory, MostHistoryClick, Cfd, SimuLine };

struct HistoryEntry {
    ItemId item = 0;
    GenreId genre = 0;
    std::uint64_t clicks = 0;
};

struct CfdState {
    std::vector<double> genre_logits;
    double learning_rate = 0.1;
};

struct SimuLineState {
    std::vector<double> recent_clicks;
    double smoothing = 1.0;
};

struct CreatorRecord {
    CreatorId id = 0;
    double trust_true = 0.5;
    double activity_prob = 1.0;
    std::vector<HistoryEntry> history;
    std::uint32_t zero_click_streak = 0;
    bool alive = true;
    FallbackModel fallback = FallbackModel::RandomHistory;
    CfdState cfd;
    SimuLineState simuline;

    std::optional<GenreId> last_created;    // genre created in the last finished round
    std::vector<double> last_round_feedback; // per-genre clicks on own items, last round
    std::uint64_t clicks_prev_round = 0;
    std::uint64_t clicks_this_round = 0;
};

struct UserRecord {
    UserId id = 0;
    std::vector<double> genre_affinity;
    double activity_prob = 0.8;
};

/// MDP state before encoding: genre created per creator (nullopt = no item)
/// and the platform's predicted trust per creator.
struct Observation {
    std::vector<std::optional<GenreId>> created;
    std::vector<double> trust;
};

} // namespace lore
