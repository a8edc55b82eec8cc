#include "lore/rng.hpp"

#include <sstream>

namespace lore {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over the combined value
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Rng make_stream(std::uint64_t seed, std::string_view name) {
    const std::uint64_t tag = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    return Rng(seq);
}

double uniform01(Rng &rng) {
    // 53 random mantissa bits, result in [0, 1)
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool bernoulli(Rng &rng, double p) { return uniform01(rng) < p; }

double normal(Rng &rng, double mean, double stddev) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(rng);
}

std::size_t uniform_index(Rng &rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> dist(0, n - 1);
    return dist(rng);
}

std::string serialize_rng(const Rng &rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng deserialize_rng(const std::string &text) {
    Rng rng;
    std::istringstream is(text);
    is >> rng;
    return rng;
}

RngStreams::RngStreams(std::uint64_t seed)
    : init(make_stream(seed, "init")),
      creator_activity(make_stream(seed, "creator-activity")),
      user_activity(make_stream(seed, "user-activity")),
      creator_decision(make_stream(seed, "creator-decision")),
      content(make_stream(seed, "content")),
      click(make_stream(seed, "click")),
      recommender(make_stream(seed, "recommender")) {}

} // namespace lore

#include <cmath>

#include "lore/error.hpp"

namespace lore {

double truncated_gaussian_mass(double mean, double stddev, double lo, double hi) {
    auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - mean) / (stddev * std::sqrt(2.0))); };
    return cdf(hi) - cdf(lo);
}

double sample_truncated_gaussian(double mean, double stddev, double lo, double hi, Rng &rng) {
    if (!(lo < hi)) throw ConfigError("truncated gaussian: lower bound must be below upper bound");
    if (!(stddev > 0.0)) throw ConfigError("truncated gaussian: stddev must be positive");
    if (truncated_gaussian_mass(mean, stddev, lo, hi) < 1e-6)
        throw ConfigError("truncated gaussian: acceptance probability below 1e-6");
    for (;;) {
        const double x = normal(rng, mean, stddev);
        if (x >= lo && x <= hi) return x;
    }
}

} // namespace lore
