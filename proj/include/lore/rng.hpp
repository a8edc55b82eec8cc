#pragma once
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace lore {

using Rng = std::mt19937_64;

/// Derives an engine from a run seed and a stream name; distinct names give
/// statistically independent streams.
Rng make_stream(std::uint64_t seed, std::string_view name);

/// Mixes a seed with an integer index (episode, replicate).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index);

/// Stable 64-bit FNV-1a hash, used for stream derivation and config provenance.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 14695981039346656037ull);

double uniform01(Rng &rng);
bool bernoulli(Rng &rng, double p);
double normal(Rng &rng, double mean, double stddev);
std::size_t uniform_index(Rng &rng, std::size_t n);

std::string serialize_rng(const Rng &rng);
Rng deserialize_rng(const std::string &text);

/// One engine per simulation subsystem, so adding draws in one subsystem
/// never shifts the sequence seen by another.
struct RngStreams {
    Rng init;
    Rng creator_activity;
    Rng user_activity;
    Rng creator_decision;
    Rng content;
    Rng click;
    Rng recommender;

    RngStreams() = default;
    explicit RngStreams(std::uint64_t seed);
};

} // namespace lore

namespace lore {

/// Rejection sampling from Normal(mean, stddev) restricted to [lo, hi].
/// Throws ConfigError if lo >= hi, stddev <= 0, or the acceptance
/// probability is below 1e-6.
double sample_truncated_gaussian(double mean, double stddev, double lo, double hi, Rng &rng);

/// Acceptance probability Phi((hi-mean)/sd) - Phi((lo-mean)/sd).
double truncated_gaussian_mass(double mean, double stddev, double lo, double hi);

} // namespace lore
