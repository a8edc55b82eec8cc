#pragma once
// Helpers shared by the unit and acceptance suites: random learner
// instances, central finite differences and brute-force reference values.
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lore/learner.hpp"
#include "lore/trust_estimator.hpp"

namespace lore::testing {

inline EncodedState random_state(std::size_t creators, std::size_t genres, Rng &rng) {
    Observation obs;
    for (std::size_t c = 0; c < creators; ++c) {
        const auto g = uniform_index(rng, genres + 1);
        obs.created.push_back(g == genres ? std::nullopt : std::optional<GenreId>(static_cast<GenreId>(g)));
        obs.trust.push_back(uniform01(rng));
    }
    return encode(obs, genres);
}

inline ReplayBuffer random_buffer(std::size_t creators, std::size_t genres, std::size_t n, Rng &rng) {
    ReplayBuffer buf;
    for (std::size_t t = 0; t < n; ++t) {
        TransitionRecord r;
        r.state = random_state(creators, genres, rng);
        r.next_state = random_state(creators, genres, rng);
        for (std::size_t c = 0; c < creators; ++c)
            r.action.push_back(Suggestion(static_cast<std::uint32_t>(uniform_index(rng, genres + 1))));
        r.reward = static_cast<double>(uniform_index(rng, 10));
        r.done = bernoulli(rng, 0.2);
        buf.push_back(std::move(r));
    }
    return buf;
}

/// Central differences of f at x, step h.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double> &)> &f,
                                            std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Largest elementwise |a - n| / max(|a|, |n|, floor).
inline double max_relative_error(const std::vector<double> &analytic, const std::vector<double> &numeric,
                                 double floor = 1e-5) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
    }
    return worst;
}

/// A_t = sum_{l>=0} (gamma*lambda)^l delta_{t+l}, evaluated term by term.
inline std::vector<double> brute_force_gae(const std::vector<double> &r, const std::vector<double> &v,
                                           const std::vector<double> &nv, const std::vector<bool> &done,
                                           double gamma, double lambda) {
    const std::size_t n = r.size();
    std::vector<double> delta(n), adv(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) delta[t] = r[t] + gamma * nv[t] * (done[t] ? 0.0 : 1.0) - v[t];
    for (std::size_t t = 0; t < n; ++t) {
        double w = 1.0;
        for (std::size_t l = t; l < n; ++l) {
            adv[t] += w * delta[l];
            if (done[l]) break;
            w *= gamma * lambda;
        }
    }
    return adv;
}

/// Truncated discounted return plus bootstrap from the last next-value,
/// minus the baseline: the lambda = 1 oracle.
inline std::vector<double> discounted_return_minus_baseline(const std::vector<double> &r, const std::vector<double> &v,
                                                            const std::vector<double> &nv,
                                                            const std::vector<bool> &done, double gamma) {
    const std::size_t n = r.size();
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        double ret = 0.0, w = 1.0;
        std::size_t l = t;
        for (; l < n; ++l) {
            ret += w * r[l];
            if (done[l]) break;
            w *= gamma;
        }
        if (l == n) ret += w * nv[n - 1];
        out[t] = ret - v[t];
    }
    return out;
}

} // namespace lore::testing
