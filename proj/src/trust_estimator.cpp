#include "lore/trust_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "lore/audience.hpp"
#include "lore/error.hpp"

namespace lore {

double predict(const TrustParams &params, CreatorId creator) {
    if (creator >= params.logits.size()) return 0.5;
    return logistic(params.logits[creator]);
}

namespace {

struct Stats {
    std::vector<double> weight;
    std::vector<double> follows;
};

Stats sufficient_stats(const FollowDataset &data, std::size_t creators, double half_life, Round now) {
    Stats s{std::vector<double>(creators, 0.0), std::vector<double>(creators, 0.0)};
    for (const auto &r : data.records) {
        const double w = half_life > 0.0 ? std::exp2(-static_cast<double>(now - r.round) / half_life) : 1.0;
        s.weight[r.creator] += w;
        if (r.followed) s.follows[r.creator] += w;
    }
    return s;
}

std::size_t creator_span(const TrustParams &params, const FollowDataset &data) {
    std::size_t n = params.logits.size();
    for (const auto &r : data.records) n = std::max<std::size_t>(n, r.creator + 1);
    return n;
}

// log(logistic(z)) and log(1 - logistic(z)) without cancellation
double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

} // namespace

double trust_loss(const TrustParams &params, const FollowDataset &data, double half_life, Round now) {
    const std::size_t n = creator_span(params, data);
    const auto s = sufficient_stats(data, n, half_life, now);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.weight[i] <= 0.0) continue;
        const double z = i < params.logits.size() ? params.logits[i] : 0.0;
        const double frac = s.follows[i] / s.weight[i];
        loss -= frac * log_sigmoid(z) + (1.0 - frac) * log_sigmoid(-z);
    }
    return loss;
}

std::vector<double> trust_gradient(const TrustParams &params, const FollowDataset &data, double half_life, Round now) {
    const std::size_t n = creator_span(params, data);
    const auto s = sufficient_stats(data, n, half_life, now);
    std::vector<double> grad(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (s.weight[i] <= 0.0) continue;
        const double z = i < params.logits.size() ? params.logits[i] : 0.0;
        grad[i] = logistic(z) - s.follows[i] / s.weight[i];
    }
    return grad;
}

TrustParams fit(const FollowDataset &data, TrustParams params, std::size_t epochs, double learning_rate,
                double half_life, Round now) {
    const std::size_t n = creator_span(params, data);
    params.logits.resize(n, 0.0);
    const auto s = sufficient_stats(data, n, half_life, now);
    for (std::size_t e = 0; e < epochs; ++e) {
        for (std::size_t i = 0; i < n; ++i) {
            if (s.weight[i] <= 0.0) continue;
            params.logits[i] -= learning_rate * (logistic(params.logits[i]) - s.follows[i] / s.weight[i]);
        }
    }
    return params;
}

TrustEstimator::TrustEstimator(std::size_t creators, TrustEstimatorConfig config)
    : config_(config), weight_(creators, 0.0), follows_(creators, 0.0) {
    params_.logits.assign(creators, 0.0);
}

void TrustEstimator::record(std::span<const FollowObservation> follows, Round round) {
    for (const auto &f : follows) {
        if (f.creator >= weight_.size()) continue;
        dataset_.records.push_back({f.creator, round, f.followed});
        weight_[f.creator] += 1.0;
        if (f.followed) follows_[f.creator] += 1.0;
    }
}

void TrustEstimator::advance() {
    for (std::size_t step = 0; step < config_.steps_per_round; ++step) {
        for (std::size_t i = 0; i < weight_.size(); ++i) {
            if (weight_[i] <= 0.0) continue;
            params_.logits[i] -= config_.learning_rate * (logistic(params_.logits[i]) - follows_[i] / weight_[i]);
        }
    }
    if (config_.half_life > 0.0) {
        const double decay = std::exp2(-1.0 / config_.half_life);
        for (std::size_t i = 0; i < weight_.size(); ++i) {
            weight_[i] *= decay;
            follows_[i] *= decay;
        }
    }
}

void TrustEstimator::restore(TrustParams params, std::vector<double> weights, std::vector<double> follow_mass) {
    if (weights.size() != params.logits.size() || follow_mass.size() != params.logits.size())
        throw ConfigError("trust estimator blocks have inconsistent sizes");
    params_ = std::move(params);
    weight_ = std::move(weights);
    follows_ = std::move(follow_mass);
}

std::vector<double> TrustEstimator::estimates() const {
    std::vector<double> out(params_.logits.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = logistic(params_.logits[i]);
    return out;
}

void save_follow_csv(const FollowDataset &data, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write follow dataset: " + path.string());
    out << "creator_id,round,followed\n";
    for (const auto &r : data.records) out << r.creator << ',' << r.round << ',' << (r.followed ? 1 : 0) << '\n';
}

FollowDataset load_follow_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open follow dataset: " + path.string());
    FollowDataset data;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ','))
            throw ConfigError("malformed follow dataset row: " + line);
        data.records.push_back({static_cast<CreatorId>(std::stoul(a)), std::stoll(b), c == "1"});
    }
    return data;
}

} // namespace lore
