#include "lore/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lore/error.hpp"

namespace lore {

SurrogateMode parse_surrogate(std::string_view tag) {
    if (tag == "standard_ppo") return SurrogateMode::StandardPpo;
    if (tag == "clipped_ratio") return SurrogateMode::ClippedRatio;
    throw ConfigError("unknown surrogate mode: '" + std::string(tag) + "'");
}

std::string_view surrogate_tag(SurrogateMode mode) {
    return mode == SurrogateMode::StandardPpo ? "standard_ppo" : "clipped_ratio";
}

void LearnerHyper::validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("learner.gamma must lie in [0,1]");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("learner.lambda must lie in [0,1]");
    if (!(clip_epsilon > 0.0)) throw ConfigError("learner.clip_epsilon must be positive");
    if (actor_lr < 0.0 || critic_lr < 0.0) throw ConfigError("learner learning rates must be nonnegative");
    if (rounds_per_buffer == 0) throw ConfigError("learner.rounds_per_buffer must be >= 1");
    if (episode_rounds == 0) throw ConfigError("learner.episode_rounds must be >= 1");
    if (convergence_window == 0) throw ConfigError("learner.convergence_window must be >= 1");
    if (!(reward_scale > 0.0)) throw ConfigError("learner.reward_scale must be positive");
}

EncodedState encode(const Observation &obs, std::size_t genres) {
    if (obs.trust.size() != obs.created.size())
        throw ConfigError("observation: trust vector length differs from creator count");
    EncodedState s;
    s.creators = obs.created.size();
    s.genres = genres;
    s.values.assign(s.creators * s.width(), 0.0);
    for (std::size_t c = 0; c < s.creators; ++c) {
        double *row = &s.values[c * s.width()];
        const auto &g = obs.created[c];
        row[g && *g < genres ? *g : genres] = 1.0;
        row[genres + 1] = std::clamp(obs.trust[c], 0.0, 1.0);
    }
    return s;
}

std::vector<std::optional<GenreId>> decode_genres(const EncodedState &state) {
    std::vector<std::optional<GenreId>> out(state.creators);
    for (std::size_t c = 0; c < state.creators; ++c) {
        const double *row = &state.values[c * state.width()];
        for (std::size_t g = 0; g < state.genres; ++g)
            if (row[g] == 1.0) out[c] = static_cast<GenreId>(g);
    }
    return out;
}

LearnerState make_learner(std::size_t creators, std::size_t genres, const LearnerHyper &hyper, Rng &rng) {
    hyper.validate();
    LearnerState s;
    s.creators = creators;
    s.genres = genres;
    const std::size_t inputs = creators * (genres + 2);
    s.policy = Mlp(inputs, hyper.hidden, creators * (genres + 1), rng, hyper.actor_output_scale);
    s.value = Mlp(inputs, hyper.hidden, 1, rng, 1.0);
    s.actor_opt = Adam(s.policy.params.size(), hyper.actor_lr, hyper.max_grad_norm);
    s.critic_opt = Adam(s.value.params.size(), hyper.critic_lr, hyper.max_grad_norm);
    return s;
}

namespace {

std::vector<double> stack(std::span<const EncodedState> states) {
    std::vector<double> x;
    if (states.empty()) return x;
    x.reserve(states.size() * states.front().values.size());
    for (const auto &s : states) x.insert(x.end(), s.values.begin(), s.values.end());
    return x;
}

// Row-wise log-softmax of a batch of logits into probs / log_probs.
ActionDistribution row_softmax(std::span<const double> logits, std::size_t creators, std::size_t choices) {
    ActionDistribution d;
    d.creators = creators;
    d.choices = choices;
    d.probs.resize(creators * choices);
    d.log_probs.resize(creators * choices);
    for (std::size_t c = 0; c < creators; ++c) {
        const double *z = logits.data() + c * choices;
        double top = z[0];
        for (std::size_t j = 1; j < choices; ++j) top = std::max(top, z[j]);
        double total = 0.0;
        for (std::size_t j = 0; j < choices; ++j) total += std::exp(z[j] - top);
        const double log_total = std::log(total) + top;
        for (std::size_t j = 0; j < choices; ++j) {
            d.log_probs[c * choices + j] = z[j] - log_total;
            d.probs[c * choices + j] = std::exp(z[j] - log_total);
        }
    }
    return d;
}

std::vector<EncodedState> states_of(const ReplayBuffer &buffer, bool next) {
    std::vector<EncodedState> out;
    out.reserve(buffer.size());
    for (const auto &t : buffer) out.push_back(next ? t.next_state : t.state);
    return out;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

std::vector<double> joint_log_probs(const std::vector<ActionDistribution> &dists, const ReplayBuffer &buffer) {
    std::vector<double> lp(buffer.size());
    for (std::size_t b = 0; b < buffer.size(); ++b) lp[b] = joint_log_prob(dists[b], buffer[b].action);
    return lp;
}

LossGrad actor_loss_with_old(const Mlp &policy, std::span<const double> old_log_probs, const ReplayBuffer &batch,
                             std::span<const double> advantages, double epsilon, SurrogateMode mode,
                             std::size_t genres, bool with_grad) {
    if (!(epsilon > 0.0)) throw ConfigError("actor_loss: clip epsilon must be positive");
    LossGrad out;
    if (batch.empty()) return out;
    const auto states = states_of(batch, false);
    const auto x = stack(states);
    const std::size_t creators = batch.front().state.creators;
    const std::size_t choices = genres + 1;
    const auto cache = forward(policy, x, batch.size());
    const auto logits = cache.output();
    const std::size_t per = creators * choices;

    std::vector<double> grad_out(with_grad ? batch.size() * per : 0, 0.0);
    double ratio_sum = 0.0;
    std::size_t clipped = 0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const auto dist = row_softmax(logits.subspan(b * per, per), creators, choices);
        const double lp = joint_log_prob(dist, batch[b].action);
        const double ratio = std::exp(lp - old_log_probs[b]);
        const double adv = advantages[b];
        out.loss += surrogate_term(ratio, adv, epsilon, mode);
        ratio_sum += ratio;
        if (ratio < 1.0 - epsilon || ratio > 1.0 + epsilon) ++clipped;
        if (!with_grad) continue;

        const double clipped_ratio = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
        bool active;
        if (mode == SurrogateMode::StandardPpo)
            active = ratio * adv <= clipped_ratio * adv;
        else
            active = ratio <= clipped_ratio;
        if (!active) continue;
        // d(-ratio * A)/d logit = -A * ratio * (onehot - p)
        const double coeff = -adv * ratio;
        for (std::size_t c = 0; c < creators; ++c) {
            const auto a = batch[b].action[c].code();
            for (std::size_t j = 0; j < choices; ++j) {
                const double ind = j == a ? 1.0 : 0.0;
                grad_out[b * per + c * choices + j] = coeff * (ind - dist.probs[c * choices + j]);
            }
        }
    }
    out.mean_ratio = ratio_sum / static_cast<double>(batch.size());
    out.clip_fraction = static_cast<double>(clipped) / static_cast<double>(batch.size());
    if (with_grad) out.grad = backward(policy, cache, grad_out);
    return out;
}

} // namespace

std::vector<ActionDistribution> policy_distributions(const Mlp &policy, std::span<const EncodedState> states,
                                                     std::size_t genres) {
    std::vector<ActionDistribution> out;
    if (states.empty()) return out;
    const std::size_t creators = states.front().creators;
    const std::size_t choices = genres + 1;
    const auto cache = forward(policy, stack(states), states.size());
    const auto logits = cache.output();
    if (!all_finite(logits)) {
        std::ostringstream os;
        os << "actor produced non-finite logits (batch " << states.size() << ", " << logits.size() << " outputs)";
        throw NumericalError(os.str());
    }
    const std::size_t per = creators * choices;
    for (std::size_t b = 0; b < states.size(); ++b)
        out.push_back(row_softmax(logits.subspan(b * per, per), creators, choices));
    return out;
}

ActionDistribution policy_distribution(const Mlp &policy, const EncodedState &state, std::size_t genres) {
    return policy_distributions(policy, std::span(&state, 1), genres).front();
}

double joint_log_prob(const ActionDistribution &dist, const PlatformAction &action) {
    double lp = 0.0;
    for (std::size_t c = 0; c < dist.creators; ++c) lp += dist.log_probs[c * dist.choices + action[c].code()];
    return lp;
}

ActSample act(const Mlp &policy, const EncodedState &state, std::size_t genres, Rng &rng) {
    ActSample out;
    out.distribution = policy_distribution(policy, state, genres);
    const auto &d = out.distribution;
    out.action.resize(d.creators);
    for (std::size_t c = 0; c < d.creators; ++c) {
        const auto row = d.row(c);
        double u = uniform01(rng);
        std::size_t pick = d.choices - 1;
        for (std::size_t j = 0; j < d.choices; ++j) {
            u -= row[j];
            if (u < 0.0) {
                pick = j;
                break;
            }
        }
        // rounding can leave u >= 0; fall back to the last nonzero entry
        if (u >= 0.0)
            while (pick > 0 && row[pick] == 0.0) --pick;
        out.action[c] = Suggestion(static_cast<std::uint32_t>(pick));
    }
    out.log_prob = joint_log_prob(d, out.action);
    return out;
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const double> next_values, const std::vector<bool> &dones, double gamma,
                        double lambda, const std::vector<bool> &cuts) {
    const std::size_t n = rewards.size();
    if (values.size() != n || next_values.size() != n || dones.size() != n || (!cuts.empty() && cuts.size() != n))
        throw ConfigError("gae: input lengths differ");
    std::vector<double> adv(n, 0.0);
    double running = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        const double alive = dones[t] ? 0.0 : 1.0;
        const double carry = (!cuts.empty() && cuts[t]) ? 0.0 : alive;
        const double delta = rewards[t] + gamma * next_values[t] * alive - values[t];
        running = delta + gamma * lambda * carry * running;
        adv[t] = running;
    }
    return adv;
}

double surrogate_term(double ratio, double advantage, double epsilon, SurrogateMode mode) {
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    if (mode == SurrogateMode::StandardPpo) return -std::min(ratio * advantage, clipped * advantage);
    return -std::min(ratio, clipped) * advantage;
}

LossGrad actor_loss(const Mlp &policy, const Mlp &old_policy, const ReplayBuffer &batch,
                    std::span<const double> advantages, double epsilon, SurrogateMode mode, std::size_t genres,
                    bool with_grad) {
    if (advantages.size() != batch.size()) throw ConfigError("actor_loss: advantage count differs from batch");
    const auto states = states_of(batch, false);
    const auto old_lp = joint_log_probs(policy_distributions(old_policy, states, genres), batch);
    return actor_loss_with_old(policy, old_lp, batch, advantages, epsilon, mode, genres, with_grad);
}

std::vector<double> state_values(const Mlp &value, std::span<const EncodedState> states) {
    if (states.empty()) return {};
    const auto cache = forward(value, stack(states), states.size());
    const auto out = cache.output();
    return {out.begin(), out.end()};
}

LossGrad critic_loss(const Mlp &value, const ReplayBuffer &batch, double gamma, double reward_scale, bool with_grad) {
    LossGrad out;
    if (batch.empty()) return out;
    const auto states = states_of(batch, false);
    const auto next_values = state_values(value, states_of(batch, true));
    const auto cache = forward(value, stack(states), states.size());
    const auto v = cache.output();
    std::vector<double> grad_out(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const double bootstrap = batch[b].done ? 0.0 : gamma * next_values[b];
        const double td = reward_scale * batch[b].reward + bootstrap - v[b];
        out.loss += td * td;
        grad_out[b] = -2.0 * td;
    }
    if (with_grad) out.grad = backward(value, cache, grad_out);
    return out;
}

UpdateDiagnostics update(LearnerState &learner, const ReplayBuffer &buffer, const LearnerHyper &hyper) {
    UpdateDiagnostics diag;
    if (buffer.empty()) return diag;
    const std::size_t genres = learner.genres;

    const LearnerState entry = learner;
    const auto states = states_of(buffer, false);
    const auto next_states = states_of(buffer, true);
    const auto old_lp = joint_log_probs(policy_distributions(entry.policy, states, genres), buffer);

    std::vector<double> rewards(buffer.size());
    std::vector<bool> dones(buffer.size()), cuts(buffer.size());
    for (std::size_t t = 0; t < buffer.size(); ++t) {
        rewards[t] = hyper.reward_scale * buffer[t].reward;
        dones[t] = buffer[t].done;
        cuts[t] = buffer[t].episode_end;
    }
    auto advantages = gae(rewards, state_values(entry.value, states), state_values(entry.value, next_states), dones,
                          hyper.gamma, hyper.lambda, cuts);
    if (hyper.normalize_advantages && advantages.size() > 1) {
        double mean = 0.0;
        for (double a : advantages) mean += a;
        mean /= static_cast<double>(advantages.size());
        double var = 0.0;
        for (double a : advantages) var += (a - mean) * (a - mean);
        const double sd = std::sqrt(var / static_cast<double>(advantages.size()));
        for (auto &a : advantages) a = (a - mean) / (sd + 1e-8);
    }

    auto abort = [&](const std::string &why) {
        learner = entry;
        diag.aborted = true;
        diag.message = why;
        return diag;
    };

    for (std::size_t e = 0; e < hyper.epochs; ++e) {
        auto a = actor_loss_with_old(learner.policy, old_lp, buffer, advantages, hyper.clip_epsilon, hyper.mode,
                                     genres, true);
        if (!std::isfinite(a.loss) || !all_finite(a.grad))
            return abort("non-finite actor loss or gradient at epoch " + std::to_string(e));
        learner.actor_opt.step(learner.policy.params, a.grad);

        auto c = critic_loss(learner.value, buffer, hyper.gamma, hyper.reward_scale, true);
        if (!std::isfinite(c.loss) || !all_finite(c.grad))
            return abort("non-finite critic loss or gradient at epoch " + std::to_string(e));
        learner.critic_opt.step(learner.value.params, c.grad);
        diag.epochs_run = e + 1;
    }

    const auto a = actor_loss_with_old(learner.policy, old_lp, buffer, advantages, hyper.clip_epsilon, hyper.mode,
                                       genres, false);
    const auto c = critic_loss(learner.value, buffer, hyper.gamma, hyper.reward_scale, false);
    if (!std::isfinite(a.loss) || !std::isfinite(c.loss)) return abort("non-finite loss after update");
    diag.policy_loss = a.loss;
    diag.critic_loss = c.loss;
    diag.mean_ratio = a.mean_ratio;
    diag.clip_fraction = a.clip_fraction;
    return diag;
}

bool ConvergenceDetector::push(double policy_loss) {
    history_.push_back(std::abs(policy_loss));
    if (history_.size() < window_) return false;
    const double first = history_[history_.size() - window_];
    const double last = history_.back();
    return first - last < tolerance_ * first;
}

TrainResult train(LearnerState &learner, TrustEstimator &trust, const EnvFactory &factory,
                  const LearnerHyper &hyper, Rng &rng) {
    hyper.validate();
    TrainResult result;
    ConvergenceDetector detector(hyper.convergence_window, hyper.convergence_tolerance);

    auto env = factory(0);
    result.episodes = 1;
    std::size_t episode_round = 0;
    const std::size_t genres = env->genres();
    EncodedState state = encode(env->observe(trust.estimates()), genres);

    for (std::size_t cycle = 0; result.rounds < hyper.max_train_rounds; ++cycle) {
        ReplayBuffer buffer;
        double reward_sum = 0.0;
        for (std::size_t r = 0; r < hyper.rounds_per_buffer && result.rounds < hyper.max_train_rounds; ++r) {
            if (episode_round == hyper.episode_rounds) {
                env = factory(result.episodes++);
                episode_round = 0;
                state = encode(env->observe(trust.estimates()), genres);
            }
            ActSample sample;
            try {
                sample = act(learner.policy, state, genres, rng);
            } catch (const NumericalError &err) {
                result.diverged = true;
                result.message = err.what();
                return result;
            }
            const Round round = env->round();
            auto outcome = env->step(sample.action);
            ++result.rounds;
            ++episode_round;
            trust.record(outcome.follows, round);
            trust.advance();
            EncodedState next = encode(env->observe(trust.estimates()), genres);
            reward_sum += outcome.reward;
            buffer.push_back({state, sample.action, sample.log_prob, next, outcome.reward, false,
                              episode_round == hyper.episode_rounds});
            state = std::move(next);
        }
        if (buffer.empty()) break;

        const auto diag = update(learner, buffer, hyper);
        if (diag.aborted) {
            result.diverged = true;
            result.message = diag.message;
            break;
        }
        result.log.push_back({cycle + 1, diag.policy_loss, diag.critic_loss,
                              reward_sum / static_cast<double>(buffer.size()), diag.clip_fraction, diag.mean_ratio,
                              result.rounds});
        const bool flat = detector.push(diag.policy_loss);
        if (flat && cycle + 1 >= hyper.min_cycles) {
            result.converged = true;
            break;
        }
    }
    return result;
}

} // namespace lore
