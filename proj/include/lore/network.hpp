#pragma once
#include <span>
#include <vector>

#include "lore/rng.hpp"

namespace lore {

struct LayerShape {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t weight_offset = 0; // into Mlp::params, row-major out x in
    std::size_t bias_offset = 0;
};

/// Feed-forward network with tanh hidden layers and a linear output layer.
/// All weights and biases live in one flat vector so optimizers and
/// finite-difference checks can treat the parameters uniformly.
class Mlp {
public:
    Mlp() = default;
    /// Weights ~ U(-1/sqrt(in), 1/sqrt(in)); the output layer is additionally
    /// scaled by `output_scale`; biases start at zero.
    Mlp(std::size_t inputs, const std::vector<std::size_t> &hidden, std::size_t outputs, Rng &rng,
        double output_scale = 1.0);

    std::size_t input_size() const { return layers_.empty() ? 0 : layers_.front().in; }
    std::size_t output_size() const { return layers_.empty() ? 0 : layers_.back().out; }
    const std::vector<LayerShape> &layers() const { return layers_; }
    std::vector<std::size_t> hidden_sizes() const;

    std::vector<double> params;

private:
    std::vector<LayerShape> layers_;
};

/// Per-layer activations of one batched forward pass; activations[0] is the
/// input and activations.back() the linear output.
struct ForwardCache {
    std::size_t batch = 0;
    std::vector<std::vector<double>> activations;

    std::span<const double> output() const { return activations.back(); }
};

ForwardCache forward(const Mlp &net, std::span<const double> input, std::size_t batch);

/// Gradient of sum(grad_output * output) with respect to all parameters.
std::vector<double> backward(const Mlp &net, const ForwardCache &cache, std::span<const double> grad_output);

/// Adam with optional global-norm gradient clipping (max_grad_norm <= 0 disables).
class Adam {
public:
    Adam() = default;
    Adam(std::size_t size, double learning_rate, double max_grad_norm = 0.0);

    void step(std::vector<double> &params, std::span<const double> grad);

    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double max_grad_norm = 0.0;

    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t steps = 0;
};

} // namespace lore
