#include "lore/network.hpp"

#include <cmath>

#include "lore/error.hpp"
#include "lore/kernels.hpp"

namespace lore {

Mlp::Mlp(std::size_t inputs, const std::vector<std::size_t> &hidden, std::size_t outputs, Rng &rng,
         double output_scale) {
    std::vector<std::size_t> widths{inputs};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(outputs);

    std::size_t offset = 0;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        LayerShape shape{widths[l], widths[l + 1], offset, offset + widths[l] * widths[l + 1]};
        offset = shape.bias_offset + shape.out;
        layers_.push_back(shape);
    }
    params.assign(offset, 0.0);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto &shape = layers_[l];
        const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in));
        const double scale = l + 1 == layers_.size() ? output_scale : 1.0;
        for (std::size_t i = 0; i < shape.in * shape.out; ++i)
            params[shape.weight_offset + i] = scale * bound * (2.0 * uniform01(rng) - 1.0);
    }
}

std::vector<std::size_t> Mlp::hidden_sizes() const {
    std::vector<std::size_t> sizes;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) sizes.push_back(layers_[l].out);
    return sizes;
}

ForwardCache forward(const Mlp &net, std::span<const double> input, std::size_t batch) {
    if (input.size() != batch * net.input_size())
        throw ConfigError("forward: input size " + std::to_string(input.size()) + " does not match batch x " +
                          std::to_string(net.input_size()));
    ForwardCache cache;
    cache.batch = batch;
    cache.activations.emplace_back(input.begin(), input.end());
    const auto &layers = net.layers();
    const std::span<const double> p = net.params;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto &s = layers[l];
        std::vector<double> y(batch * s.out);
        kernels::dense_forward(p.subspan(s.weight_offset, s.in * s.out), p.subspan(s.bias_offset, s.out),
                               cache.activations.back(), y, batch, s.in, s.out);
        if (l + 1 < layers.size()) kernels::tanh_inplace(y);
        cache.activations.push_back(std::move(y));
    }
    return cache;
}

std::vector<double> backward(const Mlp &net, const ForwardCache &cache, std::span<const double> grad_output) {
    const auto &layers = net.layers();
    const std::span<const double> p = net.params;
    std::vector<double> grad(net.params.size(), 0.0);
    std::vector<double> delta(grad_output.begin(), grad_output.end());
    const std::size_t batch = cache.batch;
    for (std::size_t l = layers.size(); l-- > 0;) {
        const auto &s = layers[l];
        std::span<double> g = grad;
        kernels::dense_backward_params(cache.activations[l], delta, g.subspan(s.weight_offset, s.in * s.out),
                                       g.subspan(s.bias_offset, s.out), batch, s.in, s.out);
        if (l == 0) break;
        std::vector<double> upstream(batch * s.in);
        kernels::dense_backward_input(p.subspan(s.weight_offset, s.in * s.out), delta, upstream, batch, s.in, s.out);
        // through tanh: d/dz tanh(z) = 1 - tanh(z)^2
        const auto &h = cache.activations[l];
        for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] *= 1.0 - h[i] * h[i];
        delta = std::move(upstream);
    }
    return grad;
}

Adam::Adam(std::size_t size, double lr, double clip)
    : learning_rate(lr), max_grad_norm(clip), first_moment(size, 0.0), second_moment(size, 0.0) {}

void Adam::step(std::vector<double> &params, std::span<const double> grad) {
    if (grad.size() != params.size() || first_moment.size() != params.size())
        throw ConfigError("adam: parameter/gradient size mismatch");
    double scale = 1.0;
    if (max_grad_norm > 0.0) {
        double norm2 = 0.0;
        for (double g : grad) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > max_grad_norm) scale = max_grad_norm / norm;
    }
    ++steps;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(steps));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(steps));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grad[i] * scale;
        first_moment[i] = beta1 * first_moment[i] + (1.0 - beta1) * g;
        second_moment[i] = beta2 * second_moment[i] + (1.0 - beta2) * g * g;
        const double m_hat = first_moment[i] / c1;
        const double v_hat = second_moment[i] / c2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
    }
}

} // namespace lore
