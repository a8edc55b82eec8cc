#include "lore/kernels.hpp"

#include <cmath>

#ifdef LORE_HAVE_OPENMP
#include <omp.h>
#endif

namespace lore::kernels {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;

inline double dot_row(const double *w_row, const double *x_row, double init, std::size_t in) {
    double acc = init;
    for (std::size_t i = 0; i < in; ++i) acc += w_row[i] * x_row[i];
    return acc;
}

inline void backward_input_row(const double *w, const double *dy_row, double *dx_row, std::size_t in,
                               std::size_t out) {
    for (std::size_t i = 0; i < in; ++i) dx_row[i] = 0.0;
    for (std::size_t o = 0; o < out; ++o) {
        const double g = dy_row[o];
        const double *w_row = w + o * in;
        for (std::size_t i = 0; i < in; ++i) dx_row[i] += w_row[i] * g;
    }
}

inline void backward_params_row(const double *x, const double *dy, double *dw_row, double *db, std::size_t o,
                                std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < batch; ++b) {
        const double g = dy[b * out + o];
        db[o] += g;
        const double *x_row = x + b * in;
        for (std::size_t i = 0; i < in; ++i) dw_row[i] += g * x_row[i];
    }
}

} // namespace

namespace serial {

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t o = 0; o < out; ++o)
            y[b * out + o] = dot_row(w.data() + o * in, x.data() + b * in, bias[o], in);
}

void dense_backward_input(std::span<const double> w, std::span<const double> dy, std::span<double> dx,
                          std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t b = 0; b < batch; ++b)
        backward_input_row(w.data(), dy.data() + b * out, dx.data() + b * in, in, out);
}

void dense_backward_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                           std::span<double> db, std::size_t batch, std::size_t in, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o)
        backward_params_row(x.data(), dy.data(), dw.data() + o * in, db.data(), o, batch, in, out);
}

void tanh_inplace(std::span<double> v) {
    for (auto &x : v) x = std::tanh(x);
}

} // namespace serial

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, std::size_t batch, std::size_t in, std::size_t out) {
    const auto cells = static_cast<std::ptrdiff_t>(batch * out);
    [[maybe_unused]] const bool big = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t cell = 0; cell < cells; ++cell) {
        const auto b = static_cast<std::size_t>(cell) / out;
        const auto o = static_cast<std::size_t>(cell) % out;
        y[b * out + o] = dot_row(w.data() + o * in, x.data() + b * in, bias[o], in);
    }
}

void dense_backward_input(std::span<const double> w, std::span<const double> dy, std::span<double> dx,
                          std::size_t batch, std::size_t in, std::size_t out) {
    const auto rows = static_cast<std::ptrdiff_t>(batch);
    [[maybe_unused]] const bool big = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t b = 0; b < rows; ++b)
        backward_input_row(w.data(), dy.data() + b * out, dx.data() + b * in, in, out);
}

void dense_backward_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                           std::span<double> db, std::size_t batch, std::size_t in, std::size_t out) {
    const auto outs = static_cast<std::ptrdiff_t>(out);
    [[maybe_unused]] const bool big = batch * out * in >= kParallelWork;
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t o = 0; o < outs; ++o)
        backward_params_row(x.data(), dy.data(), dw.data() + o * in, db.data(), static_cast<std::size_t>(o), batch,
                            in, out);
}

void tanh_inplace(std::span<double> v) {
    const auto n = static_cast<std::ptrdiff_t>(v.size());
    [[maybe_unused]] const bool big = v.size() >= (1u << 14);
#pragma omp parallel for schedule(static) if (big)
    for (std::ptrdiff_t i = 0; i < n; ++i) v[i] = std::tanh(v[i]);
}

int max_threads() {
#ifdef LORE_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace lore::kernels
