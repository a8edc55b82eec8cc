#pragma once
#include <cstddef>
#include <span>

// Dense-layer kernels. The default namespace runs the OpenMP variants when the
// library is built with OpenMP; lore::kernels::serial holds the reference
// loops. Every output element is accumulated by a single thread in the same
// order as the reference, so both variants agree bit for bit.
namespace lore::kernels {

/// y[b][o] = bias[o] + sum_i w[o][i] * x[b][i]; w is row-major out x in.
void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, std::size_t batch, std::size_t in, std::size_t out);

/// dx[b][i] = sum_o w[o][i] * dy[b][o]
void dense_backward_input(std::span<const double> w, std::span<const double> dy, std::span<double> dx,
                          std::size_t batch, std::size_t in, std::size_t out);

/// dw[o][i] += sum_b dy[b][o] * x[b][i];  db[o] += sum_b dy[b][o]
void dense_backward_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                           std::span<double> db, std::size_t batch, std::size_t in, std::size_t out);

/// In-place tanh.
void tanh_inplace(std::span<double> v);

/// Number of threads the parallel variants may use (1 without OpenMP).
int max_threads();

namespace serial {

void dense_forward(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
                   std::span<double> y, std::size_t batch, std::size_t in, std::size_t out);
void dense_backward_input(std::span<const double> w, std::span<const double> dy, std::span<double> dx,
                          std::size_t batch, std::size_t in, std::size_t out);
void dense_backward_params(std::span<const double> x, std::span<const double> dy, std::span<double> dw,
                           std::span<double> db, std::size_t batch, std::size_t in, std::size_t out);
void tanh_inplace(std::span<double> v);

} // namespace serial

} // namespace lore::kernels
