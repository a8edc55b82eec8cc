// Serial reference vs OpenMP dense kernels on policy-network sized batches.
// Run with OMP_NUM_THREADS set; both variants must agree bit for bit.
#include <benchmark/benchmark.h>

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "lore/kernels.hpp"
#include "lore/rng.hpp"

namespace {

struct Problem {
    std::size_t batch, in, out;
    std::vector<double> w, bias, x, dy, y, dx, dw, db;

    Problem(std::size_t b, std::size_t i, std::size_t o)
        : batch(b), in(i), out(o), w(o * i), bias(o), x(b * i), dy(b * o), y(b * o), dx(b * i), dw(o * i), db(o) {
        lore::Rng rng = lore::make_stream(7, "bench");
        for (auto *v : {&w, &bias, &x, &dy})
            for (auto &e : *v) e = lore::normal(rng, 0.0, 1.0);
    }
};

// batch = rollout length, in = hidden width, out = creators * (genres + 1)
Problem make(const benchmark::State &state) {
    return {static_cast<std::size_t>(state.range(0)), 64, static_cast<std::size_t>(state.range(1))};
}

template <bool Parallel>
void forward(benchmark::State &state) {
    auto p = make(state);
    for (auto _ : state) {
        if constexpr (Parallel)
            lore::kernels::dense_forward(p.w, p.bias, p.x, p.y, p.batch, p.in, p.out);
        else
            lore::kernels::serial::dense_forward(p.w, p.bias, p.x, p.y, p.batch, p.in, p.out);
        benchmark::DoNotOptimize(p.y.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.batch * p.in * p.out));
}

template <bool Parallel>
void backward(benchmark::State &state) {
    auto p = make(state);
    for (auto _ : state) {
        if constexpr (Parallel) {
            lore::kernels::dense_backward_input(p.w, p.dy, p.dx, p.batch, p.in, p.out);
            lore::kernels::dense_backward_params(p.x, p.dy, p.dw, p.db, p.batch, p.in, p.out);
        } else {
            lore::kernels::serial::dense_backward_input(p.w, p.dy, p.dx, p.batch, p.in, p.out);
            lore::kernels::serial::dense_backward_params(p.x, p.dy, p.dw, p.db, p.batch, p.in, p.out);
        }
        benchmark::DoNotOptimize(p.dx.data());
        benchmark::DoNotOptimize(p.dw.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * p.batch * p.in * p.out));
}

void shapes(benchmark::internal::Benchmark *b) {
    for (long batch : {16, 256, 2048})
        for (long out : {150, 750}) b->Args({batch, out});
}

BENCHMARK(forward<false>)->Name("dense_forward/serial")->Apply(shapes);
BENCHMARK(forward<true>)->Name("dense_forward/openmp")->Apply(shapes);
BENCHMARK(backward<false>)->Name("dense_backward/serial")->Apply(shapes);
BENCHMARK(backward<true>)->Name("dense_backward/openmp")->Apply(shapes);

bool variants_agree() {
    Problem a(2048, 64, 750), b(2048, 64, 750);
    lore::kernels::dense_forward(a.w, a.bias, a.x, a.y, a.batch, a.in, a.out);
    lore::kernels::serial::dense_forward(b.w, b.bias, b.x, b.y, b.batch, b.in, b.out);
    lore::kernels::dense_backward_params(a.x, a.dy, a.dw, a.db, a.batch, a.in, a.out);
    lore::kernels::serial::dense_backward_params(b.x, b.dy, b.dw, b.db, b.batch, b.in, b.out);
    return a.y == b.y && a.dw == b.dw && a.db == b.db;
}

} // namespace

int main(int argc, char **argv) {
    if (!variants_agree()) {
        std::fprintf(stderr, "bench_kernels: serial and OpenMP kernels disagree\n");
        return EXIT_FAILURE;
    }
    std::printf("threads available to OpenMP kernels: %d\n", lore::kernels::max_threads());
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return EXIT_FAILURE;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return EXIT_SUCCESS;
}
