#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "lore/kernels.hpp"
#include "lore/rng.hpp"

using namespace lore;

namespace {

std::vector<double> random_vec(std::size_t n, Rng &rng) {
    std::vector<double> v(n);
    for (auto &x : v) x = normal(rng, 0.0, 1.0);
    return v;
}

} // namespace

// Shapes straddle the size threshold below which the parallel variants run serially.
TEST_CASE("parallel kernels agree bit for bit with the serial reference") {
    Rng rng = make_stream(1, "kernels");
    struct Shape {
        std::size_t batch, in, out;
    };
    for (const Shape s : {Shape{1, 3, 2}, Shape{16, 70, 64}, Shape{16, 128, 128}, Shape{64, 700, 128}, Shape{33, 257, 129}}) {
        const auto w = random_vec(s.in * s.out, rng), b = random_vec(s.out, rng);
        const auto x = random_vec(s.batch * s.in, rng), dy = random_vec(s.batch * s.out, rng);

        std::vector<double> y1(s.batch * s.out), y2(s.batch * s.out);
        kernels::dense_forward(w, b, x, y1, s.batch, s.in, s.out);
        kernels::serial::dense_forward(w, b, x, y2, s.batch, s.in, s.out);
        CHECK(y1 == y2);

        std::vector<double> dx1(s.batch * s.in), dx2(s.batch * s.in);
        kernels::dense_backward_input(w, dy, dx1, s.batch, s.in, s.out);
        kernels::serial::dense_backward_input(w, dy, dx2, s.batch, s.in, s.out);
        CHECK(dx1 == dx2);

        auto dw1 = random_vec(s.in * s.out, rng);
        auto dw2 = dw1;
        auto db1 = random_vec(s.out, rng);
        auto db2 = db1;
        kernels::dense_backward_params(x, dy, dw1, db1, s.batch, s.in, s.out);
        kernels::serial::dense_backward_params(x, dy, dw2, db2, s.batch, s.in, s.out);
        CHECK(dw1 == dw2);
        CHECK(db1 == db2);

        auto t1 = y1, t2 = y1;
        kernels::tanh_inplace(t1);
        kernels::serial::tanh_inplace(t2);
        CHECK(t1 == t2);
    }
    CHECK(kernels::max_threads() >= 1);
}

TEST_CASE("serial kernels against explicit sums") {
    const std::vector<double> w{1, 2, 3, 4, 5, 6}; // 2 x 3
    const std::vector<double> b{0.5, -1};
    const std::vector<double> x{1, 0, -1, 2, 1, 0}; // batch 2 x 3
    std::vector<double> y(4);
    kernels::serial::dense_forward(w, b, x, y, 2, 3, 2);
    CHECK(y == std::vector<double>{0.5 + 1 - 3, -1 + 4 - 6, 0.5 + 2 + 2, -1 + 8 + 5});

    const std::vector<double> dy{1, -1, 2, 0};
    std::vector<double> dx(6);
    kernels::serial::dense_backward_input(w, dy, dx, 2, 3, 2);
    CHECK(dx == std::vector<double>{1 - 4, 2 - 5, 3 - 6, 2, 4, 6});

    std::vector<double> dw(6, 0.0), db(2, 0.0);
    kernels::serial::dense_backward_params(x, dy, dw, db, 2, 3, 2);
    CHECK(dw == std::vector<double>{1 + 4, 0 + 2, -1 + 0, -1, 0, 1});
    CHECK(db == std::vector<double>{3, -1});
}
