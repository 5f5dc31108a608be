#include <catch2/catch_amalgamated.hpp>

#include "csk/correlation.hpp"
#include "csk/fft.hpp"
#include "csk/rng.hpp"
#include "csk/tensor.hpp"

using namespace csk;

namespace {

Tensor random_tensor(const Shape& shape, Rng& rng) {
    Tensor t = Tensor::zeros(shape);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
    return t;
}

std::size_t rand_size(Rng& rng, std::size_t lo, std::size_t hi) {
    return static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    REQUIRE(a.shape() == b.shape());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("next_fast_size returns smallest 5-smooth bound", "[correlation]") {
    CHECK(detail::next_fast_size(1) == 1);
    CHECK(detail::next_fast_size(17) == 18);
    CHECK(detail::next_fast_size(31) == 32);
    CHECK(detail::next_fast_size(97) == 100);
    for (std::size_t n = 1; n <= 300; ++n) {
        std::size_t f = detail::next_fast_size(n);
        REQUIRE(f >= n);
        std::size_t r = f;
        while (r % 2 == 0) r /= 2;
        while (r % 3 == 0) r /= 3;
        while (r % 5 == 0) r /= 5;
        REQUIRE(r == 1);
        // Smallest: nothing 5-smooth in [n, f).
        for (std::size_t g = n; g < f; ++g) {
            std::size_t q = g;
            while (q % 2 == 0) q /= 2;
            while (q % 3 == 0) q /= 3;
            while (q % 5 == 0) q /= 5;
            REQUIRE(q != 1);
        }
    }
}

TEST_CASE("corr_disp_full matches hand arithmetic in 1D", "[correlation]") {
    const Tensor y = Tensor::vector({1, 2, 3});
    const Tensor k = Tensor::vector({1, 1});
    // d in [-1, 2]: [y0, y0+y1, y1+y2, y2]
    const Tensor disp = corr_disp_full(y, k, CorrMode::Naive);
    CHECK(disp == Tensor::vector({1, 3, 5, 3}));
    CHECK(corr_valid(y, k, CorrMode::Naive) == Tensor::vector({3, 5}));
    CHECK(corr_map(y, k, CorrMode::Naive) == Tensor::vector({3, 5, 3}));
}

TEST_CASE("corr_centered matches classic same-size filtering", "[correlation]") {
    const Tensor y = Tensor::vector({1, 2, 3, 4});
    const Tensor k = Tensor::vector({1, 1, 1});
    CHECK(corr_centered(y, k, CorrMode::Naive) == Tensor::vector({3, 6, 9, 7}));
}

TEST_CASE("conv_map places the kernel corner at each spike", "[correlation]") {
    const Tensor x = Tensor::vector({0, 1, 0, 0});
    const Tensor k = Tensor::vector({1, 2});
    CHECK(conv_map(x, k, CorrMode::Naive) == Tensor::vector({0, 1, 2, 0}));

    // 2D: spike at (1,2), kernel corner lands there; frame crop applies.
    Tensor x2 = Tensor::zeros({3, 4});
    x2(1, 2) = 1.0;
    const Tensor k2 = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    const Tensor out = conv_map(x2, k2, CorrMode::Naive);
    Tensor expect = Tensor::zeros({3, 4});
    expect(1, 2) = 1;
    expect(1, 3) = 2;
    expect(2, 2) = 3;
    expect(2, 3) = 4;
    CHECK(out == expect);
}

TEST_CASE("conv_map truncates at the right and bottom borders", "[correlation]") {
    Tensor x = Tensor::zeros({3});
    x[2] = 1.0;
    const Tensor k = Tensor::vector({5, 7});
    CHECK(conv_map(x, k, CorrMode::Naive) == Tensor::vector({0, 0, 5}));
}

TEST_CASE("corr_lags matches hand arithmetic", "[correlation]") {
    const Tensor r = Tensor::vector({1, 2, 3, 4});
    const Tensor x = Tensor::vector({2, 0, 1, 0});
    // d=0: 2*1 + 1*3 = 5 ; d=1: 2*2 + 1*4 = 8
    CHECK(corr_lags(r, x, {2}, CorrMode::Naive) == Tensor::vector({5, 8}));
}

TEST_CASE("xcorr_full enumerates every lag", "[correlation]") {
    const Tensor a = Tensor::vector({1, 0});
    const Tensor b = Tensor::vector({0, 1});
    CHECK(xcorr_full(a, b, CorrMode::Naive) == Tensor::vector({1, 0, 0}));
}

TEST_CASE("fft and naive paths agree within 1e-9", "[correlation]") {
    Rng rng(424242);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = rng.uniform_int(1, 32);
        const std::size_t p = rng.uniform_int(1, 32);
        const Tensor y = random_tensor({n}, rng);
        const Tensor k = random_tensor({p}, rng);
        const Tensor naive = corr_disp_full(y, k, CorrMode::Naive);
        const Tensor fft = corr_disp_full(y, k, CorrMode::Fft);
        CHECK(max_abs_diff(naive, fft) < 1e-9);
    }
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n0 = rng.uniform_int(1, 16);
        const std::size_t n1 = rng.uniform_int(1, 16);
        const std::size_t p0 = rng.uniform_int(1, 16);
        const std::size_t p1 = rng.uniform_int(1, 16);
        const Tensor y = random_tensor({n0, n1}, rng);
        const Tensor k = random_tensor({p0, p1}, rng);
        const Tensor naive = corr_disp_full(y, k, CorrMode::Naive);
        const Tensor fft = corr_disp_full(y, k, CorrMode::Fft);
        CHECK(max_abs_diff(naive, fft) < 1e-9);
    }
}

TEST_CASE("frequency-domain convolution matches direct on shapes up to 32", "[correlation]") {
    Rng rng(9090);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = rng.uniform_int(1, 32);
        const std::size_t p = rng.uniform_int(1, n);
        const Tensor x = random_tensor({n}, rng);
        const Tensor k = random_tensor({p}, rng);
        CHECK(max_abs_diff(conv_map(x, k, CorrMode::Naive), conv_map(x, k, CorrMode::Fft)) <
              1e-9);
    }
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t n0 = rand_size(rng, 2, 16), n1 = rand_size(rng, 2, 16);
        const Tensor x = random_tensor({n0, n1}, rng);
        const Tensor k = random_tensor({rand_size(rng, 1, n0), rand_size(rng, 1, n1)}, rng);
        CHECK(max_abs_diff(conv_map(x, k, CorrMode::Naive), conv_map(x, k, CorrMode::Fft)) <
              1e-9);
    }
}

TEST_CASE("corr_map is the adjoint of conv_map", "[correlation]") {
    Rng rng(606);
    for (int trial = 0; trial < 20; ++trial) {
        const bool twod = trial % 2 == 1;
        Shape n = twod ? Shape{rand_size(rng, 3, 12), rand_size(rng, 3, 12)}
                       : Shape{rand_size(rng, 3, 24)};
        Shape p(n.size());
        for (std::size_t a = 0; a < n.size(); ++a) p[a] = rand_size(rng, 1, n[a]);
        const Tensor x = random_tensor(n, rng);
        const Tensor r = random_tensor(n, rng);
        const Tensor k = random_tensor(p, rng);
        const double lhs = dot(conv_map(x, k, CorrMode::Naive), r);
        const double rhs = dot(x, corr_map(r, k, CorrMode::Naive));
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-10).margin(1e-10));
    }
}

TEST_CASE("spectrum caching reproduces one-shot results", "[correlation]") {
    Rng rng(11);
    const Tensor y = random_tensor({9, 7}, rng);
    const Tensor k = random_tensor({3, 4}, rng);
    FftCorrPlan plan(y.shape(), k.shape());
    const auto ys = plan.signal_spectrum(y);
    const auto ks = plan.kernel_spectrum(k);
    const Tensor via_plan = plan.correlate(ys, ks);
    const Tensor direct = corr_disp_full(y, k, CorrMode::Fft);
    CHECK(max_abs_diff(via_plan, direct) < 1e-12);

    // Accumulated product of two kernels equals the sum of correlations.
    const Tensor k2 = random_tensor({3, 4}, rng);
    FftCorrPlan::Spectrum acc(ys.size(), detail::Complex{0, 0});
    FftCorrPlan::accumulate_product(acc, ys, ks);
    FftCorrPlan::accumulate_product(acc, ys, plan.kernel_spectrum(k2));
    const Tensor summed = plan.to_disp_array(std::move(acc));
    const Tensor expect =
        add(corr_disp_full(y, k, CorrMode::Naive), corr_disp_full(y, k2, CorrMode::Naive));
    CHECK(max_abs_diff(summed, expect) < 1e-9);
}

TEST_CASE("corr_valid rejects oversized kernels", "[correlation]") {
    CHECK_THROWS_AS(corr_valid(Tensor::vector({1, 2}), Tensor::vector({1, 2, 3})), ShapeError);
    CHECK_THROWS_AS(corr_disp_full(Tensor::zeros({3}), Tensor::zeros({2, 2})), ShapeError);
}
