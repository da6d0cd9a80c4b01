#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vixexp/black_scholes.hpp"

#include <cmath>
#include <random>

using namespace vixexp;
using oracle::rel_close;

TEST_CASE("ATM identity bs_call(1,1,sigma) = 2 Phi(sigma/2) - 1") {
    for (double sigma : {0.05, 0.3, 1.0, 2.5})
        CHECK(rel_close(bs_call(1.0, 1.0, sigma), 2.0 * norm_cdf(0.5 * sigma) - 1.0, 1e-14));
}

TEST_CASE("sigma -> 0 degenerates to intrinsic; Greeks reject sigma = 0") {
    CHECK(bs_call(1.2, 1.0, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(bs_call(0.8, 1.0, 0.0) == 0.0);
    CHECK(bs_call(1.2, 1.0, 1e-10) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK_THROWS_AS(bs_delta(1.2, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bs_gamma(1.2, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bs_speed(1.2, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bs_call(-1.0, 1.0, 0.2), std::domain_error);
}

TEST_CASE("bs_call prices E[(sqrt(lognormal) - k)+]: Monte Carlo oracle") {
    // E[(sqrt(e^{mu + sigma Z}) - kappa)+] = C_BS(e^{mu/2 + sigma^2/8}, kappa, sigma/2)
    const double mu = -2.9, sigma = 0.3, kappa = 0.2;
    const double price = bs_call(std::exp(0.5 * mu + 0.125 * sigma * sigma), kappa, 0.5 * sigma);

    std::mt19937_64 eng(20531);
    const std::int64_t n = 10'000'000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = double(eng() >> 11) * 0x1.0p-53 + 0x1.0p-54;
        const double z = inv_norm_cdf(u);
        const double value = std::max(std::sqrt(std::exp(mu + sigma * z)) - kappa, 0.0);
        sum += value;
        sum_sq += value * value;
    }
    const double mean = sum / double(n);
    const double se = std::sqrt((sum_sq / double(n) - mean * mean) / double(n - 1));
    CHECK(std::abs(price - mean) <= 3.0 * se);
}

TEST_CASE("implied_vol: roundtrip, intrinsic branch, ATM half-forward oracle") {
    CHECK(rel_close(implied_vol(bs_call(1.0, 0.9, 0.25), 1.0, 0.9), 0.25, 1e-10));
    CHECK(implied_vol(0.2, 1.2, 1.0) == 0.0);  // price exactly intrinsic

    // ATM price = forward/2 has sigma = 2 Phi^{-1}(3/4); find that root independently
    double lo = 0.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (2.0 * norm_cdf(0.5 * mid) - 1.0 < 0.5 ? lo : hi) = mid;
    }
    CHECK(rel_close(implied_vol(0.5, 1.0, 1.0), 0.5 * (lo + hi), 1e-10));

    CHECK_THROWS_AS(implied_vol(1.0, 1.0, 0.9), std::domain_error);   // at the forward
    CHECK_THROWS_AS(implied_vol(0.09, 1.0, 0.9), std::domain_error);  // below intrinsic 0.1
}

TEST_CASE("Greek ladder matches centered finite differences at step 1e-5 x") {
    for (double moneyness : {0.5, 0.8, 1.0, 1.25, 2.0}) {
        for (double sigma : {0.05, 0.2, 0.6, 1.5}) {
            const double y = 1.0, x = moneyness * y;
            const double h = 1e-5 * x;
            const double fd_delta = (bs_call(x + h, y, sigma) - bs_call(x - h, y, sigma)) / (2 * h);
            const double fd_gamma = (bs_delta(x + h, y, sigma) - bs_delta(x - h, y, sigma)) / (2 * h);
            const double fd_speed = (bs_gamma(x + h, y, sigma) - bs_gamma(x - h, y, sigma)) / (2 * h);
            CHECK(rel_close(bs_delta(x, y, sigma), fd_delta, 1e-6));
            CHECK(rel_close(bs_gamma(x, y, sigma), fd_gamma, 1e-6));
            CHECK(rel_close(bs_speed(x, y, sigma), fd_speed, 1e-6));
        }
    }
}

TEST_CASE("monotonicity, convexity, and bounds") {
    double prev = 0.0;
    for (double sigma : {0.05, 0.1, 0.2, 0.4, 0.8, 1.6}) {
        const double price = bs_call(1.0, 1.1, sigma);
        CHECK(price > prev);
        prev = price;
    }
    // convex in strike
    for (double y : {0.6, 0.9, 1.0, 1.4}) {
        const double h = 0.01;
        const double second = bs_call(1.0, y - h, 0.3) - 2.0 * bs_call(1.0, y, 0.3) +
                              bs_call(1.0, y + h, 0.3);
        CHECK(second >= -1e-12);
    }
    // implied vol monotone in price
    CHECK(implied_vol(0.10, 1.0, 1.0) < implied_vol(0.2, 1.0, 1.0));
    for (double x : {0.5, 1.0, 2.0})
        for (double sigma : {0.1, 0.9}) {
            const double c = bs_call(x, 1.0, sigma);
            CHECK(c >= std::max(x - 1.0, 0.0));
            CHECK(c <= x);
        }
}

TEST_CASE("inverse normal CDF round trip") {
    for (double u : {1e-12, 1e-6, 0.02, 0.25, 0.5, 0.75, 0.98, 1.0 - 1e-6}) {
        CHECK(rel_close(norm_cdf(inv_norm_cdf(u)), u, 1e-12));
    }
    CHECK_THROWS_AS(inv_norm_cdf(0.0), std::domain_error);
    CHECK_THROWS_AS(inv_norm_cdf(1.0), std::domain_error);
}
