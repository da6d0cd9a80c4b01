#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vixexp/reference.hpp"

#include <cmath>
#include <cstring>

using namespace vixexp;
using oracle::rel_close;

namespace {

const VixWindow month(1.0 / 12.0, 1.0 / 12.0);

MixedModelSpec scenario1(VixWindow w = month) {
    return MixedModelSpec(KernelFamily::Power, 0.1, 1.4, 0.7, 0.3,
                          ForwardVarianceCurve::constant(0.235 * 0.235), w);
}
MixedModelSpec scenario3(VixWindow w = month) {
    return MixedModelSpec(KernelFamily::Exponential, 1.0, 0.5, 6.0, 0.3,
                          ForwardVarianceCurve::constant(0.2 * 0.2), w);
}
MixedModelSpec scenario4(VixWindow w = month) {
    return MixedModelSpec(KernelFamily::Exponential, 1.0, 10.0, 2.0, 0.2,
                          ForwardVarianceCurve::constant(0.2 * 0.2), w);
}

bool identical(const McEstimate& a, const McEstimate& b) {
    return std::memcmp(&a.price, &b.price, sizeof a.price) == 0 &&
           std::memcmp(&a.std_error, &b.std_error, sizeof a.std_error) == 0 &&
           a.samples_used == b.samples_used &&
           std::memcmp(&a.variance_reduction_factor, &b.variance_reduction_factor,
                       sizeof a.variance_reduction_factor) == 0;
}

} // namespace

TEST_CASE("quadrature pricer with k = 0 reproduces the exact lognormal prices") {
    const SingleModel model{Kernel::exponential(1.3, 0.0), ForwardVarianceCurve::constant(0.04),
                            month};
    const double mu = std::log(0.04) - 0.5 * 1.3 * 1.3 * month.maturity;
    const double sigma = 1.3 * std::sqrt(month.maturity);
    for (const Payoff& payoff : {Payoff::future(), Payoff::call(0.2), Payoff::put(0.21)}) {
        const double got = bergomi_quadrature_price(model, payoff);
        const double exact = oracle::lognormal_payoff_expectation(mu, sigma, 0.0, payoff);
        CHECK(rel_close(got, exact, 1e-10));
    }
}

TEST_CASE("quadrature pricer rejects power kernels; MC rejects exponential ones") {
    const SingleModel rough{Kernel::power(1.0, 0.1), ForwardVarianceCurve::constant(0.04), month};
    CHECK_THROWS_AS(bergomi_quadrature_price(rough, Payoff::future()), std::invalid_argument);
    const SingleModel bergomi{Kernel::exponential(2.0, 1.0), ForwardVarianceCurve::constant(0.04),
                              month};
    CHECK_THROWS_AS(rough_mc_price(bergomi, Payoff::future()), std::invalid_argument);
}

TEST_CASE("mixed scenario-3 one-month future matches the published value") {
    const double price = bergomi_quadrature_price(scenario3(), Payoff::future());
    CHECK(std::abs(price - 0.172764) <= 1e-5);
}

TEST_CASE("node doubling leaves the scenario-4 ATM call unchanged to 1e-9") {
    const MixedModelSpec spec = scenario4();
    const double forward = bergomi_quadrature_price(spec, Payoff::future());
    const double base = bergomi_quadrature_price(spec, Payoff::call(forward), QuadConfig{80, 80});
    const double fine = bergomi_quadrature_price(spec, Payoff::call(forward), QuadConfig{160, 160});
    CHECK(rel_close(base, fine, 1e-9));
}

TEST_CASE("H = 1/2 collapses the control variate onto the target") {
    const SingleModel model{Kernel::power(0.9, 0.5), ForwardVarianceCurve::constant(0.04), month};
    McConfig cfg;
    cfg.samples = 20000;
    cfg.seed = 11;
    const McEstimate est = rough_mc_price(model, Payoff::future(), cfg);
    // proxy equals the target pointwise; residual noise comes only from the
    // positive-definiteness jitter
    CHECK(est.std_error <= 1e-8 * est.price);
    const double mu = std::log(0.04) - 0.5 * 0.9 * 0.9 * month.maturity;
    const double sigma = 0.9 * std::sqrt(month.maturity);
    const double exact = oracle::lognormal_payoff_expectation(mu, sigma, 0.0, Payoff::future());
    CHECK(rel_close(est.price, exact, 1e-6));
    CHECK(est.variance_reduction_factor >= 1e3);
}

TEST_CASE("reproducibility: identical inputs give bit-identical estimates") {
    const SingleModel model{Kernel::power(1.0, 0.1), ForwardVarianceCurve::constant(0.0552),
                            month};
    McConfig cfg;
    cfg.samples = 30000;
    cfg.grid_points = 60;
    cfg.seed = 42;
    const McEstimate a = rough_mc_price(model, Payoff::call(0.2), cfg);
    const McEstimate b = rough_mc_price(model, Payoff::call(0.2), cfg);
    CHECK(identical(a, b));

    McConfig serial = cfg;
    serial.parallel = false;
    const McEstimate c = rough_mc_price(model, Payoff::call(0.2), serial);
    CHECK(identical(a, c));

    McConfig other = cfg;
    other.seed = 43;
    const McEstimate d = rough_mc_price(model, Payoff::call(0.2), other);
    CHECK(!identical(a, d));
}

TEST_CASE("rough MC brackets the expansion price within the documented tolerance") {
    const SingleModel model{Kernel::power(1.0, 0.1), ForwardVarianceCurve::constant(0.235 * 0.235),
                            month};
    McConfig cfg;
    cfg.samples = 200000;
    cfg.seed = 4;
    const McEstimate ref = rough_mc_price(model, Payoff::call(0.2), cfg);
    const double expansion = expansion_price(model, Payoff::call(0.2)).price;
    CHECK(std::abs(expansion - ref.price) <= 0.003 * ref.price + 3.0 * ref.std_error);
}

TEST_CASE("mixed scenario-1 CI covers the published futures value") {
    McConfig cfg;
    cfg.samples = 200000;
    cfg.seed = 31;
    const McEstimate est = rough_mc_price(scenario1(), Payoff::future(), cfg);
    CHECK(std::abs(est.price - 0.218650) <= 3.0 * est.std_error + 5e-4);
}

TEST_CASE("control variate does not increase variance (20 seeds)") {
    const SingleModel model{Kernel::power(1.0, 0.1), ForwardVarianceCurve::constant(0.0552),
                            month};
    McConfig cfg;
    cfg.samples = 20000;
    cfg.grid_points = 100;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        cfg.seed = seed;
        const McEstimate est = rough_mc_price(model, Payoff::call(0.2), cfg);
        CHECK(est.variance_reduction_factor >= 0.99);
    }
}

TEST_CASE("weak error in the grid size behaves as O(1/n)") {
    const SingleModel model{Kernel::power(1.0, 0.1), ForwardVarianceCurve::constant(0.0552),
                            month};
    McConfig cfg;
    cfg.samples = 100000;
    cfg.seed = 5;
    const auto price_at = [&](int n) {
        McConfig c = cfg;
        c.grid_points = n;
        return rough_mc_price(model, Payoff::future(), c).price;
    };
    const double p150 = price_at(150), p300 = price_at(300), p600 = price_at(600);
    const double ratio = (p150 - p300) / (p300 - p600);
    CHECK(ratio > 1.2);
    CHECK(ratio < 3.2);
}

TEST_CASE("estimate fields are internally consistent") {
    const SingleModel model{Kernel::power(1.0, 0.2), ForwardVarianceCurve::constant(0.04), month};
    McConfig cfg;
    cfg.samples = 10000;
    cfg.grid_points = 50;
    cfg.seed = 9;
    const McEstimate est = rough_mc_price(model, Payoff::put(0.22), cfg);
    CHECK(est.ci95_halfwidth == doctest::Approx(1.96 * est.std_error).epsilon(1e-15));
    CHECK(est.samples_used == 10000);
    CHECK(est.variance_reduction_factor >= 0.0);
}
