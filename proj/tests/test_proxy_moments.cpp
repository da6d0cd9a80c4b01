#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "vixexp/proxy.hpp"

#include <cmath>

using namespace vixexp;
using oracle::rel_close;
using oracle::rel_err;

namespace {

const VixWindow month(1.0 / 12.0, 1.0 / 12.0);

SingleModel bergomi(double omega, double k, double xi0 = 0.04, VixWindow w = month) {
    return SingleModel{Kernel::exponential(omega, k), ForwardVarianceCurve::constant(xi0), w};
}

SingleModel rough(double eta, double H, double xi0 = 0.235 * 0.235, VixWindow w = month) {
    return SingleModel{Kernel::power(eta, H), ForwardVarianceCurve::constant(xi0), w};
}

} // namespace

TEST_CASE("constant kernels make the proxy exact and explicit") {
    const double xi0 = 0.04, T = month.maturity;
    for (double vol : {0.5, 2.0}) {
        const ProxyParams pe = proxy_params(bergomi(vol, 0.0, xi0));
        CHECK(rel_close(pe.mu_p, std::log(xi0) - 0.5 * vol * vol * T, 1e-13));
        CHECK(rel_close(pe.sigma_p * pe.sigma_p, vol * vol * T, 1e-13));
        const ProxyParams pp = proxy_params(rough(vol, 0.5, xi0));
        CHECK(rel_close(pp.mu_p, std::log(xi0) - 0.5 * vol * vol * T, 1e-12));
        CHECK(rel_close(pp.sigma_p * pp.sigma_p, vol * vol * T, 1e-12));
    }
}

TEST_CASE("Bergomi closed-form proxy matches the quadrature path") {
    const auto model = bergomi(2.0, 1.0);
    const ProxyParams closed = bergomi_proxy_closed(2.0, 1.0, std::log(0.04), month);
    const ProxyParams quad = proxy_params_quadrature(model);
    CHECK(std::abs(closed.mu_p - quad.mu_p) <= 1e-10);
    CHECK(rel_close(closed.sigma_p * closed.sigma_p, quad.sigma_p * quad.sigma_p, 1e-10));
    const ProxyParams dispatched = proxy_params(model);
    CHECK(dispatched.mu_p == closed.mu_p);
    CHECK(dispatched.sigma_p == closed.sigma_p);
}

TEST_CASE("rough closed-form proxy matches the quadrature path") {
    const auto model = rough(1.0, 0.1);
    const ProxyParams closed = rough_proxy_closed(1.0, 0.1, std::log(0.235 * 0.235), month);
    const ProxyParams quad = proxy_params_quadrature(model);
    CHECK(std::abs(closed.mu_p - quad.mu_p) <= 1e-10);
    CHECK(rel_close(closed.sigma_p * closed.sigma_p, quad.sigma_p * quad.sigma_p, 1e-10));
}

TEST_CASE("Bergomi proxy limits in k and T") {
    // k -> 0 Taylor limit of the closed form
    const ProxyParams tiny = bergomi_proxy_closed(2.0, 1e-9, std::log(0.04), month);
    CHECK(rel_close(tiny.sigma_p * tiny.sigma_p, 4.0 * month.maturity, 1e-6));
    // T -> infinity saturates the first factor
    const VixWindow far(50.0, month.delta);
    const ProxyParams sat = bergomi_proxy_closed(2.0, 1.0, std::log(0.04), far);
    const double d = month.delta;
    const double limit = 4.0 / (2.0 * d * d) * std::pow(-std::expm1(-d), 2);
    CHECK(rel_close(sat.sigma_p * sat.sigma_p, limit, 1e-12));
}

TEST_CASE("rough proxy variance: small-window limit and hypergeometric identity") {
    const double eta = 1.0, H = 0.1, T = 1.0 / 12.0;
    const ProxyParams small = rough_proxy_closed(eta, H, 0.0, VixWindow(T, 1e-6));
    const double limit = eta * eta * std::pow(T, 2.0 * H) / (2.0 * H);
    CHECK(rel_close(small.sigma_p * small.sigma_p, limit, 1e-3));

    // sigma_P^2 rewritten through 2F1 (independent series evaluation)
    const double d = 1.0 / 12.0;
    const double q = H + 0.5, p = 2.0 * H + 2.0;
    const double f21 = oracle::hyp2f1(-H - 0.5, H + 1.5, H + 2.5, -T / d);
    const double bracket = (std::pow(T + d, p) + std::pow(T, p) - std::pow(d, p)) / p -
                           4.0 / (2.0 * H + 3.0) * std::pow(d, q) * std::pow(T, H + 1.5) * f21;
    const double via_2f1 = eta * eta / (d * d * q * q) * bracket;
    const ProxyParams closed = rough_proxy_closed(eta, H, 0.0, VixWindow(T, d));
    CHECK(rel_close(closed.sigma_p * closed.sigma_p, via_2f1, 1e-10));

    // H = 1/2 collapses to eta^2 T
    const ProxyParams flat = rough_proxy_closed(eta, 0.5, 0.0, month);
    CHECK(rel_close(flat.sigma_p * flat.sigma_p, eta * eta * T, 1e-12));
}

TEST_CASE("gamma coefficients vanish exactly for constant kernels") {
    for (const auto& model : {bergomi(2.0, 0.0), rough(1.0, 0.5)}) {
        const GammaCoefficients g = gamma_coefficients(model);
        CHECK(g.gamma1 == 0.0);
        CHECK(g.gamma2 == 0.0);
        CHECK(g.gamma3 == 0.0);
    }
}

TEST_CASE("Bergomi gamma closed forms: cross-check, signs, small-k vanishing") {
    const GammaCoefficients closed = bergomi_gamma_closed(2.0, 1.0, month);
    const GammaCoefficients quad = gamma_coefficients_quadrature(bergomi(2.0, 1.0));
    CHECK(rel_close(closed.gamma1, quad.gamma1, 1e-8));
    CHECK(rel_close(closed.gamma2, quad.gamma2, 1e-8));
    CHECK(rel_close(closed.gamma3, quad.gamma3, 1e-8));

    CHECK(closed.gamma1 > 0.0);
    CHECK(closed.gamma2 < 0.0);
    CHECK(closed.gamma3 > 0.0);

    const GammaCoefficients small = bergomi_gamma_closed(2.0, 1e-6, month);
    CHECK(std::abs(small.gamma1) <= 1e-8);
    CHECK(std::abs(small.gamma2) <= 1e-8);
    CHECK(std::abs(small.gamma3) <= 1e-8);

    CHECK_THROWS_AS(bergomi_gamma_closed(2.0, 0.0, month), std::invalid_argument);
}

TEST_CASE("power-family gammas: cached factorization equals direct quadrature") {
    const auto direct = gamma_coefficients_quadrature(rough(1.4, 0.1));
    const auto cached = gamma_coefficients(rough(1.4, 0.1));
    CHECK(rel_close(direct.gamma1, cached.gamma1, 1e-8));
    CHECK(rel_close(direct.gamma2, cached.gamma2, 1e-8));
    CHECK(rel_close(direct.gamma3, cached.gamma3, 1e-8));

    const GammaCoefficients near_half = gamma_coefficients_quadrature(rough(1.0, 0.5 - 1e-6));
    CHECK(std::abs(near_half.gamma1) <= 1e-8);
    CHECK(std::abs(near_half.gamma2) <= 1e-8);
    CHECK(std::abs(near_half.gamma3) <= 1e-8);
}

TEST_CASE("closed forms agree with quadrature over a parameter grid") {
    for (double omega : {0.5, 2.0, 6.0})
        for (double k : {0.5, 1.0, 5.0, 15.0}) {
            const auto model = bergomi(omega, k);
            const ProxyParams c = bergomi_proxy_closed(omega, k, std::log(0.04), month);
            const ProxyParams q = proxy_params_quadrature(model);
            CHECK(std::abs(c.mu_p - q.mu_p) <= 1e-9);
            CHECK(rel_close(c.sigma_p * c.sigma_p, q.sigma_p * q.sigma_p, 1e-9));
            const GammaCoefficients gc = bergomi_gamma_closed(omega, k, month);
            const GammaCoefficients gq = gamma_coefficients_quadrature(model);
            CHECK(std::abs(gc.gamma1 - gq.gamma1) <=
                  1e-7 * std::max(std::abs(gc.gamma1), 1e-12));
            CHECK(std::abs(gc.gamma2 - gq.gamma2) <=
                  1e-7 * std::max(std::abs(gc.gamma2), 1e-12));
            CHECK(std::abs(gc.gamma3 - gq.gamma3) <=
                  1e-7 * std::max(std::abs(gc.gamma3), 1e-12));
        }
    for (double eta : {0.5, 1.0, 1.5})
        for (double H : {0.05, 0.1, 0.3, 0.7}) {
            const auto model = rough(eta, H);
            const ProxyParams c = rough_proxy_closed(eta, H, std::log(0.235 * 0.235), month);
            const ProxyParams q = proxy_params_quadrature(model);
            CHECK(std::abs(c.mu_p - q.mu_p) <= 1e-9);
            CHECK(rel_close(c.sigma_p * c.sigma_p, q.sigma_p * q.sigma_p, 1e-9));
        }
}

TEST_CASE("vol-of-variance scaling laws") {
    // gamma1(c w) = c^4 A + c^2 B: fit A, B on two levels, predict a third
    const auto g1 = gamma_coefficients(bergomi(1.0, 1.0));
    const auto g2 = gamma_coefficients(bergomi(2.0, 1.0));
    const auto g4 = gamma_coefficients(bergomi(4.0, 1.0));
    const double quartic = (g2.gamma1 - 4.0 * g1.gamma1) / 12.0;
    const double quadratic = g1.gamma1 - quartic;
    CHECK(rel_close(g4.gamma1, 256.0 * quartic + 16.0 * quadratic, 1e-9));
    CHECK(rel_close(g2.gamma2, 16.0 * g1.gamma2, 1e-12));
    CHECK(rel_close(g2.gamma3, 16.0 * g1.gamma3, 1e-12));

    const auto r1 = gamma_coefficients(rough(1.0, 0.1));
    const auto r2 = gamma_coefficients(rough(2.0, 0.1));
    const auto r3 = gamma_coefficients(rough(3.0, 0.1));
    const double pq = (r2.gamma1 - 4.0 * r1.gamma1) / 12.0;
    const double pb = r1.gamma1 - pq;
    CHECK(rel_close(r3.gamma1, 81.0 * pq + 9.0 * pb, 1e-9));
    CHECK(rel_close(r2.gamma2, 16.0 * r1.gamma2, 1e-12));
    CHECK(rel_close(r2.gamma3, 16.0 * r1.gamma3, 1e-12));

    // sigma_P^2 scales by c^2
    const auto p1 = proxy_params(bergomi(1.0, 1.0));
    const auto p2 = proxy_params(bergomi(2.0, 1.0));
    CHECK(rel_close(p2.sigma_p * p2.sigma_p, 4.0 * p1.sigma_p * p1.sigma_p, 1e-12));
}

TEST_CASE("gamma1 and gamma3 are non-negative") {
    for (double k : {0.3, 2.0, 10.0}) {
        const auto g = gamma_coefficients(bergomi(1.5, k));
        CHECK(g.gamma1 >= 0.0);
        CHECK(g.gamma3 >= 0.0);
    }
    for (double H : {0.05, 0.2, 0.45, 0.8}) {
        const auto g = gamma_coefficients(rough(1.0, H));
        CHECK(g.gamma1 >= -1e-15);
        CHECK(g.gamma3 >= -1e-15);
    }
}

TEST_CASE("assumption-4 norms: constant kernel zeros and Bergomi asymptotics") {
    const auto zero = assumption4_norms(bergomi(2.0, 0.0), 2.0);
    CHECK(zero.gamma_norm == 0.0);
    CHECK(zero.lambda_norm == 0.0);

    // small-window asymptotics at p = 2: (1+p)^{1/p} = sqrt(3), (1+2p)^{1/p} = sqrt(5)
    const double omega = 2.0, k = 1.0, T = 1.0 / 12.0, d = 1e-3;
    const auto norms = assumption4_norms(bergomi(omega, k, 0.04, VixWindow(T, d)), 2.0);
    const double e1 = -std::expm1(-2.0 * k * T);
    const double gamma_limit = omega * omega * e1 / (2.0 * std::sqrt(3.0));
    const double lambda_limit = omega * omega * k * e1 / (8.0 * std::sqrt(5.0));
    CHECK(rel_close(norms.gamma_norm / d, gamma_limit, 0.02));
    CHECK(rel_close(norms.lambda_norm / (d * d), lambda_limit, 0.02));
}

TEST_CASE("rough lambda norm scales like delta^{2H}") {
    const double H = 0.1, T = 1.0 / 12.0;
    const auto coarse = assumption4_norms(rough(1.0, H, 0.04, VixWindow(T, 1e-2)), 2.0);
    const auto fine = assumption4_norms(rough(1.0, H, 0.04, VixWindow(T, 1e-3)), 2.0);
    const double slope =
        std::log(coarse.lambda_norm / fine.lambda_norm) / std::log(1e-2 / 1e-3);
    CHECK(std::abs(slope - 2.0 * H) <= 0.05);
}

TEST_CASE("f_diff: positivity, asymptotic ratio, and brute-force oracle") {
    for (double H : {0.1, 0.3, 0.7})
        for (double p : {1.0, 2.0}) CHECK(fdiff_constant(H, p) > 0.0);

    // Lambda / (eta^2 f_diff delta^{2H}) -> 1
    const double H = 0.1, T = 1.0 / 12.0, p = 2.0;
    const double f = fdiff_constant(H, p);
    const auto norms = assumption4_norms(rough(1.0, H, 0.04, VixWindow(T, 1e-3)), p);
    const double ratio = norms.lambda_norm / (f * std::pow(1e-3, 2.0 * H));
    CHECK(std::abs(ratio - 1.0) <= 0.02);

    // independent nested adaptive quadrature at (H, p) = (0.3, 1)
    const double Ho = 0.3, q = Ho + 0.5;
    const auto g = [&](double s, double u) {
        return std::pow(1.0 + s, q) - std::pow(s, q) - q * std::pow(u + s, Ho - 0.5);
    };
    const auto inner = [&](double u) {
        double acc = oracle::adaptive_quadrature([&](double s) { return g(s, u) * g(s, u); },
                                                 0.0, 1.0, 1e-11);
        double lo = 1.0;
        while (lo < 3e4) {
            acc += oracle::adaptive_quadrature([&](double s) { return g(s, u) * g(s, u); }, lo,
                                               10.0 * lo, 1e-11);
            lo *= 10.0;
        }
        return acc;
    };
    const double outer = oracle::adaptive_quadrature(inner, 0.0, 1.0, 1e-9);
    const double expected = outer / (q * q);
    CHECK(rel_close(fdiff_constant(Ho, 1.0), expected, 1e-6));
}

TEST_CASE("gamma coefficients on a non-constant curve still integrate consistently") {
    const double T = month.maturity, d = month.delta;
    const ForwardVarianceCurve curve({T + 0.5 * d, 10.0}, {0.04, 0.09});
    const SingleModel model{Kernel::exponential(2.0, 1.0), curve, month};
    const auto coarse = gamma_coefficients_quadrature(model, QuadSettings{64, 32, 1e-9, 1});
    const auto fine = gamma_coefficients_quadrature(model, QuadSettings{192, 96, 1e-9, 1});
    CHECK(rel_close(coarse.gamma1, fine.gamma1, 1e-7));
    CHECK(rel_close(coarse.gamma2, fine.gamma2, 1e-7));
    CHECK(rel_close(coarse.gamma3, fine.gamma3, 1e-7));
    CHECK(coarse.gamma1 >= 0.0);
    CHECK(coarse.gamma3 >= 0.0);
}
