#include "vixexp/expansion.hpp"

#include "vixexp/black_scholes.hpp"

#include <cmath>
#include <stdexcept>

namespace vixexp {

Payoff Payoff::call(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("Payoff: strike must be > 0");
    return Payoff{PayoffKind::Call, strike};
}

Payoff Payoff::put(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("Payoff: strike must be > 0");
    return Payoff{PayoffKind::Put, strike};
}

namespace {

Corollary6Terms call_terms(const ProxyParams& proxy, double strike) {
    const double mu = proxy.mu_p, s = proxy.sigma_p;
    const double fwd = std::exp(0.5 * mu + 0.125 * s * s);  // E[VIX proxy]
    const double half_s = 0.5 * s;
    const double p0 = bs_call(fwd, strike, half_s);
    const double p1 = 0.5 * fwd * bs_delta(fwd, strike, half_s);
    const double p2 = 0.5 * p1 + 0.25 * fwd * fwd * bs_gamma(fwd, strike, half_s);
    const double p3 =
        -0.5 * p1 + 1.5 * p2 + 0.125 * fwd * fwd * fwd * bs_speed(fwd, strike, half_s);
    return Corollary6Terms{{p0, p1, p2, p3}};
}

Corollary6Terms future_terms(const ProxyParams& proxy) {
    const double fwd = std::exp(0.5 * proxy.mu_p + 0.125 * proxy.sigma_p * proxy.sigma_p);
    return Corollary6Terms{{fwd, 0.5 * fwd, 0.25 * fwd, 0.125 * fwd}};
}

} // namespace

Corollary6Terms corollary6_terms(const ProxyParams& proxy, const Payoff& payoff) {
    if (!(proxy.sigma_p > 0.0))
        throw std::domain_error("corollary6_terms: requires sigma_p > 0");
    switch (payoff.kind) {
        case PayoffKind::Future:
            return future_terms(proxy);
        case PayoffKind::Call:
            return call_terms(proxy, payoff.strike);
        case PayoffKind::Put: {
            const Corollary6Terms call = call_terms(proxy, payoff.strike);
            const Corollary6Terms fut = future_terms(proxy);
            Corollary6Terms put;
            put.p[0] = call.p[0] - fut.p[0] + payoff.strike;
            for (int i = 1; i < 4; ++i) put.p[i] = call.p[i] - fut.p[i];
            return put;
        }
    }
    throw std::logic_error("corollary6_terms: unknown payoff");
}

ExpansionResult expansion_price(const SingleModel& model, const Payoff& payoff) {
    const ProxyParams proxy = proxy_params(model);
    const GammaCoefficients gammas = gamma_coefficients(model);
    const Corollary6Terms terms = corollary6_terms(proxy, payoff);

    ExpansionResult result;
    result.proxy = proxy;
    result.gammas = gammas;
    result.proxy_price = terms.p[0];
    result.order_terms = {terms.p[1], terms.p[2], terms.p[3]};
    result.corrections = {gammas.gamma1 * terms.p[1], gammas.gamma2 * terms.p[2],
                          gammas.gamma3 * terms.p[3]};
    result.price = result.proxy_price + result.corrections[0] + result.corrections[1] +
                   result.corrections[2];
    return result;
}

std::vector<SmilePoint> expansion_smile(const SingleModel& model,
                                        std::span<const double> strikes) {
    const ProxyParams proxy = proxy_params(model);
    const GammaCoefficients gammas = gamma_coefficients(model);
    const Corollary6Terms fut = corollary6_terms(proxy, Payoff::future());
    const double forward = fut.p[0] + gammas.gamma1 * fut.p[1] + gammas.gamma2 * fut.p[2] +
                           gammas.gamma3 * fut.p[3];

    std::vector<SmilePoint> smile(strikes.size());
    #pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(strikes.size()); ++i) {
        const double strike = strikes[std::size_t(i)];
        SmilePoint point{strike, std::nullopt};
        try {
            const Corollary6Terms call = corollary6_terms(proxy, Payoff::call(strike));
            const double price = call.p[0] + gammas.gamma1 * call.p[1] +
                                 gammas.gamma2 * call.p[2] + gammas.gamma3 * call.p[3];
            point.iv = implied_vol(price, forward, strike);
        } catch (const std::domain_error&) {
            // price outside the no-arbitrage band at this strike; leave iv empty
        }
        smile[std::size_t(i)] = point;
    }
    return smile;
}

} // namespace vixexp
