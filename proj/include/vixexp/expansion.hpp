#pragma once

#include "vixexp/kernel.hpp"
#include "vixexp/proxy.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace vixexp {

/// Payoff on the VIX level: futures sqrt(x), call (sqrt(x)-k)_+, put (k-sqrt(x))_+,
/// acting on x = VIX^2.
enum class PayoffKind { Future, Call, Put };

struct Payoff {
    PayoffKind kind;
    double strike = 0.0;

    static Payoff future() { return Payoff{PayoffKind::Future, 0.0}; }
    static Payoff call(double strike);
    static Payoff put(double strike);
};

/// P0..P3: the proxy price and its log-shift derivatives, all in closed form.
struct Corollary6Terms {
    std::array<double, 4> p;
};

struct ExpansionResult {
    double price;                        // proxy_price + sum_i gamma_i * P_i
    double proxy_price;                  // P0
    std::array<double, 3> order_terms;   // P1, P2, P3
    std::array<double, 3> corrections;   // gamma_i * P_i
    ProxyParams proxy;
    GammaCoefficients gammas;
};

Corollary6Terms corollary6_terms(const ProxyParams& proxy, const Payoff& payoff);

ExpansionResult expansion_price(const SingleModel& model, const Payoff& payoff);

struct SmilePoint {
    double strike;
    std::optional<double> iv;  // empty when the price fell outside the vol bounds
};

/// Implied-vol smile of the expansion prices, using the expansion futures as
/// the forward. Strikes outside the no-arbitrage band are flagged, not fatal.
std::vector<SmilePoint> expansion_smile(const SingleModel& model,
                                        std::span<const double> strikes);

} // namespace vixexp
