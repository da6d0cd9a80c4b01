#include "vixexp/mixed.hpp"

#include "vixexp/black_scholes.hpp"
#include "vixexp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace vixexp {

MixedPayoff MixedPayoff::call(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("MixedPayoff: strike must be > 0");
    return MixedPayoff{MixedPayoffKind::Call, strike};
}

MixedPayoff MixedPayoff::put(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("MixedPayoff: strike must be > 0");
    return MixedPayoff{MixedPayoffKind::Put, strike};
}

MixedPayoff MixedPayoff::square_call(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("MixedPayoff: strike must be > 0");
    return MixedPayoff{MixedPayoffKind::SquareCall, strike};
}

MixedPayoff MixedPayoff::square_put(double strike) {
    if (!(strike > 0.0)) throw std::invalid_argument("MixedPayoff: strike must be > 0");
    return MixedPayoff{MixedPayoffKind::SquarePut, strike};
}

MixedPayoff MixedPayoff::from(const Payoff& payoff) {
    switch (payoff.kind) {
        case PayoffKind::Future: return future();
        case PayoffKind::Call: return call(payoff.strike);
        case PayoffKind::Put: return put(payoff.strike);
    }
    throw std::logic_error("MixedPayoff::from: unknown payoff");
}

MixedModelSpec::MixedModelSpec(KernelFamily family_, double shape_, double vol1_,
                               double vol2_, double lambda_, ForwardVarianceCurve curve_,
                               VixWindow window_)
    : family(family_), shape(shape_), vol1(vol1_), vol2(vol2_), lambda(lambda_),
      curve(std::move(curve_)), window(window_) {
    if (family == KernelFamily::Exponential) {
        if (!(shape >= 0.0)) throw std::invalid_argument("MixedModelSpec: k must be >= 0");
    } else {
        if (!(shape > 0.0) || !(shape < 1.0))
            throw std::invalid_argument("MixedModelSpec: H must be in (0,1)");
    }
    if (!(vol1 >= 0.0) || !(vol2 >= 0.0))
        throw std::invalid_argument("MixedModelSpec: vols must be >= 0");
    if (!(lambda >= 0.0) || !(lambda <= 1.0))
        throw std::invalid_argument("MixedModelSpec: lambda must be in [0,1]");
    if (lambda > 0.0 && vol1 == 0.0 && lambda < 1.0 && vol2 == 0.0)
        throw std::invalid_argument("MixedModelSpec: both components degenerate");
    if (!component_active(1) && !component_active(2))
        throw std::invalid_argument("MixedModelSpec: no active stochastic component");
}

Kernel MixedModelSpec::component_kernel(int j) const {
    const double v = component_vol(j);
    if (!(v > 0.0))
        throw std::domain_error("MixedModelSpec: component kernel undefined at zero vol");
    return family == KernelFamily::Exponential ? Kernel::exponential(v, shape)
                                               : Kernel::power(v, shape);
}

bool MixedModelSpec::degenerate_single() const {
    if (lambda == 0.0 || lambda == 1.0) return true;
    return vol1 == vol2;
}

SingleModel MixedModelSpec::degenerate_model() const {
    if (!degenerate_single())
        throw std::logic_error("MixedModelSpec: not a degenerate mixture");
    const int j = lambda == 0.0 ? 2 : 1;
    return SingleModel{component_kernel(j), curve, window};
}

namespace {

// Unit-vol time integrals shared by both components (same kernel shape).
struct UnitIntegrals {
    double second_moment;  // ∫_0^T ν0(K0(t)^2) dt
    double mean_sq;        // ∫_0^T ν0(K0(t))^2 dt
};

UnitIntegrals unit_integrals(const MixedModelSpec& spec) {
    const Kernel unit = spec.family == KernelFamily::Exponential
                            ? Kernel::exponential(1.0, spec.shape)
                            : Kernel::power(1.0, spec.shape);
    SingleModel model{unit, spec.curve, spec.window};
    return UnitIntegrals{kernel_second_moment_integral(model), kernel_mean_sq_integral(model)};
}

// phi'(x) for the supported payoffs; the jump point uses strict inequalities.
double payoff_derivative(const MixedPayoff& payoff, double x) {
    switch (payoff.kind) {
        case MixedPayoffKind::Future:
            return 0.5 / std::sqrt(x);
        case MixedPayoffKind::Call:
            return x > payoff.strike * payoff.strike ? 0.5 / std::sqrt(x) : 0.0;
        case MixedPayoffKind::Put:
            return x < payoff.strike * payoff.strike ? -0.5 / std::sqrt(x) : 0.0;
        case MixedPayoffKind::SquareCall:
            return x > payoff.strike ? 1.0 : 0.0;
        case MixedPayoffKind::SquarePut:
            return x < payoff.strike ? -1.0 : 0.0;
    }
    throw std::logic_error("payoff_derivative: unknown payoff");
}

double payoff_value(const MixedPayoff& payoff, double x) {
    switch (payoff.kind) {
        case MixedPayoffKind::Future:
            return std::sqrt(x);
        case MixedPayoffKind::Call:
            return std::max(std::sqrt(x) - payoff.strike, 0.0);
        case MixedPayoffKind::Put:
            return std::max(payoff.strike - std::sqrt(x), 0.0);
        case MixedPayoffKind::SquareCall:
            return std::max(x - payoff.strike, 0.0);
        case MixedPayoffKind::SquarePut:
            return std::max(payoff.strike - x, 0.0);
    }
    throw std::logic_error("payoff_value: unknown payoff");
}

// The single-Gaussian mixture map F(z) = ν(ξ0)[λ e^{μ1+σ1 z} + (1-λ) e^{μ2+σ2 z}].
struct MixtureMap {
    double nu_xi;
    double lambda;
    MixedProxyParams proxy;

    double operator()(double z) const {
        return nu_xi * (lambda * std::exp(proxy.mu1 + proxy.sigma1 * z) +
                        (1.0 - lambda) * std::exp(proxy.mu2 + proxy.sigma2 * z));
    }
    double lower_limit() const {
        double v = 0.0;
        if (proxy.sigma1 == 0.0) v += lambda * std::exp(proxy.mu1);
        if (proxy.sigma2 == 0.0) v += (1.0 - lambda) * std::exp(proxy.mu2);
        return nu_xi * v;
    }
};

MixtureMap mixture_map(const MixedModelSpec& spec) {
    return MixtureMap{spec.curve.nu_xi0(spec.window), spec.lambda, mixed_proxy_params(spec)};
}

// z with F(z) = target for the strictly increasing mixture map; nullopt when
// the target is below the attainable range.
std::optional<double> invert_mixture(const MixtureMap& map, double target) {
    if (target <= map.lower_limit()) return std::nullopt;
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 120 && map(lo) >= target; ++i) lo *= 2.0;
    for (int i = 0; i < 120 && map(hi) <= target; ++i) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (map(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// E[g(Z)] with an optional split point, Gauss-Legendre panels on each side.
template <class G>
double split_normal_expectation(std::optional<double> split, G&& g) {
    constexpr double z_max = 12.0;
    const auto piece = [&](double a, double b) {
        if (b <= a) return 0.0;
        return quad::integrate_panels(a, b, 64, 8,
                                      [&](double z) { return g(z) * norm_pdf(z); });
    };
    if (split && *split > -z_max && *split < z_max)
        return piece(-z_max, *split) + piece(*split, z_max);
    return piece(-z_max, z_max);
}

// Location of the payoff kink in z-space, if any.
std::optional<double> payoff_kink(const MixtureMap& map, const MixedPayoff& payoff) {
    switch (payoff.kind) {
        case MixedPayoffKind::Future:
            return std::nullopt;
        case MixedPayoffKind::Call:
        case MixedPayoffKind::Put:
            return invert_mixture(map, payoff.strike * payoff.strike);
        case MixedPayoffKind::SquareCall:
        case MixedPayoffKind::SquarePut:
            return invert_mixture(map, payoff.strike);
    }
    return std::nullopt;
}

Payoff to_vix_payoff(const MixedPayoff& payoff) {
    switch (payoff.kind) {
        case MixedPayoffKind::Future: return Payoff::future();
        case MixedPayoffKind::Call: return Payoff::call(payoff.strike);
        case MixedPayoffKind::Put: return Payoff::put(payoff.strike);
        default:
            throw std::logic_error("to_vix_payoff: payoff is on VIX^2");
    }
}

} // namespace

MixedProxyParams mixed_proxy_params(const MixedModelSpec& spec) {
    const UnitIntegrals unit = unit_integrals(spec);
    const double root_s = std::sqrt(unit.mean_sq);
    MixedProxyParams p;
    p.mu1 = -0.5 * spec.vol1 * spec.vol1 * unit.second_moment;
    p.sigma1 = spec.vol1 * root_s;
    p.mu2 = -0.5 * spec.vol2 * spec.vol2 * unit.second_moment;
    p.sigma2 = spec.vol2 * root_s;
    return p;
}

double mixed_proxy_price(const MixedModelSpec& spec, const MixedPayoff& payoff,
                         const MixedSettings& settings) {
    if (spec.degenerate_single() && payoff.on_vix_level()) {
        const ProxyParams proxy = proxy_params(spec.degenerate_model());
        return corollary6_terms(proxy, to_vix_payoff(payoff)).p[0];
    }
    const MixtureMap map = mixture_map(spec);
    if (settings.mode == MixedQuadMode::SplitAtKink) {
        const auto kink = payoff_kink(map, payoff);
        return split_normal_expectation(kink,
                                        [&](double z) { return payoff_value(payoff, map(z)); });
    }
    return quad::normal_expectation(settings.hermite_nodes,
                                    [&](double z) { return payoff_value(payoff, map(z)); });
}

double psi_eval(const MixedModelSpec& spec, const MixedPayoff& payoff, int component,
                double x) {
    if (component != 1 && component != 2)
        throw std::invalid_argument("psi_eval: component must be 1 or 2");
    const double vol_own = spec.component_vol(component);
    const double vol_other = spec.component_vol(component == 1 ? 2 : 1);
    const double w_own = spec.component_weight(component);
    const double w_other = spec.component_weight(component == 1 ? 2 : 1);
    if (!(vol_own > 0.0))
        throw std::domain_error("psi_eval: component has zero vol-of-variance");

    const double nu_xi = spec.curve.nu_xi0(spec.window);
    const UnitIntegrals unit = unit_integrals(spec);
    // Other component re-expressed through this component's Gaussian argument.
    const double shift = 0.5 * vol_other * (vol_own - vol_other) * unit.second_moment;
    const double ratio = vol_other / vol_own;
    const double arg = nu_xi * (w_own * std::exp(x) + w_other * std::exp(shift + ratio * x));
    return payoff_derivative(payoff, arg) * nu_xi * w_own * std::exp(x);
}

MixedCorrections mixed_corrections(const MixedModelSpec& spec, const MixedPayoff& payoff,
                                   const MixedSettings& settings) {
    const MixedProxyParams proxy = mixed_proxy_params(spec);
    MixedCorrections out;
    for (int j = 1; j <= 2; ++j) {
        if (!spec.component_active(j)) continue;
        const double mu = j == 1 ? proxy.mu1 : proxy.mu2;
        const double sigma = j == 1 ? proxy.sigma1 : proxy.sigma2;

        const GammaCoefficients g =
            gamma_coefficients(SingleModel{spec.component_kernel(j), spec.curve, spec.window});
        out.gammas[0][j - 1] = g.gamma1;
        out.gammas[1][j - 1] = g.gamma2;
        out.gammas[2][j - 1] = g.gamma3;

        double e0 = 0.0, e1 = 0.0, e2 = 0.0;  // E[Psi], E[Z Psi], E[(Z^2-1) Psi]
        if (settings.mode == MixedQuadMode::SplitAtKink) {
            const MixtureMap map = mixture_map(spec);
            const auto kink = payoff_kink(map, payoff);
            const auto weighted = [&](int which) {
                return split_normal_expectation(kink, [&](double z) {
                    const double psi = psi_eval(spec, payoff, j, mu + sigma * z);
                    if (which == 0) return psi;
                    if (which == 1) return z * psi;
                    return (z * z - 1.0) * psi;
                });
            };
            e0 = weighted(0);
            e1 = weighted(1);
            e2 = weighted(2);
        } else {
            const auto& rule = quad::gauss_hermite(settings.hermite_nodes);
            constexpr double inv_sqrt_pi = 0.56418958354775628695;
            constexpr double sqrt2 = 1.4142135623730950488;
            for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
                const double z = sqrt2 * rule.nodes[m];
                const double psi = rule.weights[m] * psi_eval(spec, payoff, j, mu + sigma * z);
                e0 += psi;
                e1 += z * psi;
                e2 += (z * z - 1.0) * psi;
            }
            e0 *= inv_sqrt_pi;
            e1 *= inv_sqrt_pi;
            e2 *= inv_sqrt_pi;
        }
        out.p[0][j - 1] = e0;
        out.p[1][j - 1] = e1 / sigma;
        out.p[2][j - 1] = e2 / (sigma * sigma);
    }
    return out;
}

MixedExpansionResult mixed_expansion_price(const MixedModelSpec& spec,
                                           const MixedPayoff& payoff,
                                           const MixedSettings& settings) {
    if (spec.degenerate_single() && payoff.on_vix_level()) {
        const ExpansionResult single =
            expansion_price(spec.degenerate_model(), to_vix_payoff(payoff));
        MixedExpansionResult out;
        out.price = single.price;
        out.proxy_price = single.proxy_price;
        const int j = spec.lambda == 0.0 ? 2 : 1;
        for (int i = 0; i < 3; ++i) {
            out.corrections.p[i][j - 1] = single.order_terms[std::size_t(i)];
            out.corrections.gammas[i][j - 1] =
                i == 0 ? single.gammas.gamma1 : (i == 1 ? single.gammas.gamma2 : single.gammas.gamma3);
        }
        return out;
    }

    MixedExpansionResult out;
    out.proxy_price = mixed_proxy_price(spec, payoff, settings);
    out.corrections = mixed_corrections(spec, payoff, settings);
    double total = out.proxy_price;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j)
            total += out.corrections.gammas[i][j] * out.corrections.p[i][j];
    out.price = total;
    return out;
}

std::vector<SmilePoint> mixed_expansion_smile(const MixedModelSpec& spec,
                                              std::span<const double> strikes,
                                              const MixedSettings& settings) {
    const double forward = mixed_expansion_price(spec, MixedPayoff::future(), settings).price;
    std::vector<SmilePoint> smile(strikes.size());
    #pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(strikes.size()); ++i) {
        const double strike = strikes[std::size_t(i)];
        SmilePoint point{strike, std::nullopt};
        try {
            const double price =
                mixed_expansion_price(spec, MixedPayoff::call(strike), settings).price;
            point.iv = implied_vol(price, forward, strike);
        } catch (const std::domain_error&) {
        }
        smile[std::size_t(i)] = point;
    }
    return smile;
}

double lognormal_mixture_expectation(double nu_xi, double lambda,
                                     const MixedProxyParams& params,
                                     const MixedPayoff& payoff) {
    const MixtureMap map{nu_xi, lambda, params};
    const auto kink = payoff_kink(map, payoff);
    return split_normal_expectation(kink,
                                    [&](double z) { return payoff_value(payoff, map(z)); });
}

double vix2_option_closed(const MixedModelSpec& spec, const MixedPayoff& payoff) {
    if (payoff.kind != MixedPayoffKind::SquareCall && payoff.kind != MixedPayoffKind::SquarePut)
        throw std::invalid_argument("vix2_option_closed: payoff must be on VIX^2");
    if (!(payoff.strike > 0.0))
        throw std::domain_error("vix2_option_closed: strike must be > 0");

    const MixtureMap map = mixture_map(spec);
    const double kappa = payoff.strike;
    const double w1 = map.lambda, w2 = 1.0 - map.lambda;
    const auto& pr = map.proxy;
    const double m1 = map.nu_xi * w1 * std::exp(pr.mu1 + 0.5 * pr.sigma1 * pr.sigma1);
    const double m2 = map.nu_xi * w2 * std::exp(pr.mu2 + 0.5 * pr.sigma2 * pr.sigma2);

    const auto z_star = invert_mixture(map, kappa);
    if (!z_star) {
        // strike at or below the attainable floor of the mixture
        return payoff.kind == MixedPayoffKind::SquareCall ? m1 + m2 - kappa : 0.0;
    }
    const double z = *z_star;
    if (payoff.kind == MixedPayoffKind::SquareCall)
        return m1 * norm_cdf(pr.sigma1 - z) + m2 * norm_cdf(pr.sigma2 - z) -
               kappa * norm_cdf(-z);
    return kappa * norm_cdf(z) - m1 * norm_cdf(z - pr.sigma1) - m2 * norm_cdf(z - pr.sigma2);
}

} // namespace vixexp
