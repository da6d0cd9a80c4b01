#pragma once

#include "vixexp/expansion.hpp"

#include <array>

namespace vixexp {

/// Payoffs priced in the mixed models: VIX-level futures/call/put, plus
/// call/put written on VIX^2 itself.
enum class MixedPayoffKind { Future, Call, Put, SquareCall, SquarePut };

struct MixedPayoff {
    MixedPayoffKind kind;
    double strike = 0.0;

    static MixedPayoff future() { return MixedPayoff{MixedPayoffKind::Future, 0.0}; }
    static MixedPayoff call(double strike);
    static MixedPayoff put(double strike);
    static MixedPayoff square_call(double strike);
    static MixedPayoff square_put(double strike);
    static MixedPayoff from(const Payoff& payoff);

    bool on_vix_level() const {
        return kind == MixedPayoffKind::Future || kind == MixedPayoffKind::Call ||
               kind == MixedPayoffKind::Put;
    }
};

/// Convex mixture of two exponential variance components sharing the kernel
/// shape parameter (same k, or same H), so both are driven by one Gaussian.
struct MixedModelSpec {
    KernelFamily family;
    double shape;   // shared k (exponential) or H (power)
    double vol1;    // omega_1 / eta_1, >= 0
    double vol2;    // omega_2 / eta_2, >= 0
    double lambda;  // mixing weight in [0,1]
    ForwardVarianceCurve curve;
    VixWindow window;

    MixedModelSpec(KernelFamily family, double shape, double vol1, double vol2,
                   double lambda, ForwardVarianceCurve curve, VixWindow window);

    Kernel component_kernel(int j) const;        // j in {1,2}; requires vol_j > 0
    double component_vol(int j) const { return j == 1 ? vol1 : vol2; }
    double component_weight(int j) const { return j == 1 ? lambda : 1.0 - lambda; }
    bool component_active(int j) const {
        return component_weight(j) > 0.0 && component_vol(j) > 0.0;
    }
    /// True when the mixture collapses to a single lognormal component.
    bool degenerate_single() const;
    SingleModel degenerate_model() const;
};

/// Per-component lognormal parameters of the mixture proxy. These exclude
/// the ln(nu(xi0)) level, which multiplies outside the mixture.
struct MixedProxyParams {
    double mu1, sigma1;
    double mu2, sigma2;
};

enum class MixedQuadMode {
    PlainHermite,  // 80-node Gauss-Hermite, kinks and all
    SplitAtKink,   // Gauss-Legendre panels split at the payoff kink
};

struct MixedSettings {
    int hermite_nodes = 80;
    MixedQuadMode mode = MixedQuadMode::PlainHermite;
};

MixedProxyParams mixed_proxy_params(const MixedModelSpec& spec);

/// E[phi(VIX^2 proxy)] by one-dimensional Gaussian quadrature.
double mixed_proxy_price(const MixedModelSpec& spec, const MixedPayoff& payoff,
                         const MixedSettings& settings = {});

/// Likelihood-ratio weight function Psi_j at log-argument x.
double psi_eval(const MixedModelSpec& spec, const MixedPayoff& payoff, int component,
                double x);

/// Correction terms P_{i,j} and their gamma weights; inactive components are
/// zeroed. Indexing: p[i-1][j-1] for i in 1..3, j in 1..2.
struct MixedCorrections {
    std::array<std::array<double, 2>, 3> p{};
    std::array<std::array<double, 2>, 3> gammas{};
};

MixedCorrections mixed_corrections(const MixedModelSpec& spec, const MixedPayoff& payoff,
                                   const MixedSettings& settings = {});

struct MixedExpansionResult {
    double price;
    double proxy_price;
    MixedCorrections corrections;
};

/// Proxy price plus the gamma-weighted correction double sum. Degenerate
/// mixtures on VIX-level payoffs dispatch to the exact single-model engine.
MixedExpansionResult mixed_expansion_price(const MixedModelSpec& spec,
                                           const MixedPayoff& payoff,
                                           const MixedSettings& settings = {});

std::vector<SmilePoint> mixed_expansion_smile(const MixedModelSpec& spec,
                                              std::span<const double> strikes,
                                              const MixedSettings& settings = {});

/// Closed-form proxy price of a call/put on VIX^2 (strike kappa > 0): the
/// mixture CDF point z* = F^{-1}(kappa) by root-finding, then normal tails.
double vix2_option_closed(const MixedModelSpec& spec, const MixedPayoff& payoff);

/// E[phi(nu_xi [lambda e^{mu1+sigma1 Z} + (1-lambda) e^{mu2+sigma2 Z}])] with
/// the z-integral split at the payoff kink; accurate to near machine precision.
/// Used where an exact lognormal-mixture functional is needed (e.g. as a
/// control-variate expectation).
double lognormal_mixture_expectation(double nu_xi, double lambda,
                                     const MixedProxyParams& params,
                                     const MixedPayoff& payoff);

} // namespace vixexp
