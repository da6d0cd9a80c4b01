#pragma once

#include "vixexp/kernel.hpp"

namespace vixexp {

/// Lognormal proxy parameters: ln(proxy of VIX^2) ~ N(mu_p, sigma_p^2).
struct ProxyParams {
    double mu_p;
    double sigma_p;
};

/// Payoff-independent correction weights multiplying the Greek terms of the
/// price expansion. gamma1 and gamma3 are integrals of squares (>= 0);
/// gamma2 has no fixed sign. All three vanish for constant kernels.
struct GammaCoefficients {
    double gamma1;
    double gamma2;
    double gamma3;
};

/// Diagnostic L^p norms of the kernel's deviation from its window average.
struct Assumption4Norms {
    double gamma_norm;   // of the drift deviation, per-maturity time integral
    double lambda_norm;  // of the squared diffusion deviation
    double p;
};

/// Resolution of the deterministic quadratures. Node counts double
/// automatically until two successive resolutions agree to agree_tol.
struct QuadSettings {
    int t_nodes = 128;
    int u_nodes = 64;
    double agree_tol = 1e-9;
    int max_doublings = 2;
};

/// ∫_0^T ν0(K(t)^2) dt  and  ∫_0^T ν0(K(t))^2 dt (the proxy variance).
/// Closed forms when the curve is constant on the window, quadrature otherwise.
double kernel_second_moment_integral(const SingleModel& model);
double kernel_mean_sq_integral(const SingleModel& model);

/// Proxy parameters; dispatches to the per-family closed forms when the
/// curve is constant over the window.
ProxyParams proxy_params(const SingleModel& model);

/// Same quantities through the generic quadrature path (cross-check route).
ProxyParams proxy_params_quadrature(const SingleModel& model, const QuadSettings& qs = {});

/// Exponential-kernel closed form, k > 0. x0 = ln(xi0).
ProxyParams bergomi_proxy_closed(double omega, double k, double x0, const VixWindow& w);

/// Power-kernel closed form, H in (0,1). The cross term is a regularized
/// one-dimensional Gauss-Legendre integral.
ProxyParams rough_proxy_closed(double eta, double H, double x0, const VixWindow& w);

/// Expansion coefficients. Constant kernels return exact zeros; the
/// exponential family with a window-constant curve uses the closed forms;
/// the power family factors out the vol-of-variance and caches the unit-vol
/// integrals per (H, T, delta).
GammaCoefficients gamma_coefficients(const SingleModel& model);
GammaCoefficients gamma_coefficients_quadrature(const SingleModel& model,
                                                const QuadSettings& qs = {});
GammaCoefficients bergomi_gamma_closed(double omega, double k, const VixWindow& w);

Assumption4Norms assumption4_norms(const SingleModel& model, double p,
                                   const QuadSettings& qs = {});

/// Asymptotic constant of the power-kernel lambda norm, Λ ~ vol^2 f_diff Δ^{2H}.
/// Truncated improper double integral; accurate to ~1e-6.
double fdiff_constant(double H, double p);

} // namespace vixexp
