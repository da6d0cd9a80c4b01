#pragma once

namespace vixexp {

/// Standard normal CDF, PDF, and inverse CDF (inverse accurate to ~1e-15
/// after one Halley refinement of a rational approximation).
double norm_cdf(double x);
double norm_pdf(double x);
double inv_norm_cdf(double u);

/// Undiscounted Black-Scholes call on a forward x, strike y, total volatility
/// sigma over the period: E[(x e^{-sigma^2/2 + sigma Z} - y)_+].
/// sigma = 0 returns the intrinsic value (x - y)_+.
double bs_call(double x, double y, double sigma);

/// First, second, and third forward derivatives of bs_call.
/// Reject sigma <= 0 (the degenerate Greeks are distributions).
double bs_delta(double x, double y, double sigma);
double bs_gamma(double x, double y, double sigma);
double bs_speed(double x, double y, double sigma);

/// The unique sigma with bs_call(forward, strike, sigma) = price, to 1e-12
/// absolute in price. Requires intrinsic <= price < forward.
double implied_vol(double price, double forward, double strike);

} // namespace vixexp
