#include "vixexp/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vixexp {

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double norm_pdf(double x) {
    constexpr double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double inv_norm_cdf(double u) {
    if (!(u > 0.0) || !(u < 1.0))
        throw std::domain_error("inv_norm_cdf: u must be in (0,1)");
    // Acklam's rational approximation, then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        const double q = u - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-u));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - u;
    const double f = e / norm_pdf(x);
    return x - f / (1.0 + 0.5 * x * f);
}

namespace {

void check_bs_inputs(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::domain_error("black-scholes: forward and strike must be > 0");
}

double d_plus(double x, double y, double sigma) {
    return std::log(x / y) / sigma + 0.5 * sigma;
}

} // namespace

double bs_call(double x, double y, double sigma) {
    check_bs_inputs(x, y);
    if (sigma <= 0.0) return std::max(x - y, 0.0);
    const double d1 = d_plus(x, y, sigma);
    return x * norm_cdf(d1) - y * norm_cdf(d1 - sigma);
}

double bs_delta(double x, double y, double sigma) {
    check_bs_inputs(x, y);
    if (sigma <= 0.0)
        throw std::domain_error("bs_delta: sigma must be > 0");
    return norm_cdf(d_plus(x, y, sigma));
}

double bs_gamma(double x, double y, double sigma) {
    check_bs_inputs(x, y);
    if (sigma <= 0.0)
        throw std::domain_error("bs_gamma: sigma must be > 0");
    return norm_pdf(d_plus(x, y, sigma)) / (x * sigma);
}

double bs_speed(double x, double y, double sigma) {
    check_bs_inputs(x, y);
    if (sigma <= 0.0)
        throw std::domain_error("bs_speed: sigma must be > 0");
    return -bs_gamma(x, y, sigma) / x * (std::log(x / y) / (sigma * sigma) + 1.5);
}

double implied_vol(double price, double forward, double strike) {
    check_bs_inputs(forward, strike);
    const double intrinsic = std::max(forward - strike, 0.0);
    if (price < intrinsic)
        throw std::domain_error("implied_vol: price below intrinsic value");
    if (price >= forward)
        throw std::domain_error("implied_vol: price at or above the forward");
    if (price == intrinsic) return 0.0;

    constexpr double tol = 1e-12;
    // Bracket, then safeguarded Newton with bisection fallback.
    double lo = 1e-12, hi = 1.0;
    while (bs_call(forward, strike, hi) < price && hi < 1e3) hi *= 2.0;
    double sigma = std::sqrt(2.0 * M_PI) * price / forward;  // ATM-style first guess
    sigma = std::clamp(sigma, lo, hi);
    for (int iter = 0; iter < 100; ++iter) {
        const double value = bs_call(forward, strike, sigma);
        const double diff = value - price;
        if (std::abs(diff) <= tol) return sigma;
        if (diff > 0.0)
            hi = sigma;
        else
            lo = sigma;
        const double vega = forward * norm_pdf(d_plus(forward, strike, sigma));
        double next = vega > 0.0 ? sigma - diff / vega : 0.0;
        if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
        sigma = next;
    }
    return sigma;
}

} // namespace vixexp
