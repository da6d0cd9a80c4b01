#pragma once

#include "vixexp/curve.hpp"

namespace vixexp {

enum class KernelFamily { Exponential, Power };

/// Deterministic volatility kernel K^u(t) of the forward-variance dynamics.
/// Exponential family: K^u(t) = omega * exp(-k (u-t)),   vol = omega, shape = k.
/// Power family:       K^u(t) = eta * (u-t)^(H - 1/2),   vol = eta,   shape = H.
struct Kernel {
    KernelFamily family;
    double vol;
    double shape;

    static Kernel exponential(double omega, double k);
    static Kernel power(double eta, double H);

    /// Constant kernels (k = 0 or H = 1/2) make the lognormal proxy exact.
    bool is_constant() const;

    Kernel with_vol(double v) const { return Kernel{family, v, shape}; }
};

/// K^u(t). Requires 0 <= t <= u; the power kernel with H < 1/2 diverges at t = u.
double kernel_eval(const Kernel& kernel, double u, double t);

/// ∫_0^T K^u(t)^2 dt in closed form. Requires 0 < T <= u.
double kernel_sq_integral(const Kernel& kernel, double u, double horizon);

/// ν0(K·(t))  = ∫ K^u(t) ν0(du) and ν0(K·(t)^2), evaluated by exact
/// per-segment antiderivatives (the curve is piecewise constant).
double nu0_kernel_mean(const Kernel& kernel, const ForwardVarianceCurve& curve,
                       const VixWindow& w, double t);
double nu0_kernel_sq_mean(const Kernel& kernel, const ForwardVarianceCurve& curve,
                          const VixWindow& w, double t);

/// A single-kernel forward-variance model: kernel, initial curve, VIX window.
struct SingleModel {
    Kernel kernel;
    ForwardVarianceCurve curve;
    VixWindow window;
};

} // namespace vixexp
