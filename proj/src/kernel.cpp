#include "vixexp/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace vixexp {

Kernel Kernel::exponential(double omega, double k) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw std::invalid_argument("Kernel: omega must be > 0");
    if (!(k >= 0.0) || !std::isfinite(k))
        throw std::invalid_argument("Kernel: k must be >= 0");
    return Kernel{KernelFamily::Exponential, omega, k};
}

Kernel Kernel::power(double eta, double H) {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("Kernel: eta must be > 0");
    if (!(H > 0.0) || !(H < 1.0))
        throw std::invalid_argument("Kernel: H must be in (0,1)");
    return Kernel{KernelFamily::Power, eta, H};
}

bool Kernel::is_constant() const {
    return (family == KernelFamily::Exponential && shape == 0.0) ||
           (family == KernelFamily::Power && shape == 0.5);
}

double kernel_eval(const Kernel& kernel, double u, double t) {
    if (t > u) throw std::domain_error("kernel_eval: requires t <= u");
    if (t < 0.0) throw std::domain_error("kernel_eval: requires t >= 0");
    if (kernel.family == KernelFamily::Exponential)
        return kernel.vol * std::exp(-kernel.shape * (u - t));
    const double H = kernel.shape;
    if (t == u && H < 0.5)
        throw std::domain_error("kernel_eval: power kernel is singular at t = u for H < 1/2");
    return kernel.vol * std::pow(u - t, H - 0.5);
}

double kernel_sq_integral(const Kernel& kernel, double u, double horizon) {
    if (!(horizon > 0.0) || horizon > u)
        throw std::domain_error("kernel_sq_integral: requires 0 < horizon <= u");
    if (kernel.family == KernelFamily::Exponential) {
        const double w = kernel.vol, k = kernel.shape;
        if (k == 0.0) return w * w * horizon;
        // (w^2/2k) e^{-2k(u-T)} (1 - e^{-2kT}), written with expm1 for small k
        return w * w / (2.0 * k) * std::exp(-2.0 * k * (u - horizon)) *
               (-std::expm1(-2.0 * k * horizon));
    }
    const double e = kernel.vol, H = kernel.shape;
    return e * e / (2.0 * H) * (std::pow(u, 2.0 * H) - std::pow(u - horizon, 2.0 * H));
}

namespace {

// ∫_a^b K^u(t) du and ∫_a^b K^u(t)^2 du for fixed t <= a.
double segment_kernel_integral(const Kernel& kernel, double a, double b, double t) {
    if (kernel.family == KernelFamily::Exponential) {
        const double w = kernel.vol, k = kernel.shape;
        if (k == 0.0) return w * (b - a);
        return w / k * std::exp(-k * (a - t)) * (-std::expm1(-k * (b - a)));
    }
    const double e = kernel.vol, q = kernel.shape + 0.5;
    return e / q * (std::pow(b - t, q) - std::pow(a - t, q));
}

double segment_kernel_sq_integral(const Kernel& kernel, double a, double b, double t) {
    if (kernel.family == KernelFamily::Exponential) {
        const double w = kernel.vol, k = kernel.shape;
        if (k == 0.0) return w * w * (b - a);
        return w * w / (2.0 * k) * std::exp(-2.0 * k * (a - t)) * (-std::expm1(-2.0 * k * (b - a)));
    }
    const double e = kernel.vol, q = 2.0 * kernel.shape;
    return e * e / q * (std::pow(b - t, q) - std::pow(a - t, q));
}

template <class SegmentIntegral>
double nu0_weighted(const ForwardVarianceCurve& curve, const VixWindow& w, double t,
                    SegmentIntegral&& seg) {
    if (t < 0.0 || t > w.maturity)
        throw std::domain_error("nu0 kernel mean: requires t in [0, T]");
    const auto edges = curve.segment_edges(w.maturity, w.window_end());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double xi = curve.value(0.5 * (edges[i] + edges[i + 1]));
        num += xi * seg(edges[i], edges[i + 1]);
        den += xi * (edges[i + 1] - edges[i]);
    }
    return num / den;
}

} // namespace

double nu0_kernel_mean(const Kernel& kernel, const ForwardVarianceCurve& curve,
                       const VixWindow& w, double t) {
    return nu0_weighted(curve, w, t, [&](double a, double b) {
        return segment_kernel_integral(kernel, a, b, t);
    });
}

double nu0_kernel_sq_mean(const Kernel& kernel, const ForwardVarianceCurve& curve,
                          const VixWindow& w, double t) {
    return nu0_weighted(curve, w, t, [&](double a, double b) {
        return segment_kernel_sq_integral(kernel, a, b, t);
    });
}

} // namespace vixexp
