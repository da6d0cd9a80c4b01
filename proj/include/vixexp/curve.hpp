#pragma once

#include <functional>
#include <vector>

namespace vixexp {

/// VIX option maturity T and averaging window length Δ, both in years.
/// Δ defaults to one month, the convention used throughout.
struct VixWindow {
    double maturity;
    double delta = 1.0 / 12.0;

    VixWindow(double maturity_, double delta_ = 1.0 / 12.0);
    double window_end() const { return maturity + delta; }
};

/// Piecewise-constant initial forward-variance curve u -> xi0(u).
/// values[i] applies on [breakpoints[i-1], breakpoints[i]) (first segment
/// starts at 0); the final value extends beyond the last breakpoint.
class ForwardVarianceCurve {
public:
    ForwardVarianceCurve(std::vector<double> breakpoints, std::vector<double> values);

    static ForwardVarianceCurve constant(double xi0);

    double value(double u) const;

    /// ν(ξ0) = (1/Δ) ∫_T^{T+Δ} ξ0(u) du
    double nu_xi0(const VixWindow& w) const;

    /// True when ξ0 takes a single value on [T, T+Δ].
    bool constant_on(const VixWindow& w) const;

    /// Segment boundaries of the curve intersected with [a, b], including
    /// both endpoints. Monotone, deduplicated.
    std::vector<double> segment_edges(double a, double b) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

/// ν0-average of f over [T, T+Δ]: ∫ f(u) ξ0(u) du / ∫ ξ0(u) du.
/// Fixed-order Gauss-Legendre per curve segment (deterministic).
double nu0_mean(const ForwardVarianceCurve& curve, const VixWindow& w,
                const std::function<double(double)>& f, int nodes_per_segment = 64);

/// Plain ν-average ∫_T^{T+Δ} f(u) du / Δ.
double nu_mean(const VixWindow& w, const std::function<double(double)>& f, int nodes = 64);

} // namespace vixexp
