#pragma once

#include <cstddef>
#include <vector>

namespace vixexp::quad {

/// Nodes and weights of a fixed-order quadrature rule.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1]. Rules are computed once and cached.
const Rule& gauss_legendre(int n);

/// n-point Gauss-Hermite rule for the weight e^{-x^2}. Cached.
const Rule& gauss_hermite(int n);

/// ∫_a^b f(t) dt with an n-point Gauss-Legendre rule.
template <class F>
double integrate(double a, double b, int n, F&& f) {
    const Rule& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return acc * half;
}

/// ∫_a^b f over `panels` equal sub-intervals, n nodes each.
template <class F>
double integrate_panels(double a, double b, int n, int panels, F&& f) {
    double acc = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p)
        acc += integrate(a + p * h, a + (p + 1) * h, n, f);
    return acc;
}

/// ∫_0^b f with panels refined geometrically toward 0 (handles algebraic
/// endpoint singularities of any positive exponent). `levels` halvings.
template <class F>
double integrate_geometric(double b, int n, int levels, F&& f) {
    double acc = 0.0;
    double hi = b;
    for (int l = 0; l < levels; ++l) {
        const double lo = hi * 0.5;
        acc += integrate(lo, hi, n, f);
        hi = lo;
    }
    acc += integrate(0.0, hi, n, f);
    return acc;
}

/// E[f(Z)] for Z ~ N(0,1) via an n-point Gauss-Hermite rule.
template <class F>
double normal_expectation(int n, F&& f) {
    const Rule& rule = gauss_hermite(n);
    constexpr double inv_sqrt_pi = 0.56418958354775628695;
    constexpr double sqrt2 = 1.4142135623730950488;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(sqrt2 * rule.nodes[i]);
    return acc * inv_sqrt_pi;
}

} // namespace vixexp::quad
