#include "vixexp/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace vixexp::quad {

namespace {

Rule make_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on the recurrence.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

Rule make_hermite(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    constexpr double pi_m4 = 0.7511255444649424828587; // pi^{-1/4}
    const int m = (n + 1) / 2;
    double x = 0.0;
    for (int i = 0; i < m; ++i) {
        // Initial guesses per Numerical Recipes' gauher.
        if (i == 0) {
            x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            x -= 1.14 * std::pow(n, 0.426) / x;
        } else if (i == 2) {
            x = 1.86 * x - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            x = 1.91 * x - 0.91 * rule.nodes[1];
        } else {
            x = 2.0 * x - rule.nodes[i - 2];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            double p1 = pi_m4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(double(j) / (j + 1.0)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[i] = x;        // stored descending for i < m
        rule.nodes[n - 1 - i] = -x;
        const double w = 2.0 / (pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

// Cached rules; concurrent lookups protected by a mutex.
template <Rule (*Make)(int)>
const Rule& cached(int n) {
    static std::map<int, Rule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Make(n)).first;
    return it->second;
}

} // namespace

const Rule& gauss_legendre(int n) { return cached<make_legendre>(n); }
const Rule& gauss_hermite(int n) { return cached<make_hermite>(n); }

} // namespace vixexp::quad
