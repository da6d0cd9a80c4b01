#include "vixexp/proxy.hpp"

#include "vixexp/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace vixexp {

namespace {

// ∫_0^T g(t) dt. Power kernels have algebraic endpoint behavior at t = T,
// removed by the substitution t = T - v^2.
template <class G>
double integrate_time(const Kernel& kernel, double horizon, int nodes, G&& g) {
    if (kernel.family == KernelFamily::Power) {
        const double r = std::sqrt(horizon);
        return quad::integrate(0.0, r, nodes, [&](double v) {
            const double t = std::clamp(horizon - v * v, 0.0, horizon);
            return 2.0 * v * g(t);
        });
    }
    return quad::integrate(0.0, horizon, nodes, std::forward<G>(g));
}

// cross(u) = ∫_0^T ν0(K(t)) K^u(t) dt. For the power family the factor
// (u-t)^{H-1/2} is absorbed exactly by s = (u-t)^{H+1/2}; the remaining
// (T-t)^{H+1/2} endpoint kink at s = s_lo is flattened by s = s_lo + r^2.
double cross_integral(const Kernel& kernel, const ForwardVarianceCurve& curve,
                      const VixWindow& w, double u, int nodes) {
    const double horizon = w.maturity;
    if (kernel.family == KernelFamily::Exponential) {
        return quad::integrate(0.0, horizon, nodes, [&](double t) {
            return nu0_kernel_mean(kernel, curve, w, t) * kernel_eval(kernel, u, t);
        });
    }
    const double q = kernel.shape + 0.5;
    const double s_lo = std::pow(u - horizon, q);
    const double s_hi = std::pow(u, q);
    const double r_max = std::sqrt(s_hi - s_lo);
    const double inv_q = 1.0 / q;
    const double scale = kernel.vol / q;
    return scale * quad::integrate(0.0, r_max, nodes, [&](double r) {
        const double t = std::clamp(u - std::pow(s_lo + r * r, inv_q), 0.0, horizon);
        return 2.0 * r * nu0_kernel_mean(kernel, curve, w, t);
    });
}

double m2_quadrature(const SingleModel& m, int t_nodes) {
    return integrate_time(m.kernel, m.window.maturity, t_nodes, [&](double t) {
        return nu0_kernel_sq_mean(m.kernel, m.curve, m.window, t);
    });
}

double s2_quadrature(const SingleModel& m, int t_nodes) {
    return integrate_time(m.kernel, m.window.maturity, t_nodes, [&](double t) {
        const double v = nu0_kernel_mean(m.kernel, m.curve, m.window, t);
        return v * v;
    });
}

bool values_agree(double a, double b, double tol) {
    return std::abs(a - b) <= std::max(tol * std::max(std::abs(a), std::abs(b)), 1e-15);
}

// Evaluate at successively doubled resolutions until two agree.
template <class Eval>
double with_doubling(const QuadSettings& qs, Eval&& eval) {
    double prev = eval(1);
    for (int d = 1; d <= qs.max_doublings; ++d) {
        const double cur = eval(1 << d);
        if (values_agree(cur, prev, qs.agree_tol)) return cur;
        prev = cur;
    }
    return prev;
}

// ν0-weighted mean over [T, T+Δ] of a vector integrand. For the power family
// the segment starting at u = T gets u = T + w^2 to flatten (u-T)^{2H} kinks.
template <int N, class F>
std::array<double, N> nu0_window_mean(const Kernel& kernel, const ForwardVarianceCurve& curve,
                                      const VixWindow& w, int nodes, F&& f) {
    const auto edges = curve.segment_edges(w.maturity, w.window_end());
    std::array<double, N> num{};
    double den = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double a = edges[i], b = edges[i + 1];
        const double xi = curve.value(0.5 * (a + b));
        den += xi * (b - a);
        const auto& rule = quad::gauss_legendre(nodes);
        const bool regularize = kernel.family == KernelFamily::Power && a == w.maturity;
        if (regularize) {
            const double r_max = std::sqrt(b - a);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double r = 0.5 * r_max * (rule.nodes[j] + 1.0);
                const double u = a + r * r;
                const auto vals = f(u);
                const double wt = xi * rule.weights[j] * 0.5 * r_max * 2.0 * r;
                for (int c = 0; c < N; ++c) num[c] += wt * vals[c];
            }
        } else {
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
                const double u = mid + half * rule.nodes[j];
                const auto vals = f(u);
                const double wt = xi * rule.weights[j] * half;
                for (int c = 0; c < N; ++c) num[c] += wt * vals[c];
            }
        }
    }
    std::array<double, N> out{};
    for (int c = 0; c < N; ++c) out[c] = num[c] / den;
    return out;
}

struct GammaParts {
    double quartic1 = 0.0;  // (1/8) ν0-mean of F1^2   (scales as vol^4)
    double quad1 = 0.0;     // (1/2) ν0-mean of L      (scales as vol^2)
    double g2 = 0.0;
    double g3 = 0.0;
};

GammaParts gamma_parts_at(const SingleModel& m, int t_nodes, int u_nodes) {
    const double horizon = m.window.maturity;
    const double m2 = m2_quadrature(m, t_nodes);
    const double s2 = s2_quadrature(m, t_nodes);
    const auto sums = nu0_window_mean<4>(m.kernel, m.curve, m.window, u_nodes, [&](double u) {
        const double ksq = kernel_sq_integral(m.kernel, u, horizon);
        const double cross = cross_integral(m.kernel, m.curve, m.window, u, t_nodes);
        const double f1 = ksq - m2;
        const double f2 = cross - s2;
        const double l = ksq - 2.0 * cross + s2;
        return std::array<double, 4>{f1 * f1, l, f2 * f1, f2 * f2};
    });
    GammaParts parts;
    parts.quartic1 = sums[0] / 8.0;
    parts.quad1 = sums[1] / 2.0;
    parts.g2 = -sums[2] / 2.0;
    parts.g3 = sums[3] / 2.0;
    return parts;
}

GammaParts gamma_parts_quadrature(const SingleModel& m, const QuadSettings& qs) {
    GammaParts prev = gamma_parts_at(m, qs.t_nodes, qs.u_nodes);
    for (int d = 1; d <= qs.max_doublings; ++d) {
        const int f = 1 << d;
        const GammaParts cur = gamma_parts_at(m, qs.t_nodes * f, qs.u_nodes * f);
        const bool ok = values_agree(cur.quartic1, prev.quartic1, qs.agree_tol) &&
                        values_agree(cur.quad1, prev.quad1, qs.agree_tol) &&
                        values_agree(cur.g2, prev.g2, qs.agree_tol) &&
                        values_agree(cur.g3, prev.g3, qs.agree_tol);
        if (ok) return cur;
        prev = cur;
    }
    return prev;
}

// Unit-vol gamma parts for the power family, cached per (H, T, delta).
// Valid for window-constant curves (ν0 is then uniform regardless of level).
const GammaParts& power_unit_gamma_parts(double H, const VixWindow& w) {
    static std::map<std::tuple<double, double, double>, GammaParts> cache;
    static std::mutex mtx;
    const auto key = std::make_tuple(H, w.maturity, w.delta);
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it == cache.end()) {
        SingleModel unit{Kernel::power(1.0, H), ForwardVarianceCurve::constant(1.0), w};
        it = cache.emplace(key, gamma_parts_quadrature(unit, QuadSettings{})).first;
    }
    return it->second;
}

// Prop-9 style proxy variance bracket; the cross term is a regularized
// one-dimensional integral.
double rough_sigma_sq(double eta, double H, const VixWindow& w) {
    const double T = w.maturity, d = w.delta;
    const double q = H + 0.5, p = 2.0 * H + 2.0;
    const double cross = quad::integrate(0.0, std::sqrt(T), 400, [&](double v) {
        const double t = v * v;
        return 2.0 * v * std::pow(t + d, q) * std::pow(t, q);
    });
    const double bracket =
        (std::pow(T + d, p) + std::pow(T, p) - std::pow(d, p)) / p - 2.0 * cross;
    return eta * eta / (d * d * q * q) * bracket;
}

} // namespace

double kernel_second_moment_integral(const SingleModel& m) {
    const double T = m.window.maturity, d = m.window.delta;
    const Kernel& k = m.kernel;
    if (m.curve.constant_on(m.window)) {
        if (k.family == KernelFamily::Exponential) {
            if (k.shape == 0.0) return k.vol * k.vol * T;
            const double e1 = -std::expm1(-2.0 * k.shape * T);
            const double e2 = -std::expm1(-2.0 * k.shape * d);
            return k.vol * k.vol / (4.0 * k.shape * k.shape * d) * e1 * e2;
        }
        const double H = k.shape, p = 2.0 * H + 1.0;
        return k.vol * k.vol *
               (std::pow(T + d, p) - std::pow(d, p) - std::pow(T, p)) / (2.0 * H * p * d);
    }
    QuadSettings qs;
    return with_doubling(qs, [&](int f) { return m2_quadrature(m, qs.t_nodes * f); });
}

double kernel_mean_sq_integral(const SingleModel& m) {
    const double T = m.window.maturity, d = m.window.delta;
    const Kernel& k = m.kernel;
    if (m.curve.constant_on(m.window)) {
        if (k.family == KernelFamily::Exponential) {
            if (k.shape == 0.0) return k.vol * k.vol * T;
            const double e1 = -std::expm1(-2.0 * k.shape * T);
            const double e3 = -std::expm1(-k.shape * d);
            return k.vol * k.vol / (2.0 * std::pow(k.shape, 3) * d * d) * e1 * e3 * e3;
        }
        return rough_sigma_sq(k.vol, k.shape, m.window);
    }
    QuadSettings qs;
    return with_doubling(qs, [&](int f) { return s2_quadrature(m, qs.t_nodes * f); });
}

ProxyParams proxy_params(const SingleModel& m) {
    const double nu_xi = m.curve.nu_xi0(m.window);
    const double m2 = kernel_second_moment_integral(m);
    const double s2 = kernel_mean_sq_integral(m);
    if (!(s2 > 0.0))
        throw std::runtime_error("proxy_params: degenerate proxy (sigma_P^2 = 0)");
    return ProxyParams{std::log(nu_xi) - 0.5 * m2, std::sqrt(s2)};
}

ProxyParams proxy_params_quadrature(const SingleModel& m, const QuadSettings& qs) {
    const double nu_xi = m.curve.nu_xi0(m.window);
    const double m2 = with_doubling(qs, [&](int f) { return m2_quadrature(m, qs.t_nodes * f); });
    const double s2 = with_doubling(qs, [&](int f) { return s2_quadrature(m, qs.t_nodes * f); });
    if (!(s2 > 0.0))
        throw std::runtime_error("proxy_params: degenerate proxy (sigma_P^2 = 0)");
    return ProxyParams{std::log(nu_xi) - 0.5 * m2, std::sqrt(s2)};
}

ProxyParams bergomi_proxy_closed(double omega, double k, double x0, const VixWindow& w) {
    if (!(k > 0.0)) throw std::invalid_argument("bergomi_proxy_closed: requires k > 0");
    const double T = w.maturity, d = w.delta;
    const double e1 = -std::expm1(-2.0 * k * T);
    const double e2 = -std::expm1(-2.0 * k * d);
    const double e3 = -std::expm1(-k * d);
    const double mu = x0 - omega * omega / (8.0 * k * k * d) * e1 * e2;
    const double s2 = omega * omega / (2.0 * k * k * k * d * d) * e1 * e3 * e3;
    return ProxyParams{mu, std::sqrt(s2)};
}

ProxyParams rough_proxy_closed(double eta, double H, double x0, const VixWindow& w) {
    if (!(H > 0.0) || !(H < 1.0))
        throw std::invalid_argument("rough_proxy_closed: requires H in (0,1)");
    const double T = w.maturity, d = w.delta;
    const double p = 2.0 * H + 1.0;
    const double mu = x0 - eta * eta *
                               (std::pow(T + d, p) - std::pow(d, p) - std::pow(T, p)) /
                               (4.0 * H * p * d);
    return ProxyParams{mu, std::sqrt(rough_sigma_sq(eta, H, w))};
}

GammaCoefficients gamma_coefficients(const SingleModel& m) {
    if (m.kernel.is_constant()) return GammaCoefficients{0.0, 0.0, 0.0};
    if (m.curve.constant_on(m.window)) {
        if (m.kernel.family == KernelFamily::Exponential)
            return bergomi_gamma_closed(m.kernel.vol, m.kernel.shape, m.window);
        const GammaParts& unit = power_unit_gamma_parts(m.kernel.shape, m.window);
        const double e2 = m.kernel.vol * m.kernel.vol, e4 = e2 * e2;
        return GammaCoefficients{e4 * unit.quartic1 + e2 * unit.quad1, e4 * unit.g2,
                                 e4 * unit.g3};
    }
    const GammaParts parts = gamma_parts_quadrature(m, QuadSettings{});
    return GammaCoefficients{parts.quartic1 + parts.quad1, parts.g2, parts.g3};
}

GammaCoefficients gamma_coefficients_quadrature(const SingleModel& m, const QuadSettings& qs) {
    if (m.kernel.is_constant()) return GammaCoefficients{0.0, 0.0, 0.0};
    const GammaParts parts = gamma_parts_quadrature(m, qs);
    return GammaCoefficients{parts.quartic1 + parts.quad1, parts.g2, parts.g3};
}

GammaCoefficients bergomi_gamma_closed(double omega, double k, const VixWindow& w) {
    if (!(k > 0.0)) throw std::invalid_argument("bergomi_gamma_closed: requires k > 0");
    const double T = w.maturity, d = w.delta;
    const double kd = k * d;
    const double e1 = -std::expm1(-2.0 * k * T);  // 1 - e^{-2kT}
    const double e2 = -std::expm1(-2.0 * kd);     // 1 - e^{-2k d}
    const double e3 = -std::expm1(-kd);           // 1 - e^{-k d}
    const double w2 = omega * omega, w4 = w2 * w2;

    const double g10 = w4 / (128.0 * std::pow(k, 4) * d * d) *
                       (-1.0 + kd * (1.0 + std::exp(-2.0 * kd)) / e2) * e1 * e1 * e2 * e2;
    const double g11 = w2 / (8.0 * std::pow(k, 3) * d * d) *
                       ((2.0 + kd) * std::exp(-kd) - 2.0 + kd) * e1 * e3;
    const double g2 = -w4 / (48.0 * std::pow(d, 3) * std::pow(k, 5)) * e3 * e3 *
                      (2.0 * kd * std::exp(-kd) + 2.0 * kd + std::exp(-2.0 * kd) * (2.0 * kd + 3.0) -
                       3.0) *
                      e1 * e1;
    const double g3 = w4 / (16.0 * std::pow(k, 6) * std::pow(d, 4)) * e1 * e1 * e3 * e3 * e3 *
                      (kd - 2.0 + (2.0 + kd) * std::exp(-kd));
    return GammaCoefficients{g10 + g11, g2, g3};
}

Assumption4Norms assumption4_norms(const SingleModel& m, double p, const QuadSettings& qs) {
    if (!(p >= 1.0)) throw std::invalid_argument("assumption4_norms: requires p >= 1");
    if (m.kernel.is_constant()) return Assumption4Norms{0.0, 0.0, p};

    const double horizon = m.window.maturity;
    const bool const_curve = m.curve.constant_on(m.window);
    const Kernel& k = m.kernel;

    std::function<std::array<double, 2>(double)> deviations;  // {F1(u), L(u)}
    if (k.family == KernelFamily::Exponential && const_curve) {
        const double kk = k.shape, d = m.window.delta, w2 = k.vol * k.vol;
        const double e1 = -std::expm1(-2.0 * kk * horizon);
        deviations = [=](double u) {
            const double f1 = w2 / (4.0 * kk * kk * d) * e1 *
                              (2.0 * kk * d * std::exp(-2.0 * kk * (u - horizon)) +
                               std::expm1(-2.0 * kk * d));
            const double b = std::expm1(-kk * d) + kk * d * std::exp(-kk * (u - horizon));
            const double l = w2 * e1 / (2.0 * std::pow(kk, 3) * d * d) * b * b;
            return std::array<double, 2>{f1, l};
        };
    } else {
        const double m2 = with_doubling(qs, [&](int f) { return m2_quadrature(m, qs.t_nodes * f); });
        const double s2 = with_doubling(qs, [&](int f) { return s2_quadrature(m, qs.t_nodes * f); });
        const int t_nodes = qs.t_nodes * 2;
        deviations = [&m, m2, s2, t_nodes, horizon](double u) {
            const double ksq = kernel_sq_integral(m.kernel, u, horizon);
            const double cross = cross_integral(m.kernel, m.curve, m.window, u, t_nodes);
            return std::array<double, 2>{ksq - m2, ksq - 2.0 * cross + s2};
        };
    }

    // |F1|^p has a kink at interior sign changes unless p is an even integer.
    const bool even_p = p == 2.0 * std::floor(p / 2.0);
    const int u_nodes = even_p ? 2 * qs.u_nodes : 8 * qs.u_nodes;
    const auto means = nu0_window_mean<2>(k, m.curve, m.window, u_nodes, [&](double u) {
        const auto dev = deviations(u);
        return std::array<double, 2>{std::pow(std::abs(dev[0]), p),
                                     std::pow(std::abs(dev[1]), p)};
    });
    return Assumption4Norms{std::pow(means[0], 1.0 / p), std::pow(means[1], 1.0 / p), p};
}

double fdiff_constant(double H, double p) {
    if (!(H > 0.0) || !(H < 1.0) || H == 0.5)
        throw std::invalid_argument("fdiff_constant: requires H in (0,1) \\ {1/2}");
    if (!(p >= 1.0)) throw std::invalid_argument("fdiff_constant: requires p >= 1");

    const double q = H + 0.5;
    const auto g = [&](double s, double u) {
        return std::pow(1.0 + s, q) - std::pow(s, q) - q * std::pow(u + s, H - 0.5);
    };

    const int tail_levels = 20;  // truncate at s = 2^20, then analytic tail estimate
    const auto inner = [&](double u, int nodes) {
        double acc = quad::integrate_geometric(1.0, nodes, 40, [&](double s) {
            const double v = g(s, u);
            return v * v;
        });
        double lo = 1.0;
        for (int l = 0; l < tail_levels; ++l) {
            acc += quad::integrate(lo, 2.0 * lo, nodes, [&](double s) {
                const double v = g(s, u);
                return v * v;
            });
            lo *= 2.0;
        }
        // g ~ q(q-1)(1/2-u) s^{H-3/2} for large s; integrate the square beyond the cutoff
        const double c = q * (q - 1.0) * (0.5 - u);
        acc += c * c * std::pow(lo, 2.0 * H - 2.0) / (2.0 - 2.0 * H);
        return acc;
    };

    const auto value = [&](int nodes) {
        const double outer = quad::integrate_geometric(1.0, nodes, 40, [&](double u) {
            return std::pow(inner(u, nodes), p);
        });
        return std::pow(outer, 1.0 / p) / (q * q);
    };

    const double coarse = value(24);
    const double fine = value(32);
    if (!values_agree(coarse, fine, 1e-6))
        throw std::runtime_error("fdiff_constant: did not converge within the node budget");
    return fine;
}

} // namespace vixexp
