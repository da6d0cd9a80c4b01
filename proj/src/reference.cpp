#include "vixexp/reference.hpp"

#include "vixexp/black_scholes.hpp"
#include "vixexp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace vixexp {

namespace {

MixedModelSpec as_mixture(const SingleModel& model) {
    return MixedModelSpec(model.kernel.family, model.kernel.shape, model.kernel.vol, 0.0,
                          1.0, model.curve, model.window);
}

// ---------------------------------------------------------------------------
// Markovian quadrature pricer (exponential kernels)
// ---------------------------------------------------------------------------

struct StateMap {
    // VIX^2(x) = sum_u xi_wt * (l e^{a1 x - b1} + (1-l) e^{a2 x - b2}),
    // x the time-T value of the driving OU process.
    struct UNode {
        double xi_wt;
        double a1, b1, a2, b2;
    };
    std::vector<UNode> nodes;
    double lambda;
    double var_x;
    double floor;  // limit of VIX^2(x) as x -> -infinity

    double operator()(double x) const {
        double acc = 0.0;
        for (const UNode& n : nodes)
            acc += n.xi_wt * (lambda * std::exp(n.a1 * x - n.b1) +
                              (1.0 - lambda) * std::exp(n.a2 * x - n.b2));
        return acc;
    }
};

StateMap build_state_map(const MixedModelSpec& spec, const QuadConfig& cfg) {
    const double T = spec.window.maturity, d = spec.window.delta, k = spec.shape;
    StateMap map;
    map.lambda = spec.lambda;
    map.var_x = k > 0.0 ? -std::expm1(-2.0 * k * T) / (2.0 * k) : T;

    const auto edges = spec.curve.segment_edges(T, T + d);
    const auto& rule = quad::gauss_legendre(cfg.time_nodes);
    for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
        const double mid = 0.5 * (edges[s] + edges[s + 1]);
        const double half = 0.5 * (edges[s + 1] - edges[s]);
        const double xi = spec.curve.value(mid);
        for (std::size_t m = 0; m < rule.nodes.size(); ++m) {
            const double u = mid + half * rule.nodes[m];
            StateMap::UNode node;
            node.xi_wt = rule.weights[m] * half * xi / d;
            node.a1 = spec.vol1 * std::exp(-k * (u - T));
            node.a2 = spec.vol2 * std::exp(-k * (u - T));
            node.b1 = 0.5 * node.a1 * node.a1 * map.var_x;
            node.b2 = 0.5 * node.a2 * node.a2 * map.var_x;
            map.nodes.push_back(node);
        }
    }
    map.floor = 0.0;
    for (const auto& n : map.nodes) {
        if (spec.vol1 == 0.0) map.floor += n.xi_wt * map.lambda;
        if (spec.vol2 == 0.0) map.floor += n.xi_wt * (1.0 - map.lambda);
    }
    return map;
}

std::optional<double> find_state_kink(const StateMap& map, double target) {
    if (target <= map.floor) return std::nullopt;
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 120 && map(lo) >= target; ++i) lo *= 2.0;
    for (int i = 0; i < 120 && map(hi) <= target; ++i) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (map(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double bergomi_quadrature_price(const MixedModelSpec& spec, const Payoff& payoff,
                                const QuadConfig& cfg) {
    if (spec.family != KernelFamily::Exponential)
        throw std::invalid_argument(
            "bergomi_quadrature_price: power kernels have no Markovian representation; "
            "use rough_mc_price");
    if (cfg.time_nodes < 2 || cfg.space_nodes < 2)
        throw std::invalid_argument("bergomi_quadrature_price: node counts must be >= 2");

    const StateMap map = build_state_map(spec, cfg);
    const double sd = std::sqrt(map.var_x);

    if (payoff.kind == PayoffKind::Future) {
        const double sqrt2 = 1.4142135623730950488;
        const double inv_sqrt_pi = 0.56418958354775628695;
        const auto& rule = quad::gauss_hermite(cfg.space_nodes);
        double acc = 0.0;
        for (std::size_t m = 0; m < rule.nodes.size(); ++m)
            acc += rule.weights[m] * std::sqrt(map(sqrt2 * sd * rule.nodes[m]));
        return acc * inv_sqrt_pi;
    }

    const double kappa = payoff.strike;
    const auto kink = find_state_kink(map, kappa * kappa);
    if (!kink && payoff.kind == PayoffKind::Put) return 0.0;

    const double lo = -12.0 * sd, hi = 12.0 * sd;
    const auto piece = [&](double a, double b) {
        if (b <= a) return 0.0;
        return quad::integrate_panels(a, b, cfg.space_nodes, 8, [&](double x) {
            const double vix = std::sqrt(map(x));
            const double value = payoff.kind == PayoffKind::Call
                                     ? std::max(vix - kappa, 0.0)
                                     : std::max(kappa - vix, 0.0);
            return value * norm_pdf(x / sd) / sd;
        });
    };
    if (kink && *kink > lo && *kink < hi) return piece(lo, *kink) + piece(*kink, hi);
    return piece(lo, hi);
}

double bergomi_quadrature_price(const SingleModel& model, const Payoff& payoff,
                                const QuadConfig& cfg) {
    return bergomi_quadrature_price(as_mixture(model), payoff, cfg);
}

// ---------------------------------------------------------------------------
// Exact-Gaussian Monte Carlo pricer (power kernels)
// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& eng) {
    return double(eng() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Unit-vol covariance C_ij = ∫_0^T K0^{u_i}(t) K0^{u_j}(t) dt for the power
// kernel. The diagonal is closed-form; off-diagonal entries use the exact
// substitution s = (u_min - t)^{H+1/2} and 200-node Gauss-Legendre.
std::vector<double> unit_covariance(double H, double T, const std::vector<double>& grid) {
    const int n = int(grid.size());
    const double q = H + 0.5;
    std::vector<double> cov(std::size_t(n) * n, 0.0);

    #pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < n; ++i) {
        const double ui = grid[std::size_t(i)];
        cov[std::size_t(i) * n + i] =
            (std::pow(ui, 2.0 * H) - std::pow(ui - T, 2.0 * H)) / (2.0 * H);
        for (int j = i + 1; j < n; ++j) {
            const double delta = grid[std::size_t(j)] - ui;
            const double s_lo = std::pow(ui - T, q);
            const double s_hi = std::pow(ui, q);
            const double value =
                quad::integrate(s_lo, s_hi, 200, [&](double s) {
                    return std::pow(std::pow(s, 1.0 / q) + delta, H - 0.5);
                }) /
                q;
            cov[std::size_t(i) * n + j] = value;
            cov[std::size_t(j) * n + i] = value;
        }
    }
    return cov;
}

// In-place lower Cholesky with a single diagonal-jitter retry.
std::vector<double> cholesky_lower(std::vector<double> a, int n) {
    auto attempt = [n](std::vector<double> m) -> std::optional<std::vector<double>> {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j <= i; ++j) {
                double sum = m[std::size_t(i) * n + j];
                for (int p = 0; p < j; ++p)
                    sum -= m[std::size_t(i) * n + p] * m[std::size_t(j) * n + p];
                if (i == j) {
                    if (!(sum > 0.0)) return std::nullopt;
                    m[std::size_t(i) * n + j] = std::sqrt(sum);
                } else {
                    m[std::size_t(i) * n + j] = sum / m[std::size_t(j) * n + j];
                }
            }
            for (int j = i + 1; j < n; ++j) m[std::size_t(i) * n + j] = 0.0;
        }
        return m;
    };
    if (auto l = attempt(a)) return *l;
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a[std::size_t(i) * n + i];
    const double jitter = 1e-12 * trace / n;
    for (int i = 0; i < n; ++i) a[std::size_t(i) * n + i] += jitter;
    if (auto l = attempt(a)) return *l;
    throw std::runtime_error("rough_mc_price: covariance matrix is not positive definite");
}

struct ChunkSums {
    double y = 0.0, y2 = 0.0, cv = 0.0, cv2 = 0.0, ycv = 0.0;
};

} // namespace

McEstimate rough_mc_price(const MixedModelSpec& spec, const Payoff& payoff,
                          const McConfig& cfg) {
    if (spec.family != KernelFamily::Power)
        throw std::invalid_argument(
            "rough_mc_price: exponential kernels have an exact quadrature reference; "
            "use bergomi_quadrature_price");
    if (cfg.samples < 1) throw std::invalid_argument("rough_mc_price: samples must be >= 1");
    if (cfg.grid_points < 2)
        throw std::invalid_argument("rough_mc_price: grid_points must be >= 2");

    const int n = cfg.grid_points;
    const double T = spec.window.maturity, d = spec.window.delta, H = spec.shape;
    const double eta1 = spec.vol1, eta2 = spec.vol2, lambda = spec.lambda;

    // Midpoint rectangle grid over the VIX window (avoids the u = T singularity).
    std::vector<double> grid(std::size_t(n));
    std::vector<double> xi(std::size_t(n));
    double xi_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        grid[std::size_t(i)] = T + (i + 0.5) * d / n;
        xi[std::size_t(i)] = spec.curve.value(grid[std::size_t(i)]);
        xi_sum += xi[std::size_t(i)];
    }
    const double bar_xi = xi_sum / n;

    const std::vector<double> cov = unit_covariance(H, T, grid);
    const std::vector<double> chol = cholesky_lower(cov, n);

    // Grid-level proxy parameters (nu0 weights at grid level).
    std::vector<double> w(std::size_t(n));
    for (int i = 0; i < n; ++i) w[std::size_t(i)] = xi[std::size_t(i)] / xi_sum;
    double mbar = 0.0;
    for (int i = 0; i < n; ++i) mbar += w[std::size_t(i)] * cov[std::size_t(i) * n + i];
    double s2g = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += cov[std::size_t(i) * n + j] * w[std::size_t(j)];
        s2g += w[std::size_t(i)] * row;
    }
    const double sg = std::sqrt(s2g);

    MixedProxyParams grid_proxy;
    grid_proxy.mu1 = -0.5 * eta1 * eta1 * mbar;
    grid_proxy.sigma1 = eta1 * sg;
    grid_proxy.mu2 = -0.5 * eta2 * eta2 * mbar;
    grid_proxy.sigma2 = eta2 * sg;
    const MixedPayoff mixed_payoff = MixedPayoff::from(payoff);
    const double cv_expectation =
        cfg.control_variate
            ? lognormal_mixture_expectation(bar_xi, lambda, grid_proxy, mixed_payoff)
            : 0.0;

    // Per-point drift terms -1/2 eta_j^2 C_ii.
    std::vector<double> drift1(std::size_t(n)), drift2(std::size_t(n));
    for (int i = 0; i < n; ++i) {
        const double cii = cov[std::size_t(i) * n + i];
        drift1[std::size_t(i)] = -0.5 * eta1 * eta1 * cii;
        drift2[std::size_t(i)] = -0.5 * eta2 * eta2 * cii;
    }

    const auto payoff_of = [&](double vix2) {
        switch (payoff.kind) {
            case PayoffKind::Future: return std::sqrt(vix2);
            case PayoffKind::Call: return std::max(std::sqrt(vix2) - payoff.strike, 0.0);
            case PayoffKind::Put: return std::max(payoff.strike - std::sqrt(vix2), 0.0);
        }
        return 0.0;
    };

    constexpr std::int64_t chunk_size = 8192;
    const std::int64_t n_chunks = (cfg.samples + chunk_size - 1) / chunk_size;
    std::vector<ChunkSums> sums(std::size_t(n_chunks));

    const auto run_chunk = [&](std::int64_t c) {
        std::mt19937_64 eng(splitmix64(cfg.seed ^ splitmix64(std::uint64_t(c) + 1)));
        const std::int64_t count =
            std::min(chunk_size, cfg.samples - c * chunk_size);
        std::vector<double> z(std::size_t(n));
        ChunkSums acc;
        for (std::int64_t s = 0; s < count; ++s) {
            for (int i = 0; i < n; ++i) z[std::size_t(i)] = inv_norm_cdf(uniform01(eng));
            double gp = 0.0;  // proxy Gaussian component w . (L z)
            double vix2 = 0.0;
            for (int i = 0; i < n; ++i) {
                double dot = 0.0;
                const double* row = &chol[std::size_t(i) * n];
                for (int j = 0; j <= i; ++j) dot += row[j] * z[std::size_t(j)];
                gp += w[std::size_t(i)] * dot;
                const double mix =
                    lambda * std::exp(eta1 * dot + drift1[std::size_t(i)]) +
                    (1.0 - lambda) * std::exp(eta2 * dot + drift2[std::size_t(i)]);
                vix2 += xi[std::size_t(i)] * mix;
            }
            vix2 /= n;
            const double y = payoff_of(vix2);
            acc.y += y;
            acc.y2 += y * y;
            if (cfg.control_variate) {
                const double proxy =
                    bar_xi * (lambda * std::exp(grid_proxy.mu1 + eta1 * gp) +
                              (1.0 - lambda) * std::exp(grid_proxy.mu2 + eta2 * gp));
                const double cv = payoff_of(proxy);
                acc.cv += cv;
                acc.cv2 += cv * cv;
                acc.ycv += y * cv;
            }
        }
        sums[std::size_t(c)] = acc;
    };

    if (cfg.parallel) {
        #pragma omp parallel for schedule(dynamic)
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        for (std::int64_t c = 0; c < n_chunks; ++c) run_chunk(c);
    }

    // Ordered reduction; the pilot prefix sets the control coefficient.
    const std::int64_t pilot_chunks = std::max<std::int64_t>(1, n_chunks / 20);
    ChunkSums pilot, total;
    std::int64_t pilot_count = 0;
    for (std::int64_t c = 0; c < n_chunks; ++c) {
        const ChunkSums& s = sums[std::size_t(c)];
        total.y += s.y;
        total.y2 += s.y2;
        total.cv += s.cv;
        total.cv2 += s.cv2;
        total.ycv += s.ycv;
        if (c < pilot_chunks) {
            pilot.y += s.y;
            pilot.y2 += s.y2;
            pilot.cv += s.cv;
            pilot.cv2 += s.cv2;
            pilot.ycv += s.ycv;
            pilot_count += std::min(chunk_size, cfg.samples - c * chunk_size);
        }
    }

    const double m = double(cfg.samples);
    double beta = 0.0;
    if (cfg.control_variate && pilot_count > 1) {
        const double pm = double(pilot_count);
        const double cov_ycv = pilot.ycv / pm - (pilot.y / pm) * (pilot.cv / pm);
        const double var_cv = pilot.cv2 / pm - (pilot.cv / pm) * (pilot.cv / pm);
        if (var_cv > 0.0) beta = cov_ycv / var_cv;
    }

    const double mean_y = total.y / m;
    const double mean_cv = total.cv / m;
    const double var_plain = std::max(total.y2 / m - mean_y * mean_y, 0.0);
    const double mean_adj = mean_y - beta * mean_cv;
    const double var_adj = std::max(
        (total.y2 - 2.0 * beta * total.ycv + beta * beta * total.cv2) / m - mean_adj * mean_adj,
        0.0);

    McEstimate est;
    est.price = mean_y - beta * (mean_cv - cv_expectation);
    est.samples_used = cfg.samples;
    const double bessel = m > 1.0 ? m / (m - 1.0) : 1.0;
    est.std_error = std::sqrt(var_adj * bessel / m);
    est.ci95_halfwidth = 1.96 * est.std_error;
    est.variance_reduction_factor =
        var_adj > 0.0 ? var_plain / var_adj
                      : (var_plain > 0.0 ? var_plain / (var_plain * 1e-16) : 1.0);
    return est;
}

McEstimate rough_mc_price(const SingleModel& model, const Payoff& payoff,
                          const McConfig& cfg) {
    return rough_mc_price(as_mixture(model), payoff, cfg);
}

} // namespace vixexp
