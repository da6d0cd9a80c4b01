#include "vixexp/calibration.hpp"

#include "vixexp/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace vixexp {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_field(const std::string& field, int line, const char* name) {
    const std::string t = trim(field);
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("quotes line " + std::to_string(line) + ": bad " + name +
                                    " value '" + t + "'");
    }
    if (pos != t.size())
        throw std::invalid_argument("quotes line " + std::to_string(line) + ": bad " + name +
                                    " value '" + t + "'");
    return value;
}

} // namespace

std::vector<SmileSlice> load_quotes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("load_quotes: cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("load_quotes: empty file " + path.string());
    {
        std::stringstream header(line);
        std::string field;
        const char* expected[] = {"maturity_years", "futures", "strike", "implied_vol"};
        for (const char* name : expected) {
            if (!std::getline(header, field, ',') || trim(field) != name)
                throw std::invalid_argument(
                    "load_quotes: bad header, expected maturity_years,futures,strike,implied_vol");
        }
    }

    std::map<double, SmileSlice> slices;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream row(line);
        std::string fields[4];
        for (int i = 0; i < 4; ++i) {
            if (!std::getline(row, fields[i], ','))
                throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                            ": expected 4 comma-separated fields");
        }
        std::string extra;
        if (std::getline(row, extra, ','))
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": expected 4 comma-separated fields");

        const double maturity = parse_field(fields[0], line_no, "maturity_years");
        const double futures = parse_field(fields[1], line_no, "futures");
        const double strike = parse_field(fields[2], line_no, "strike");
        const double iv = parse_field(fields[3], line_no, "implied_vol");
        if (!(maturity > 0.0))
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": maturity must be > 0");
        if (!(futures > 0.0))
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": futures must be > 0");
        if (!(strike > 0.0))
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": strike must be > 0");
        if (!(iv > 0.0))
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": implied_vol must be > 0");

        auto [it, inserted] = slices.try_emplace(maturity);
        SmileSlice& slice = it->second;
        if (inserted) {
            slice.maturity = maturity;
            slice.futures_mid = futures;
        } else if (slice.futures_mid != futures) {
            throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                        ": futures differs from earlier rows of this maturity");
        }
        for (const auto& q : slice.quotes)
            if (q.first == strike)
                throw std::invalid_argument("quotes line " + std::to_string(line_no) +
                                            ": duplicate (maturity, strike) quote");
        slice.quotes.emplace_back(strike, iv);
    }

    std::vector<SmileSlice> out;
    out.reserve(slices.size());
    for (auto& [key, slice] : slices) {
        std::sort(slice.quotes.begin(), slice.quotes.end());
        out.push_back(std::move(slice));
    }
    return out;
}

namespace {

MixedModelSpec make_spec(KernelFamily family, double shape, double vol1, double vol2,
                         double lambda, double xi0, const VixWindow& window) {
    return MixedModelSpec(family, shape, vol1, vol2, lambda,
                          ForwardVarianceCurve::constant(xi0), window);
}

} // namespace

double match_futures(double futures_mid, KernelFamily family, double shape, double vol1,
                     double vol2, double lambda, const VixWindow& window,
                     const MixedSettings& pricing) {
    if (!(futures_mid > 0.0))
        throw std::domain_error("match_futures: futures must be > 0");
    const double unit_price =
        mixed_expansion_price(make_spec(family, shape, vol1, vol2, lambda, 1.0, window),
                              MixedPayoff::future(), pricing)
            .price;
    double xi0 = futures_mid * futures_mid / (unit_price * unit_price);

    // sqrt scaling is exact for a window-constant curve; polish if FP noise bites
    for (int iter = 0; iter < 50; ++iter) {
        const double priced =
            mixed_expansion_price(make_spec(family, shape, vol1, vol2, lambda, xi0, window),
                                  MixedPayoff::future(), pricing)
                .price;
        if (std::abs(priced - futures_mid) <= 1e-12) break;
        xi0 *= (futures_mid / priced) * (futures_mid / priced);
    }
    return xi0;
}

namespace {

struct Objective {
    const SmileSlice& slice;
    KernelFamily family;
    double shape;
    const CalibrationSettings& settings;
    mutable int evaluations = 0;

    // residuals of model vs market implied vols; also reports xi0
    std::vector<double> operator()(const std::array<double, 3>& theta, double& xi0) const {
        ++evaluations;
        const VixWindow window(slice.maturity, settings.delta);
        xi0 = match_futures(slice.futures_mid, family, shape, theta[0], theta[1], theta[2],
                            window, settings.pricing);
        const MixedModelSpec spec =
            make_spec(family, shape, theta[0], theta[1], theta[2], xi0, window);
        const double forward =
            mixed_expansion_price(spec, MixedPayoff::future(), settings.pricing).price;
        std::vector<double> res(slice.quotes.size());
        for (std::size_t i = 0; i < slice.quotes.size(); ++i) {
            const auto& [strike, market_iv] = slice.quotes[i];
            double model_iv;
            try {
                const double price =
                    mixed_expansion_price(spec, MixedPayoff::call(strike), settings.pricing)
                        .price;
                model_iv = implied_vol(price, forward, strike);
            } catch (const std::domain_error&) {
                model_iv = 10.0;  // out-of-bounds price; large residual pushes back
            }
            res[i] = model_iv - market_iv;
        }
        return res;
    }
};

double cost_of(const std::vector<double>& r) {
    double acc = 0.0;
    for (double v : r) acc += v * v;
    return acc;
}

// Solve the 3x3 system a x = b by Gaussian elimination with partial pivoting.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b,
            std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (a[pivot][col] == 0.0) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int row = col + 1; row < 3; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[row][c] -= f * a[col][c];
            b[row] -= f * b[col];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double sum = b[row];
        for (int c = row + 1; c < 3; ++c) sum -= a[row][c] * x[c];
        if (a[row][row] == 0.0) return false;
        x[row] = sum / a[row][row];
    }
    return true;
}

} // namespace

CalibrationResult calibrate_slice(const SmileSlice& slice, KernelFamily family, double shape,
                                  std::array<double, 3> initial,
                                  const CalibrationSettings& settings) {
    if (slice.quotes.size() < 3)
        throw std::invalid_argument("calibrate_slice: need at least 3 quotes for 3 parameters");

    const std::array<double, 3> lower{0.0, 0.0, 0.0};
    const std::array<double, 3> upper{settings.vol_upper, settings.vol_upper, 1.0};
    const auto clamp_box = [&](std::array<double, 3> t) {
        for (int i = 0; i < 3; ++i) t[i] = std::clamp(t[i], lower[i], upper[i]);
        return t;
    };

    Objective objective{slice, family, shape, settings};
    std::array<double, 3> theta = clamp_box(initial);
    double xi0 = 0.0;
    std::vector<double> residuals = objective(theta, xi0);
    double cost = cost_of(residuals);

    // Box-projected Levenberg-Marquardt with forward-difference Jacobian.
    double mu = 1e-3;
    bool converged = false;
    int accepted_steps = 0;
    const std::size_t m = residuals.size();
    while (objective.evaluations < settings.max_evaluations) {
        std::array<std::vector<double>, 3> jac;
        bool budget_hit = false;
        for (int p = 0; p < 3 && !budget_hit; ++p) {
            double h = 1e-6 * std::max(1.0, std::abs(theta[p]));
            std::array<double, 3> shifted = theta;
            if (theta[p] + h > upper[p]) h = -h;
            shifted[p] = theta[p] + h;
            if (objective.evaluations >= settings.max_evaluations) {
                budget_hit = true;
                break;
            }
            double xi_tmp;
            const std::vector<double> r_shift = objective(shifted, xi_tmp);
            jac[p].resize(m);
            for (std::size_t i = 0; i < m; ++i) jac[p][i] = (r_shift[i] - residuals[i]) / h;
        }
        if (budget_hit) break;

        std::array<double, 3> grad{};
        std::array<std::array<double, 3>, 3> jtj{};
        for (int p = 0; p < 3; ++p) {
            for (std::size_t i = 0; i < m; ++i) grad[p] += jac[p][i] * residuals[i];
            for (int q = p; q < 3; ++q) {
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) s += jac[p][i] * jac[q][i];
                jtj[p][q] = jtj[q][p] = s;
            }
        }
        const double grad_norm = std::max({std::abs(grad[0]), std::abs(grad[1]), std::abs(grad[2])});
        if (grad_norm <= settings.tolerance) {
            converged = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 8 && objective.evaluations < settings.max_evaluations;
             ++attempt) {
            std::array<std::array<double, 3>, 3> damped = jtj;
            for (int p = 0; p < 3; ++p)
                damped[p][p] += mu * std::max(jtj[p][p], 1e-12);
            std::array<double, 3> delta{};
            if (!solve3(damped, {-grad[0], -grad[1], -grad[2]}, delta)) {
                mu *= 4.0;
                continue;
            }
            const std::array<double, 3> candidate = clamp_box(
                {theta[0] + delta[0], theta[1] + delta[1], theta[2] + delta[2]});
            const double step = std::max({std::abs(candidate[0] - theta[0]),
                                          std::abs(candidate[1] - theta[1]),
                                          std::abs(candidate[2] - theta[2])});
            if (step <= settings.tolerance * (1.0 + std::abs(theta[0]) + std::abs(theta[1]))) {
                converged = true;
                stepped = false;
                break;
            }
            double xi_try;
            const std::vector<double> r_try = objective(candidate, xi_try);
            const double cost_try = cost_of(r_try);
            if (cost_try < cost) {
                theta = candidate;
                residuals = r_try;
                cost = cost_try;
                xi0 = xi_try;
                mu = std::max(mu / 3.0, 1e-12);
                stepped = true;
                ++accepted_steps;
                break;
            }
            mu *= 4.0;
        }
        if (converged) break;
        if (!stepped) {
            // damping exhausted without improvement: local minimum within tolerance
            converged = grad_norm <= std::sqrt(settings.tolerance);
            break;
        }
    }

    CalibrationResult result;
    result.maturity = slice.maturity;
    result.xi0 = xi0;
    result.vol1 = theta[0];
    result.vol2 = theta[1];
    result.lambda = theta[2];
    result.rmse_iv = std::sqrt(cost / double(m));
    result.iterations = accepted_steps;
    result.converged = converged || result.rmse_iv <= 1e-8;
    return result;
}

std::vector<CalibrationResult> calibrate_surface(std::span<const SmileSlice> slices,
                                                 KernelFamily family, double shape,
                                                 std::array<double, 3> initial,
                                                 const CalibrationSettings& settings) {
    std::vector<const SmileSlice*> ordered;
    ordered.reserve(slices.size());
    for (const SmileSlice& s : slices) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](const SmileSlice* a, const SmileSlice* b) { return a->maturity < b->maturity; });

    std::vector<CalibrationResult> results;
    results.reserve(ordered.size());
    std::array<double, 3> start = initial;
    for (const SmileSlice* slice : ordered) {
        try {
            CalibrationResult r = calibrate_slice(*slice, family, shape, start, settings);
            if (r.converged) start = {r.vol1, r.vol2, r.lambda};  // warm start
            results.push_back(r);
        } catch (const std::exception&) {
            CalibrationResult failed;
            failed.maturity = slice->maturity;
            failed.vol1 = start[0];
            failed.vol2 = start[1];
            failed.lambda = start[2];
            failed.rmse_iv = std::numeric_limits<double>::quiet_NaN();
            failed.converged = false;
            results.push_back(failed);
        }
    }
    return results;
}

} // namespace vixexp
