#include <CLI11.hpp>
#include <json.hpp>

#include "vixexp/black_scholes.hpp"
#include "vixexp/calibration.hpp"
#include "vixexp/model_config.hpp"
#include "vixexp/reference.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace vixexp;

void apply_thread_cap() {
#ifdef _OPENMP
    if (const char* env = std::getenv("VIXEXP_THREADS")) {
        const int threads = std::atoi(env);
        if (threads >= 1) omp_set_num_threads(threads);
    }
#endif
}

void write_output(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write output file " + path);
    out << text << "\n";
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Payoff parse_payoff(const std::string& kind, double strike) {
    if (kind == "future") return Payoff::future();
    if (kind == "call") return Payoff::call(strike);
    if (kind == "put") return Payoff::put(strike);
    throw std::invalid_argument("payoff must be future, call, or put");
}

struct PricingOptions {
    std::int64_t samples = 200000;
    int grid_points = 300;
    std::uint64_t seed = 0;
    int time_nodes = 80;
    int space_nodes = 80;
    int hermite_nodes = 80;
    bool split_kink = false;
    bool serial = false;

    McConfig mc() const {
        McConfig cfg;
        cfg.samples = samples;
        cfg.grid_points = grid_points;
        cfg.seed = seed;
        cfg.parallel = !serial;
        return cfg;
    }
    QuadConfig quadrature() const { return QuadConfig{time_nodes, space_nodes}; }
    MixedSettings mixed() const {
        return MixedSettings{hermite_nodes, split_kink ? MixedQuadMode::SplitAtKink
                                                       : MixedQuadMode::PlainHermite};
    }
};

void add_pricing_options(CLI::App* cmd, PricingOptions& opts) {
    cmd->add_option("--samples", opts.samples, "Monte Carlo samples (reference, power family)");
    cmd->add_option("--grid-points", opts.grid_points, "rectangle-scheme grid size n");
    cmd->add_option("--seed", opts.seed, "Monte Carlo seed");
    cmd->add_option("--time-nodes", opts.time_nodes, "quadrature nodes in the maturity variable");
    cmd->add_option("--space-nodes", opts.space_nodes, "quadrature nodes in the state variable");
    cmd->add_option("--hermite-nodes", opts.hermite_nodes, "Gauss-Hermite nodes (mixed proxy)");
    cmd->add_flag("--split-kink", opts.split_kink,
                  "integrate mixed payoffs split at the kink instead of plain Gauss-Hermite");
    cmd->add_flag("--serial", opts.serial, "disable parallel Monte Carlo chunks");
}

json expansion_json(const ModelConfig& cfg, const Payoff& payoff, const PricingOptions& opts) {
    json out;
    out["method"] = "expansion";
    if (!cfg.is_mixed()) {
        const ExpansionResult r = expansion_price(cfg.single(), payoff);
        out["price"] = r.price;
        out["terms"] = {{"proxy_price", r.proxy_price},
                        {"order_terms", r.order_terms},
                        {"corrections", r.corrections},
                        {"gamma", {r.gammas.gamma1, r.gammas.gamma2, r.gammas.gamma3}},
                        {"mu_p", r.proxy.mu_p},
                        {"sigma_p", r.proxy.sigma_p}};
    } else {
        const MixedExpansionResult r =
            mixed_expansion_price(cfg.mixed(), MixedPayoff::from(payoff), opts.mixed());
        out["price"] = r.price;
        out["terms"] = {{"proxy_price", r.proxy_price},
                        {"order_terms", r.corrections.p},
                        {"gamma", r.corrections.gammas}};
    }
    return out;
}

double reference_price(const ModelConfig& cfg, const Payoff& payoff, const PricingOptions& opts,
                       json* detail = nullptr) {
    if (cfg.family() == KernelFamily::Exponential) {
        const double price =
            cfg.is_mixed()
                ? bergomi_quadrature_price(cfg.mixed(), payoff, opts.quadrature())
                : bergomi_quadrature_price(cfg.single(), payoff, opts.quadrature());
        if (detail) (*detail)["reference"] = "quadrature";
        return price;
    }
    const McEstimate est = cfg.is_mixed() ? rough_mc_price(cfg.mixed(), payoff, opts.mc())
                                          : rough_mc_price(cfg.single(), payoff, opts.mc());
    if (detail) {
        (*detail)["reference"] = "monte_carlo";
        (*detail)["ci"] = {{"std_error", est.std_error},
                           {"ci95_halfwidth", est.ci95_halfwidth},
                           {"samples_used", est.samples_used},
                           {"variance_reduction_factor", est.variance_reduction_factor},
                           {"seed", opts.seed}};
    }
    return est.price;
}

std::vector<double> make_strikes(const std::vector<double>& list, double lo, double hi, int count) {
    if (!list.empty()) return list;
    if (!(count >= 2) || !(hi > lo) || !(lo > 0.0))
        throw std::invalid_argument("strike range needs 0 < min < max and count >= 2");
    std::vector<double> strikes(std::size_t(count));
    for (int i = 0; i < count; ++i)
        strikes[std::size_t(i)] = lo + (hi - lo) * double(i) / double(count - 1);
    return strikes;
}

std::optional<double> fit_slope(const std::vector<double>& deltas,
                                const std::vector<double>& errors) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        if (std::isfinite(errors[i]) && errors[i] > 1e-12)
            pts.emplace_back(std::log(deltas[i]), std::log(errors[i]));
    if (pts.size() < 3) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = double(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_price(const std::string& config_path, const std::string& payoff_kind, double strike,
              const std::string& method, const PricingOptions& opts, const std::string& output) {
    const ModelConfig cfg = load_model_config(config_path);
    const Payoff payoff = parse_payoff(payoff_kind, strike);
    json out;
    out["payoff"] = payoff_kind;
    if (payoff.kind != PayoffKind::Future) out["strike"] = payoff.strike;
    if (method == "expansion") {
        out.update(expansion_json(cfg, payoff, opts));
    } else if (method == "reference") {
        out["method"] = "reference";
        out["price"] = reference_price(cfg, payoff, opts, &out);
    } else {
        throw std::invalid_argument("method must be expansion or reference");
    }
    write_output(out.dump(2), output);
    return 0;
}

int cmd_smile(const std::string& config_path, const std::vector<double>& strike_list,
              double strike_min, double strike_max, int strike_count, bool with_reference,
              const PricingOptions& opts, const std::string& output) {
    const ModelConfig cfg = load_model_config(config_path);
    const std::vector<double> strikes =
        make_strikes(strike_list, strike_min, strike_max, strike_count);

    const std::vector<SmilePoint> smile =
        cfg.is_mixed() ? mixed_expansion_smile(cfg.mixed(), strikes, opts.mixed())
                       : expansion_smile(cfg.single(), strikes);

    std::vector<std::optional<double>> reference_iv;
    if (with_reference) {
        const double fwd_ref = reference_price(cfg, Payoff::future(), opts);
        reference_iv.resize(strikes.size());
        for (std::size_t i = 0; i < strikes.size(); ++i) {
            try {
                const double price = reference_price(cfg, Payoff::call(strikes[i]), opts);
                reference_iv[i] = implied_vol(price, fwd_ref, strikes[i]);
            } catch (const std::domain_error&) {
                reference_iv[i] = std::nullopt;
            }
        }
    }

    std::ostringstream csv;
    csv << "strike,iv";
    if (with_reference) csv << ",iv_ref";
    csv << "\n";
    for (std::size_t i = 0; i < smile.size(); ++i) {
        csv << format_double(smile[i].strike) << ",";
        if (smile[i].iv)
            csv << format_double(*smile[i].iv);
        else
            std::cerr << "warning: strike " << format_double(smile[i].strike)
                      << " priced outside the no-arbitrage band; iv left empty\n";
        if (with_reference) {
            csv << ",";
            if (reference_iv[i]) csv << format_double(*reference_iv[i]);
        }
        csv << "\n";
    }
    if (output.empty())
        std::cout << csv.str();
    else {
        std::ofstream f(output, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write output file " + output);
        f << csv.str();
    }
    return 0;
}

int cmd_convergence(const std::string& config_path, const std::string& payoff_kind,
                    double strike, std::vector<double> deltas, double delta_min,
                    double delta_max, int delta_count, const PricingOptions& opts,
                    const std::string& output) {
    const ModelConfig base = load_model_config(config_path);
    const Payoff payoff = parse_payoff(payoff_kind, strike);
    if (deltas.empty()) {
        deltas.resize(std::size_t(delta_count));
        for (int i = 0; i < delta_count; ++i)
            deltas[std::size_t(i)] =
                delta_min + (delta_max - delta_min) * double(i) / double(delta_count - 1);
    }
    if (deltas.size() < 3) throw std::invalid_argument("convergence needs at least 3 deltas");

    std::vector<double> expansion(deltas.size()), reference(deltas.size()),
        abs_error(deltas.size());
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const VixWindow window(base.window().maturity, deltas[i]);
        ModelConfig cfg = base;
        if (cfg.is_mixed()) {
            MixedModelSpec spec = cfg.mixed();
            cfg.model = MixedModelSpec(spec.family, spec.shape, spec.vol1, spec.vol2,
                                       spec.lambda, spec.curve, window);
        } else {
            cfg.model = SingleModel{cfg.single().kernel, cfg.single().curve, window};
        }
        expansion[i] = cfg.is_mixed()
                           ? mixed_expansion_price(cfg.mixed(), MixedPayoff::from(payoff),
                                                   opts.mixed())
                                 .price
                           : expansion_price(cfg.single(), payoff).price;
        try {
            reference[i] = reference_price(cfg, payoff, opts);
            abs_error[i] = std::abs(expansion[i] - reference[i]);
        } catch (const std::exception& e) {
            std::cerr << "warning: reference failed at delta " << format_double(deltas[i])
                      << ": " << e.what() << "\n";
            reference[i] = std::numeric_limits<double>::quiet_NaN();
            abs_error[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }

    const std::optional<double> slope = fit_slope(deltas, abs_error);
    const double expected_order =
        base.family() == KernelFamily::Exponential
            ? 3.0
            : 3.0 * (base.is_mixed() ? base.mixed().shape : base.single().kernel.shape);

    std::ostringstream csv;
    csv << "delta,expansion,reference,abs_error\n";
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        csv << format_double(deltas[i]) << "," << format_double(expansion[i]) << ",";
        if (std::isfinite(reference[i]))
            csv << format_double(reference[i]) << "," << format_double(abs_error[i]);
        else
            csv << ",";
        csv << "\n";
    }
    std::cout << csv.str();

    if (!output.empty()) {
        json j;
        j["deltas"] = deltas;
        j["expansion"] = expansion;
        j["reference"] = json::array();
        j["abs_errors"] = json::array();
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            j["reference"].push_back(std::isfinite(reference[i]) ? json(reference[i]) : json());
            j["abs_errors"].push_back(std::isfinite(abs_error[i]) ? json(abs_error[i]) : json());
        }
        j["fitted_slope"] = slope ? json(*slope) : json();
        j["expected_order"] = expected_order;
        write_output(j.dump(2), output);
    }
    return 0;
}

int cmd_calibrate(const std::string& quotes_path, const std::string& family_name, double shape,
                  std::vector<double> initial, double delta, const PricingOptions& opts,
                  const std::string& output) {
    KernelFamily family;
    if (family_name == "exponential")
        family = KernelFamily::Exponential;
    else if (family_name == "power")
        family = KernelFamily::Power;
    else
        throw std::invalid_argument("family must be exponential or power");
    if (initial.size() != 3)
        throw std::invalid_argument("--initial needs three values: vol1,vol2,lambda");

    const std::vector<SmileSlice> slices = load_quotes(quotes_path);
    CalibrationSettings settings;
    settings.delta = delta;
    settings.pricing = opts.mixed();
    const std::vector<CalibrationResult> results = calibrate_surface(
        slices, family, shape, {initial[0], initial[1], initial[2]}, settings);

    json j = json::array();
    for (const CalibrationResult& r : results) {
        json item;
        item["maturity"] = r.maturity;
        item["xi0"] = r.xi0;
        item["vol1"] = r.vol1;
        item["vol2"] = r.vol2;
        item["lambda"] = r.lambda;
        item["rmse_iv"] = std::isfinite(r.rmse_iv) ? json(r.rmse_iv) : json();
        item["iterations"] = r.iterations;
        item["converged"] = r.converged;
        j.push_back(item);
    }
    write_output(j.dump(2), output);
    return 0;
}

int cmd_coeffs(const std::string& config_path, const std::string& output) {
    const ModelConfig cfg = load_model_config(config_path);
    json out;
    out["nu_xi0"] = cfg.curve().nu_xi0(cfg.window());
    if (!cfg.is_mixed()) {
        const ProxyParams proxy = proxy_params(cfg.single());
        const GammaCoefficients g = gamma_coefficients(cfg.single());
        out["mu_p"] = proxy.mu_p;
        out["sigma_p"] = proxy.sigma_p;
        out["gamma1"] = g.gamma1;
        out["gamma2"] = g.gamma2;
        out["gamma3"] = g.gamma3;
    } else {
        const MixedModelSpec& spec = cfg.mixed();
        const MixedProxyParams proxy = mixed_proxy_params(spec);
        json components = json::array();
        for (int j = 1; j <= 2; ++j) {
            json c;
            c["mu_p"] = j == 1 ? proxy.mu1 : proxy.mu2;
            c["sigma_p"] = j == 1 ? proxy.sigma1 : proxy.sigma2;
            c["weight"] = spec.component_weight(j);
            if (spec.component_active(j)) {
                const GammaCoefficients g = gamma_coefficients(
                    SingleModel{spec.component_kernel(j), spec.curve, spec.window});
                c["gamma1"] = g.gamma1;
                c["gamma2"] = g.gamma2;
                c["gamma3"] = g.gamma3;
            } else {
                c["gamma1"] = 0.0;
                c["gamma2"] = 0.0;
                c["gamma3"] = 0.0;
            }
            components.push_back(c);
        }
        out["components"] = components;
    }
    write_output(out.dump(2), output);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"VIX futures and options: proxy expansions, reference pricers, calibration"};
    app.require_subcommand(1);

    std::string config_path, output, payoff_kind = "future", method = "expansion";
    double strike = 0.0;
    PricingOptions opts;

    auto* price = app.add_subcommand("price", "price one payoff");
    price->add_option("--config", config_path, "model config JSON")->required();
    price->add_option("--payoff", payoff_kind, "future|call|put");
    price->add_option("--strike", strike, "strike for call/put");
    price->add_option("--method", method, "expansion|reference");
    price->add_option("--output", output, "write JSON here instead of stdout");
    add_pricing_options(price, opts);

    std::vector<double> strike_list;
    double strike_min = 0.0, strike_max = 0.0;
    int strike_count = 0;
    bool with_reference = false;
    auto* smile = app.add_subcommand("smile", "implied-vol smile as CSV");
    smile->add_option("--config", config_path, "model config JSON")->required();
    smile->add_option("--strikes", strike_list, "explicit strike list")->delimiter(',');
    smile->add_option("--strike-min", strike_min, "lowest strike of a uniform range");
    smile->add_option("--strike-max", strike_max, "highest strike of a uniform range");
    smile->add_option("--strike-count", strike_count, "number of strikes in the range");
    smile->add_flag("--reference", with_reference, "add a reference-pricer iv column");
    smile->add_option("--output", output, "write CSV here instead of stdout");
    add_pricing_options(smile, opts);

    std::vector<double> deltas;
    double delta_min = 0.05, delta_max = 0.25;
    int delta_count = 10;
    auto* convergence = app.add_subcommand(
        "convergence", "expansion-vs-reference error across window lengths");
    convergence->add_option("--config", config_path, "model config JSON")->required();
    convergence->add_option("--payoff", payoff_kind, "future|call|put");
    convergence->add_option("--strike", strike, "strike for call/put");
    convergence->add_option("--deltas", deltas, "explicit window lengths")->delimiter(',');
    convergence->add_option("--delta-min", delta_min, "smallest window length");
    convergence->add_option("--delta-max", delta_max, "largest window length");
    convergence->add_option("--delta-count", delta_count, "number of window lengths");
    convergence->add_option("--output", output, "write the JSON report here");
    add_pricing_options(convergence, opts);

    std::string quotes_path, family_name;
    double shape = 0.0, cal_delta = 1.0 / 12.0;
    std::vector<double> initial{1.5, 0.5, 0.5};
    auto* calibrate = app.add_subcommand("calibrate", "fit mixed-model smiles per maturity");
    calibrate->add_option("--quotes", quotes_path, "quotes CSV")->required();
    calibrate->add_option("--family", family_name, "exponential|power")->required();
    calibrate->add_option("--shape", shape, "fixed k (exponential) or H (power)")->required();
    calibrate->add_option("--initial", initial, "starting vol1,vol2,lambda")->delimiter(',');
    calibrate->add_option("--delta", cal_delta, "VIX window length in years");
    calibrate->add_option("--output", output, "write JSON here instead of stdout");
    add_pricing_options(calibrate, opts);

    auto* coeffs = app.add_subcommand("coeffs", "dump proxy parameters and gammas as JSON");
    coeffs->add_option("--config", config_path, "model config JSON")->required();
    coeffs->add_option("--output", output, "write JSON here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed())
            return cmd_price(config_path, payoff_kind, strike, method, opts, output);
        if (smile->parsed())
            return cmd_smile(config_path, strike_list, strike_min, strike_max, strike_count,
                             with_reference, opts, output);
        if (convergence->parsed())
            return cmd_convergence(config_path, payoff_kind, strike, deltas, delta_min,
                                   delta_max, delta_count, opts, output);
        if (calibrate->parsed())
            return cmd_calibrate(quotes_path, family_name, shape, initial, cal_delta, opts,
                                 output);
        if (coeffs->parsed()) return cmd_coeffs(config_path, output);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
