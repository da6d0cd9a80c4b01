#include "vixexp/curve.hpp"

#include "vixexp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vixexp {

VixWindow::VixWindow(double maturity_, double delta_) : maturity(maturity_), delta(delta_) {
    if (!(maturity > 0.0) || !std::isfinite(maturity))
        throw std::invalid_argument("VixWindow: maturity must be positive");
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw std::invalid_argument("VixWindow: delta must be positive");
}

ForwardVarianceCurve::ForwardVarianceCurve(std::vector<double> breakpoints,
                                           std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (breakpoints_.empty() || breakpoints_.size() != values_.size())
        throw std::invalid_argument("ForwardVarianceCurve: need matching non-empty breakpoints/values");
    double prev = 0.0;
    for (double b : breakpoints_) {
        if (!(b > prev) || !std::isfinite(b))
            throw std::invalid_argument("ForwardVarianceCurve: breakpoints must be strictly increasing and positive");
        prev = b;
    }
    for (double v : values_) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument("ForwardVarianceCurve: variance values must be strictly positive and finite");
    }
}

ForwardVarianceCurve ForwardVarianceCurve::constant(double xi0) {
    return ForwardVarianceCurve({1e9}, {xi0});
}

double ForwardVarianceCurve::value(double u) const {
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), u);
    if (it == breakpoints_.end()) return values_.back();
    return values_[std::size_t(it - breakpoints_.begin())];
}

std::vector<double> ForwardVarianceCurve::segment_edges(double a, double b) const {
    std::vector<double> edges{a};
    for (double bp : breakpoints_)
        if (bp > a && bp < b) edges.push_back(bp);
    edges.push_back(b);
    return edges;
}

double ForwardVarianceCurve::nu_xi0(const VixWindow& w) const {
    const auto edges = segment_edges(w.maturity, w.window_end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        acc += value(0.5 * (edges[i] + edges[i + 1])) * (edges[i + 1] - edges[i]);
    return acc / w.delta;
}

bool ForwardVarianceCurve::constant_on(const VixWindow& w) const {
    const auto edges = segment_edges(w.maturity, w.window_end());
    const double v0 = value(0.5 * (edges[0] + edges[1]));
    for (std::size_t i = 1; i + 1 < edges.size(); ++i)
        if (value(0.5 * (edges[i] + edges[i + 1])) != v0) return false;
    return true;
}

double nu0_mean(const ForwardVarianceCurve& curve, const VixWindow& w,
                const std::function<double(double)>& f, int nodes_per_segment) {
    const auto edges = curve.segment_edges(w.maturity, w.window_end());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double xi = curve.value(0.5 * (edges[i] + edges[i + 1]));
        num += xi * quad::integrate(edges[i], edges[i + 1], nodes_per_segment, f);
        den += xi * (edges[i + 1] - edges[i]);
    }
    return num / den;
}

double nu_mean(const VixWindow& w, const std::function<double(double)>& f, int nodes) {
    return quad::integrate(w.maturity, w.window_end(), nodes, f) / w.delta;
}

} // namespace vixexp
