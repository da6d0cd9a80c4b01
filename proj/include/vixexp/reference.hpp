#pragma once

#include "vixexp/expansion.hpp"
#include "vixexp/mixed.hpp"

#include <cstdint>

namespace vixexp {

/// Node counts for the Markovian two-dimensional quadrature pricer.
struct QuadConfig {
    int time_nodes = 80;
    int space_nodes = 80;
};

/// Monte Carlo configuration for the exact-Gaussian rough pricer.
/// Identical (seed, config, model) inputs give bit-identical estimates for
/// any worker count: samples are processed in fixed-size chunks with
/// per-chunk deterministic RNG streams and an ordered final reduction.
struct McConfig {
    std::int64_t samples = 200000;
    int grid_points = 300;
    std::uint64_t seed = 0;
    bool control_variate = true;
    bool parallel = true;  // serial chunk loop when false (reference path)
};

struct McEstimate {
    double price = 0.0;
    double std_error = 0.0;
    double ci95_halfwidth = 0.0;
    std::int64_t samples_used = 0;
    double variance_reduction_factor = 1.0;
};

/// Deterministic 2-D quadrature price in the (mixed) exponential-kernel model
/// via its one-factor Markovian representation. Throws for power kernels.
double bergomi_quadrature_price(const MixedModelSpec& spec, const Payoff& payoff,
                                const QuadConfig& cfg = {});
double bergomi_quadrature_price(const SingleModel& model, const Payoff& payoff,
                                const QuadConfig& cfg = {});

/// Monte Carlo price in the (mixed) power-kernel model: the forward-variance
/// vector over a midpoint rectangle grid is simulated exactly from its
/// Gaussian law, with the discretized lognormal proxy as control variate.
/// Throws for exponential kernels.
McEstimate rough_mc_price(const MixedModelSpec& spec, const Payoff& payoff,
                          const McConfig& cfg = {});
McEstimate rough_mc_price(const SingleModel& model, const Payoff& payoff,
                          const McConfig& cfg = {});

} // namespace vixexp
