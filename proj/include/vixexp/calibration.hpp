#pragma once

#include "vixexp/mixed.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace vixexp {

/// One maturity's market data: futures mid and (strike, implied vol) quotes.
struct SmileSlice {
    double maturity;
    double futures_mid;
    std::vector<std::pair<double, double>> quotes;  // sorted by strike
};

/// Reads the quotes CSV (header: maturity_years,futures,strike,implied_vol),
/// one quote per row, grouped into slices sorted by maturity.
/// Malformed rows and duplicate (maturity, strike) keys raise errors carrying
/// the offending line number.
std::vector<SmileSlice> load_quotes(const std::filesystem::path& path);

struct CalibrationSettings {
    double delta = 1.0 / 12.0;
    int max_evaluations = 200;
    double tolerance = 1e-10;
    double vol_upper = 20.0;
    MixedSettings pricing{};
};

struct CalibrationResult {
    double maturity = 0.0;
    double xi0 = 0.0;
    double vol1 = 0.0;
    double vol2 = 0.0;
    double lambda = 0.0;
    double rmse_iv = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// The xi0 level repricing the market futures at fixed smile parameters.
/// On a window-constant curve every expansion term carries sqrt(nu(xi0)), so
/// xi0 = (F / P^F(xi0 = 1))^2; a guarded verification enforces |P^F - F| <= 1e-12.
double match_futures(double futures_mid, KernelFamily family, double shape, double vol1,
                     double vol2, double lambda, const VixWindow& window,
                     const MixedSettings& pricing = {});

/// Least-squares fit of (vol1, vol2, lambda) to one smile slice, re-solving
/// the futures match at every objective evaluation. Box constraints:
/// vols in [0, vol_upper], lambda in [0, 1].
CalibrationResult calibrate_slice(const SmileSlice& slice, KernelFamily family, double shape,
                                  std::array<double, 3> initial,
                                  const CalibrationSettings& settings = {});

/// Per-slice calibration in ascending maturity order, warm-starting each
/// slice from the previous result. Failures are recorded, later slices still run.
std::vector<CalibrationResult> calibrate_surface(std::span<const SmileSlice> slices,
                                                 KernelFamily family, double shape,
                                                 std::array<double, 3> initial,
                                                 const CalibrationSettings& settings = {});

} // namespace vixexp
