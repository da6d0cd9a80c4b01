#pragma once

#include "vixexp/expansion.hpp"
#include "vixexp/mixed.hpp"

#include <filesystem>
#include <string>
#include <variant>

namespace vixexp {

/// A parsed model configuration: either a single-kernel model or a mixture,
/// with its curve and VIX window.
struct ModelConfig {
    std::variant<SingleModel, MixedModelSpec> model;

    bool is_mixed() const { return std::holds_alternative<MixedModelSpec>(model); }
    const SingleModel& single() const { return std::get<SingleModel>(model); }
    const MixedModelSpec& mixed() const { return std::get<MixedModelSpec>(model); }
    KernelFamily family() const;
    const VixWindow& window() const;
    const ForwardVarianceCurve& curve() const;
};

/// Parses the JSON config, e.g.
///   {"model": {"family":"power","eta":1.0,"H":0.1},
///    "curve": {"xi0": 0.055225},
///    "window": {"T": 0.0833333, "delta": 0.0833333}}
/// Mixed models replace eta/omega with vol1/vol2/lambda; curves may give
/// explicit {"breakpoints": [...], "values": [...]}.
ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::filesystem::path& path);

} // namespace vixexp
