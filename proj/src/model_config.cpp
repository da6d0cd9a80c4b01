#include "vixexp/model_config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vixexp {

using nlohmann::json;

KernelFamily ModelConfig::family() const {
    return is_mixed() ? mixed().family : single().kernel.family;
}

const VixWindow& ModelConfig::window() const {
    return is_mixed() ? mixed().window : single().window;
}

const ForwardVarianceCurve& ModelConfig::curve() const {
    return is_mixed() ? mixed().curve : single().curve;
}

namespace {

[[noreturn]] void config_error(const std::string& message) {
    throw std::invalid_argument("model config: " + message);
}

double require_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        config_error(std::string("missing or non-numeric field '") + key + "'");
    return j.at(key).get<double>();
}

ForwardVarianceCurve parse_curve(const json& j) {
    if (!j.contains("curve")) config_error("missing 'curve'");
    const json& c = j.at("curve");
    if (c.contains("xi0")) return ForwardVarianceCurve::constant(require_number(c, "xi0"));
    if (!c.contains("breakpoints") || !c.contains("values"))
        config_error("'curve' needs either 'xi0' or 'breakpoints' + 'values'");
    std::vector<double> breakpoints, values;
    for (const auto& v : c.at("breakpoints")) breakpoints.push_back(v.get<double>());
    for (const auto& v : c.at("values")) values.push_back(v.get<double>());
    return ForwardVarianceCurve(std::move(breakpoints), std::move(values));
}

VixWindow parse_window(const json& j) {
    if (!j.contains("window")) config_error("missing 'window'");
    const json& w = j.at("window");
    const double maturity = require_number(w, "T");
    const double delta = w.contains("delta") ? require_number(w, "delta") : 1.0 / 12.0;
    return VixWindow(maturity, delta);
}

KernelFamily parse_family(const json& m) {
    if (!m.contains("family") || !m.at("family").is_string())
        config_error("model needs a 'family' string");
    const std::string family = m.at("family").get<std::string>();
    if (family == "exponential") return KernelFamily::Exponential;
    if (family == "power") return KernelFamily::Power;
    config_error("unknown family '" + family + "' (use 'exponential' or 'power')");
}

} // namespace

ModelConfig parse_model_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        config_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.contains("model")) config_error("missing 'model'");
    const json& m = j.at("model");
    const KernelFamily family = parse_family(m);
    ForwardVarianceCurve curve = parse_curve(j);
    const VixWindow window = parse_window(j);

    const bool mixed = m.contains("lambda") || m.contains("vol1") || m.contains("vol2");
    if (mixed) {
        const double shape = require_number(m, family == KernelFamily::Exponential ? "k" : "H");
        MixedModelSpec spec(family, shape, require_number(m, "vol1"), require_number(m, "vol2"),
                            require_number(m, "lambda"), std::move(curve), window);
        return ModelConfig{std::move(spec)};
    }
    Kernel kernel = family == KernelFamily::Exponential
                        ? Kernel::exponential(require_number(m, "omega"), require_number(m, "k"))
                        : Kernel::power(require_number(m, "eta"), require_number(m, "H"));
    return ModelConfig{SingleModel{kernel, std::move(curve), window}};
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("model config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_model_config(buffer.str());
}

} // namespace vixexp
