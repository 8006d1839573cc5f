#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hybridnet/params.hpp"

namespace hybridnet::scenarios {

struct ScenarioPreset {
    std::string name;
    NetworkParams params;
    std::string description;
};

/// Case-study presets: "ir780" (3 dB/km, y=1, n=1, z=0) and
/// "cband" (0.15 dB/km, y=2, n=1, z=2), sharing the remaining defaults.
ScenarioPreset ir780();
ScenarioPreset cband();

class PresetRegistry {
public:
    /// Registry holding ir780 and cband.
    static PresetRegistry with_builtins();

    /// Throws std::invalid_argument on a duplicate name, DomainError on invalid params.
    void add(ScenarioPreset preset);
    /// Throws std::out_of_range naming the unknown preset.
    const ScenarioPreset& get(std::string_view name) const;
    bool contains(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, ScenarioPreset, std::less<>> presets_;
};

/// Built-in lookup.
ScenarioPreset preset(std::string_view name);

// --- configuration files ----------------------------------------------------
//
// Flat `key = value` lines; `#` starts a comment. Keys are the NetworkParams
// field names plus `preset`, which selects the base parameter set that the
// remaining keys override. `tau = inf` (or omitting tau) means ideal storage.

/// Assigns one field by name. Throws std::invalid_argument on an unknown key
/// or an unparsable value.
void apply_setting(NetworkParams& params, std::string_view key, std::string_view value);

struct ConfigFile {
    std::optional<std::string> preset;
    NetworkParams params;
};

ConfigFile parse_config(std::string_view text,
                        const PresetRegistry& registry = PresetRegistry::with_builtins());
ConfigFile load_config(const std::filesystem::path& path,
                       const PresetRegistry& registry = PresetRegistry::with_builtins());

/// Every field, shortest round-trip decimal form, so load(format(p)) == p bit for bit.
std::string format_config(const NetworkParams& params,
                          std::optional<std::string_view> preset_name = std::nullopt);
void save_config(const std::filesystem::path& path, const NetworkParams& params,
                 std::optional<std::string_view> preset_name = std::nullopt);

// --- sweeps -----------------------------------------------------------------

struct GridAxis {
    std::string parameter;
    double min = 0.0;
    double max = 1.0;
    int steps = 101;
};

/// `steps` evenly spaced values, endpoints included (one value when steps == 1).
std::vector<double> axis_values(const GridAxis& axis);

struct SweepSpec {
    std::string preset;
    std::vector<double> lengths;  ///< km, strictly increasing
    std::vector<Protocol> protocols = {std::begin(kAllProtocols), std::end(kAllProtocols)};
};

struct RatePoint {
    double length_km = 0.0;
    Protocol protocol = Protocol::Baseline;
    double rate_hz = 0.0;
    double t_n = 0.0;
    double p_f = 0.0;
    double p_b = 0.0;
};

/// Protocol-major order: all lengths for protocols[0], then protocols[1], ...
std::vector<RatePoint> sweep_rates(const NetworkParams& params, std::span<const double> lengths,
                                   std::span<const Protocol> protocols);
std::vector<RatePoint> sweep_rates(const SweepSpec& spec,
                                   const PresetRegistry& registry = PresetRegistry::with_builtins());

struct ContourGrid {
    std::vector<double> e_s;   ///< rows
    std::vector<double> p_nd;  ///< columns
    std::vector<std::optional<double>> ratio;  ///< row-major; empty where undefined

    std::optional<double> at(std::size_t row, std::size_t col) const {
        return ratio[row * p_nd.size() + col];
    }
};

/// Storage-network rate with (e_s, p_nd) overridden, divided by the unmodified
/// baseline rate. Cells with p_nd = 0 (or a zero baseline) are undefined.
ContourGrid contour_grid(const NetworkParams& params, double length_km,
                         std::span<const double> es_axis, std::span<const double> pnd_axis);

/// Length in [l_min, l_max] where the two rate curves cross, located by
/// bisection on the log-rate difference to well under a metre. Throws
/// DomainError when the difference has the same sign at both ends.
double find_crossover(const NetworkParams& params_a, Protocol protocol_a,
                      const NetworkParams& params_b, Protocol protocol_b, double l_min,
                      double l_max);

}  // namespace hybridnet::scenarios
