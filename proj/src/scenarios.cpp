#include "hybridnet/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "hybridnet/core_model.hpp"

namespace hybridnet::scenarios {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(fmt::format("{}: '{}' is not a number", key, text));
    }
    return value;
}

int parse_int(std::string_view key, std::string_view text) {
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument(fmt::format("{}: '{}' is not an integer", key, text));
    }
    return value;
}

struct Field {
    std::string_view name;
    double NetworkParams::*real = nullptr;
    int NetworkParams::*count = nullptr;
};

// tau is handled separately because it is optional.
constexpr Field kFields[] = {
    {"r_max", &NetworkParams::r_max},
    {"t_nd", &NetworkParams::t_nd},
    {"refractive_index", &NetworkParams::refractive_index},
    {"attenuation", &NetworkParams::attenuation},
    {"p_p", &NetworkParams::p_p},
    {"p_q", &NetworkParams::p_q},
    {"p_d", &NetworkParams::p_d},
    {"p_nd", &NetworkParams::p_nd},
    {"e_s", &NetworkParams::e_s},
    {"gamma_nd", &NetworkParams::gamma_nd},
    {"y", nullptr, &NetworkParams::y},
    {"n", nullptr, &NetworkParams::n},
    {"z", nullptr, &NetworkParams::z},
};

void require_increasing(std::span<const double> values, std::string_view what) {
    if (values.empty()) throw std::invalid_argument(fmt::format("{} must not be empty", what));
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) {
            throw std::invalid_argument(fmt::format("{} must be strictly increasing", what));
        }
    }
}

}  // namespace

ScenarioPreset ir780() {
    NetworkParams p;
    p.attenuation = 3.0;
    p.y = 1;
    p.n = 1;
    p.z = 0;
    return {"ir780", p, "780 nm fiber links: one QFC stage (493 -> 780 nm), storage at 780 nm"};
}

ScenarioPreset cband() {
    NetworkParams p;
    p.attenuation = 0.15;
    p.y = 2;
    p.n = 1;
    p.z = 2;
    return {"cband", p,
            "C-band fiber links: NDSPM at 780 nm, a second stage to C-band and one back "
            "to 780 nm before storage"};
}

PresetRegistry PresetRegistry::with_builtins() {
    PresetRegistry registry;
    registry.add(ir780());
    registry.add(cband());
    return registry;
}

void PresetRegistry::add(ScenarioPreset preset) {
    if (preset.name.empty()) throw std::invalid_argument("preset name must not be empty");
    if (contains(preset.name)) {
        throw std::invalid_argument(fmt::format("preset '{}' is already registered", preset.name));
    }
    validate(preset.params);
    auto name = preset.name;
    presets_.emplace(std::move(name), std::move(preset));
}

const ScenarioPreset& PresetRegistry::get(std::string_view name) const {
    const auto it = presets_.find(name);
    if (it == presets_.end()) {
        throw std::out_of_range(fmt::format("unknown preset '{}'", name));
    }
    return it->second;
}

bool PresetRegistry::contains(std::string_view name) const {
    return presets_.find(name) != presets_.end();
}

std::vector<std::string> PresetRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : presets_) out.push_back(name);
    return out;
}

ScenarioPreset preset(std::string_view name) { return PresetRegistry::with_builtins().get(name); }

void apply_setting(NetworkParams& params, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "tau") {
        if (value == "inf" || value == "infinity" || value.empty()) {
            params.tau.reset();
        } else {
            params.tau = parse_double(key, value);
        }
        return;
    }
    for (const auto& field : kFields) {
        if (field.name != key) continue;
        if (field.real) {
            params.*field.real = parse_double(key, value);
        } else {
            params.*field.count = parse_int(key, value);
        }
        return;
    }
    throw std::invalid_argument(fmt::format("unknown parameter '{}'", key));
}

ConfigFile parse_config(std::string_view text, const PresetRegistry& registry) {
    std::vector<std::pair<std::string, std::string>> settings;
    ConfigFile config;
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument(
                fmt::format("config line {}: expected 'key = value'", line_no));
        }
        const std::string key{trim(line.substr(0, eq))};
        const std::string value{trim(line.substr(eq + 1))};
        if (key == "preset") {
            config.preset = value;
        } else {
            settings.emplace_back(key, value);
        }
    }

    config.params = config.preset ? registry.get(*config.preset).params : NetworkParams{};
    for (const auto& [key, value] : settings) apply_setting(config.params, key, value);
    validate(config.params);
    return config;
}

ConfigFile load_config(const std::filesystem::path& path, const PresetRegistry& registry) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open config '{}'", path.string()));
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), registry);
}

std::string format_config(const NetworkParams& params,
                          std::optional<std::string_view> preset_name) {
    std::string out;
    if (preset_name) out += fmt::format("preset = {}\n", *preset_name);
    for (const auto& field : kFields) {
        if (field.real) {
            out += fmt::format("{} = {}\n", field.name, params.*field.real);
        } else {
            out += fmt::format("{} = {}\n", field.name, params.*field.count);
        }
    }
    out += params.tau ? fmt::format("tau = {}\n", *params.tau) : std::string("tau = inf\n");
    return out;
}

void save_config(const std::filesystem::path& path, const NetworkParams& params,
                 std::optional<std::string_view> preset_name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write config '{}'", path.string()));
    out << format_config(params, preset_name);
}

std::vector<double> axis_values(const GridAxis& axis) {
    if (axis.steps < 1) {
        throw std::invalid_argument(fmt::format("axis '{}' needs at least one step", axis.parameter));
    }
    if (axis.steps == 1) return {axis.min};
    if (!(axis.max > axis.min)) {
        throw std::invalid_argument(fmt::format("axis '{}' needs max > min", axis.parameter));
    }
    std::vector<double> values(static_cast<std::size_t>(axis.steps));
    const double span = axis.max - axis.min;
    for (int i = 0; i < axis.steps; ++i) {
        values[static_cast<std::size_t>(i)] = axis.min + span * i / (axis.steps - 1);
    }
    values.back() = axis.max;
    return values;
}

std::vector<RatePoint> sweep_rates(const NetworkParams& params, std::span<const double> lengths,
                                   std::span<const Protocol> protocols) {
    require_increasing(lengths, "sweep lengths");
    if (protocols.empty()) throw std::invalid_argument("sweep needs at least one protocol");
    validate(params);

    std::vector<RatePoint> points;
    points.reserve(lengths.size() * protocols.size());
    for (const Protocol protocol : protocols) {
        for (const double length : lengths) {
            try {
                const model::Link link = model::link_at(length, params);
                RatePoint point;
                point.length_km = length;
                point.protocol = protocol;
                point.rate_hz = model::rate(protocol, link, params);
                point.t_n = model::travel_time(length, params);
                point.p_f = link.transmission;
                point.p_b = model::p_bsa(link, params);
                points.push_back(point);
            } catch (const DomainError& e) {
                throw DomainError(fmt::format("at L = {} km, protocol {}: {}", length,
                                              to_string(protocol), e.what()));
            }
        }
    }
    return points;
}

std::vector<RatePoint> sweep_rates(const SweepSpec& spec, const PresetRegistry& registry) {
    return sweep_rates(registry.get(spec.preset).params, spec.lengths, spec.protocols);
}

ContourGrid contour_grid(const NetworkParams& params, double length_km,
                         std::span<const double> es_axis, std::span<const double> pnd_axis) {
    for (const double v : es_axis) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError(fmt::format("e_s axis value {} not in [0, 1]", v));
    }
    for (const double v : pnd_axis) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError(fmt::format("p_nd axis value {} not in [0, 1]", v));
    }
    const double baseline = model::rate_base(length_km, params);

    ContourGrid grid;
    grid.e_s.assign(es_axis.begin(), es_axis.end());
    grid.p_nd.assign(pnd_axis.begin(), pnd_axis.end());
    grid.ratio.reserve(es_axis.size() * pnd_axis.size());
    NetworkParams cell = params;
    for (const double e_s : es_axis) {
        for (const double p_nd : pnd_axis) {
            cell.e_s = e_s;
            cell.p_nd = p_nd;
            if (!(baseline > 0.0) || !(model::p_flag(cell) > 0.0)) {
                grid.ratio.emplace_back();
                continue;
            }
            grid.ratio.emplace_back(model::rate_storage_finite(length_km, cell) / baseline);
        }
    }
    return grid;
}

double find_crossover(const NetworkParams& params_a, Protocol protocol_a,
                      const NetworkParams& params_b, Protocol protocol_b, double l_min,
                      double l_max) {
    if (!(l_min >= 0.0 && l_max > l_min)) {
        throw DomainError(fmt::format("crossover bracket [{}, {}] is invalid", l_min, l_max));
    }
    auto gap = [&](double length) {
        const double a = model::rate(protocol_a, length, params_a);
        const double b = model::rate(protocol_b, length, params_b);
        if (!(a > 0.0 && b > 0.0)) {
            throw DomainError(fmt::format("rate vanishes at L = {} km; log-rate gap undefined", length));
        }
        return std::log(a) - std::log(b);
    };

    double lo = l_min;
    double hi = l_max;
    double gap_lo = gap(lo);
    const double gap_hi = gap(hi);
    if (gap_lo == 0.0) return lo;
    if (gap_hi == 0.0) return hi;
    if ((gap_lo > 0.0) == (gap_hi > 0.0)) {
        throw DomainError(fmt::format(
            "{} and {} curves do not cross between {} and {} km", to_string(protocol_a),
            to_string(protocol_b), l_min, l_max));
    }
    // 1e-7 km keeps the relative rate mismatch far below 1e-3 for any realistic slope.
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        const double gap_mid = gap(mid);
        if (gap_mid == 0.0) return mid;
        if ((gap_mid > 0.0) == (gap_lo > 0.0)) {
            lo = mid;
            gap_lo = gap_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace hybridnet::scenarios
