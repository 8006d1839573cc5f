#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hybridnet/core_model.hpp"
#include "hybridnet/qfc_fit.hpp"
#include "hybridnet/report.hpp"
#include "hybridnet/scenarios.hpp"
#include "hybridnet/simulator.hpp"

namespace hybridnet::cli {

namespace {

using report::Cell;
using report::OutputRecord;

struct Common {
    std::string preset = "ir780";
    std::string config;
    std::vector<std::string> overrides;
    std::string format;
};

void add_common(CLI::App& cmd, Common& common) {
    cmd.add_option("--preset", common.preset, "Parameter preset (ir780, cband)")
        ->capture_default_str();
    cmd.add_option("--config", common.config,
                   "Key-value parameter file; its 'preset' key replaces --preset");
    cmd.add_option("--set", common.overrides, "Override one parameter, key=value (repeatable)");
    cmd.add_option("--format", common.format,
                   fmt::format("Output format, csv or json (default from {}, else csv)", kFormatEnv));
}

struct Resolved {
    std::string preset;
    NetworkParams params;
    report::Format format = report::Format::Csv;
};

Resolved resolve(const Common& common) {
    const auto registry = scenarios::PresetRegistry::with_builtins();
    Resolved r;
    r.preset = common.preset;
    if (!common.config.empty()) {
        const auto file = scenarios::load_config(common.config, registry);
        r.params = file.params;
        r.preset = file.preset.value_or("custom");
    } else {
        try {
            r.params = registry.get(common.preset).params;
        } catch (const std::out_of_range&) {
            throw std::invalid_argument(fmt::format("unknown preset '{}' (known: {})", common.preset,
                                                    fmt::join(registry.names(), ", ")));
        }
    }
    for (const auto& setting : common.overrides) {
        const auto eq = setting.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(fmt::format("--set expects key=value, got '{}'", setting));
        }
        scenarios::apply_setting(r.params, setting.substr(0, eq), setting.substr(eq + 1));
    }
    validate(r.params);

    std::string format = common.format;
    if (format.empty()) {
        const char* env = std::getenv(kFormatEnv);
        format = env && *env ? env : "csv";
    }
    r.format = report::parse_format(format);
    return r;
}

std::vector<Protocol> parse_protocols(const std::vector<std::string>& names) {
    std::vector<Protocol> out;
    for (const auto& entry : names) {
        std::stringstream list(entry);
        std::string name;
        while (std::getline(list, name, ',')) {
            if (name.empty()) continue;
            const Protocol p = parse_protocol(name);
            if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
        }
    }
    return out;
}

void add_metadata(OutputRecord& record, const Resolved& r, const Common& common) {
    record.metadata.emplace_back("preset", r.preset);
    std::string overrides;
    for (const auto& s : common.overrides) overrides += (overrides.empty() ? "" : ";") + s;
    record.metadata.emplace_back("overrides", overrides);
}

struct LengthRange {
    double l_min = 0.0;
    double l_max = 5.0;
    int steps = 50;
};

void add_range(CLI::App& cmd, LengthRange& range) {
    cmd.add_option("--l-min", range.l_min, "Shortest length (km)")->capture_default_str();
    cmd.add_option("--l-max", range.l_max, "Longest length (km)")->capture_default_str();
    cmd.add_option("--steps", range.steps, "Number of lengths, endpoints included")
        ->capture_default_str();
}

std::vector<double> lengths_of(const LengthRange& range) {
    if (!(range.l_min >= 0.0)) throw DomainError("--l-min must be >= 0");
    return scenarios::axis_values({"length_km", range.l_min, range.l_max, range.steps});
}

// --- rates ------------------------------------------------------------------

OutputRecord cmd_rates(const Resolved& r, const Common& common, const LengthRange& range,
                       const std::vector<std::string>& protocol_names) {
    auto protocols = parse_protocols(protocol_names);
    if (protocols.empty()) protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
    const auto lengths = lengths_of(range);
    const auto points = scenarios::sweep_rates(r.params, lengths, protocols);

    OutputRecord record;
    record.command = "rates";
    record.columns = {"length_km", "protocol", "rate_hz"};
    add_metadata(record, r, common);
    for (const auto& pt : points) {
        record.add_row({pt.length_km, std::string(to_string(pt.protocol)), pt.rate_hz});
    }
    return record;
}

// --- ratio ------------------------------------------------------------------

OutputRecord cmd_ratio(const Resolved& r, const Common& common, const LengthRange& range,
                       const std::vector<std::string>& protocol_names) {
    auto protocols = parse_protocols(protocol_names);
    if (protocols.empty()) protocols = {Protocol::Ndspm, Protocol::NdspmStorage};
    const auto lengths = lengths_of(range);
    const auto points = scenarios::sweep_rates(r.params, lengths, protocols);
    const std::array baseline_protocol{Protocol::Baseline};
    const auto baseline = scenarios::sweep_rates(r.params, lengths, baseline_protocol);

    OutputRecord record;
    record.command = "ratio";
    record.columns = {"length_km", "protocol", "ratio"};
    add_metadata(record, r, common);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double base = baseline[i % lengths.size()].rate_hz;
        Cell ratio = report::Undefined{};
        if (base > 0.0) ratio = points[i].rate_hz / base;
        record.add_row({points[i].length_km, std::string(to_string(points[i].protocol)), ratio});
    }
    return record;
}

// --- contour ----------------------------------------------------------------

OutputRecord cmd_contour(const Resolved& r, const Common& common, double length_km, int steps) {
    const auto es = scenarios::axis_values({"e_s", 0.0, 1.0, steps});
    const auto pnd = scenarios::axis_values({"p_nd", 0.0, 1.0, steps});
    const auto grid = scenarios::contour_grid(r.params, length_km, es, pnd);

    OutputRecord record;
    record.command = "contour";
    record.columns = {"e_s", "p_nd", "ratio"};
    add_metadata(record, r, common);
    record.metadata.emplace_back("length_km", length_km);
    for (std::size_t i = 0; i < es.size(); ++i) {
        for (std::size_t j = 0; j < pnd.size(); ++j) {
            const auto value = grid.at(i, j);
            record.add_row({es[i], pnd[j], value ? Cell{*value} : Cell{report::Undefined{}}});
        }
    }
    return record;
}

// --- simulate ---------------------------------------------------------------

struct SimulateOptions {
    std::string protocol = "ndspm";
    double length_km = 1.0;
    std::int64_t cycles = 10'000'000;
    std::uint64_t seed = 42;
    std::string tau;
    std::optional<double> tau_periods;
    std::optional<double> rng_resolution;
};

OutputRecord cmd_simulate(const Resolved& resolved, const Common& common, const SimulateOptions& opts) {
    Resolved r = resolved;
    if (!opts.tau.empty() && opts.tau_periods) {
        throw std::invalid_argument("--tau and --tau-periods are mutually exclusive");
    }
    if (!opts.tau.empty()) scenarios::apply_setting(r.params, "tau", opts.tau);
    if (opts.tau_periods) r.params.tau = *opts.tau_periods * model::cycle_period(r.params);

    sim::SimConfig config;
    config.params = r.params;
    config.length_km = opts.length_km;
    config.protocol = parse_protocol(opts.protocol);
    config.cycles = opts.cycles;
    config.seed = opts.seed;
    config.rng_resolution = opts.rng_resolution;
    const sim::SimResult result = sim::run_simulation(config);

    Cell analytic = report::Undefined{};
    if (config.protocol == Protocol::Baseline || model::p_flag(r.params) > 0.0) {
        analytic = model::rate(config.protocol, config.length_km, r.params);
    }

    OutputRecord record;
    record.command = "simulate";
    record.columns = {"protocol",        "length_km",      "cycles",         "seed",
                      "entanglement_events", "simulated_time_s", "rate_hz", "rate_std_error_hz",
                      "attempts_node1",  "attempts_node2", "analytic_rate_hz"};
    add_metadata(record, r, common);
    record.metadata.emplace_back("seed", static_cast<std::int64_t>(opts.seed));
    record.add_row({std::string(to_string(config.protocol)), config.length_km, config.cycles,
                    static_cast<std::int64_t>(result.seed), result.entanglement_events,
                    result.simulated_time, result.rate_estimate, result.rate_std_error,
                    result.attempts_node1, result.attempts_node2, analytic});
    return record;
}

// --- fit-qfc ----------------------------------------------------------------

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream in(line);
    while (std::getline(in, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r\"");
        const auto last = field.find_last_not_of(" \t\r\"");
        fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    return fields;
}

double to_number(const std::string& text, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument(fmt::format("line {}: '{}' is not a number", line_no, text));
}

std::vector<qfc::Measurement> read_measurements(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(fmt::format("'{}' is empty", path));
    const auto header = split_csv_line(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto power = column("pump_power");
    const auto efficiency = column("efficiency");
    const auto uncertainty = column("uncertainty");
    if (!power || !efficiency) {
        throw std::invalid_argument("measurement CSV needs 'pump_power' and 'efficiency' columns");
    }

    std::vector<qfc::Measurement> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < header.size()) {
            throw std::invalid_argument(fmt::format("line {}: expected {} fields", line_no, header.size()));
        }
        qfc::Measurement m;
        m.pump_power = to_number(fields[*power], line_no);
        m.efficiency = to_number(fields[*efficiency], line_no);
        if (uncertainty && !fields[*uncertainty].empty()) {
            m.uncertainty = to_number(fields[*uncertainty], line_no);
        }
        out.push_back(m);
    }
    return out;
}

OutputRecord cmd_fit_qfc(const std::string& input, std::optional<double> eta0,
                         std::optional<double> pm0) {
    if (eta0.has_value() != pm0.has_value()) {
        throw std::invalid_argument("--eta0 and --pm0 must be given together");
    }
    const auto measurements = read_measurements(input);
    std::optional<qfc::Guess> guess;
    if (eta0) guess = qfc::Guess{*eta0, *pm0};
    const qfc::Fit fit = qfc::fit(measurements, guess);

    OutputRecord record;
    record.command = "fit-qfc";
    record.columns = {"eta", "p_m", "residual_norm", "converged", "iterations", "points"};
    record.metadata.emplace_back("input", input);
    record.add_row({fit.eta, fit.p_m, fit.residual_norm, fit.converged,
                    static_cast<std::int64_t>(fit.iterations),
                    static_cast<std::int64_t>(measurements.size())});
    return record;
}

// --- crossover --------------------------------------------------------------

std::pair<std::string, Protocol> parse_curve(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw std::invalid_argument(fmt::format("curve '{}' must look like preset:protocol", spec));
    }
    return {spec.substr(0, colon), parse_protocol(spec.substr(colon + 1))};
}

OutputRecord cmd_crossover(const std::string& curve_a, const std::string& curve_b, double l_min,
                           double l_max) {
    const auto registry = scenarios::PresetRegistry::with_builtins();
    const auto [preset_a, protocol_a] = parse_curve(curve_a);
    const auto [preset_b, protocol_b] = parse_curve(curve_b);
    const auto& a = registry.get(preset_a);
    const auto& b = registry.get(preset_b);
    const double length =
        scenarios::find_crossover(a.params, protocol_a, b.params, protocol_b, l_min, l_max);

    OutputRecord record;
    record.command = "crossover";
    record.columns = {"curve_a", "curve_b", "length_km", "rate_hz"};
    record.add_row({curve_a, curve_b, length, model::rate(protocol_a, length, a.params)});
    return record;
}

report::Format output_format(const std::string& flag) {
    if (!flag.empty()) return report::parse_format(flag);
    const char* env = std::getenv(kFormatEnv);
    return report::parse_format(env && *env ? env : "csv");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement-rate model and Monte Carlo simulator for two-node ion networks",
                 "hybridnet"};
    app.require_subcommand(1);

    Common common;
    LengthRange range;
    std::vector<std::string> protocols;

    auto* rates = app.add_subcommand("rates", "Analytic rate versus length");
    add_common(*rates, common);
    add_range(*rates, range);
    rates->add_option("--protocol", protocols, "baseline, ndspm, storage (repeatable or comma list)");

    auto* ratio = app.add_subcommand("ratio", "Rate relative to the baseline network");
    add_common(*ratio, common);
    add_range(*ratio, range);
    ratio->add_option("--protocol", protocols, "Protocols to compare (default ndspm,storage)");

    double contour_length = 10.0;
    int contour_steps = 101;
    auto* contour = app.add_subcommand("contour", "Storage/baseline ratio over the (e_s, p_nd) grid");
    add_common(*contour, common);
    contour->add_option("--length", contour_length, "Per-arm length (km)")->capture_default_str();
    contour->add_option("--steps", contour_steps, "Grid points per axis on [0, 1]")
        ->capture_default_str();

    SimulateOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "Cycle-accurate Monte Carlo run");
    add_common(*simulate, common);
    simulate->add_option("--protocol", sim_opts.protocol, "baseline, ndspm or storage")
        ->capture_default_str();
    simulate->add_option("--length", sim_opts.length_km, "Per-arm length (km)")->capture_default_str();
    simulate->add_option("--cycles", sim_opts.cycles, "Clock cycles to simulate")->capture_default_str();
    simulate->add_option("--seed", sim_opts.seed, "RNG seed")->capture_default_str();
    simulate->add_option("--tau", sim_opts.tau, "Storage lifetime in seconds, or 'inf'");
    simulate->add_option("--tau-periods", sim_opts.tau_periods, "Storage lifetime in units of T");
    simulate->add_option("--rng-resolution", sim_opts.rng_resolution,
                         "Quantize uniform draws to this step (e.g. 1e-4)");

    std::string fit_input;
    std::optional<double> eta0;
    std::optional<double> pm0;
    std::string fit_format;
    auto* fit = app.add_subcommand("fit-qfc", "Fit conversion efficiency versus pump power");
    fit->add_option("--input", fit_input, "CSV with pump_power,efficiency[,uncertainty]")->required();
    fit->add_option("--eta0", eta0, "Initial eta");
    fit->add_option("--pm0", pm0, "Initial P_m");
    fit->add_option("--format", fit_format, "csv or json");

    std::string curve_a;
    std::string curve_b;
    double cross_min = 0.5;
    double cross_max = 5.0;
    std::string cross_format;
    auto* crossover = app.add_subcommand("crossover", "Length where two rate curves cross");
    crossover->add_option("--a", curve_a, "First curve, preset:protocol")->required();
    crossover->add_option("--b", curve_b, "Second curve, preset:protocol")->required();
    crossover->add_option("--l-min", cross_min, "Bracket start (km)")->capture_default_str();
    crossover->add_option("--l-max", cross_max, "Bracket end (km)")->capture_default_str();
    crossover->add_option("--format", cross_format, "csv or json");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "hybridnet: " << e.what() << '\n';
        return 2;
    }

    try {
        OutputRecord record;
        report::Format format = report::Format::Csv;
        if (fit->parsed()) {
            format = output_format(fit_format);
            record = cmd_fit_qfc(fit_input, eta0, pm0);
        } else if (crossover->parsed()) {
            format = output_format(cross_format);
            record = cmd_crossover(curve_a, curve_b, cross_min, cross_max);
        } else {
            const Resolved r = resolve(common);
            format = r.format;
            if (rates->parsed()) {
                record = cmd_rates(r, common, range, protocols);
            } else if (ratio->parsed()) {
                record = cmd_ratio(r, common, range, protocols);
            } else if (contour->parsed()) {
                record = cmd_contour(r, common, contour_length, contour_steps);
            } else {
                record = cmd_simulate(r, common, sim_opts);
            }
        }
        std::ostringstream buffer;
        report::write(buffer, record, format);
        out << buffer.str();
        return 0;
    } catch (const std::exception& e) {
        std::string message = e.what();
        std::replace(message.begin(), message.end(), '\n', ' ');
        err << "hybridnet: error: " << message << '\n';
        return 1;
    }
}

}  // namespace hybridnet::cli
