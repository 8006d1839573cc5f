#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "hybridnet/core_model.hpp"
#include "hybridnet/params.hpp"

// Cycle-accurate Monte Carlo model of the two-node network. Every delay is
// rounded up to whole clock cycles and every probabilistic event is a
// Bernoulli draw from a per-run seeded generator.
namespace hybridnet::sim {

struct SimConfig {
    NetworkParams params;
    double length_km = 0.0;
    Protocol protocol = Protocol::Baseline;
    std::int64_t cycles = 10'000'000;
    std::uint64_t seed = 0;
    /// When set, uniform draws are truncated to multiples of this step.
    std::optional<double> rng_resolution;
};

struct SimResult {
    std::int64_t entanglement_events = 0;
    double simulated_time = 0.0;  ///< s
    double rate_estimate = 0.0;   ///< Hz
    double rate_std_error = 0.0;  ///< Poisson, sqrt(events) / simulated_time
    std::int64_t attempts_node1 = 0;
    std::int64_t attempts_node2 = 0;
    std::uint64_t seed = 0;

    bool operator==(const SimResult&) const = default;
};

/// Whole-cycle delays the simulation uses for one configuration.
struct CycleDelays {
    double clock_period = 0.0;   ///< 1/r_max for Baseline, T otherwise
    std::int64_t attempt_spacing = 1;  ///< Baseline: cycles between joint attempts
    std::int64_t flag_hold = 1;        ///< Ndspm: cycles a flag blocks requests
    std::int64_t to_storage = 0;       ///< NdspmStorage: flag -> photon stored
    std::int64_t feedback = 1;         ///< NdspmStorage: BSA release -> requests resume
};

CycleDelays cycle_delays(const NetworkParams& params, double length_km, Protocol protocol);

/// Analytic link with the round trip replaced by the whole-cycle delays the
/// simulation actually uses, so closed-form rates can be compared with
/// simulated ones at any length.
model::Link cycle_rounded_link(const NetworkParams& params, double length_km, Protocol protocol);

/// Throws DomainError / std::invalid_argument on an invalid configuration.
void validate(const SimConfig& config);

SimResult run_simulation(const SimConfig& config);

/// One entry per input config: the result, or the exception that config raised.
using BatchEntry = std::variant<SimResult, std::exception_ptr>;

/// Runs each config independently (in parallel when `threads` > 1) and returns
/// entries in input order. Throws std::invalid_argument on an empty list.
std::vector<BatchEntry> run_batch(std::span<const SimConfig> configs, unsigned threads = 0);

}  // namespace hybridnet::sim
