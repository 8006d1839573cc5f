#include "hybridnet/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

namespace hybridnet::sim {

namespace {

std::int64_t cycles_for(double seconds, double period) {
    return static_cast<std::int64_t>(std::ceil(seconds / period));
}

// Bernoulli source over a 64-bit Mersenne Twister. The standard fixes the
// mt19937_64 output sequence, so results are reproducible across platforms.
class Coin {
public:
    Coin(std::uint64_t seed, std::optional<double> resolution)
        : engine_(seed), resolution_(resolution.value_or(0.0)) {}

    bool operator()(double probability) {
        double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        if (resolution_ > 0.0) u = std::floor(u / resolution_) * resolution_;
        return u < probability;
    }

private:
    std::mt19937_64 engine_;
    double resolution_;
};

void run_baseline(const SimConfig& config, const CycleDelays& delays, SimResult& out) {
    const double pb = model::p_bsa(config.length_km, config.params);
    Coin coin(config.seed, config.rng_resolution);
    // Both nodes fire together on every attempt cycle; idle cycles draw nothing.
    for (std::int64_t cycle = 0; cycle < config.cycles; cycle += delays.attempt_spacing) {
        ++out.attempts_node1;
        ++out.attempts_node2;
        const bool first = coin(pb);
        const bool second = coin(pb);
        if (first && second && coin(0.5)) ++out.entanglement_events;
    }
}

void run_ndspm(const SimConfig& config, const CycleDelays& delays, SimResult& out) {
    const NetworkParams& params = config.params;
    const double flag = model::p_flag(params);
    const double to_bsa = params.gamma_nd * std::pow(params.p_q, params.y - params.n) *
                          model::fiber_transmission(config.length_km, params.attenuation) *
                          params.p_d;
    Coin coin(config.seed, config.rng_resolution);

    // A flag raised on cycle k blocks requests on cycles k .. k + hold - 1.
    std::int64_t free_from[2] = {0, 0};
    std::int64_t* attempts[2] = {&out.attempts_node1, &out.attempts_node2};
    for (std::int64_t cycle = 0; cycle < config.cycles; ++cycle) {
        bool at_bsa[2] = {false, false};
        for (int ch = 0; ch < 2; ++ch) {
            if (cycle < free_from[ch]) continue;
            ++*attempts[ch];
            if (coin(flag)) {
                free_from[ch] = cycle + delays.flag_hold;
                at_bsa[ch] = coin(to_bsa);
            }
        }
        if (at_bsa[0] && at_bsa[1] && coin(0.5)) ++out.entanglement_events;
    }
}

struct StorageChannel {
    bool flagged = false;
    bool photon = false;  // survived to (and out of) storage
    std::int64_t flagged_at = 0;
};

void run_storage(const SimConfig& config, const CycleDelays& delays, SimResult& out) {
    const NetworkParams& params = config.params;
    const double flag = model::p_flag(params);
    const double survive = params.gamma_nd * std::pow(params.p_q, params.z) *
                           model::fiber_transmission(config.length_km, params.attenuation) *
                           params.p_d * params.e_s;
    const double decay_per_cycle =
        params.tau ? delays.clock_period / *params.tau : 0.0;
    Coin coin(config.seed, config.rng_resolution);

    StorageChannel channels[2];
    std::int64_t* attempts[2] = {&out.attempts_node1, &out.attempts_node2};
    std::int64_t resume_at = 0;
    std::int64_t release_at = -1;  // set once both channels are flagged
    for (std::int64_t cycle = 0; cycle < config.cycles; ++cycle) {
        for (int ch = 0; ch < 2; ++ch) {
            StorageChannel& c = channels[ch];
            if (c.flagged || cycle < resume_at) continue;
            ++*attempts[ch];
            if (coin(flag)) {
                c.flagged = true;
                c.flagged_at = cycle;
                c.photon = coin(survive);
            }
        }
        if (release_at < 0 && channels[0].flagged && channels[1].flagged) {
            release_at =
                std::max(channels[0].flagged_at, channels[1].flagged_at) + delays.to_storage;
        }
        if (release_at < 0 || cycle < release_at) continue;

        bool both = channels[0].photon && channels[1].photon;
        if (both && params.tau) {
            const auto gap = std::abs(channels[0].flagged_at - channels[1].flagged_at);
            both = coin(std::exp(-static_cast<double>(gap) * decay_per_cycle));
        }
        if (both && coin(0.5)) ++out.entanglement_events;

        // Feedback reaches the nodes `feedback` cycles later; requests restart
        // on the cycle after it arrives.
        channels[0] = StorageChannel{};
        channels[1] = StorageChannel{};
        resume_at = cycle + delays.feedback + 1;
        release_at = -1;
    }
}

}  // namespace

CycleDelays cycle_delays(const NetworkParams& params, double length_km, Protocol protocol) {
    const double one_way = model::travel_time(length_km, params);
    CycleDelays delays;
    switch (protocol) {
        case Protocol::Baseline:
            delays.clock_period = 1.0 / params.r_max;
            delays.attempt_spacing =
                std::max<std::int64_t>(cycles_for(2.0 * one_way, delays.clock_period), 1);
            break;
        case Protocol::Ndspm:
            delays.clock_period = model::cycle_period(params);
            delays.flag_hold =
                std::max<std::int64_t>(cycles_for(2.0 * one_way, delays.clock_period), 1);
            break;
        case Protocol::NdspmStorage:
            delays.clock_period = model::cycle_period(params);
            delays.to_storage = cycles_for(one_way, delays.clock_period);
            delays.feedback = std::max<std::int64_t>(delays.to_storage, 1);
            break;
    }
    return delays;
}

model::Link cycle_rounded_link(const NetworkParams& params, double length_km, Protocol protocol) {
    model::Link link = model::link_at(length_km, params);
    const CycleDelays d = cycle_delays(params, length_km, protocol);
    switch (protocol) {
        case Protocol::Baseline:
            link.round_trip = static_cast<double>(d.attempt_spacing) * d.clock_period;
            break;
        case Protocol::Ndspm:
            link.round_trip = static_cast<double>(d.flag_hold) * d.clock_period;
            break;
        case Protocol::NdspmStorage:
            link.round_trip = static_cast<double>(d.to_storage + d.feedback) * d.clock_period;
            break;
    }
    return link;
}

void validate(const SimConfig& config) {
    hybridnet::validate(config.params);
    if (!(config.length_km >= 0.0) || !std::isfinite(config.length_km)) {
        throw DomainError(fmt::format("length must be >= 0 km, got {}", config.length_km));
    }
    if (config.cycles < 1) {
        throw std::invalid_argument(
            fmt::format("cycles must be at least 1, got {}", config.cycles));
    }
    if (config.rng_resolution &&
        !(*config.rng_resolution > 0.0 && *config.rng_resolution < 1.0)) {
        throw std::invalid_argument(
            fmt::format("rng_resolution must lie in (0, 1), got {}", *config.rng_resolution));
    }
}

SimResult run_simulation(const SimConfig& config) {
    validate(config);
    const CycleDelays delays = cycle_delays(config.params, config.length_km, config.protocol);

    SimResult result;
    result.seed = config.seed;
    switch (config.protocol) {
        case Protocol::Baseline:
            run_baseline(config, delays, result);
            break;
        case Protocol::Ndspm:
            run_ndspm(config, delays, result);
            break;
        case Protocol::NdspmStorage:
            run_storage(config, delays, result);
            break;
    }
    result.simulated_time = static_cast<double>(config.cycles) * delays.clock_period;
    const auto events = static_cast<double>(result.entanglement_events);
    result.rate_estimate = events / result.simulated_time;
    result.rate_std_error = std::sqrt(events) / result.simulated_time;
    return result;
}

std::vector<BatchEntry> run_batch(std::span<const SimConfig> configs, unsigned threads) {
    if (configs.empty()) throw std::invalid_argument("run_batch needs at least one config");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(configs.size()));

    std::vector<BatchEntry> results(configs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                results[i] = run_simulation(configs[i]);
            } catch (...) {
                results[i] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
        return results;
    }
    {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return results;
}

}  // namespace hybridnet::sim
