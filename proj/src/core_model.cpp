#include "hybridnet/core_model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace hybridnet::model {

namespace {

void require_length(double length_km) {
    if (!(length_km >= 0.0) || !std::isfinite(length_km)) {
        throw DomainError(fmt::format("length must be a finite value >= 0 km, got {}", length_km));
    }
}

double flag_probability_checked(const NetworkParams& params) {
    const double p = p_flag(params);
    if (!(p > 0.0)) {
        throw DomainError("NDSPM flag probability is zero; the rate expression is singular");
    }
    return p;
}

// E[max(X1, X2)] for independent geometric(p) variables on {1, 2, ...}.
double expected_max_geometric(double p) { return (2.0 * p - 3.0) / (p * (p - 2.0)); }

}  // namespace

double travel_time(double length_km, const NetworkParams& params) {
    require_length(length_km);
    return params.refractive_index * length_km * 1.0e3 / kSpeedOfLight;
}

double fiber_transmission(double length_km, double attenuation_db_per_km) {
    require_length(length_km);
    if (!(attenuation_db_per_km >= 0.0)) {
        throw DomainError(
            fmt::format("attenuation must be non-negative, got {}", attenuation_db_per_km));
    }
    return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

Link link_at(double length_km, const NetworkParams& params) {
    validate(params);
    return Link{fiber_transmission(length_km, params.attenuation),
                2.0 * travel_time(length_km, params)};
}

double request_rate_base(const Link& link, const NetworkParams& params) {
    if (link.round_trip <= 0.0) return params.r_max;
    return std::min(params.r_max, 1.0 / link.round_trip);
}

double p_bsa(const Link& link, const NetworkParams& params) {
    return params.p_p * std::pow(params.p_q, params.y) * link.transmission * params.p_d;
}

double rate_base(const Link& link, const NetworkParams& params) {
    const double pb = p_bsa(link, params);
    return 0.5 * request_rate_base(link, params) * pb * pb;
}

double p_flag(const NetworkParams& params) {
    return params.p_p * std::pow(params.p_q, params.n) * params.p_nd;
}

double cycle_period(const NetworkParams& params) { return 1.0 / params.r_max + params.t_nd; }

double request_rate_ndspm(const Link& link, const NetworkParams& params) {
    const double p = p_flag(params);
    const double period = cycle_period(params);
    const double mean_spacing = p * link.round_trip + (1.0 - p) * period;
    if (!(mean_spacing > 0.0)) {
        throw DomainError("request spacing is zero (p = 0 and T = 0)");
    }
    return 1.0 / mean_spacing;
}

double alpha(const Link& link, const NetworkParams& params) {
    const double p = flag_probability_checked(params);
    const double attempting = cycle_period(params) / p;
    return attempting / (attempting + link.round_trip);
}

double rate_ndspm(const Link& link, const NetworkParams& params) {
    const double flagged = params.p_nd * params.gamma_nd * p_bsa(link, params);
    return alpha(link, params) * request_rate_ndspm(link, params) * flagged * flagged / 2.0;
}

double t_star(const Link& link, const NetworkParams& params) {
    const double p = flag_probability_checked(params);
    return cycle_period(params) * expected_max_geometric(p) + link.round_trip;
}

double rate_storage(const Link& link, const NetworkParams& params) {
    const double released = link.transmission * params.gamma_nd * params.e_s *
                            std::pow(params.p_q, params.z) * params.p_d;
    return released * released / (2.0 * t_star(link, params));
}

double beta(double p, double period, std::optional<double> tau) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError(fmt::format("beta needs 0 < p <= 1, got {}", p));
    }
    if (!tau) return 1.0;
    if (!(*tau > 0.0)) throw DomainError("tau must be positive");
    // Written in u = exp(-T/tau) so that tau -> 0 gives the limit p / (2 - p)
    // instead of inf / inf; one_minus_u keeps precision for tau >> T.
    const double one_minus_u = -std::expm1(-period / *tau);
    const double q = 1.0 - p;
    const double numerator = 2.0 - p - q * one_minus_u;  // 1 + u q
    const double denominator = p + q * one_minus_u;      // 1 - u q
    return p * numerator / ((2.0 - p) * denominator);
}

double beta(const NetworkParams& params) {
    validate(params);
    return beta(flag_probability_checked(params), cycle_period(params), params.tau);
}

double rate_storage_finite(const Link& link, const NetworkParams& params) {
    const double ideal = rate_storage(link, params);
    if (!params.tau) return ideal;
    return beta(params) * ideal;
}

double delay_distribution(double p, std::int64_t cycles, DelayDirection direction) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw DomainError(fmt::format("delay distribution needs 0 < p <= 1, got {}", p));
    }
    const std::int64_t min_cycles = direction == DelayDirection::After ? 0 : 1;
    if (cycles < min_cycles) {
        throw DomainError(fmt::format("delay of {} cycles is invalid for direction '{}'", cycles,
                                      direction == DelayDirection::After ? "after" : "before"));
    }
    return p * std::pow(1.0 - p, static_cast<double>(cycles)) / (2.0 - p);
}

double asymptotic_ratio(const NetworkParams& params, Protocol protocol) {
    validate(params);
    switch (protocol) {
        case Protocol::Baseline:
            return 1.0;
        case Protocol::Ndspm:
            // alpha and r' both fall as 1/round_trip while r falls only once.
            return 0.0;
        case Protocol::NdspmStorage: {
            const double collected = params.p_p * std::pow(params.p_q, params.y);
            if (!(collected > 0.0)) {
                throw DomainError("asymptotic ratio undefined: p_p * p_q^y is zero");
            }
            const double gain =
                params.gamma_nd * params.e_s * std::pow(params.p_q, params.z) / collected;
            return gain * gain * beta(params);
        }
    }
    return 0.0;
}

double ndspm_breakeven_length(const NetworkParams& params) {
    validate(params);
    const double p = flag_probability_checked(params);
    const double one_way = params.p_nd * params.p_nd * cycle_period(params) / (2.0 * p * p);
    return one_way * kSpeedOfLight / (params.refractive_index * 1.0e3);
}

double rate(Protocol protocol, const Link& link, const NetworkParams& params) {
    switch (protocol) {
        case Protocol::Baseline:
            return rate_base(link, params);
        case Protocol::Ndspm:
            return rate_ndspm(link, params);
        case Protocol::NdspmStorage:
            return rate_storage_finite(link, params);
    }
    return 0.0;
}

DerivedQuantities derive(double length_km, const NetworkParams& params) {
    const Link link = link_at(length_km, params);
    DerivedQuantities d;
    d.t_n = travel_time(length_km, params);
    d.p_f = link.transmission;
    d.p_b = p_bsa(link, params);
    d.p_flag = p_flag(params);
    d.cycle_period = cycle_period(params);
    d.alpha = alpha(link, params);
    d.t_star = t_star(link, params);
    d.beta = beta(params);
    return d;
}

}  // namespace hybridnet::model
