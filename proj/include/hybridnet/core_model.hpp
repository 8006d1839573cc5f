#pragma once

#include <cstdint>

#include "hybridnet/params.hpp"

// Closed-form entanglement-rate model for the three network configurations:
// plain heralded (baseline), NDSPM-flagged, and NDSPM with photonic storage
// at the BSA inputs. Every function is pure and thread-safe.
namespace hybridnet::model {

/// The two length-dependent inputs of every rate expression. Building one by
/// hand lets callers evaluate the formulas with cycle-rounded delays.
struct Link {
    double transmission = 1.0;  ///< fiber transmission P_f over one arm
    double round_trip = 0.0;    ///< photon out + classical feedback back (s)
};

/// One-way transit time over `length_km` of fiber.
double travel_time(double length_km, const NetworkParams& params);

/// 10^(-attenuation * length / 10).
double fiber_transmission(double length_km, double attenuation_db_per_km);

Link link_at(double length_km, const NetworkParams& params);

// --- baseline ---------------------------------------------------------------

/// min(r_max, 1 / round_trip); r_max when the round trip is zero.
double request_rate_base(const Link& link, const NetworkParams& params);
/// End-to-end probability a requested photon is detected at the BSA.
double p_bsa(const Link& link, const NetworkParams& params);
double rate_base(const Link& link, const NetworkParams& params);

// --- NDSPM ------------------------------------------------------------------

/// Per-request probability that the NDSPM flags a photon.
double p_flag(const NetworkParams& params);
/// T = 1/r_max + t_nd.
double cycle_period(const NetworkParams& params);
double request_rate_ndspm(const Link& link, const NetworkParams& params);
/// Probability both nodes are attempting during the same cycle.
double alpha(const Link& link, const NetworkParams& params);
double rate_ndspm(const Link& link, const NetworkParams& params);

// --- NDSPM + storage --------------------------------------------------------

/// Mean time between storage-assisted attempts:
/// T * E[max of two geometric(p)] + round trip.
double t_star(const Link& link, const NetworkParams& params);
/// Rate with ideal (infinite-lifetime) storage.
double rate_storage(const Link& link, const NetworkParams& params);

/// Finite-lifetime correction. Exactly 1 when `tau` is empty.
double beta(double p, double period, std::optional<double> tau);
double beta(const NetworkParams& params);
/// beta(params) * rate_storage; identical to rate_storage when tau is empty.
double rate_storage_finite(const Link& link, const NetworkParams& params);

enum class DelayDirection { After, Before };

/// Probability that the second node's flag lands `cycles` cycles after
/// (or before) the first node's, for independent geometric(p) attempts.
/// Direction::After accepts cycles >= 0, Direction::Before cycles >= 1.
double delay_distribution(double p, std::int64_t cycles, DelayDirection direction);

// --- case-study helpers -----------------------------------------------------

/// Long-distance limit of rate(protocol) / rate_base.
double asymptotic_ratio(const NetworkParams& params, Protocol protocol);

/// Length where P_nd^2 T / (2 p^2) equals the one-way travel time; beyond it
/// the NDSPM network falls behind the baseline.
double ndspm_breakeven_length(const NetworkParams& params);

/// Dispatches on protocol. NdspmStorage includes the finite-storage factor.
double rate(Protocol protocol, const Link& link, const NetworkParams& params);

struct DerivedQuantities {
    double t_n = 0.0;
    double p_f = 0.0;
    double p_b = 0.0;
    double p_flag = 0.0;
    double cycle_period = 0.0;
    double alpha = 0.0;
    double t_star = 0.0;
    double beta = 1.0;
};

/// All intermediates at one length. Requires p_flag > 0.
DerivedQuantities derive(double length_km, const NetworkParams& params);

// Length-based conveniences.
inline double request_rate_base(double length_km, const NetworkParams& params) {
    return request_rate_base(link_at(length_km, params), params);
}
inline double p_bsa(double length_km, const NetworkParams& params) {
    return p_bsa(link_at(length_km, params), params);
}
inline double rate_base(double length_km, const NetworkParams& params) {
    return rate_base(link_at(length_km, params), params);
}
inline double request_rate_ndspm(double length_km, const NetworkParams& params) {
    return request_rate_ndspm(link_at(length_km, params), params);
}
inline double alpha(double length_km, const NetworkParams& params) {
    return alpha(link_at(length_km, params), params);
}
inline double rate_ndspm(double length_km, const NetworkParams& params) {
    return rate_ndspm(link_at(length_km, params), params);
}
inline double t_star(double length_km, const NetworkParams& params) {
    return t_star(link_at(length_km, params), params);
}
inline double rate_storage(double length_km, const NetworkParams& params) {
    return rate_storage(link_at(length_km, params), params);
}
inline double rate_storage_finite(double length_km, const NetworkParams& params) {
    return rate_storage_finite(link_at(length_km, params), params);
}
inline double rate(Protocol protocol, double length_km, const NetworkParams& params) {
    return rate(protocol, link_at(length_km, params), params);
}

}  // namespace hybridnet::model
