#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hybridnet {

/// Raised when an input lies outside the domain of a rate expression
/// (negative lengths, p = 0 where the formula is singular, bad probabilities).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Vacuum speed of light, exact SI value.
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Physical and protocol parameters of one symmetric two-node network.
///
/// Lengths are per-arm (node to BSA) and given in km at every API boundary.
/// Times are seconds and rates Hz. Probabilities are plain doubles in [0, 1].
struct NetworkParams {
    double r_max = 2.0e6;            ///< maximum photon request rate (Hz)
    double t_nd = 1.0e-6;            ///< NDSPM response time (s)
    double refractive_index = 1.4;
    double attenuation = 3.0;        ///< fiber loss (dB/km)
    double p_p = 0.06;               ///< emitted + collected + fiber-coupled per request
    double p_q = 0.6;                ///< QFC efficiency per stage
    double p_d = 0.8;                ///< BSA detector efficiency
    double p_nd = 0.75;              ///< NDSPM detection efficiency
    double e_s = 1.0;                ///< storage release efficiency
    double gamma_nd = 1.0;           ///< NDSPM transmission
    int y = 1;                       ///< QFC stages per arm, baseline network
    int n = 1;                       ///< QFC stages before the NDSPM
    int z = 0;                       ///< QFC stages after the NDSPM
    std::optional<double> tau;       ///< storage 1/e lifetime (s); empty = infinite

    bool operator==(const NetworkParams&) const = default;
};

/// Throws DomainError naming the first violated invariant.
void validate(const NetworkParams& params);

enum class Protocol { Baseline, Ndspm, NdspmStorage };

inline constexpr Protocol kAllProtocols[] = {Protocol::Baseline, Protocol::Ndspm,
                                             Protocol::NdspmStorage};

/// Canonical identifiers: "baseline", "ndspm", "storage".
std::string_view to_string(Protocol protocol);

/// Accepts the canonical identifiers plus "ndspm-storage" / "ndspm+storage".
Protocol parse_protocol(std::string_view text);

}  // namespace hybridnet
