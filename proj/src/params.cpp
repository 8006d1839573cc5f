#include "hybridnet/params.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hybridnet {

namespace {

void require_probability(double value, std::string_view name) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError(fmt::format("{} must lie in [0, 1], got {}", name, value));
    }
}

}  // namespace

void validate(const NetworkParams& params) {
    if (!(params.r_max > 0.0) || !std::isfinite(params.r_max)) {
        throw DomainError(fmt::format("r_max must be positive, got {}", params.r_max));
    }
    if (!(params.t_nd >= 0.0) || !std::isfinite(params.t_nd)) {
        throw DomainError(fmt::format("t_nd must be non-negative, got {}", params.t_nd));
    }
    if (!(params.refractive_index >= 1.0) || !std::isfinite(params.refractive_index)) {
        throw DomainError(
            fmt::format("refractive_index must be >= 1, got {}", params.refractive_index));
    }
    if (!(params.attenuation >= 0.0) || !std::isfinite(params.attenuation)) {
        throw DomainError(
            fmt::format("attenuation must be non-negative, got {}", params.attenuation));
    }
    require_probability(params.p_p, "p_p");
    require_probability(params.p_q, "p_q");
    require_probability(params.p_d, "p_d");
    require_probability(params.p_nd, "p_nd");
    require_probability(params.e_s, "e_s");
    require_probability(params.gamma_nd, "gamma_nd");
    if (params.y < 0 || params.n < 0 || params.z < 0) {
        throw DomainError("QFC stage counts y, n, z must be non-negative");
    }
    if (params.n > params.y) {
        throw DomainError(fmt::format("n ({}) cannot exceed y ({})", params.n, params.y));
    }
    if (params.tau && !(*params.tau > 0.0)) {
        throw DomainError(fmt::format("tau must be positive when set, got {}", *params.tau));
    }
}

std::string_view to_string(Protocol protocol) {
    switch (protocol) {
        case Protocol::Baseline:
            return "baseline";
        case Protocol::Ndspm:
            return "ndspm";
        case Protocol::NdspmStorage:
            return "storage";
    }
    return "unknown";
}

Protocol parse_protocol(std::string_view text) {
    if (text == "baseline") return Protocol::Baseline;
    if (text == "ndspm") return Protocol::Ndspm;
    if (text == "storage" || text == "ndspm-storage" || text == "ndspm+storage") {
        return Protocol::NdspmStorage;
    }
    throw std::invalid_argument(fmt::format(
        "unknown protocol '{}' (expected baseline, ndspm or storage)", text));
}

}  // namespace hybridnet
