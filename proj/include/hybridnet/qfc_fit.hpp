#pragma once

#include <optional>
#include <span>

// Frequency-conversion efficiency versus pump power, eta * sin^2((pi/2) sqrt(P/P_m)),
// and a damped Gauss-Newton least-squares fit of (eta, P_m) to measurements.
namespace hybridnet::qfc {

struct Measurement {
    double pump_power = 0.0;
    double efficiency = 0.0;
    std::optional<double> uncertainty;  ///< 1-sigma; enables inverse-variance weights
};

struct Guess {
    double eta = 0.0;
    double p_m = 0.0;
};

struct Fit {
    double eta = 0.0;
    double p_m = 0.0;
    double residual_norm = 0.0;  ///< sqrt of the (weighted) sum of squares
    bool converged = false;
    int iterations = 0;
};

inline constexpr int kMaxIterations = 10'000;
inline constexpr double kStepTolerance = 1e-9;

double efficiency_model(double pump_power, double eta, double p_m);

/// Needs >= 3 measurements spanning >= 2 distinct pump powers
/// (std::invalid_argument otherwise). If the iteration cap is hit the best
/// parameters so far are returned with converged = false. The fit refines both
/// the guess and the best point of a p_m grid scan, keeping the lower cost.
Fit fit(std::span<const Measurement> measurements, std::optional<Guess> initial = std::nullopt);

}  // namespace hybridnet::qfc
