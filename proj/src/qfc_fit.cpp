#include "hybridnet/qfc_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

#include "hybridnet/params.hpp"

namespace hybridnet::qfc {

namespace {

struct Params {
    double eta;
    double p_m;
};

struct Point {
    double power;
    double value;
    double weight;  // 1 / sigma, or 1
};

double phase(double power, double p_m) {
    return std::numbers::pi / 2.0 * std::sqrt(power / p_m);
}

double cost(std::span<const Point> points, Params theta) {
    double sum = 0.0;
    for (const auto& pt : points) {
        const double s = std::sin(phase(pt.power, theta.p_m));
        const double r = pt.weight * (pt.value - theta.eta * s * s);
        sum += r * r;
    }
    return sum;
}

std::vector<Point> prepare(std::span<const Measurement> measurements) {
    if (measurements.size() < 3) {
        throw std::invalid_argument(fmt::format(
            "QFC fit needs at least 3 measurements, got {}", measurements.size()));
    }
    std::set<double> powers;
    std::vector<Point> points;
    points.reserve(measurements.size());
    for (const auto& m : measurements) {
        if (!(m.pump_power >= 0.0) || !std::isfinite(m.pump_power)) {
            throw DomainError(fmt::format("pump power must be >= 0, got {}", m.pump_power));
        }
        if (!(m.efficiency >= 0.0 && m.efficiency <= 1.0)) {
            throw DomainError(fmt::format("efficiency must lie in [0, 1], got {}", m.efficiency));
        }
        double weight = 1.0;
        if (m.uncertainty) {
            if (!(*m.uncertainty > 0.0) || !std::isfinite(*m.uncertainty)) {
                throw DomainError(
                    fmt::format("uncertainty must be positive, got {}", *m.uncertainty));
            }
            weight = 1.0 / *m.uncertainty;
        }
        powers.insert(m.pump_power);
        points.push_back({m.pump_power, m.efficiency, weight});
    }
    if (powers.size() < 2) {
        throw std::invalid_argument("QFC fit needs at least 2 distinct pump powers");
    }
    return points;
}

Params default_guess(std::span<const Point> points) {
    const auto best = std::max_element(points.begin(), points.end(),
                                       [](const Point& a, const Point& b) { return a.value < b.value; });
    Params guess{best->value, best->power};
    if (!(guess.p_m > 0.0)) {
        // Every point sits at zero power or zero efficiency; fall back to the span.
        for (const auto& pt : points) guess.p_m = std::max(guess.p_m, pt.power);
    }
    if (!(guess.eta > 0.0)) guess.eta = 0.5;
    return guess;
}

}  // namespace

double efficiency_model(double pump_power, double eta, double p_m) {
    if (!(pump_power >= 0.0)) {
        throw DomainError(fmt::format("pump power must be >= 0, got {}", pump_power));
    }
    if (!(p_m > 0.0)) throw DomainError(fmt::format("p_m must be positive, got {}", p_m));
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw DomainError(fmt::format("eta must lie in [0, 1], got {}", eta));
    }
    const double s = std::sin(phase(pump_power, p_m));
    return eta * s * s;
}

namespace {

struct Refined {
    Fit fit;
    double cost;
};

// Levenberg-Marquardt from one starting point.
Refined refine(std::span<const Point> points, Params theta) {
    double current = cost(points, theta);
    double lambda = 1e-3;
    Fit out;
    for (out.iterations = 1; out.iterations <= kMaxIterations; ++out.iterations) {
        // Normal equations J^T J d = J^T r for residual r = y - f.
        double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
        for (const auto& pt : points) {
            const double phi = phase(pt.power, theta.p_m);
            const double s = std::sin(phi);
            const double d_eta = pt.weight * s * s;
            const double d_pm =
                -pt.weight * theta.eta * std::sin(2.0 * phi) * phi / (2.0 * theta.p_m);
            const double r = pt.weight * (pt.value - theta.eta * s * s);
            a11 += d_eta * d_eta;
            a12 += d_eta * d_pm;
            a22 += d_pm * d_pm;
            g1 += d_eta * r;
            g2 += d_pm * r;
        }

        bool accepted = false;
        while (!accepted && lambda < 1e20) {
            const double b11 = a11 * (1.0 + lambda);
            const double b22 = a22 * (1.0 + lambda);
            const double det = b11 * b22 - a12 * a12;
            if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
                lambda *= 10.0;
                continue;
            }
            const double step_eta = (g1 * b22 - g2 * a12) / det;
            const double step_pm = (b11 * g2 - a12 * g1) / det;

            const double rel_step = std::max(std::abs(step_eta) / std::max(std::abs(theta.eta), 1e-300),
                                             std::abs(step_pm) / theta.p_m);
            if (rel_step < kStepTolerance) {
                out.converged = true;
                break;
            }

            const Params trial{std::clamp(theta.eta + step_eta, 0.0, 1.0), theta.p_m + step_pm};
            if (trial.p_m > 0.0) {
                const double trial_cost = cost(points, trial);
                if (trial_cost <= current) {
                    theta = trial;
                    current = trial_cost;
                    lambda = std::max(lambda / 10.0, 1e-12);
                    accepted = true;
                    continue;
                }
            }
            lambda *= 10.0;
        }
        if (out.converged) break;
        if (!accepted) {
            // Damping saturated without a descent step: no further progress is possible.
            out.converged = true;
            break;
        }
    }
    out.iterations = std::min(out.iterations, kMaxIterations);
    out.eta = theta.eta;
    out.p_m = theta.p_m;
    out.residual_norm = std::sqrt(current);
    return {out, current};
}

// Eta at its least-squares optimum for this p_m, clamped to [0, 1].
Params profiled(std::span<const Point> points, double p_m) {
    double num = 0.0, den = 0.0;
    for (const auto& pt : points) {
        const double s = std::sin(phase(pt.power, p_m));
        const double w2 = pt.weight * pt.weight;
        num += w2 * pt.value * s * s;
        den += w2 * s * s * s * s;
    }
    return {den > 0.0 ? std::clamp(num / den, 0.0, 1.0) : 0.0, p_m};
}

// Best profiled point on a log grid of p_m, four decades either side of the
// largest power. Keeps the fit out of the aliased minima a poor guess can
// fall into.
Params scan_start(std::span<const Point> points) {
    double top = 0.0;
    for (const auto& pt : points) top = std::max(top, pt.power);
    constexpr int kGrid = 4000;
    Params best{0.0, top};
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kGrid; ++i) {
        const double p_m = top * std::pow(10.0, -4.0 + 8.0 * i / kGrid);
        const Params candidate = profiled(points, p_m);
        const double c = cost(points, candidate);
        if (c < best_cost) {
            best_cost = c;
            best = candidate;
        }
    }
    return best;
}

}  // namespace

Fit fit(std::span<const Measurement> measurements, std::optional<Guess> initial) {
    const std::vector<Point> points = prepare(measurements);

    Params theta = initial ? Params{initial->eta, initial->p_m} : default_guess(points);
    if (!(theta.p_m > 0.0) || !(theta.eta >= 0.0 && theta.eta <= 1.0)) {
        throw DomainError(fmt::format("initial guess out of range: eta={}, p_m={}", theta.eta,
                                      theta.p_m));
    }

    Refined from_guess = refine(points, theta);
    Refined from_scan = refine(points, scan_start(points));
    return from_scan.cost < from_guess.cost ? from_scan.fit : from_guess.fit;
}

}  // namespace hybridnet::qfc
