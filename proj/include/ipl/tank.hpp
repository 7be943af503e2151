#pragma once

// Contaminated water tank: A(t) = (1 - e^{-y t}) x observed at t = 1, 2.

#include <cmath>
#include <optional>

#include "ipl/errors.hpp"
#include "ipl/optim.hpp"

namespace ipl {

struct TankParams {
    double x = 0.0;  // (b - a0) / a0
    double y = 0.0;  // v / V per day
};

struct TankObservation {
    double A1 = 0.0;
    double A2 = 0.0;
};

inline TankObservation tank_forward(const TankParams& p) {
    return {p.x * -std::expm1(-p.y), p.x * -std::expm1(-2.0 * p.y)};
}

/// x = A1^2 / (2 A1 - A2), y = ln(A1 / (A2 - A1)).
inline TankParams tank_invert_closed_form(const TankObservation& obs) {
    const double den = 2.0 * obs.A1 - obs.A2;
    if (std::abs(den) < 1e-14 * std::abs(obs.A1))
        throw NumericalError("tank_invert_closed_form: 2 A1 - A2 vanishes, x is not recoverable");
    if (!(obs.A1 > 0.0) || !(obs.A2 > obs.A1))
        throw NumericalError("tank_invert_closed_form: need A2 > A1 > 0 for a real y");
    return {obs.A1 * obs.A1 / den, std::log(obs.A1 / (obs.A2 - obs.A1))};
}

/// 1/2 |A(p) - obs|^2 + alpha (x^2 + y^2).
inline double tank_cost(const TankParams& p, const TankObservation& obs, double alpha) {
    const TankObservation a = tank_forward(p);
    const double r1 = a.A1 - obs.A1;
    const double r2 = a.A2 - obs.A2;
    return 0.5 * (r1 * r1 + r2 * r2) + alpha * (p.x * p.x + p.y * p.y);
}

inline Vector tank_cost_gradient(const TankParams& p, const TankObservation& obs, double alpha) {
    const double e1 = std::exp(-p.y);
    const double e2 = std::exp(-2.0 * p.y);
    const TankObservation a = tank_forward(p);
    const double r1 = a.A1 - obs.A1;
    const double r2 = a.A2 - obs.A2;
    Vector g(2);
    g(0) = r1 * -std::expm1(-p.y) + r2 * -std::expm1(-2.0 * p.y) + 2.0 * alpha * p.x;
    g(1) = r1 * p.x * e1 + r2 * 2.0 * p.x * e2 + 2.0 * alpha * p.y;
    return g;
}

inline TankParams to_tank_params(const Vector& v) { return {v(0), v(1)}; }

inline IterTrace tank_solve_cg(const TankObservation& obs, double alpha, const TankParams& p0, const CgConfig& cfg) {
    Vector x0(2);
    x0 << p0.x, p0.y;
    return nonlinear_cg([&](const Vector& v) { return tank_cost(to_tank_params(v), obs, alpha); },
                        [&](const Vector& v) { return tank_cost_gradient(to_tank_params(v), obs, alpha); }, x0, cfg);
}

struct TankErrors {
    double eps_est = 0.0;
    std::optional<double> eps_obs;
};

/// Relative misfit of the fitted data against the observation and, when
/// given, of the observation against the truth.
inline TankErrors tank_error_metrics(const TankParams& p_est, const TankObservation& obs,
                                     const std::optional<TankObservation>& truth = std::nullopt) {
    auto rel = [](const TankObservation& a, const TankObservation& ref) {
        if (ref.A1 == 0.0 || ref.A2 == 0.0)
            throw DomainError("tank_error_metrics: zero reference observation");
        const double d1 = (a.A1 - ref.A1) / ref.A1;
        const double d2 = (a.A2 - ref.A2) / ref.A2;
        return std::sqrt(d1 * d1 + d2 * d2);
    };
    TankErrors out;
    out.eps_est = rel(tank_forward(p_est), obs);
    if (truth)
        out.eps_obs = rel(obs, *truth);
    return out;
}

} // namespace ipl
