#pragma once

// Landweber iteration and nonlinear conjugate gradient with Armijo
// backtracking.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ipl/errors.hpp"
#include "ipl/spectral.hpp"

namespace ipl {

/// K and K* on Euclidean vectors, with an upper estimate of |K|.
struct LinearOperatorPair {
    std::function<Vector(const Vector&)> apply;
    std::function<Vector(const Vector&)> apply_adjoint;
    double norm_bound = 0.0;
};

inline LinearOperatorPair matrix_operator(const Matrix& k, double norm_bound) {
    return {[k](const Vector& f) -> Vector { return k * f; },
            [k](const Vector& g) -> Vector { return k.transpose() * g; }, norm_bound};
}

/// f^k = f^{k-1} - omega K*(K f^{k-1} - g), k = 1..m. The observer, if set,
/// sees every iterate.
inline Vector landweber(const LinearOperatorPair& op, const Vector& g, double omega, int m, const Vector& f0,
                        const std::function<void(int, const Vector&)>& observer = {}) {
    if (!(op.norm_bound > 0.0))
        throw PreconditionError("landweber: operator norm bound must be > 0");
    if (!(omega > 0.0))
        throw PreconditionError("landweber: omega must be > 0");
    if (!(omega * op.norm_bound * op.norm_bound < 1.0))
        throw PreconditionError("landweber: omega must satisfy omega < 1/|K|^2, otherwise the iteration may diverge");
    if (m < 1)
        throw PreconditionError("landweber: m must be >= 1");
    Vector f = f0;
    if (observer)
        observer(0, f);
    for (int k = 1; k <= m; ++k) {
        f -= omega * op.apply_adjoint(op.apply(f) - g);
        if (observer)
            observer(k, f);
    }
    return f;
}

enum class BetaRule { PRP, FR, HS };

inline std::string to_string(BetaRule r) {
    switch (r) {
    case BetaRule::PRP:
        return "PRP";
    case BetaRule::FR:
        return "FR";
    case BetaRule::HS:
        return "HS";
    }
    return "?";
}

inline BetaRule parse_beta_rule(const std::string& s) {
    if (s == "PRP" || s == "prp")
        return BetaRule::PRP;
    if (s == "FR" || s == "fr")
        return BetaRule::FR;
    if (s == "HS" || s == "hs")
        return BetaRule::HS;
    throw DomainError("unknown beta rule: " + s);
}

struct CgConfig {
    BetaRule beta_rule = BetaRule::PRP;
    double gamma = 0.1;
    double kappa = 0.5;
    double ell0 = 1.0;
    int j_max = 40;
    int k_max = 10000;
    double grad_tol = 0.0;  // 0 disables early exit

    void validate() const {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw DomainError("CgConfig: gamma must lie in (0,1)");
        if (!(kappa > 0.0 && kappa < 1.0))
            throw DomainError("CgConfig: kappa must lie in (0,1)");
        if (!(ell0 > 0.0))
            throw DomainError("CgConfig: ell0 must be > 0");
        if (j_max < 1 || k_max < 1)
            throw DomainError("CgConfig: j_max and k_max must be >= 1");
        if (!(grad_tol >= 0.0))
            throw DomainError("CgConfig: grad_tol must be >= 0");
    }
};

struct IterRecord {
    Vector x;
    double cost = 0.0;
    double grad_norm = 0.0;
    double step = 0.0;     // step that produced this iterate (0 for the start)
    bool armijo = false;   // false when the step came from the j_max fallback
};

struct IterTrace {
    std::vector<IterRecord> records;
    bool aborted = false;
    std::string diagnostic;

    const IterRecord& final() const { return records.back(); }
};

using CostFn = std::function<double(const Vector&)>;
using GradFn = std::function<Vector(const Vector&)>;

struct LineSearchResult {
    double step;
    bool armijo;
};

/// First l in {l0, kappa l0, ...} with cost(x + l d) < cost(x) + gamma l grad.d;
/// l0 kappa^{j_max} if none of the j_max trials passes.
inline LineSearchResult backtracking_line_search(const CostFn& cost, const Vector& grad_at_point, const Vector& point,
                                                 const Vector& direction, const CgConfig& cfg) {
    const double f0 = cost(point);
    const double slope = grad_at_point.dot(direction);
    double ell = cfg.ell0;
    for (int j = 1; j <= cfg.j_max; ++j) {
        if (cost(point + ell * direction) < f0 + cfg.gamma * ell * slope)
            return {ell, true};
        ell *= cfg.kappa;
    }
    return {ell, false};
}

inline double cg_beta(BetaRule rule, const Vector& g_prev, const Vector& g_new, const Vector& d_prev) {
    double num = 0.0;
    double den = 0.0;
    switch (rule) {
    case BetaRule::PRP:
        num = (g_new - g_prev).dot(g_new);
        den = g_prev.squaredNorm();
        break;
    case BetaRule::FR:
        num = g_new.squaredNorm();
        den = g_prev.squaredNorm();
        break;
    case BetaRule::HS:
        num = (g_new - g_prev).dot(g_new);
        den = (g_new - g_prev).dot(d_prev);
        break;
    }
    if (std::abs(den) < 1e-300)
        return 0.0;
    return num / den;
}

/// Nonlinear CG: d^0 = -grad(x^0), then line search, update, beta, new
/// direction, for k = 1..k_max.
inline IterTrace nonlinear_cg(const CostFn& cost, const GradFn& grad, const Vector& x0, const CgConfig& cfg) {
    cfg.validate();
    IterTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.k_max) + 1);
    Vector x = x0;
    Vector g = grad(x);
    double fx = cost(x);
    trace.records.push_back({x, fx, g.norm(), 0.0, false});
    if (!std::isfinite(fx) || !g.allFinite()) {
        trace.aborted = true;
        trace.diagnostic = "non-finite cost or gradient at the initial point";
        return trace;
    }
    Vector d = -g;
    for (int k = 1; k <= cfg.k_max; ++k) {
        const LineSearchResult ls = backtracking_line_search(cost, g, x, d, cfg);
        x += ls.step * d;
        const Vector g_new = grad(x);
        fx = cost(x);
        trace.records.push_back({x, fx, g_new.norm(), ls.step, ls.armijo});
        if (!std::isfinite(fx) || !g_new.allFinite()) {
            trace.aborted = true;
            trace.diagnostic = "non-finite cost or gradient at iteration " + std::to_string(k);
            return trace;
        }
        if (cfg.grad_tol > 0.0 && g_new.norm() <= cfg.grad_tol)
            break;
        const double beta = cg_beta(cfg.beta_rule, g, g_new, d);
        d = -g_new + beta * d;
        g = g_new;
    }
    return trace;
}

} // namespace ipl
