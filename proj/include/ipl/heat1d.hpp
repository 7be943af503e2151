#pragma once

// Heat equation u_t = u_xx on (0, pi) with zero Dirichlet data: forward
// solve, analytic singular system, noise and regularized recovery of u(., 0).

#include <cmath>
#include <numbers>
#include <utility>

#include "ipl/errors.hpp"
#include "ipl/optim.hpp"
#include "ipl/specfun.hpp"
#include "ipl/spectral.hpp"

namespace ipl {

/// Interior samples x_i = i pi / (n_x + 1), i = 1..n_x.
struct HeatGrid {
    Vector values;

    HeatGrid() = default;
    explicit HeatGrid(int n_x) : values(Vector::Zero(n_x)) {
        if (n_x < 2)
            throw DomainError("HeatGrid: n_x must be >= 2");
    }

    template <class F>
    static HeatGrid sample(int n_x, F&& f) {
        HeatGrid g(n_x);
        for (int i = 0; i < n_x; ++i)
            g.values(i) = f(g.x(i));
        return g;
    }

    int n_x() const { return static_cast<int>(values.size()); }
    double spacing() const { return std::numbers::pi / (n_x() + 1); }
    /// Position of the zero-based sample i.
    double x(int i) const { return (i + 1) * spacing(); }

    /// Trapezoid integral over [0, pi]; the endpoint values are zero.
    double integral() const { return spacing() * values.sum(); }
    double dot(const HeatGrid& o) const { return spacing() * values.dot(o.values); }
    double sup_norm() const { return values.cwiseAbs().maxCoeff(); }
};

struct HeatProblem {
    double T = 1.0;
    int n_modes = 64;

    void validate() const {
        if (!(T > 0.0))
            throw DomainError("HeatProblem: T must be > 0");
        if (n_modes < 1)
            throw DomainError("HeatProblem: n_modes must be >= 1");
    }
};

/// phi_n(x) = sqrt(2/pi) sin(n x).
inline double heat_mode(int n, double x) { return std::sqrt(2.0 / std::numbers::pi) * std::sin(n * x); }

/// sigma_n = exp(-n^2 T), phi_n = psi_n = sqrt(2/pi) sin(n x); mode index
/// i = 0.. corresponds to n = i + 1. Inner products use the trapezoid rule
/// on the caller's grid.
class HeatSingularSystem {
public:
    using solution_type = HeatGrid;

    explicit HeatSingularSystem(HeatProblem prob) : prob_(prob) { prob_.validate(); }

    int size() const { return prob_.n_modes; }
    double sigma(int i) const { return std::exp(-double(i + 1) * double(i + 1) * prob_.T); }
    double coefficient(int i, const HeatGrid& g) const {
        double s = 0.0;
        for (int j = 0; j < g.n_x(); ++j)
            s += g.values(j) * heat_mode(i + 1, g.x(j));
        return g.spacing() * s;
    }
    HeatGrid zero_solution(const HeatGrid& g) const { return HeatGrid(g.n_x()); }
    void accumulate(int i, double c, HeatGrid& out) const {
        for (int j = 0; j < out.n_x(); ++j)
            out.values(j) += c * heat_mode(i + 1, out.x(j));
    }

    const HeatProblem& problem() const { return prob_; }

private:
    HeatProblem prob_;
};

inline HeatSingularSystem heat_singular_system(const HeatProblem& prob) { return HeatSingularSystem(prob); }

/// u(., T) = sum_n C_n exp(-n^2 T) phi_n with C_n = <f, phi_n>.
inline HeatGrid heat_forward(const HeatGrid& f, const HeatProblem& prob) {
    if (!f.values.allFinite())
        throw DomainError("heat_forward: non-finite initial data");
    const HeatSingularSystem sys(prob);
    HeatGrid u(f.n_x());
    for (int i = 0; i < sys.size(); ++i) {
        const double s = sys.sigma(i);
        if (s == 0.0)
            continue;
        sys.accumulate(i, s * sys.coefficient(i, f), u);
    }
    return u;
}

/// M = floor((sqrt(-ln(alpha)/2) + 1) / 2): the number of odd modes with
/// exp(-(2M-1)^2) >= sqrt(alpha).
inline int heat_truncation_index(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("heat_truncation_index: alpha must lie in (0,1)");
    return static_cast<int>(std::floor(0.5 * (std::sqrt(-0.5 * std::log(alpha)) + 1.0)));
}

/// sum_n w(sigma_n) e^{n^2 T} <g, phi_n> phi_n.
inline HeatGrid heat_invert(const HeatGrid& g, const HeatProblem& prob, const SpectralFilter& filter) {
    if (!g.values.allFinite())
        throw DomainError("heat_invert: non-finite data");
    return apply_filtered_inverse(HeatSingularSystem(prob), filter, g);
}

/// g(x)(1 + X) with X ~ N(0, level^2) drawn per grid point.
inline std::pair<HeatGrid, RngState> multiplicative_noise(const HeatGrid& g, double level, RngState state) {
    if (!(level >= 0.0))
        throw DomainError("multiplicative_noise: level must be >= 0");
    HeatGrid out = g;
    if (level == 0.0)
        return {out, state};
    for (int i = 0; i < g.n_x(); ++i) {
        auto [x, next] = normal_sample(state, 0.0, level);
        out.values(i) = g.values(i) * (1.0 + x);
        state = next;
    }
    return {out, state};
}

/// The forward map as a symmetric matrix on grid values; |K| = exp(-T).
inline LinearOperatorPair heat_operator(const HeatProblem& prob) {
    prob.validate();
    auto fwd = [prob](const Vector& f) -> Vector {
        HeatGrid g;
        g.values = f;
        return heat_forward(g, prob).values;
    };
    return {fwd, fwd, std::exp(-prob.T)};
}

} // namespace ipl
