#pragma once

// Special functions used by the optical-tomography and CT solvers:
// modified Bessel functions I_n, K_n of integer order, the sine and cosine
// integrals, and a counter-based normal sampler.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>

#include "ipl/errors.hpp"

namespace ipl {

namespace detail {

inline constexpr double euler_gamma = 0.57721566490153286061;

inline void check_order(int n, const char* who) {
    if (n < 0)
        throw DomainError(std::string(who) + ": negative order " + std::to_string(n));
}

// Ascending series; every term is positive so there is no cancellation.
inline double bessel_i_series(int n, double x) {
    const double half = 0.5 * x;
    double lead = 1.0;
    for (int j = 1; j <= n; ++j)
        lead *= half / j;
    const double q = half * half;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m < 2000; ++m) {
        term *= q / (double(m) * double(m + n));
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return lead * sum;
}

// K_0 and K_1 by their logarithmic series (x <= 2).
inline std::pair<double, double> bessel_k01_series(double x) {
    const double q = 0.25 * x * x;
    const double log_half = std::log(0.5 * x);

    // K_0 = -(ln(x/2) + gamma) I_0 + sum_k H_k q^k / (k!)^2
    double term = 1.0;
    double harmonic = 0.0;
    double tail0 = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (double(k) * double(k));
        harmonic += 1.0 / k;
        const double add = term * harmonic;
        tail0 += add;
        if (add < 1e-18 * std::abs(tail0))
            break;
    }
    const double k0 = -(log_half + euler_gamma) * bessel_i_series(0, x) + tail0;

    // K_1 = 1/x + ln(x/2) I_1 - (x/4) sum_k [psi(k+1) + psi(k+2)] q^k / (k! (k+1)!)
    double psi1 = -euler_gamma;       // psi(k+1)
    double psi2 = 1.0 - euler_gamma;  // psi(k+2)
    term = 1.0;
    double tail1 = psi1 + psi2;
    for (int k = 1; k < 200; ++k) {
        term *= q / (double(k) * double(k + 1));
        psi1 += 1.0 / k;
        psi2 += 1.0 / (k + 1);
        const double add = term * (psi1 + psi2);
        tail1 += add;
        if (std::abs(add) < 1e-18 * std::abs(tail1))
            break;
    }
    const double k1 = 1.0 / x + log_half * bessel_i_series(1, x) - 0.25 * x * tail1;
    return {k0, k1};
}

// K_0 and K_1 by Steed's continued fraction (x > 2).
inline std::pair<double, double> bessel_k01_cf(double x) {
    constexpr double eps = 1e-17;
    const double a1 = 0.25;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d;
    double delh = d;
    double q1 = 0.0;
    double q2 = 1.0;
    double q = a1;
    double c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    int i = 1;
    for (; i < 10000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps)
            break;
    }
    if (i == 10000)
        throw NumericalError("bessel_k: continued fraction failed to converge");
    h *= a1;
    const double k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
    const double k1 = k0 * (x + 0.5 - h) / x;
    return {k0, k1};
}

} // namespace detail

/// Modified Bessel function of the first kind I_n(x), integer n >= 0, x >= 0.
inline double bessel_i(int n, double x) {
    detail::check_order(n, "bessel_i");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw DomainError("bessel_i: argument must be finite and >= 0");
    if (x == 0.0)
        return n == 0 ? 1.0 : 0.0;
    return detail::bessel_i_series(n, x);
}

/// Modified Bessel function of the second kind K_n(x), integer n >= 0, x > 0.
/// K_0 and K_1 come from the log series (x <= 2) or Steed's continued
/// fraction; higher orders use the upward recurrence, which is stable for K.
inline double bessel_k(int n, double x) {
    detail::check_order(n, "bessel_k");
    if (!(x > 0.0) || std::isnan(x))
        throw DomainError("bessel_k: argument must be > 0");
    if (std::isinf(x))
        return 0.0;
    auto [k0, k1] = x <= 2.0 ? detail::bessel_k01_series(x) : detail::bessel_k01_cf(x);
    if (n == 0)
        return k0;
    double km = k0;
    double kn = k1;
    for (int j = 1; j < n; ++j) {
        const double kp = km + (2.0 * j / x) * kn;
        km = kn;
        kn = kp;
    }
    return kn;
}

/// I'_n(x) = (I_{n-1}(x) + I_{n+1}(x)) / 2 with I_{-1} = I_1.
inline double bessel_i_derivative(int n, double x) {
    detail::check_order(n, "bessel_i_derivative");
    const int lower = n == 0 ? 1 : n - 1;
    return 0.5 * (bessel_i(lower, x) + bessel_i(n + 1, x));
}

/// K'_n(x) = -(K_{n-1}(x) + K_{n+1}(x)) / 2 with K_{-1} = K_1.
inline double bessel_k_derivative(int n, double x) {
    detail::check_order(n, "bessel_k_derivative");
    const int lower = n == 0 ? 1 : n - 1;
    return -0.5 * (bessel_k(lower, x) + bessel_k(n + 1, x));
}

struct BesselDerivatives {
    double di;  // I'_n(x)
    double dk;  // K'_n(x)
};

inline BesselDerivatives bessel_derivatives(int n, double x) {
    return {bessel_i_derivative(n, x), bessel_k_derivative(n, x)};
}

struct SineCosineIntegrals {
    double si;  // -int_x^inf sin t / t dt  (= Si(x) - pi/2)
    double ci;  // -int_x^inf cos t / t dt
};

/// si(x) and ci(x) for x > 0. Power series below x = 4, continued fraction
/// for E_1(ix) above.
inline SineCosineIntegrals sine_cosine_integrals(double x) {
    if (!(x > 0.0) || std::isnan(x))
        throw DomainError("sine_cosine_integrals: argument must be > 0");
    constexpr double half_pi = 0.5 * std::numbers::pi;
    if (std::isinf(x))
        return {0.0, 0.0};
    if (x <= 4.0) {
        double term = x;  // x^{2k+1} / (2k+1)!
        double si_sum = x;
        double ci_sum = 0.0;
        double even = 1.0;  // x^{2k} / (2k)!
        for (int k = 1; k < 100; ++k) {
            even = -term * x / (2.0 * k);
            term = even * x / (2.0 * k + 1.0);
            const double c_add = even / (2.0 * k);
            const double s_add = term / (2.0 * k + 1.0);
            ci_sum += c_add;
            si_sum += s_add;
            if (std::abs(c_add) < 1e-18 && std::abs(s_add) < 1e-18)
                break;
        }
        return {si_sum - half_pi, detail::euler_gamma + std::log(x) + ci_sum};
    }
    // Modified Lentz on the continued fraction for E_1(ix).
    using cd = std::complex<double>;
    constexpr double tiny = 1e-300;
    cd b(1.0, x);
    cd c(1.0 / tiny, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    int i = 2;
    for (; i < 100000; ++i) {
        const double a = -double(i - 1) * double(i - 1);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < 1e-16)
            break;
    }
    if (i == 100000)
        throw NumericalError("sine_cosine_integrals: continued fraction failed to converge");
    h *= cd(std::cos(x), -std::sin(x));
    return {h.imag(), -h.real()};
}

/// Counter-based generator state. Each draw hashes (seed, counter) with
/// splitmix64, so a state is a plain value that can be copied and replayed.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;

    friend bool operator==(const RngState&, const RngState&) = default;
};

inline RngState make_rng(std::uint64_t seed) { return RngState{seed, 0}; }

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t draw_bits(const RngState& s) {
    return splitmix64(splitmix64(s.seed) ^ (s.counter * 0xd1b54a32d192ed03ULL));
}

} // namespace detail

/// Uniform variate in (0, 1].
inline std::pair<double, RngState> uniform_sample(RngState state) {
    const std::uint64_t bits = detail::draw_bits(state);
    ++state.counter;
    return {(double(bits >> 11) + 1.0) * 0x1.0p-53, state};
}

/// Normal variate by Box-Muller; consumes two uniforms per draw.
inline std::pair<double, RngState> normal_sample(RngState state, double mean, double stddev) {
    if (!(stddev >= 0.0))
        throw DomainError("normal_sample: stddev must be >= 0");
    auto [u1, s1] = uniform_sample(state);
    auto [u2, s2] = uniform_sample(s1);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (stddev == 0.0)
        return {mean, s2};
    return {mean + stddev * z, s2};
}

} // namespace ipl
