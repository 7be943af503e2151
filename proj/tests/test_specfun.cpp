#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ipl/specfun.hpp"

using namespace ipl;

namespace {

// sum (x/2)^{2m+n} / (m! (m+n)!) in long double.
long double series_i(int n, long double x) {
    long double term = 1.0L;
    for (int j = 1; j <= n; ++j)
        term *= x / 2.0L / j;
    long double sum = term;
    for (int m = 1; m < 400; ++m) {
        term *= (x * x / 4.0L) / (m * (long double)(m + n));
        sum += term;
        if (term < 1e-22L * sum)
            break;
    }
    return sum;
}

// K_n(x) = int_0^inf exp(-x cosh t) cosh(n t) dt, trapezoid in t.
long double quad_k(int n, long double x) {
    const long double h = 1e-3L;
    long double sum = 0.5L * std::exp(-x);
    for (int i = 1;; ++i) {
        const long double t = i * h;
        const long double f = std::exp(-x * std::cosh(t) + n * t) * 0.5L * (1.0L + std::exp(-2.0L * n * t));
        sum += f;
        if (f < 1e-24L * sum && x * std::cosh(t) > 50.0L)
            break;
    }
    return h * sum;
}

// Taylor series oracles for Si, Cin in long double.
long double taylor_si(long double x) {
    long double term = x, sum = x;
    for (int k = 1; k < 200; ++k) {
        term *= -x * x / ((2.0L * k) * (2.0L * k + 1.0L));
        sum += term / (2.0L * k + 1.0L);
    }
    return sum;
}

long double taylor_ci(long double x) {
    long double term = 1.0L, sum = 0.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -x * x / ((2.0L * k - 1.0L) * (2.0L * k));
        sum += term / (2.0L * k);
    }
    return 0.57721566490153286060651209L + std::log(x) + sum;
}

// Large-x asymptotic forms with the auxiliary functions f and g.
void asymptotic_sici(double x, double& si, double& ci) {
    double f = 0.0, g = 0.0, tf = 1.0 / x, tg = 1.0 / (x * x);
    for (int k = 0; k < 8; ++k) {
        f += tf;
        g += tg;
        tf *= -(2.0 * k + 1.0) * (2.0 * k + 2.0) / (x * x);
        tg *= -(2.0 * k + 2.0) * (2.0 * k + 3.0) / (x * x);
    }
    si = -f * std::cos(x) - g * std::sin(x);
    ci = f * std::sin(x) - g * std::cos(x);
}

} // namespace

TEST(BesselI, Examples) {
    EXPECT_EQ(bessel_i(0, 0.0), 1.0);
    EXPECT_EQ(bessel_i(1, 0.0), 0.0);
    EXPECT_NEAR(bessel_i(0, 1.0), 1.2660658777520082, 1e-15);
    EXPECT_NEAR(bessel_i(1, 1.0), 0.5651591039924851, 1e-15);
}

TEST(BesselI, MatchesSeriesOracle) {
    for (int n : {0, 1, 2, 5, 10, 23, 40, 64})
        for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 25.0, 50.0}) {
            const double ref = static_cast<double>(series_i(n, x));
            if (ref < 1e-290)
                continue;
            EXPECT_NEAR(bessel_i(n, x) / ref, 1.0, 1e-10) << "n=" << n << " x=" << x;
        }
}

TEST(BesselI, DomainErrors) {
    EXPECT_THROW(bessel_i(0, -1.0), DomainError);
    EXPECT_THROW(bessel_i(-1, 1.0), DomainError);
}

TEST(BesselK, Examples) {
    EXPECT_NEAR(bessel_k(0, 1.0), 0.42102443824070834, 1e-15);
    EXPECT_NEAR(bessel_k(1, 1.0), 0.60190723019723457, 1e-15);
    EXPECT_GT(bessel_k(0, 1e-6), 10.0);
    EXPECT_GT(bessel_k(0, 1e-7), bessel_k(0, 1e-6));
}

TEST(BesselK, MatchesQuadratureOracle) {
    for (int n : {0, 1, 2, 3, 7, 10})
        for (double x : {1e-3, 0.01, 0.3, 1.0, 1.9, 2.0, 2.1, 5.0, 12.0, 30.0, 50.0}) {
            const double ref = static_cast<double>(quad_k(n, x));
            EXPECT_NEAR(bessel_k(n, x) / ref, 1.0, 1e-9) << "n=" << n << " x=" << x;
        }
}

TEST(BesselK, DomainErrors) {
    EXPECT_THROW(bessel_k(0, 0.0), DomainError);
    EXPECT_THROW(bessel_k(0, -2.0), DomainError);
    EXPECT_THROW(bessel_k(-2, 1.0), DomainError);
}

TEST(BesselDerivatives, Examples) {
    EXPECT_EQ(bessel_i_derivative(0, 0.0), 0.0);
    const BesselDerivatives d = bessel_derivatives(0, 1.0);
    EXPECT_NEAR(d.di, 0.5651591039924851, 1e-15);
    EXPECT_NEAR(d.dk, -0.60190723019723457, 1e-15);
}

TEST(BesselDerivatives, MatchFiniteDifferences) {
    for (int n : {0, 1, 4})
        for (double x : {0.5, 2.0, 7.0}) {
            const double e = 1e-5;
            const double fi = (bessel_i(n, x + e) - bessel_i(n, x - e)) / (2 * e);
            const double fk = (bessel_k(n, x + e) - bessel_k(n, x - e)) / (2 * e);
            EXPECT_NEAR(bessel_i_derivative(n, x) / fi, 1.0, 1e-8);
            EXPECT_NEAR(bessel_k_derivative(n, x) / fk, 1.0, 1e-8);
        }
}

TEST(BesselProperties, Wronskian) {
    for (int n = 0; n <= 10; ++n)
        for (double x = 0.1; x <= 20.0; x *= 1.3) {
            const double w = bessel_i(n, x) * bessel_k_derivative(n, x) - bessel_i_derivative(n, x) * bessel_k(n, x);
            EXPECT_NEAR(w * x, -1.0, 1e-8) << "n=" << n << " x=" << x;
        }
}

TEST(BesselProperties, Recurrence) {
    for (int n = 1; n <= 20; ++n)
        for (double x : {0.2, 1.0, 4.0, 15.0}) {
            const double lhs = bessel_i(n - 1, x) - bessel_i(n + 1, x);
            const double rhs = 2.0 * n / x * bessel_i(n, x);
            EXPECT_NEAR(lhs / rhs, 1.0, 1e-8);
        }
}

TEST(SineCosineIntegrals, Examples) {
    EXPECT_NEAR(sine_cosine_integrals(1e-10).si, -std::numbers::pi / 2, 1e-9);
    const SineCosineIntegrals v = sine_cosine_integrals(1.0);
    EXPECT_NEAR(v.si, -0.62471325642771360, 1e-14);
    EXPECT_NEAR(v.ci, 0.33740392290096813, 1e-14);
}

TEST(SineCosineIntegrals, MatchOracles) {
    for (double x = 1e-4; x <= 8.0; x *= 1.17) {
        const SineCosineIntegrals v = sine_cosine_integrals(x);
        EXPECT_NEAR(v.si, static_cast<double>(taylor_si(x) - std::numbers::pi_v<long double> / 2), 1e-9) << x;
        EXPECT_NEAR(v.ci, static_cast<double>(taylor_ci(x)), 1e-9) << x;
    }
    for (double x = 60.0; x <= 1e4; x *= 1.21) {
        double si = 0, ci = 0;
        asymptotic_sici(x, si, ci);
        const SineCosineIntegrals v = sine_cosine_integrals(x);
        EXPECT_NEAR(v.si, si, 1e-9) << x;
        EXPECT_NEAR(v.ci, ci, 1e-9) << x;
    }
}

TEST(SineCosineIntegrals, ContinuousAtSwitch) {
    const SineCosineIntegrals a = sine_cosine_integrals(4.0);
    const SineCosineIntegrals b = sine_cosine_integrals(std::nextafter(4.0, 5.0));
    EXPECT_NEAR(a.si, b.si, 1e-9);
    EXPECT_NEAR(a.ci, b.ci, 1e-9);
}

TEST(SineCosineIntegrals, DerivativesByFiniteDifferences) {
    for (double x : {0.3, 1.0, 3.9, 4.1, 10.0, 100.0}) {
        const double e = 1e-5 * x;
        const SineCosineIntegrals p = sine_cosine_integrals(x + e);
        const SineCosineIntegrals m = sine_cosine_integrals(x - e);
        EXPECT_NEAR((p.ci - m.ci) / (2 * e), std::cos(x) / x, 1e-6) << x;
        EXPECT_NEAR((p.si - m.si) / (2 * e), std::sin(x) / x, 1e-6) << x;
    }
}

TEST(SineCosineIntegrals, DomainErrors) {
    EXPECT_THROW(sine_cosine_integrals(0.0), DomainError);
    EXPECT_THROW(sine_cosine_integrals(-1.0), DomainError);
}

TEST(NormalSample, ZeroSpreadReturnsMean) {
    auto [v, s] = normal_sample(make_rng(3), 5.0, 0.0);
    EXPECT_EQ(v, 5.0);
    EXPECT_NE(s, make_rng(3));
}

TEST(NormalSample, SameSeedSameStream) {
    RngState a = make_rng(42), b = make_rng(42);
    for (int i = 0; i < 100; ++i) {
        auto [x, na] = normal_sample(a, 0.0, 1.0);
        auto [y, nb] = normal_sample(b, 0.0, 1.0);
        EXPECT_EQ(x, y);
        a = na;
        b = nb;
    }
    EXPECT_NE(normal_sample(make_rng(1), 0, 1).first, normal_sample(make_rng(2), 0, 1).first);
}

TEST(NormalSample, Moments) {
    for (double sd : {1.0, 0.03, 2.5}) {
        RngState s = make_rng(11);
        const int n = 100000;
        double sum = 0.0, sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
            auto [x, next] = normal_sample(s, 0.0, sd);
            s = next;
            sum += x;
            sum2 += x * x;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        EXPECT_NEAR(mean / sd, 0.0, 0.02);
        EXPECT_NEAR(var / (sd * sd), 1.0, 0.03);
    }
}

TEST(NormalSample, RejectsNegativeSpread) { EXPECT_THROW(normal_sample(make_rng(1), 0.0, -1.0), DomainError); }
