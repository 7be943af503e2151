#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ipl/heat1d.hpp"

using namespace ipl;

namespace {

constexpr double pi = std::numbers::pi;

double parabola(double x) { return x * (pi - x); }

// (8/pi) sum_m s(2m-1) (2m-1)^{-3} sin((2m-1)x) with s = exp(-(2m-1)^2 T).
double parabola_series(double x, double T, int terms) {
    double s = 0.0;
    for (int m = 1; m <= terms; ++m) {
        const double k = 2.0 * m - 1.0;
        s += std::exp(-k * k * T) / (k * k * k) * std::sin(k * x);
    }
    return 8.0 / pi * s;
}

} // namespace

TEST(HeatForward, ZeroInitialData) {
    EXPECT_EQ(heat_forward(HeatGrid(64), HeatProblem{}).sup_norm(), 0.0);
}

TEST(HeatForward, SingleMode) {
    const HeatGrid f = HeatGrid::sample(256, [](double x) { return heat_mode(1, x); });
    const HeatGrid g = heat_forward(f, HeatProblem{});
    for (int i = 0; i < g.n_x(); ++i)
        EXPECT_NEAR(g.values(i), std::exp(-1.0) * f.values(i), 1e-13);
}

TEST(HeatForward, ParabolaMatchesAnalyticSeries) {
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, HeatProblem{1.0, 64});
    for (int i = 0; i < g.n_x(); ++i)
        EXPECT_NEAR(g.values(i), parabola_series(g.x(i), 1.0, 40), 1e-6);
}

TEST(HeatForward, SmallerTimeStillMatches) {
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, HeatProblem{0.05, 64});
    for (int i = 0; i < g.n_x(); i += 7)
        EXPECT_NEAR(g.values(i), parabola_series(g.x(i), 0.05, 200), 1e-6);
}

TEST(HeatSingularValues, FirstFour) {
    const HeatSingularSystem s = heat_singular_system(HeatProblem{});
    const double expect[] = {0.1353, 3.355e-4, 1.523e-8, 1.266e-14};
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(s.sigma(i) * s.sigma(i) / expect[i], 1.0, 5e-4);
    EXPECT_THROW(heat_singular_system(HeatProblem{0.0, 8}), DomainError);
}

TEST(HeatSingularValues, ModesOrthonormalOnGrid) {
    const HeatGrid p2 = HeatGrid::sample(512, [](double x) { return heat_mode(2, x); });
    const HeatGrid p3 = HeatGrid::sample(512, [](double x) { return heat_mode(3, x); });
    EXPECT_NEAR(p2.dot(p3), 0.0, 1e-10);
    EXPECT_NEAR(p2.dot(p2), 1.0, 1e-10);
}

TEST(HeatTruncation, Index) {
    EXPECT_EQ(heat_truncation_index(0.1), 1);
    EXPECT_EQ(heat_truncation_index(1e-8), 2);
    EXPECT_EQ(heat_truncation_index(0.999), 0);
    EXPECT_THROW(heat_truncation_index(1.0), DomainError);
    EXPECT_THROW(heat_truncation_index(0.0), DomainError);
}

TEST(HeatTruncation, IndexIsLargestAdmissible) {
    for (double alpha = 0.9; alpha > 1e-300; alpha *= 0.01) {
        const int m = heat_truncation_index(alpha);
        const auto keeps = [&](int mm) {
            const double k = 2.0 * mm - 1.0;
            return std::exp(-k * k) >= std::sqrt(alpha);
        };
        if (m > 0) {
            EXPECT_TRUE(keeps(m)) << alpha;
        }
        EXPECT_FALSE(keeps(m + 1)) << alpha;
    }
}

TEST(HeatInvert, TruncatedCoarse) {
    const HeatGrid g = heat_forward(HeatGrid::sample(512, parabola), HeatProblem{});
    const HeatGrid f = heat_invert(g, HeatProblem{}, SpectralFilter::truncated(0.1));
    for (int i = 0; i < f.n_x(); ++i)
        EXPECT_NEAR(f.values(i), 8.0 / pi * std::sin(f.x(i)), 1e-6);
}

// (8/pi) sum_m w_m sin((2m-1)x) / (2m-1)^3 with Tikhonov weights w_m.
double tikhonov_series(double x, double alpha, double T) {
    double s = 0.0;
    for (int m = 1; m <= 60; ++m) {
        const double k = 2.0 * m - 1.0;
        const double e = 2.0 * k * k * T + std::log(alpha);
        if (e > 700.0)
            break;
        s += std::sin(k * x) / (k * k * k) / (1.0 + std::exp(e));
    }
    return 8.0 / pi * s;
}

TEST(HeatInvert, TikhonovMatchesAnalyticSeries) {
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, HeatProblem{});
    for (double alpha : {0.1, 1e-4, 1e-8}) {
        const HeatGrid r = heat_invert(g, HeatProblem{}, SpectralFilter::tikhonov(alpha));
        for (int i = 0; i < r.n_x(); ++i)
            EXPECT_NEAR(r.values(i), tikhonov_series(r.x(i), alpha, 1.0), 1e-6) << alpha;
    }
    // the mode-3 weight is only 0.6 at alpha = 1e-8, so the error stays near 0.055
    const HeatGrid r = heat_invert(g, HeatProblem{}, SpectralFilter::tikhonov(1e-8));
    EXPECT_NEAR((r.values - f.values).cwiseAbs().maxCoeff(), 0.05535, 1e-4);
}

TEST(HeatInvert, NoiselessErrorDecreasesWithAlpha) {
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, HeatProblem{});
    auto err = [&](const SpectralFilter& flt) {
        return (heat_invert(g, HeatProblem{}, flt).values - f.values).cwiseAbs().maxCoeff();
    };
    const double t1 = err(SpectralFilter::tikhonov(0.1));
    const double t2 = err(SpectralFilter::tikhonov(1e-4));
    const double t3 = err(SpectralFilter::tikhonov(1e-8));
    EXPECT_LT(t2, t1);
    EXPECT_LT(t3, t2);
    // truncation at 1e-4 adds mode 2 only, whose coefficient vanishes for this f
    const double s1 = err(SpectralFilter::truncated(0.1));
    const double s2 = err(SpectralFilter::truncated(1e-4));
    const double s3 = err(SpectralFilter::truncated(1e-8));
    EXPECT_NEAR(s1, s2, 1e-12);
    EXPECT_LT(s3, s2);
    EXPECT_NEAR(s3, 0.02923, 1e-4);
}

TEST(HeatInvert, UnfilteredAmplifiesModeError) {
    const HeatProblem prob{1.0, 4};
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, prob);
    const HeatSingularSystem sys(prob);
    double prev_data = INFINITY, prev_err = 0.0;
    for (int m = 1; m <= 4; ++m) {
        const double sm = sys.sigma(m - 1);
        HeatGrid gd = g;
        for (int i = 0; i < gd.n_x(); ++i)
            gd.values(i) += std::sqrt(sm) * heat_mode(m, gd.x(i));
        const HeatGrid fd = heat_invert(gd, prob, SpectralFilter::none());
        const HeatGrid f0 = heat_invert(g, prob, SpectralFilter::none());
        for (int i = 0; i < fd.n_x(); i += 5)
            EXPECT_NEAR((fd.values(i) - f0.values(i)) * std::sqrt(sm), heat_mode(m, fd.x(i)), 1e-8);
        const double data = std::sqrt(sm);
        const double err = 1.0 / std::sqrt(sm);
        EXPECT_LT(data, prev_data);
        EXPECT_GT(err, prev_err);
        prev_data = data;
        prev_err = err;
    }
}

TEST(HeatInvert, NoisyBlowUp) {
    const HeatGrid f = HeatGrid::sample(512, parabola);
    const HeatGrid g = heat_forward(f, HeatProblem{});
    const HeatGrid gd = multiplicative_noise(g, 0.03, make_rng(7)).first;
    auto err = [&](const HeatGrid& data, double alpha) {
        return (heat_invert(data, HeatProblem{}, SpectralFilter::tikhonov(alpha)).values - f.values).cwiseAbs().maxCoeff();
    };
    // noise reverses the noiseless ordering: 1e-8 is now far worse than 1e-4
    EXPECT_GT(err(gd, 1e-8), 10.0 * err(g, 1e-8));
    EXPECT_GT(err(gd, 1e-8), err(gd, 1e-4));
    EXPECT_LE(err(gd, 1e-4), f.sup_norm());
}

TEST(HeatInvert, NoiseAmplificationFollowsFilterGain) {
    const HeatProblem prob{};
    const HeatGrid g = heat_forward(HeatGrid::sample(512, parabola), prob);
    const HeatGrid gd = multiplicative_noise(g, 0.03, make_rng(7)).first;
    HeatGrid noise = gd;
    noise.values -= g.values;
    const HeatSingularSystem sys(prob);
    const SpectralFilter flt = SpectralFilter::tikhonov(1e-8);
    HeatGrid diff = heat_invert(gd, prob, flt);
    diff.values -= heat_invert(g, prob, flt).values;
    for (int n = 0; n < 5; ++n) {
        const double expected = flt.gain(sys.sigma(n)) * sys.coefficient(n, noise);
        EXPECT_NEAR(sys.coefficient(n, diff), expected, 1e-9 * std::max(1.0, std::abs(expected))) << n + 1;
    }
}

TEST(HeatNoise, ZeroLevelIsIdentity) {
    const HeatGrid g = HeatGrid::sample(32, parabola);
    auto [gd, s] = multiplicative_noise(g, 0.0, make_rng(1));
    EXPECT_EQ(gd.values, g.values);
    EXPECT_EQ(s, make_rng(1));
    EXPECT_THROW(multiplicative_noise(g, -0.1, make_rng(1)), DomainError);
}

TEST(HeatNoise, Reproducible) {
    const HeatGrid g = HeatGrid::sample(100, parabola);
    EXPECT_EQ(multiplicative_noise(g, 0.03, make_rng(5)).first.values, multiplicative_noise(g, 0.03, make_rng(5)).first.values);
}

TEST(HeatNoise, EmpiricalSpread) {
    const HeatGrid g = HeatGrid::sample(10000, [](double) { return 2.0; });
    const HeatGrid gd = multiplicative_noise(g, 0.03, make_rng(9)).first;
    const Eigen::ArrayXd x = gd.values.array() / g.values.array() - 1.0;
    const double sd = std::sqrt((x - x.mean()).square().mean());
    EXPECT_NEAR(sd, 0.03, 0.003);
}

TEST(HeatLandweber, ResidualNonincreasing) {
    const HeatProblem prob{1.0, 64};
    const HeatGrid f = HeatGrid::sample(128, parabola);
    const HeatGrid g = heat_forward(f, prob);
    const LinearOperatorPair op = heat_operator(prob);
    const double omega = 0.9 / (op.norm_bound * op.norm_bound);
    double prev = INFINITY;
    landweber(op, g.values, omega, 200, Vector::Zero(128), [&](int, const Vector& fm) {
        const double r = (op.apply(fm) - g.values).norm();
        EXPECT_LE(r, prev * (1.0 + 1e-12));
        prev = r;
    });
}
