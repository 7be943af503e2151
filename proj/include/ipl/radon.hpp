#pragma once

// Parallel-beam CT: Radon transform of raster images, the annulus phantom
// and its exact sinogram, and filtered back projection with the
// Tikhonov-modified ramp filter |tau| / (1 + |tau| / tau_max).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "ipl/errors.hpp"
#include "ipl/specfun.hpp"
#include "ipl/spectral.hpp"

namespace ipl {

/// Square lattice x = (k h, l h), k, l = -n_l..n_l, h = half_width / n_l.
/// values(i, j) holds the sample at x1 = coord(i), x2 = coord(j).
struct ImageGrid {
    int n_l = 0;
    double half_width = 0.5;
    Matrix values;

    ImageGrid() = default;
    explicit ImageGrid(int n, double half = 0.5) : n_l(n), half_width(half) {
        if (n < 1 || !(half > 0.0))
            throw DomainError("ImageGrid: need n_l >= 1 and half_width > 0");
        values = Matrix::Zero(2 * n + 1, 2 * n + 1);
    }

    int size() const { return 2 * n_l + 1; }
    double spacing() const { return half_width / n_l; }
    double coord(int i) const { return (i - n_l) * spacing(); }

    template <class F>
    static ImageGrid sample(int n, F&& f, double half = 0.5) {
        ImageGrid g(n, half);
        for (int i = 0; i < g.size(); ++i)
            for (int j = 0; j < g.size(); ++j)
                g.values(i, j) = f(g.coord(i), g.coord(j));
        return g;
    }

    /// Bilinear interpolation, zero outside the lattice.
    double interpolate(double x1, double x2) const {
        const double h = spacing();
        const double u = x1 / h + n_l;
        const double v = x2 / h + n_l;
        const double fu = std::floor(u);
        const double fv = std::floor(v);
        const int i = static_cast<int>(fu);
        const int j = static_cast<int>(fv);
        const int last = size() - 1;
        if (i < -1 || j < -1 || i > last || j > last)
            return 0.0;
        const double tu = u - fu;
        const double tv = v - fv;
        auto at = [&](int a, int b) { return (a < 0 || b < 0 || a > last || b > last) ? 0.0 : values(a, b); };
        return (1 - tu) * (1 - tv) * at(i, j) + tu * (1 - tv) * at(i + 1, j) + (1 - tu) * tv * at(i, j + 1) +
               tu * tv * at(i + 1, j + 1);
    }
};

/// Phi(phi_i, s_j), phi_i = i pi / n_phi (i = 0..n_phi),
/// s_j = j s_max / n_s (j = -n_s..n_s); values(i, j + n_s).
struct Sinogram {
    int n_phi = 0;
    int n_s = 0;
    double s_max = 0.0;
    Matrix values;

    Sinogram() = default;
    Sinogram(int nphi, int ns, double smax) : n_phi(nphi), n_s(ns), s_max(smax) {
        if (nphi < 1 || ns < 1 || !(smax > 0.0))
            throw DomainError("Sinogram: need n_phi >= 1, n_s >= 1 and s_max > 0");
        values = Matrix::Zero(nphi + 1, 2 * ns + 1);
    }

    double phi(int i) const { return i * std::numbers::pi / n_phi; }
    double ds() const { return s_max / n_s; }
    double s(int j) const { return (j - n_s) * ds(); }

    /// Trapezoid weights in phi over [0, pi] and in s over [-s_max, s_max].
    double phi_weight(int i) const {
        const double w = std::numbers::pi / n_phi;
        return (i == 0 || i == n_phi) ? 0.5 * w : w;
    }
    double s_weight(int j) const { return (j == 0 || j == 2 * n_s) ? 0.5 * ds() : ds(); }
};

inline constexpr double default_s_max = 0.70710678118654752440;

/// mu = 1 on 0.25 <= r <= 0.5, 0 elsewhere.
inline double annulus_value(double x1, double x2) {
    const double r = std::hypot(x1, x2);
    return (r >= 0.25 && r <= 0.5) ? 1.0 : 0.0;
}

/// Rasterized annulus: each pixel holds the fraction of its h x h cell
/// covered by the ring, estimated on a supersample x supersample sub-grid
/// (supersample = 1 gives plain point sampling at the nodes).
inline ImageGrid annulus_phantom(int n_l, int supersample = 8) {
    if (n_l < 2)
        throw DomainError("annulus_phantom: n_l must be >= 2");
    if (supersample < 1)
        throw DomainError("annulus_phantom: supersample must be >= 1");
    ImageGrid img(n_l);
    const double h = img.spacing();
    const int S = supersample;
    for (int a = 0; a < img.size(); ++a)
        for (int b = 0; b < img.size(); ++b) {
            double acc = 0.0;
            for (int p = 0; p < S; ++p)
                for (int q = 0; q < S; ++q)
                    acc += annulus_value(img.coord(a) + ((p + 0.5) / S - 0.5) * h,
                                         img.coord(b) + ((q + 0.5) / S - 0.5) * h);
            img.values(a, b) = acc / (S * S);
        }
    return img;
}

/// Exact line integrals of the annulus.
inline double annulus_projection(double s) {
    const double a = std::abs(s);
    if (a > 0.5)
        return 0.0;
    double v = std::sqrt(1.0 - 4.0 * s * s);
    if (a <= 0.25)
        v -= std::sqrt(0.25 - 4.0 * s * s);
    return v;
}

inline Sinogram annulus_sinogram_analytic(int n_phi, int n_s, double s_max = default_s_max) {
    Sinogram out(n_phi, n_s, s_max);
    for (int j = 0; j <= 2 * n_s; ++j) {
        const double v = annulus_projection(out.s(j));
        for (int i = 0; i <= n_phi; ++i)
            out.values(i, j) = v;
    }
    return out;
}

namespace detail {

// Line samples t_k = k h for |t| <= reach, trapezoid weights.
struct LineSamples {
    std::vector<double> t;
    std::vector<double> w;
};

inline LineSamples line_samples(const ImageGrid& img) {
    const double h = img.spacing();
    const int kmax = static_cast<int>(std::ceil(img.half_width * std::numbers::sqrt2 / h)) + 1;
    LineSamples out;
    for (int k = -kmax; k <= kmax; ++k) {
        out.t.push_back(k * h);
        out.w.push_back((k == -kmax || k == kmax) ? 0.5 * h : h);
    }
    return out;
}

// Calls visit(a, b, weight) for every lattice node touched by the bilinear
// stencil at (x1, x2).
template <class Visit>
void bilinear_stencil(const ImageGrid& img, double x1, double x2, Visit&& visit) {
    const double h = img.spacing();
    const double u = x1 / h + img.n_l;
    const double v = x2 / h + img.n_l;
    const double fu = std::floor(u);
    const double fv = std::floor(v);
    const int i = static_cast<int>(fu);
    const int j = static_cast<int>(fv);
    const int last = img.size() - 1;
    if (i < -1 || j < -1 || i > last || j > last)
        return;
    const double tu = u - fu;
    const double tv = v - fv;
    const double wts[4] = {(1 - tu) * (1 - tv), tu * (1 - tv), (1 - tu) * tv, tu * tv};
    const int ai[4] = {i, i + 1, i, i + 1};
    const int bj[4] = {j, j, j + 1, j + 1};
    for (int q = 0; q < 4; ++q)
        if (ai[q] >= 0 && bj[q] >= 0 && ai[q] <= last && bj[q] <= last)
            visit(ai[q], bj[q], wts[q]);
}

} // namespace detail

/// Phi(phi, s) = int mu(s omega + t omega_perp) dt with t stepped at the
/// pixel pitch, bilinear interpolation and the trapezoid rule.
inline Sinogram radon_transform(const ImageGrid& img, int n_phi, int n_s, double s_max = default_s_max) {
    if (!img.values.allFinite())
        throw DomainError("radon_transform: non-finite image");
    Sinogram out(n_phi, n_s, s_max);
    const detail::LineSamples line = detail::line_samples(img);
    for (int i = 0; i <= n_phi; ++i) {
        const double c = std::cos(out.phi(i));
        const double sn = std::sin(out.phi(i));
        for (int j = 0; j <= 2 * n_s; ++j) {
            const double s = out.s(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < line.t.size(); ++k) {
                const double t = line.t[k];
                acc += line.w[k] * img.interpolate(s * c - t * sn, s * sn + t * c);
            }
            out.values(i, j) = acc;
        }
    }
    return out;
}

/// Exact adjoint of radon_transform for the inner products
/// <P, Q> = sum_ij w_phi w_s P Q on sinograms and h^2 sum mu nu on images.
/// Approximates R* h(x) = int_0^pi h(omega, omega . x) dphi.
inline ImageGrid radon_adjoint(const Sinogram& sino, int n_l, double half_width = 0.5) {
    ImageGrid out(n_l, half_width);
    const detail::LineSamples line = detail::line_samples(out);
    const double h2 = out.spacing() * out.spacing();
    for (int i = 0; i <= sino.n_phi; ++i) {
        const double c = std::cos(sino.phi(i));
        const double sn = std::sin(sino.phi(i));
        for (int j = 0; j <= 2 * sino.n_s; ++j) {
            const double hv = sino.values(i, j) * sino.phi_weight(i) * sino.s_weight(j) / h2;
            if (hv == 0.0)
                continue;
            const double s = sino.s(j);
            for (std::size_t k = 0; k < line.t.size(); ++k) {
                const double t = line.t[k];
                const double wt = hv * line.w[k];
                detail::bilinear_stencil(out, s * c - t * sn, s * sn + t * c,
                                         [&](int a, int b, double w) { out.values(a, b) += wt * w; });
            }
        }
    }
    return out;
}

/// (1/pi) [ci(u) cos u + si(u) sin u].
inline double fbp_kernel_unit(double u) {
    const SineCosineIntegrals v = sine_cosine_integrals(u);
    return (v.ci * std::cos(u) + v.si * std::sin(u)) / std::numbers::pi;
}

/// I(xi) = (tau_max^2 / pi) [ci(tau_max |xi|) cos(tau_max xi) + si(tau_max |xi|) sin(tau_max |xi|)].
/// The kernel has a logarithmic singularity at 0; |xi| is clamped to xi_floor.
inline double fbp_kernel(double xi, double tau_max, double xi_floor = 1e-12) {
    if (!(tau_max > 0.0))
        throw DomainError("fbp_kernel: tau_max must be > 0");
    const double a = std::max(std::abs(xi), xi_floor);
    if (!(a > 0.0))
        throw DomainError("fbp_kernel: xi_floor must be > 0 to evaluate at xi = 0");
    return tau_max * tau_max * fbp_kernel_unit(tau_max * a);
}

/// Second antiderivative of the full filter kernel I(xi) + tau_max delta(xi),
/// normalized by W(0) = 0:
///   W(x) = (1/pi) [-ci(u) cos u - si(u) sin u + ln u + gamma], u = tau_max |x|.
inline double fbp_kernel_antiderivative2(double x, double tau_max) {
    const double u = tau_max * std::abs(x);
    if (u == 0.0)
        return 0.0;
    if (u < 1e-6)
        return (0.5 * std::numbers::pi * u + 0.5 * u * u * (std::log(u) + detail::euler_gamma) - 0.75 * u * u) /
               std::numbers::pi;
    const SineCosineIntegrals v = sine_cosine_integrals(u);
    return (-v.ci * std::cos(u) - v.si * std::sin(u) + std::log(u) + detail::euler_gamma) / std::numbers::pi;
}

/// Exact integral of the full filter kernel against the unit hat function of
/// half-width ds centred at 0, evaluated at offset x.
inline double fbp_hat_weight(double x, double ds, double tau_max) {
    return (fbp_kernel_antiderivative2(x + ds, tau_max) - 2.0 * fbp_kernel_antiderivative2(x, tau_max) +
            fbp_kernel_antiderivative2(x - ds, tau_max)) /
           ds;
}

struct FbpOptions {
    int oversample = 8;  // fine xi samples per offset step
};

/// mu(x) = (1/2pi) int_0^pi int Phi(omega, s) I(omega . x - s) ds dphi.
/// Each projection is taken as piecewise linear in s and integrated exactly
/// against the filter kernel, including its delta part tau_max delta(xi);
/// the filtered projection is tabulated on a grid of step ds / oversample
/// and interpolated linearly during back projection. The phi integral uses
/// the trapezoid rule.
inline ImageGrid fbp_reconstruct(const Sinogram& sino, double tau_max, int n_l, const FbpOptions& opt = {},
                                 double half_width = 0.5) {
    if (!(tau_max > 0.0))
        throw DomainError("fbp_reconstruct: tau_max must be > 0");
    if (opt.oversample < 1)
        throw DomainError("fbp_reconstruct: oversample must be >= 1");
    ImageGrid out(n_l, half_width);
    const int P = opt.oversample;
    const double ds = sino.ds();
    const double step = ds / P;
    const double reach = half_width * std::numbers::sqrt2 + step;
    const int pmax = static_cast<int>(std::ceil(reach / step));
    const int ncols = 2 * sino.n_s + 1;

    // Kernel table: offsets (p - P (j - n_s)) step for p in [-pmax, pmax].
    const int tmax = pmax + P * sino.n_s;
    std::vector<double> table(2 * static_cast<std::size_t>(tmax) + 1);
    for (int m = -tmax; m <= tmax; ++m)
        table[m + tmax] = fbp_hat_weight(m * step, ds, tau_max);

    std::vector<double> filtered(2 * static_cast<std::size_t>(pmax) + 1);
    const double h = out.spacing();
    for (int i = 0; i <= sino.n_phi; ++i) {
        for (int p = -pmax; p <= pmax; ++p) {
            double acc = 0.0;
            for (int j = 0; j < ncols; ++j) {
                const double v = sino.values(i, j);
                if (v != 0.0)
                    acc += v * table[p - P * (j - sino.n_s) + tmax];
            }
            filtered[p + pmax] = acc;
        }
        const double c = std::cos(sino.phi(i));
        const double sn = std::sin(sino.phi(i));
        const double w = sino.phi_weight(i) / (2.0 * std::numbers::pi);
        for (int a = 0; a < out.size(); ++a) {
            const double x1 = (a - n_l) * h;
            for (int b = 0; b < out.size(); ++b) {
                const double xi = x1 * c + (b - n_l) * h * sn;
                const double q = xi / step + pmax;
                const int k = std::clamp(static_cast<int>(std::floor(q)), 0, 2 * pmax - 1);
                const double t = q - k;
                out.values(a, b) += w * ((1.0 - t) * filtered[k] + t * filtered[k + 1]);
            }
        }
    }
    return out;
}

/// Phi + (Phi_max / 100) X with X ~ N(0, sigma^2) per sample.
inline std::pair<Sinogram, RngState> sinogram_noise(const Sinogram& sino, double sigma, RngState state) {
    if (!(sigma >= 0.0))
        throw DomainError("sinogram_noise: sigma must be >= 0");
    Sinogram out = sino;
    if (sigma == 0.0)
        return {out, state};
    const double amp = sino.values.maxCoeff() / 100.0;
    for (int i = 0; i < out.values.rows(); ++i)
        for (int j = 0; j < out.values.cols(); ++j) {
            auto [x, next] = normal_sample(state, 0.0, sigma);
            out.values(i, j) += amp * x;
            state = next;
        }
    return {out, state};
}

/// Ring (0.3 <= r <= 0.45) and hole (r <= 0.15) statistics of an annulus
/// reconstruction. contrast = (ring_mean - hole_mean) / pooled standard deviation.
struct RingStats {
    double ring_mean = 0.0;
    double hole_mean = 0.0;
    double ring_std = 0.0;
    double hole_std = 0.0;
    double contrast = 0.0;
};

inline RingStats ring_stats(const ImageGrid& img) {
    double rs = 0, rs2 = 0, hs = 0, hs2 = 0;
    int rn = 0, hn = 0;
    for (int a = 0; a < img.size(); ++a)
        for (int b = 0; b < img.size(); ++b) {
            const double r = std::hypot(img.coord(a), img.coord(b));
            const double v = img.values(a, b);
            if (r >= 0.3 && r <= 0.45) {
                rs += v;
                rs2 += v * v;
                ++rn;
            } else if (r <= 0.15) {
                hs += v;
                hs2 += v * v;
                ++hn;
            }
        }
    RingStats st;
    if (rn == 0 || hn == 0)
        throw DomainError("ring_stats: image too coarse for the ring and hole regions");
    st.ring_mean = rs / rn;
    st.hole_mean = hs / hn;
    st.ring_std = std::sqrt(std::max(0.0, rs2 / rn - st.ring_mean * st.ring_mean));
    st.hole_std = std::sqrt(std::max(0.0, hs2 / hn - st.hole_mean * st.hole_mean));
    const double pooled = std::sqrt(0.5 * (st.ring_std * st.ring_std + st.hole_std * st.hole_std));
    st.contrast = pooled > 0.0 ? (st.ring_mean - st.hole_mean) / pooled
                               : std::numeric_limits<double>::infinity();
    return st;
}

} // namespace ipl
