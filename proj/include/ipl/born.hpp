#pragma once

// Inverse Born and inverse Rytov series for radial diffuse optical
// tomography on a disk, with structured sources e^{il theta} delta(r - R)/r.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipl/errors.hpp"
#include "ipl/specfun.hpp"
#include "ipl/spectral.hpp"

namespace ipl {

struct RadialDotConfig {
    double k = 1.0;      // background wavenumber
    double ell = 1.0;    // Robin length
    double R = 1.0;      // disk radius
    double R_a = 0.5;    // target radius
    double eta_a = 0.2;  // target contrast
    int N_r = 128;       // radial cells
    int M_S = 23;        // source modes l = 1..M_S
    int n_max = 23;      // highest Bessel order used

    void validate() const {
        if (!(k > 0.0) || !(ell > 0.0) || !(R > 0.0))
            throw DomainError("RadialDotConfig: k, ell and R must be > 0");
        if (!(R_a > 0.0 && R_a < R))
            throw DomainError("RadialDotConfig: need 0 < R_a < R");
        if (!(eta_a >= -1.0))
            throw DomainError("RadialDotConfig: eta_a must be >= -1");
        if (N_r < 2 || M_S < 1)
            throw DomainError("RadialDotConfig: need N_r >= 2 and M_S >= 1");
        if (n_max < M_S)
            throw DomainError("RadialDotConfig: n_max must cover every source mode");
        if (n_max > 64)
            throw DomainError("RadialDotConfig: n_max above 64 is not supported");
    }

    double dr() const { return R / N_r; }
    /// Cell midpoint r_i = (i + 1/2) dr, zero-based i.
    double r(int i) const { return (i + 0.5) * dr(); }
    /// Interior wavenumber from k^2 (1 + eta_a).
    double k_a() const { return k * std::sqrt(1.0 + eta_a); }
};

using RadialProfile = Vector;
using BoundaryData = Vector;
using SeriesTerms = std::vector<Vector>;

inline Vector radial_grid(const RadialDotConfig& cfg) {
    Vector r(cfg.N_r);
    for (int i = 0; i < cfg.N_r; ++i)
        r(i) = cfg.r(i);
    return r;
}

/// eta_a on r <= R_a, 0 outside.
inline RadialProfile target_profile(const RadialDotConfig& cfg) {
    RadialProfile eta(cfg.N_r);
    for (int i = 0; i < cfg.N_r; ++i)
        eta(i) = cfg.r(i) <= cfg.R_a ? cfg.eta_a : 0.0;
    return eta;
}

/// (K_n(kR) + k l K'_n(kR)) / (I_n(kR) + k l I'_n(kR)).
inline double robin_ratio(int n, const RadialDotConfig& cfg) {
    const double x = cfg.k * cfg.R;
    const double kl = cfg.k * cfg.ell;
    return (bessel_k(n, x) + kl * bessel_k_derivative(n, x)) / (bessel_i(n, x) + kl * bessel_i_derivative(n, x));
}

/// g_n(r1, r2) = K_n(k max) I_n(k min) - D_n I_n(k r1) I_n(k r2).
inline double greens_radial(int n, double r1, double r2, const RadialDotConfig& cfg) {
    if (!(r1 > 0.0 && r1 <= cfg.R) || !(r2 > 0.0 && r2 <= cfg.R))
        throw DomainError("greens_radial: radii must lie in (0, R]");
    const double hi = std::max(r1, r2);
    const double lo = std::min(r1, r2);
    return bessel_k(n, cfg.k * hi) * bessel_i(n, cfg.k * lo) -
           robin_ratio(n, cfg) * (bessel_i(n, cfg.k * r1) * bessel_i(n, cfg.k * r2));
}

/// d/dr1 g_n(r1, r2) for r1 != r2.
inline double greens_radial_dr1(int n, double r1, double r2, const RadialDotConfig& cfg) {
    const double k = cfg.k;
    double first = 0.0;
    if (r1 > r2)
        first = k * bessel_k_derivative(n, k * r1) * bessel_i(n, k * r2);
    else
        first = k * bessel_k(n, k * r2) * bessel_i_derivative(n, k * r1);
    return first - robin_ratio(n, cfg) * k * bessel_i_derivative(n, k * r1) * bessel_i(n, k * r2);
}

/// Exact field for source mode n: a I_n(k_a r) for r < R_a, and
/// b K_n(k r) + c I_n(k r) + I_n(k r) K_n(k R) for R_a < r < R.
struct AppendixCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

/// Interface conditions at R_a (value and flux) and the Robin condition at R.
/// The Robin row carries -(k l I_n(kR) K'_n(kR) + I_n(kR) K_n(kR)), which
/// reproduces u = u0 when eta_a = 0.
inline AppendixCoefficients appendix_coefficients(int n, const RadialDotConfig& cfg) {
    cfg.validate();
    const double k = cfg.k;
    const double ka = cfg.k_a();
    const double kl = k * cfg.ell;
    const double xa = k * cfg.R_a;
    const double xai = ka * cfg.R_a;
    const double xR = k * cfg.R;

    const double iR = bessel_i(n, xR);
    const double kR = bessel_k(n, xR);
    const double diR = bessel_i_derivative(n, xR);
    const double dkR = bessel_k_derivative(n, xR);

    Eigen::Matrix3d m;
    Eigen::Vector3d rhs;
    m << bessel_i(n, xai), -bessel_k(n, xa), -bessel_i(n, xa),
         ka * bessel_i_derivative(n, xai), -k * bessel_k_derivative(n, xa), -k * bessel_i_derivative(n, xa),
         0.0, kR + kl * dkR, iR + kl * diR;
    rhs << bessel_i(n, xa) * kR, k * bessel_i_derivative(n, xa) * kR, -(kl * iR * dkR + iR * kR);

    // Column scaling keeps the pivoting meaningful when I_n and K_n differ
    // by many orders of magnitude.
    Eigen::Vector3d scale;
    for (int j = 0; j < 3; ++j) {
        scale(j) = m.col(j).cwiseAbs().maxCoeff();
        if (!(scale(j) > 0.0) || !std::isfinite(scale(j)))
            throw NumericalError("appendix_coefficients: degenerate column for order " + std::to_string(n));
        m.col(j) /= scale(j);
    }
    Eigen::PartialPivLU<Eigen::Matrix3d> lu(m);
    if (!(std::abs(lu.determinant()) > 1e-14))
        throw NumericalError("appendix_coefficients: singular interface system for order " + std::to_string(n));
    const Eigen::Vector3d sol = lu.solve(rhs).cwiseQuotient(scale);
    return {sol(0), sol(1), sol(2)};
}

/// Exact total field u_n(r) at radius r for source mode n.
inline double exact_field(int n, double r, const RadialDotConfig& cfg, const AppendixCoefficients& c) {
    if (r < cfg.R_a)
        return c.a * bessel_i(n, cfg.k_a() * r);
    const double x = cfg.k * r;
    return c.b * bessel_k(n, x) + c.c * bessel_i(n, x) + bessel_i(n, x) * bessel_k(n, cfg.k * cfg.R);
}

/// phi_l = u0 - u at (R, theta = 0): -((d_l + c_l) I_l(kR) + b_l K_l(kR)).
inline BoundaryData forward_phi(const RadialDotConfig& cfg) {
    cfg.validate();
    BoundaryData phi(cfg.M_S);
    const double xR = cfg.k * cfg.R;
    for (int l = 1; l <= cfg.M_S; ++l) {
        const AppendixCoefficients c = appendix_coefficients(l, cfg);
        const double iR = bessel_i(l, xR);
        const double d = robin_ratio(l, cfg) * iR;
        phi(l - 1) = -((d + c.c) * iR + c.b * bessel_k(l, xR));
    }
    return phi;
}

/// Discrete forward operators on the midpoint grid. For mode l:
///   v_1(r_i) = k^2 dr sum_j g_l(r_i, r_j) r_j a^1_j u0(r_j)
///   v_n(r_i) = -k^2 dr sum_j g_l(r_i, r_j) r_j a^n_j v_{n-1}(r_j)
/// with u0(r) = g_l(r, R), and the datum is the same sum evaluated at r = R.
class BornModel {
public:
    explicit BornModel(const RadialDotConfig& cfg) : cfg_(cfg) {
        cfg_.validate();
        const int nr = cfg_.N_r;
        const int ms = cfg_.M_S;
        const Vector r = radial_grid(cfg_);
        prop_.resize(ms);
        u0_.resize(ms);
        det_.resize(ms);
        u0R_.resize(ms);
        for (int l = 1; l <= ms; ++l) {
            Matrix& g = prop_[l - 1];
            g.resize(nr, nr);
            for (int i = 0; i < nr; ++i)
                for (int j = 0; j <= i; ++j) {
                    const double v = greens_radial(l, r(i), r(j), cfg_);
                    g(i, j) = v * r(j);
                    g(j, i) = v * r(i);
                }
            Vector& u0 = u0_[l - 1];
            Vector& det = det_[l - 1];
            u0.resize(nr);
            det.resize(nr);
            for (int j = 0; j < nr; ++j) {
                u0(j) = greens_radial(l, r(j), cfg_.R, cfg_);
                det(j) = u0(j) * r(j);  // g_l(R, r_j) r_j
            }
            u0R_(l - 1) = greens_radial(l, cfg_.R, cfg_.R, cfg_);
        }
    }

    const RadialDotConfig& config() const { return cfg_; }
    int modes() const { return cfg_.M_S; }
    int cells() const { return cfg_.N_r; }

    /// G^{(l)}(r_i, r_j) = g_l(r_i, r_j) r_j.
    const Matrix& propagator(int l) const { return prop_.at(l - 1); }
    /// u0(r_j) = g_l(r_j, R).
    const Vector& incident(int l) const { return u0_.at(l - 1); }
    /// Background datum g_l(R, R) per mode.
    const Vector& incident_boundary() const { return u0R_; }

    /// K(n, a^1, ..., a^n), one value per source mode.
    BoundaryData forward_term(std::span<const Vector> a) const {
        const int n = static_cast<int>(a.size());
        if (n < 1)
            throw DomainError("forward_term: need at least one profile");
        for (const Vector& p : a)
            if (p.size() != cfg_.N_r)
                throw DomainError("forward_term: profile length must equal N_r");
        const double c = cfg_.k * cfg_.k * cfg_.dr();
        BoundaryData out(cfg_.M_S);
        for (int l = 0; l < cfg_.M_S; ++l) {
            Vector v = u0_[l];
            for (int m = 0; m + 1 < n; ++m) {
                const double sign = m == 0 ? 1.0 : -1.0;
                v = sign * c * (prop_[l] * a[m].cwiseProduct(v));
            }
            const double sign = n == 1 ? 1.0 : -1.0;
            out(l) = sign * c * det_[l].dot(a[n - 1].cwiseProduct(v));
        }
        return out;
    }

    BoundaryData forward_term(const std::vector<Vector>& a) const {
        return forward_term(std::span<const Vector>(a.data(), a.size()));
    }

    /// Born term of order n at a single profile: K(n, eta, ..., eta).
    BoundaryData born_term(int n, const Vector& eta) const {
        return forward_term(std::vector<Vector>(static_cast<std::size_t>(n), eta));
    }

    /// Dense M_S x N_r matrix of K_1.
    Matrix k1_matrix() const {
        const double c = cfg_.k * cfg_.k * cfg_.dr();
        Matrix m(cfg_.M_S, cfg_.N_r);
        for (int l = 0; l < cfg_.M_S; ++l)
            m.row(l) = c * det_[l].cwiseProduct(u0_[l]).transpose();
        return m;
    }

private:
    RadialDotConfig cfg_;
    std::vector<Matrix> prop_;
    std::vector<Vector> u0_;
    std::vector<Vector> det_;
    Vector u0R_;
};

/// Ordered tuples (i_1, ..., i_m), i_j >= 1, summing to n, in lexicographic order.
inline std::vector<std::vector<int>> compositions_of(int n, int m) {
    std::vector<std::vector<int>> out;
    if (m < 1 || n < m)
        return out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rest, int parts) -> void {
        if (parts == 1) {
            cur.push_back(rest);
            out.push_back(cur);
            cur.pop_back();
            return;
        }
        for (int i = 1; i <= rest - parts + 1; ++i) {
            cur.push_back(i);
            self(self, rest - i, parts - 1);
            cur.pop_back();
        }
    };
    rec(rec, n, m);
    return out;
}

/// Compositions of n grouped by part count m = 1..n-1 (entry m-1).
inline std::vector<std::vector<std::vector<int>>> compositions(int n) {
    if (n < 2)
        throw DomainError("compositions: n must be >= 2");
    std::vector<std::vector<std::vector<int>>> out;
    for (int m = 1; m <= n - 1; ++m)
        out.push_back(compositions_of(n, m));
    return out;
}

/// Coefficients A_1..A_N of the reverted series x = sum A_k y^k for
/// y = sum a_k x^k, by matching powers of x.
inline std::vector<double> series_reversion(const std::vector<double>& a) {
    const int n = static_cast<int>(a.size());
    if (n < 1 || a[0] == 0.0)
        throw DomainError("series_reversion: a_1 must be nonzero");
    // pw[k][j]: coefficient of x^{j+1} in y^{k+1}.
    std::vector<std::vector<double>> pw(n, std::vector<double>(n, 0.0));
    pw[0] = a;
    for (int k = 1; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; i + j + 1 < n; ++j)
                pw[k][i + j + 1] += pw[k - 1][i] * a[j];
    std::vector<double> A(n, 0.0);
    for (int j = 0; j < n; ++j) {
        double s = j == 0 ? 1.0 : 0.0;
        for (int k = 0; k < j; ++k)
            s -= A[k] * pw[k][j];
        A[j] = s / pw[j][j];
    }
    return A;
}

/// Truncated-SVD pseudoinverse keeping the `rank` largest singular values.
inline Matrix truncated_pseudoinverse(const Matrix& a, int rank) {
    const DenseSingularSystem sys = svd_decompose(a);
    if (rank < 1 || rank > sys.size())
        throw DomainError("truncated_pseudoinverse: rank must lie in 1..min(rows, cols)");
    Matrix pinv = Matrix::Zero(a.cols(), a.rows());
    for (int i = 0; i < rank; ++i) {
        if (!(sys.sigmas(i) > 0.0))
            throw NumericalError("truncated_pseudoinverse: zero singular value inside the kept rank");
        pinv += (sys.right.col(i) / sys.sigmas(i)) * sys.left.col(i).transpose();
    }
    return pinv;
}

inline Matrix regularized_K1_pseudoinverse(const BornModel& model, int rank) {
    return truncated_pseudoinverse(model.k1_matrix(), rank);
}

inline Matrix regularized_K1_pseudoinverse(const RadialDotConfig& cfg, int rank) {
    return regularized_K1_pseudoinverse(BornModel(cfg), rank);
}

/// Inverse-series term of order n:
///   n = 1:  inv b^1
///   n >= 2: -sum_{m<n} sum_{i_1+..+i_m = n} T(m, F(i_1, a^1..), ..., F(i_m, ..a^n))
/// with a^j = inv b^j filling the forward slots in contiguous blocks.
template <class Forward>
Vector inverse_series_term(int n, std::span<const Vector> data, const Forward& forward, const Matrix& inv) {
    if (n < 1 || static_cast<int>(data.size()) != n)
        throw DomainError("inverse_series_term: need exactly n data vectors");
    if (n == 1)
        return inv * data[0];
    std::vector<Vector> a;
    a.reserve(n);
    for (const Vector& b : data)
        a.push_back(inv * b);
    Vector total = Vector::Zero(inv.rows());
    for (int m = 1; m < n; ++m) {
        for (const std::vector<int>& comp : compositions_of(n, m)) {
            std::vector<Vector> args;
            args.reserve(m);
            int pos = 0;
            for (int len : comp) {
                args.push_back(forward(std::span<const Vector>(a.data() + pos, len)));
                pos += len;
            }
            total += inverse_series_term(m, std::span<const Vector>(args.data(), args.size()), forward, inv);
        }
    }
    return -total;
}

inline RadialProfile inverse_born_term(int n, std::span<const Vector> data, const BornModel& model,
                                       const Matrix& k1inv) {
    return inverse_series_term(
        n, data, [&](std::span<const Vector> a) { return model.forward_term(a); }, k1inv);
}

struct SeriesReconstruction {
    RadialProfile profile;
    SeriesTerms terms;
};

inline SeriesReconstruction inverse_born_reconstruct(const BoundaryData& phi, int N, const BornModel& model,
                                                     const Matrix& k1inv) {
    if (N < 1)
        throw DomainError("inverse_born_reconstruct: N must be >= 1");
    SeriesReconstruction out;
    out.profile = Vector::Zero(model.cells());
    for (int n = 1; n <= N; ++n) {
        const std::vector<Vector> data(static_cast<std::size_t>(n), phi);
        out.terms.push_back(inverse_born_term(n, data, model, k1inv));
        out.profile += out.terms.back();
    }
    return out;
}

inline SeriesReconstruction inverse_born_reconstruct(const BoundaryData& phi, int N, const RadialDotConfig& cfg,
                                                     int rank) {
    const BornModel model(cfg);
    return inverse_born_reconstruct(phi, N, model, regularized_K1_pseudoinverse(model, rank));
}

/// psi_n = sum_{m=1}^n (-1)^m / (m u0^m) sum_{i_1+..+i_m = n} u_{i_1} ... u_{i_m}, per mode.
inline SeriesTerms rytov_forward_terms(const SeriesTerms& u_terms, const BoundaryData& u0) {
    for (int l = 0; l < u0.size(); ++l)
        if (u0(l) == 0.0)
            throw NumericalError("rytov_forward_terms: background field vanishes at the detector");
    SeriesTerms psi;
    const int N = static_cast<int>(u_terms.size());
    for (int n = 1; n <= N; ++n) {
        Vector acc = Vector::Zero(u0.size());
        for (int m = 1; m <= n; ++m) {
            Vector sum = Vector::Zero(u0.size());
            for (const std::vector<int>& comp : compositions_of(n, m)) {
                Vector prod = Vector::Ones(u0.size());
                for (int i : comp)
                    prod = prod.cwiseProduct(u_terms[i - 1]);
                sum += prod;
            }
            const double sign = m % 2 == 0 ? 1.0 : -1.0;
            acc += (sign / m) * sum.cwiseQuotient(u0.array().pow(m).matrix());
        }
        psi.push_back(acc);
    }
    return psi;
}

/// -ln(u / u0) with u = u0 - phi, per mode.
inline BoundaryData rytov_data(const BoundaryData& phi, const BoundaryData& u0) {
    BoundaryData psi(phi.size());
    for (int l = 0; l < phi.size(); ++l) {
        const double ratio = (u0(l) - phi(l)) / u0(l);
        if (!(ratio > 0.0))
            throw NumericalError("rytov_data: u / u0 is not positive");
        psi(l) = -std::log(ratio);
    }
    return psi;
}

/// Rytov forward operators J(n, a^1..a^n) =
///   sum_{m=1}^n (1/m) sum_{i_1+..+i_m = n} prod_j K(i_j, block_j) / u0.
class RytovModel {
public:
    explicit RytovModel(const BornModel& born) : born_(born) {}

    const BornModel& born() const { return born_; }

    BoundaryData forward_term(std::span<const Vector> a) const {
        const int n = static_cast<int>(a.size());
        const Vector& u0 = born_.incident_boundary();
        Vector acc = Vector::Zero(born_.modes());
        for (int m = 1; m <= n; ++m) {
            for (const std::vector<int>& comp : compositions_of(n, m)) {
                Vector prod = Vector::Ones(born_.modes());
                int pos = 0;
                for (int len : comp) {
                    prod = prod.cwiseProduct(born_.forward_term(a.subspan(pos, len)).cwiseQuotient(u0));
                    pos += len;
                }
                acc += prod / m;
            }
        }
        return acc;
    }

    /// J_1 = diag(1/u0) K_1.
    Matrix j1_matrix() const {
        return born_.incident_boundary().cwiseInverse().asDiagonal() * born_.k1_matrix();
    }

private:
    const BornModel& born_;
};

inline RadialProfile inverse_rytov_term(int n, std::span<const Vector> data, const RytovModel& model,
                                        const Matrix& j1inv) {
    return inverse_series_term(
        n, data, [&](std::span<const Vector> a) { return model.forward_term(a); }, j1inv);
}

inline SeriesReconstruction inverse_rytov_reconstruct(const BoundaryData& psi, int N, const RytovModel& model,
                                                      const Matrix& j1inv) {
    if (N < 1)
        throw DomainError("inverse_rytov_reconstruct: N must be >= 1");
    SeriesReconstruction out;
    out.profile = Vector::Zero(model.born().cells());
    for (int n = 1; n <= N; ++n) {
        const std::vector<Vector> data(static_cast<std::size_t>(n), psi);
        out.terms.push_back(inverse_rytov_term(n, data, model, j1inv));
        out.profile += out.terms.back();
    }
    return out;
}

inline SeriesReconstruction inverse_rytov_reconstruct(const BoundaryData& psi, int N, const RadialDotConfig& cfg,
                                                      int rank) {
    const BornModel born(cfg);
    const RytovModel model(born);
    return inverse_rytov_reconstruct(psi, N, model, truncated_pseudoinverse(model.j1_matrix(), rank));
}

struct NormDiagnostics {
    double mu_inf = 0.0;
    double nu_inf = 0.0;
    std::vector<double> measured;  // |K_n| for n = 1..4
    std::vector<double> bounds;    // nu mu^{n-1}
};

/// Discrete analogues of the norm-bound constants on B_a = {r_i <= R_a}:
///   mu = k^2 max_{l, i in B_a} dr sum_{j in B_a} |g_l(r_i, r_j)| r_j
///   nu = k^2 (dr sum_{j in B_a} r_j) max_{l, j in B_a} |g_l(r_j, R)|^2
/// and the largest |K(n, p, ..., p)| over a probe set with |p| <= 1 on B_a.
inline NormDiagnostics norm_diagnostics(const BornModel& model, int max_order = 4, int random_probes = 16) {
    const RadialDotConfig& cfg = model.config();
    const double k2 = cfg.k * cfg.k;
    const double dr = cfg.dr();
    std::vector<int> inside;
    for (int i = 0; i < cfg.N_r; ++i)
        if (cfg.r(i) <= cfg.R_a)
            inside.push_back(i);

    NormDiagnostics out;
    double area = 0.0;
    for (int j : inside)
        area += dr * cfg.r(j);
    double gmax = 0.0;
    for (int l = 1; l <= cfg.M_S; ++l) {
        const Matrix& g = model.propagator(l);
        for (int i : inside) {
            double row = 0.0;
            for (int j : inside)
                row += std::abs(g(i, j));
            out.mu_inf = std::max(out.mu_inf, k2 * dr * row);
            gmax = std::max(gmax, std::abs(model.incident(l)(i)));
        }
    }
    out.nu_inf = k2 * area * gmax * gmax;

    std::vector<Vector> probes;
    Vector ones = Vector::Zero(cfg.N_r);
    Vector alt = Vector::Zero(cfg.N_r);
    for (std::size_t t = 0; t < inside.size(); ++t) {
        ones(inside[t]) = 1.0;
        alt(inside[t]) = t % 2 == 0 ? 1.0 : -1.0;
    }
    probes.push_back(ones);
    probes.push_back(alt);
    const Matrix k1 = model.k1_matrix();
    for (int l = 0; l < cfg.M_S; ++l) {
        Vector p = Vector::Zero(cfg.N_r);
        for (int i : inside)
            p(i) = k1(l, i) >= 0.0 ? 1.0 : -1.0;
        probes.push_back(p);
    }
    RngState rng = make_rng(0x5eed);
    for (int t = 0; t < random_probes; ++t) {
        Vector p = Vector::Zero(cfg.N_r);
        for (int i : inside) {
            auto [u, next] = uniform_sample(rng);
            rng = next;
            p(i) = u < 0.5 ? -1.0 : 1.0;
        }
        probes.push_back(p);
    }
    for (int n = 1; n <= max_order; ++n) {
        double worst = 0.0;
        for (const Vector& p : probes)
            worst = std::max(worst, model.born_term(n, p).cwiseAbs().maxCoeff());
        out.measured.push_back(worst);
        out.bounds.push_back(out.nu_inf * std::pow(out.mu_inf, n - 1));
    }
    return out;
}

/// Maximum absolute row sum.
inline double infinity_norm(const Matrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); }

} // namespace ipl
