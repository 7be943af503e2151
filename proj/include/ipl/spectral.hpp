#pragma once

// Singular systems and spectral regularizers.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipl/errors.hpp"

namespace ipl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Weight rule w(sigma) for filtered inversion.
class SpectralFilter {
public:
    enum class Kind { none, truncated, tikhonov, landweber };

    static SpectralFilter none() { return SpectralFilter(Kind::none, 0.0, 0.0, 0); }

    static SpectralFilter truncated(double alpha) {
        if (!(alpha > 0.0))
            throw DomainError("truncated filter: alpha must be > 0");
        return SpectralFilter(Kind::truncated, alpha, 0.0, 0);
    }

    static SpectralFilter tikhonov(double alpha) {
        if (!(alpha > 0.0))
            throw DomainError("tikhonov filter: alpha must be > 0");
        return SpectralFilter(Kind::tikhonov, alpha, 0.0, 0);
    }

    static SpectralFilter landweber(double omega, int m) {
        if (!(omega > 0.0) || m < 1)
            throw DomainError("landweber filter: need omega > 0 and m >= 1");
        return SpectralFilter(Kind::landweber, 0.0, omega, m);
    }

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double omega() const { return omega_; }
    int iterations() const { return m_; }

    /// w(sigma) in [0, 1].
    double weight(double sigma) const {
        const double s2 = sigma * sigma;
        switch (kind_) {
        case Kind::none:
            return 1.0;
        case Kind::truncated:
            return s2 >= alpha_ ? 1.0 : 0.0;
        case Kind::tikhonov:
            return s2 / (alpha_ + s2);
        case Kind::landweber:
            return -std::expm1(m_ * std::log1p(-omega_ * s2));
        }
        return 0.0;
    }

    /// w(sigma) / sigma, evaluated without forming 1/sigma where the filter allows.
    double gain(double sigma) const {
        switch (kind_) {
        case Kind::tikhonov:
            return sigma / (alpha_ + sigma * sigma);
        default:
            return weight(sigma) / sigma;
        }
    }

private:
    SpectralFilter(Kind k, double a, double w, int m) : kind_(k), alpha_(a), omega_(w), m_(m) {}

    Kind kind_;
    double alpha_;
    double omega_;
    int m_;
};

/// q(alpha, mu) = mu^2 / (alpha + mu^2).
inline double tikhonov_filter(double alpha, double mu) {
    if (!(alpha > 0.0))
        throw DomainError("tikhonov_filter: alpha must be > 0");
    return mu * mu / (alpha + mu * mu);
}

/// What apply_filtered_inverse needs from a singular system: mode count,
/// singular values, data coefficients <g, psi_n> and accumulation of phi_n.
template <class S, class Data>
concept SingularSystemFor = requires(const S& s, const Data& g, int n,
                                     typename S::solution_type& out) {
    typename S::solution_type;
    { s.size() } -> std::convertible_to<int>;
    { s.sigma(n) } -> std::convertible_to<double>;
    { s.coefficient(n, g) } -> std::convertible_to<double>;
    { s.zero_solution(g) } -> std::same_as<typename S::solution_type>;
    s.accumulate(n, 1.0, out);
};

/// Dense singular system A = U diag(sigma) V^T, thin form with min(m, n) modes.
struct DenseSingularSystem {
    using solution_type = Vector;

    Vector sigmas;  // descending
    Matrix left;    // columns psi_n, m x r
    Matrix right;   // columns phi_n, n x r

    int size() const { return static_cast<int>(sigmas.size()); }
    double sigma(int n) const { return sigmas(n); }
    double coefficient(int n, const Vector& g) const { return left.col(n).dot(g); }
    Vector zero_solution(const Vector&) const { return Vector::Zero(right.rows()); }
    void accumulate(int n, double c, Vector& out) const { out += c * right.col(n); }

    Matrix reconstruct() const { return left * sigmas.asDiagonal() * right.transpose(); }
};

namespace detail {

// Replaces the columns of q not flagged valid so that the whole set is
// orthonormal; used for zero singular values.
inline void complete_orthonormal(Matrix& q, const std::vector<bool>& valid) {
    const Eigen::Index rows = q.rows();
    Eigen::Index probe = 0;
    std::vector<bool> ok = valid;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (ok[j])
            continue;
        for (; probe < rows; ++probe) {
            Vector v = Vector::Unit(rows, probe);
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index i = 0; i < q.cols(); ++i)
                    if (ok[i])
                        v -= q.col(i).dot(v) * q.col(i);
            const double nv = v.norm();
            if (nv > 1e-8) {
                q.col(j) = v / nv;
                ok[j] = true;
                ++probe;
                break;
            }
        }
        if (!ok[j])
            throw NumericalError("svd_decompose: cannot complete orthonormal basis");
    }
}

// One-sided Jacobi on a tall matrix (rows >= cols). On return `u` holds
// U diag(sigma) and `v` the accumulated rotations.
inline void one_sided_jacobi(Matrix& u, Matrix& v) {
    constexpr int max_sweeps = 60;
    constexpr double tol = 1e-14;
    const Eigen::Index n = u.cols();
    v.setIdentity(n, n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = u.col(p).squaredNorm();
                const double beta = u.col(q).squaredNorm();
                const double gamma = u.col(p).dot(u.col(q));
                if (alpha == 0.0 || beta == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta))
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                for (Eigen::Index i = 0; i < u.rows(); ++i) {
                    const double up = u(i, p);
                    const double uq = u(i, q);
                    u(i, p) = c * up - s * uq;
                    u(i, q) = s * up + c * uq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vp = v(i, p);
                    const double vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated)
            return;
    }
    throw NumericalError("svd_decompose: Jacobi sweeps did not converge");
}

} // namespace detail

/// Thin SVD by one-sided Jacobi. Singular values descending; the first
/// nonzero component of each right vector is positive.
inline DenseSingularSystem svd_decompose(const Matrix& a) {
    if (a.rows() < 1 || a.cols() < 1)
        throw DomainError("svd_decompose: empty matrix");
    if (!a.allFinite())
        throw DomainError("svd_decompose: non-finite entry");
    const bool wide = a.rows() < a.cols();
    Matrix u = wide ? Matrix(a.transpose()) : a;
    Matrix v;
    detail::one_sided_jacobi(u, v);

    const Eigen::Index r = u.cols();
    Vector sig(r);
    for (Eigen::Index j = 0; j < r; ++j)
        sig(j) = u.col(j).norm();
    std::vector<bool> valid(r);
    for (Eigen::Index j = 0; j < r; ++j) {
        valid[j] = sig(j) > 0.0;
        if (valid[j])
            u.col(j) /= sig(j);
        else
            sig(j) = 0.0;
    }
    detail::complete_orthonormal(u, valid);

    std::vector<Eigen::Index> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return sig(x) > sig(y); });

    DenseSingularSystem out;
    out.sigmas.resize(r);
    Matrix& tall_vecs = wide ? out.right : out.left;
    Matrix& rot_vecs = wide ? out.left : out.right;
    tall_vecs.resize(u.rows(), r);
    rot_vecs.resize(v.rows(), r);
    for (Eigen::Index j = 0; j < r; ++j) {
        out.sigmas(j) = sig(order[j]);
        tall_vecs.col(j) = u.col(order[j]);
        rot_vecs.col(j) = v.col(order[j]);
    }
    for (Eigen::Index j = 0; j < r; ++j) {
        for (Eigen::Index i = 0; i < out.right.rows(); ++i) {
            const double x = out.right(i, j);
            if (std::abs(x) > 1e-14) {
                if (x < 0.0) {
                    out.right.col(j) *= -1.0;
                    out.left.col(j) *= -1.0;
                }
                break;
            }
        }
    }
    return out;
}

/// sum_n w(sigma_n)/sigma_n <g, psi_n> phi_n.
template <class System, class Data>
    requires SingularSystemFor<System, Data>
typename System::solution_type apply_filtered_inverse(const System& sys, const SpectralFilter& filter,
                                                      const Data& g) {
    const int n = sys.size();
    std::vector<double> coef(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        coef[i] = sys.coefficient(i, g);
        scale = std::max(scale, std::abs(coef[i]));
    }
    auto out = sys.zero_solution(g);
    for (int i = 0; i < n; ++i) {
        const double s = sys.sigma(i);
        const double w = filter.weight(s);
        if (w == 0.0)
            continue;
        if (s == 0.0) {
            if (std::abs(coef[i]) > 1e-12 * scale)
                throw NumericalError("apply_filtered_inverse: data has a component on a zero singular value (mode " +
                                     std::to_string(i + 1) + ")");
            continue;
        }
        const double gain = filter.gain(s);
        if (!std::isfinite(gain))
            throw NumericalError("apply_filtered_inverse: mode " + std::to_string(i + 1) +
                                 " amplification is not representable");
        sys.accumulate(i, gain * coef[i], out);
    }
    return out;
}

/// x = (alpha E + A^T A)^{-1} A^T b by Cholesky.
inline Vector tikhonov_solve_matrix(const Matrix& a, const Vector& b, double alpha) {
    if (!(alpha > 0.0))
        throw DomainError("tikhonov_solve_matrix: alpha must be > 0");
    if (b.size() != a.rows())
        throw DomainError("tikhonov_solve_matrix: dimension mismatch");
    Matrix normal = a.transpose() * a;
    normal.diagonal().array() += alpha;
    Eigen::LLT<Matrix> llt(normal);
    if (llt.info() != Eigen::Success)
        throw NumericalError("tikhonov_solve_matrix: Cholesky failed");
    Vector x = llt.solve(a.transpose() * b);
    if (!x.allFinite())
        throw NumericalError("tikhonov_solve_matrix: non-finite solution");
    return x;
}

} // namespace ipl
