#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

namespace horls {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline bool all_finite(const Mat& m) { return m.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

namespace detail {

inline void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

inline bool is_symmetric(const Mat& m, double tol = 1e-10) {
    if (m.rows() != m.cols()) return false;
    const double scale = 1.0 + m.cwiseAbs().maxCoeff();
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace detail

/// Weighted squared norm aᵀ W a (W symmetric positive definite).
inline double weighted_sq_norm(const Vec& a, const Mat& W) {
    detail::require(W.rows() == W.cols() && W.rows() == a.size(),
                    "weighted_sq_norm: dimension mismatch");
    return a.dot(W * a);
}

/// One power-method step: p ← R p / ‖R p‖, estimate ← pᵀ R p.
/// The Rayleigh quotient never exceeds the true spectral norm.
struct PowerState {
    Vec p;                  // unit vector
    double estimate = 0.0;  // current Rayleigh-quotient estimate of ‖R‖
};

inline PowerState power_step(const PowerState& state, const Mat& R) {
    detail::require(R.rows() == R.cols() && R.rows() == state.p.size(),
                    "power_step: dimension mismatch");
    Vec q = R * state.p;
    const double qn = q.norm();
    if (qn < 1e-14) {
        // Degenerate correlation matrix (too few samples): hold the
        // direction and report a zero estimate.
        return PowerState{state.p, 0.0};
    }
    PowerState next;
    next.p = q / qn;
    next.estimate = next.p.dot(R * next.p);
    return next;
}

struct EigPair {
    double value = 0.0;
    Vec vector;
};

/// Leading eigenpair of a symmetric PSD matrix by iterated power steps,
/// stopping when successive Rayleigh quotients agree to relative `tol`.
inline EigPair leading_eigpair(const Mat& M, double tol, int max_iters = 200000) {
    detail::require(M.rows() == M.cols(), "leading_eigpair: matrix not square");
    detail::require(detail::is_symmetric(M), "leading_eigpair: matrix not symmetric");
    const Eigen::Index n = M.rows();

    // Deterministic start with a component along every eigenvector w.p. 1.
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec p = Vec::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) p[i] += 0.125 * gauss(rng);
    p /= p.norm();

    double est = -1.0;
    for (int k = 0; k < max_iters; ++k) {
        Vec q = M * p;
        const double qn = q.norm();
        if (qn < 1e-14) return EigPair{0.0, p};  // M ≈ 0 on all of ℝⁿ
        p = q / qn;
        const double next = p.dot(M * p);
        if (est >= 0.0 && std::abs(next - est) <= tol * std::max(next, 1e-300)) {
            return EigPair{next, p};
        }
        est = next;
    }
    return EigPair{est, p};
}

/// Spectral norm (largest eigenvalue) of a symmetric PSD matrix within
/// relative `tol`.
inline double spectral_norm(const Mat& M, double tol) {
    return leading_eigpair(M, tol).value;
}

/// Largest singular value of a (not necessarily symmetric) matrix.
inline double max_singular_value(const Mat& M, double tol = 1e-12) {
    if (M.rows() <= M.cols())
        return std::sqrt(spectral_norm(Mat(M * M.transpose()), tol));
    return std::sqrt(spectral_norm(Mat(M.transpose() * M), tol));
}

/// Solve Σ = A Σ Aᵀ + Q by fixed-point iteration from Σ₀ = Q.
/// Requires the spectral radius of A below one; throws otherwise.
inline Mat solve_lyapunov(const Mat& A, const Mat& Q) {
    detail::require(A.rows() == A.cols(), "solve_lyapunov: A not square");
    detail::require(Q.rows() == Q.cols() && Q.rows() == A.rows(),
                    "solve_lyapunov: Q shape mismatch");
    detail::require(detail::is_symmetric(Q), "solve_lyapunov: Q not symmetric");

    const double q_scale = std::max(Q.cwiseAbs().maxCoeff(), 1e-300);
    Mat sigma = Q;
    double resid = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
        Mat next = A * sigma * A.transpose() + Q;
        resid = (next - sigma).cwiseAbs().maxCoeff();
        sigma.swap(next);
        if (!sigma.allFinite() || sigma.cwiseAbs().maxCoeff() > 1e14 * q_scale)
            throw std::runtime_error("solve_lyapunov: AR model not stable");
        if (resid <= 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) break;
    }
    if (resid > 1e-8 * std::max(1.0, sigma.cwiseAbs().maxCoeff()))
        throw std::runtime_error("solve_lyapunov: AR model not stable");
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return sigma;
}

}  // namespace horls
