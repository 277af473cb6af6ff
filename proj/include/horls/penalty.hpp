#pragma once

#include "horls/linalg.hpp"

namespace horls {

enum class PenaltyKind { L1, Mcp };

/// Sparsity penalty ρ(·) on outlier vectors: either λ‖·‖₁ or the minimax
/// concave penalty with parameters (λ, θ).
struct OutlierPenalty {
    PenaltyKind kind = PenaltyKind::L1;
    double lambda = 1.0;
    double theta = 4.0;  // MCP concavity; unused for L1

    void validate() const {
        detail::require(lambda > 0.0, "OutlierPenalty: lambda must be positive");
        if (kind == PenaltyKind::Mcp)
            detail::require(theta > 0.0, "OutlierPenalty: theta must be positive");
    }

    static OutlierPenalty l1(double lambda) { return {PenaltyKind::L1, lambda, 4.0}; }
    static OutlierPenalty mcp(double lambda, double theta = 4.0) {
        return {PenaltyKind::Mcp, lambda, theta};
    }
};

/// Scalar MCP: λ|t| − t²/(2θ) for |t| ≤ θλ, saturating at θλ²/2.
inline double mcp_value(double t, double lambda, double theta) {
    const double a = std::abs(t);
    if (a <= theta * lambda) return lambda * a - a * a / (2.0 * theta);
    return 0.5 * theta * lambda * lambda;
}

inline double penalty_value(const OutlierPenalty& p, const Vec& o) {
    if (p.kind == PenaltyKind::L1) return p.lambda * o.lpNorm<1>();
    double s = 0.0;
    for (Eigen::Index i = 0; i < o.size(); ++i) s += mcp_value(o[i], p.lambda, p.theta);
    return s;
}

/// Prox of τ|·|: sign(t)·max(|t| − τ, 0).
inline double soft_threshold(double t, double tau) {
    const double a = std::abs(t) - tau;
    if (a <= 0.0) return 0.0;
    return t > 0.0 ? a : -a;
}

/// Global minimizer of ½c(x − t)² + mcp(x; λ, θ)  (firm thresholding).
/// Requires cθ > 1 so the scalar subproblem has a unique minimizer.
inline double mcp_threshold(double t, double lambda, double theta, double c) {
    detail::require(c * theta > 1.0, "mcp_threshold: c*theta must exceed 1");
    const double a = std::abs(t);
    if (a <= lambda / c) return 0.0;
    if (a > theta * lambda) return t;
    const double m = (c * a - lambda) / (c - 1.0 / theta);
    return t > 0.0 ? m : -m;
}

/// Entrywise soft threshold of a matrix: Prox of λ_g‖·‖₁ in the Frobenius
/// geometry. λ_g = 0 returns the argument unchanged.
inline Mat prox_l1_mat(const Mat& F, double lambda_g) {
    detail::require(lambda_g >= 0.0, "prox_l1_mat: negative threshold");
    if (lambda_g == 0.0) return F;
    return F.unaryExpr([lambda_g](double v) { return soft_threshold(v, lambda_g); });
}

}  // namespace horls
