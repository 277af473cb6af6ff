#pragma once

#include "horls/linalg.hpp"

namespace horls {

/// Exponentially weighted sample correlations
///   R_ab,n = (1/Γ_n) Σ_ν γ^{n−ν} a_ν b_νᵀ,   Γ_n = Σ_ν γ^{n−ν},
/// maintained recursively for the pairs (x,x), (y,x) and (ô,x).
struct RunningCorrelations {
    double gamma = 1.0;
    double Gamma = 0.0;  // normalizer Γ_n; zero until the first update
    Mat R_xx;            // P×P
    Mat R_yx;            // L×P
    Mat R_ox;            // L×P
    long n = 0;          // samples folded in

    RunningCorrelations() = default;

    RunningCorrelations(int P, int L, double gamma_in)
        : gamma(gamma_in),
          R_xx(Mat::Zero(P, P)),
          R_yx(Mat::Zero(L, P)),
          R_ox(Mat::Zero(L, P)) {
        detail::require(P > 0 && L > 0, "RunningCorrelations: bad dimensions");
        detail::require(gamma_in > 0.0 && gamma_in <= 1.0,
                        "RunningCorrelations: gamma must lie in (0,1]");
    }

    int P() const { return static_cast<int>(R_xx.rows()); }
    int L() const { return static_cast<int>(R_yx.rows()); }

    /// Fold in one sample: Γ ← γΓ + 1, R_ab ← (γ Γ_old R_ab + a bᵀ)/Γ_new.
    void update(const Vec& x, const Vec& y, const Vec& o_hat) {
        detail::require(x.size() == R_xx.rows() && y.size() == R_yx.rows() &&
                            o_hat.size() == R_ox.rows(),
                        "corr_update: dimension mismatch");
        const double Gamma_new = gamma * Gamma + 1.0;
        const double carry = gamma * Gamma / Gamma_new;
        const double fresh = 1.0 / Gamma_new;
        R_xx *= carry;
        R_xx.noalias() += fresh * x * x.transpose();
        R_yx *= carry;
        R_yx.noalias() += fresh * y * x.transpose();
        R_ox *= carry;
        R_ox.noalias() += fresh * o_hat * x.transpose();
        Gamma = Gamma_new;
        ++n;
    }
};

/// Value-returning flavor of RunningCorrelations::update.
inline RunningCorrelations corr_update(const RunningCorrelations& state, const Vec& x,
                                       const Vec& y, const Vec& o_hat) {
    RunningCorrelations next = state;
    next.update(x, y, o_hat);
    return next;
}

}  // namespace horls
