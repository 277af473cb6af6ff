#pragma once

#include "horls/correlations.hpp"
#include "horls/noise.hpp"
#include "horls/solvers.hpp"

#include <optional>
#include <vector>

namespace horls {

/// Gradient of the exponentially weighted ensemble loss at F:
///   ∇l(F) = W (F R_xx − R_yx + R_ôx).
inline Mat gradient_ln(const Mat& F, const RunningCorrelations& corrs,
                       const NoiseModel& noise) {
    detail::require(F.rows() == corrs.R_yx.rows() && F.cols() == corrs.R_xx.rows() &&
                        noise.W.rows() == F.rows(),
                    "gradient_ln: shape mismatch");
    return noise.W * (F * corrs.R_xx - corrs.R_yx + corrs.R_ox);
}

// ---------------------------------------------------------------------------
// Warm start: batch solution of the regularized LS task over the first n0
// samples by block alternating minimization. Shared by all online methods.
// ---------------------------------------------------------------------------

struct WarmStartResult {
    Mat F;                   // batch estimate over the warm window
    std::vector<Vec> o_hat;  // per-sample outlier estimates (zero when no solver)
    int outer_iters = 0;
    double objective = 0.0;
};

/// Alternate (a) the ridge-regularized LS update of F given the outliers with
/// (b) per-sample outlier solves given F, until the joint objective stalls.
/// Pass solver = nullptr for a plain LS warm start with all outliers at zero.
inline WarmStartResult warm_start(const std::vector<Vec>& xs, const std::vector<Vec>& ys,
                                  const NoiseModel& noise, const OutlierSolver* solver,
                                  int max_outer = 200, double rel_tol = 1e-8) {
    detail::require(!xs.empty() && xs.size() == ys.size(), "warm_start: empty or ragged data");
    const auto n0 = xs.size();
    const Eigen::Index P = xs[0].size();
    const Eigen::Index L = ys[0].size();
    if (static_cast<Eigen::Index>(n0) < P)
        throw std::invalid_argument("warm_start: insufficient warm-start data");
    detail::require(noise.W.rows() == L, "warm_start: noise dimension mismatch");

    Mat Sxx = Mat::Zero(P, P);
    Mat Syx = Mat::Zero(L, P);
    for (std::size_t v = 0; v < n0; ++v) {
        Sxx.noalias() += xs[v] * xs[v].transpose();
        Syx.noalias() += ys[v] * xs[v].transpose();
    }
    const double ridge = 1e-8 * Sxx.trace() / static_cast<double>(P);
    const Eigen::LLT<Mat> llt(Sxx + ridge * Mat::Identity(P, P));
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("warm_start: degenerate input correlation");

    WarmStartResult result;
    result.o_hat.assign(n0, Vec::Zero(L));

    const auto solve_F = [&](const std::vector<Vec>& o) {
        Mat B = Syx;
        for (std::size_t v = 0; v < n0; ++v) B.noalias() -= o[v] * xs[v].transpose();
        return Mat(llt.solve(B.transpose()).transpose());
    };
    const auto joint_objective = [&](const Mat& F, const std::vector<Vec>& o) {
        double J = 0.0;
        for (std::size_t v = 0; v < n0; ++v) {
            const Vec e = ys[v] - F * xs[v] - o[v];
            J += 0.5 * e.dot(noise.W * e);
            if (solver != nullptr) J += penalty_value(solver->penalty(), o[v]);
        }
        return J;
    };

    result.F = solve_F(result.o_hat);
    if (solver == nullptr) {
        result.outer_iters = 1;
        result.objective = joint_objective(result.F, result.o_hat);
        return result;
    }

    double J_prev = joint_objective(result.F, result.o_hat);
    for (int outer = 0; outer < max_outer; ++outer) {
        for (std::size_t v = 0; v < n0; ++v)
            result.o_hat[v] = solver->solve(ys[v] - result.F * xs[v]);
        result.F = solve_F(result.o_hat);
        const double J = joint_objective(result.F, result.o_hat);
        result.outer_iters = outer + 1;
        result.objective = J;
        if (J_prev - J <= rel_tol * std::max(std::abs(J_prev), 1.0)) break;
        J_prev = J;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Classical exponentially weighted RLS and its outlier-robust wrapper.
// ---------------------------------------------------------------------------

struct RlsState {
    Mat F;     // L×P estimate
    Mat Pmat;  // P×P inverse input-correlation estimate
    double gamma = 1.0;
};

inline void rls_step(RlsState& s, const Vec& x, const Vec& y_cleaned) {
    detail::require(x.size() == s.Pmat.rows() && y_cleaned.size() == s.F.rows(),
                    "rls_step: dimension mismatch");
    const Vec Px = s.Pmat * x;
    const Vec k = Px / (s.gamma + x.dot(Px));
    s.F.noalias() += (y_cleaned - s.F * x) * k.transpose();
    s.Pmat = (s.Pmat - k * Px.transpose()) / s.gamma;
    s.Pmat = 0.5 * (s.Pmat + s.Pmat.transpose()).eval();
}

/// One OR-RLS recursion: estimate the outlier on the current residual, then
/// run the classical RLS update on the cleaned output. Returns ô_n.
inline Vec or_rls_step(RlsState& s, const Vec& x, const Vec& y, const OutlierSolver& solver) {
    const Vec o_hat = solver.solve(y - s.F * x);
    rls_step(s, x, y - o_hat);
    return o_hat;
}

// ---------------------------------------------------------------------------
// OR-HO-RLS: steepest-descent updates with momentum, a running power-method
// step-size normalizer, and a proximal step for the side-information loss g.
// ---------------------------------------------------------------------------

enum class GKind { Zero, L1 };

struct HoRlsConfig {
    double alpha = 0.5;       // extrapolation weight in [0.5, 1]
    double lambda_g = 0.0;    // prox weight for g
    double eps_varpi = 5e-2;  // overestimation margin for the step normalizer
    int n0 = 500;             // warm-start length
    GKind g_kind = GKind::Zero;
    OutlierPenalty penalty;   // outlier penalty; its lambda is the task's λ
    InnerSolver inner = InnerSolver::Fmhsdm;
    SolverBudget budget;
    std::optional<long> freeze_outliers_after;  // force ô_n = 0 for n past this

    void validate() const {
        detail::require(alpha >= 0.5 && alpha <= 1.0,
                        "HoRlsConfig: alpha must lie in [0.5, 1]");
        detail::require(lambda_g >= 0.0, "HoRlsConfig: lambda_g must be nonnegative");
        detail::require(eps_varpi > 0.0, "HoRlsConfig: eps_varpi must be positive");
        detail::require(n0 >= 1, "HoRlsConfig: n0 must be positive");
        penalty.validate();
        budget.validate();
    }
};

/// Filter state carried between recursions: the current estimate, the two
/// previous iterates the momentum line needs, and the cached gradient/ϖ of
/// the previous recursion so each step computes exactly one new
/// W(F R_xx − R_yx + R_ôx) product.
struct FilterEstimate {
    Mat F;            // F̂_n
    Mat F_half_prev;  // F̂_{n−1/2}
    Mat F_prev;       // F̂_{n−1}
    Mat grad_prev;    // W(F̂_{n−1} R_xx,n−1 − R_yx,n−1 + R_ôx,n−1)
    double varpi_prev = 0.0;
};

inline Mat prox_g(const Mat& F, const HoRlsConfig& cfg) {
    return cfg.g_kind == GKind::Zero ? F : prox_l1_mat(F, cfg.lambda_g);
}

/// Initialization at the end of the warm window: exact spectral norms seed
/// ϖ_{n0} and the power method, then one damped gradient step and a prox.
inline std::pair<FilterEstimate, PowerState> horls_init(const Mat& F_n0,
                                                        const RunningCorrelations& corrs,
                                                        const NoiseModel& noise,
                                                        const HoRlsConfig& cfg) {
    cfg.validate();
    const EigPair top = leading_eigpair(corrs.R_xx, 1e-10);
    const double varpi0 = noise.W_norm * top.value + cfg.eps_varpi;

    FilterEstimate st;
    st.grad_prev = gradient_ln(F_n0, corrs, noise);
    st.F_half_prev = F_n0 - (cfg.alpha / varpi0) * st.grad_prev;
    st.F = prox_g(st.F_half_prev, cfg);
    st.F_prev = F_n0;
    st.varpi_prev = varpi0;
    return {st, PowerState{top.vector, top.value}};
}

/// One OR-HO-RLS recursion on the sample (x, y). Mutates the filter state,
/// the power state and the running correlations; returns ô_n.
inline Vec horls_step(FilterEstimate& st, PowerState& power, RunningCorrelations& corrs,
                      const Vec& x, const Vec& y, const NoiseModel& noise,
                      const HoRlsConfig& cfg, const OutlierSolver& solver) {
    const bool frozen =
        cfg.freeze_outliers_after.has_value() && corrs.n + 1 >= *cfg.freeze_outliers_after;
    const Vec o_hat = frozen ? Vec(Vec::Zero(y.size())) : solver.solve(y - st.F * x);

    corrs.update(x, y, o_hat);
    power = power_step(power, corrs.R_xx);
    const double varpi_n = noise.W_norm * power.estimate + cfg.eps_varpi;

    // The only new gradient product of this recursion; the previous one is
    // reused from the cache.
    Mat work(st.F.rows(), st.F.cols());
    work.noalias() = st.F * corrs.R_xx;
    work -= corrs.R_yx;
    work += corrs.R_ox;
    Mat grad_n(st.F.rows(), st.F.cols());
    grad_n.noalias() = noise.W * work;

    work = st.F;
    work += st.F_half_prev;
    work -= st.F_prev;
    work += (cfg.alpha / st.varpi_prev) * st.grad_prev;
    work -= (1.0 / varpi_n) * grad_n;
    Mat& F_half = work;

    st.F_prev = std::move(st.F);
    st.F = prox_g(F_half, cfg);
    st.F_half_prev = std::move(F_half);
    st.grad_prev = std::move(grad_n);
    st.varpi_prev = varpi_n;
    return o_hat;
}

}  // namespace horls
