#pragma once

#include "horls/noise.hpp"
#include "horls/penalty.hpp"

#include <cassert>

namespace horls {

/// Iteration budget shared by all inner solvers. tol = 0 disables the
/// early exit, so exactly max_iters recursions run.
struct SolverBudget {
    int max_iters = 100;
    double tol = 0.0;

    void validate() const {
        detail::require(max_iters >= 1, "SolverBudget: max_iters must be >= 1");
        detail::require(tol >= 0.0, "SolverBudget: tol must be nonnegative");
    }
};

/// ½(o − r)ᵀ W (o − r) + ρ(o), the per-sample outlier objective.
inline double outlier_objective(const Vec& o, const Vec& r, const Mat& W,
                                const OutlierPenalty& p) {
    Vec e = o - r;
    return 0.5 * e.dot(W * e) + penalty_value(p, o);
}

/// ADMM on the splitting o = z of ½‖o − r‖²_W + λ‖z‖₁. The o-update solves
/// (W + ρI)o = Wr + ρ(z − u); pass a prefactored LLT of (W + ρI), or the
/// cached inverse derived from it, to reuse the one-time factorization
/// across samples. Returns the (exactly sparse) z iterate.
inline Vec solve_outlier_admm(const Vec& r, const Mat& W, double lambda,
                              const SolverBudget& budget, double rho_admm,
                              const Eigen::LLT<Mat>* fact = nullptr,
                              const Mat* o_update_inv = nullptr) {
    detail::require(lambda > 0.0, "solve_outlier_admm: lambda must be positive");
    detail::require(rho_admm > 0.0, "solve_outlier_admm: rho must be positive");
    detail::require(W.rows() == W.cols() && W.rows() == r.size(),
                    "solve_outlier_admm: dimension mismatch");
    budget.validate();
    const Eigen::Index L = r.size();

    Eigen::LLT<Mat> local;
    Mat local_inv;
    if (o_update_inv == nullptr) {
        if (fact == nullptr) {
            local.compute(W + rho_admm * Mat::Identity(L, L));
            fact = &local;
        }
        local_inv = fact->solve(Mat::Identity(L, L));
        o_update_inv = &local_inv;
    }

    Vec o = Vec::Zero(L), z = Vec::Zero(L), u = Vec::Zero(L), rhs(L);
    const Vec Wr = W * r;
    const double thr = lambda / rho_admm;
    for (int k = 0; k < budget.max_iters; ++k) {
        for (Eigen::Index i = 0; i < L; ++i) rhs[i] = Wr[i] + rho_admm * (z[i] - u[i]);
        o.noalias() = (*o_update_inv) * rhs;
        double primal_sq = 0.0;
        for (Eigen::Index i = 0; i < L; ++i) {
            z[i] = soft_threshold(o[i] + u[i], thr);
            const double d = o[i] - z[i];
            u[i] += d;
            primal_sq += d * d;
        }
        if (std::sqrt(primal_sq) < budget.tol) break;
    }
    return z;
}

/// Relaxed proximal forward-backward iteration for the same ℓ1 task:
///   o ← (1 − β)o + β · soft(o − W(o − r)/c, λ/c),  c = ‖W‖ + ε.
inline Vec solve_outlier_fmhsdm(const Vec& r, const Mat& W, double lambda,
                                const SolverBudget& budget, double beta,
                                double W_norm = -1.0) {
    detail::require(lambda > 0.0, "solve_outlier_fmhsdm: lambda must be positive");
    detail::require(beta > 0.0 && beta <= 1.0, "solve_outlier_fmhsdm: beta must lie in (0,1]");
    detail::require(W.rows() == W.cols() && W.rows() == r.size(),
                    "solve_outlier_fmhsdm: dimension mismatch");
    budget.validate();
    if (W_norm <= 0.0) W_norm = spectral_norm(W, 1e-10);
    const double c = W_norm + 1e-12;
    const double thr = lambda / c;
    const Eigen::Index L = r.size();

    Vec o = Vec::Zero(L);
    Vec e(L), grad(L);
    const double c_inv = 1.0 / c;
    for (int k = 0; k < budget.max_iters; ++k) {
        e = o - r;
        grad.noalias() = W * e;
        double change = 0.0;
        for (Eigen::Index i = 0; i < L; ++i) {
            const double nv =
                (1.0 - beta) * o[i] + beta * soft_threshold(o[i] - grad[i] * c_inv, thr);
            change = std::max(change, std::abs(nv - o[i]));
            o[i] = nv;
        }
        if (change < budget.tol) break;
    }
    return o;
}

/// GIST: proximal gradient with Barzilai–Borwein step initialization and a
/// monotone backtracking line search, for the MCP-penalized task. Returns the
/// best-objective iterate; the objective never exceeds its value at o = 0.
inline Vec solve_outlier_gist(const Vec& r, const Mat& W, const OutlierPenalty& p,
                              const SolverBudget& budget, double W_norm = -1.0) {
    detail::require(p.kind == PenaltyKind::Mcp, "solve_outlier_gist: MCP penalty required");
    p.validate();
    detail::require(W.rows() == W.cols() && W.rows() == r.size(),
                    "solve_outlier_gist: dimension mismatch");
    budget.validate();
    if (W_norm <= 0.0) W_norm = spectral_norm(W, 1e-10);
    const Eigen::Index L = r.size();

    const double c_lo = std::max(W_norm * 1e-2, 1.000001 / p.theta);
    const double c_hi = std::max(W_norm * 1e2, c_lo);
    const auto clamp = [&](double c) { return std::min(std::max(c, c_lo), c_hi); };

    Vec e(L), we(L);
    const auto objective = [&](const Vec& o) {
        e = o - r;
        we.noalias() = W * e;
        return 0.5 * e.dot(we) + penalty_value(p, o);
    };

    Vec o = Vec::Zero(L);
    double f = objective(o);
    Vec grad = we;  // W(o - r) at o = 0
    Vec best_o = o;
    double best_f = f;

    double c = clamp(W_norm);
    Vec o_prev(L), grad_prev(L), cand(L);
    bool have_prev = false;
    for (int k = 0; k < budget.max_iters; ++k) {
        if (have_prev) {
            double ss = 0.0, sy = 0.0;
            for (Eigen::Index i = 0; i < L; ++i) {
                const double s = o[i] - o_prev[i];
                ss += s * s;
                sy += s * (grad[i] - grad_prev[i]);
            }
            if (ss > 0.0 && sy > 0.0) c = clamp(sy / ss);
        }
        double ck = c;
        double fc = 0.0;
        bool accepted = false;
        for (int bt = 0; bt <= 20; ++bt) {
            for (Eigen::Index i = 0; i < L; ++i)
                cand[i] = mcp_threshold(o[i] - grad[i] / ck, p.lambda, p.theta, ck);
            fc = objective(cand);
            if (fc <= f + 1e-12 * (1.0 + std::abs(f))) {
                accepted = true;
                break;
            }
            ck *= 2.0;
        }
        if (!accepted) break;
        assert(fc <= f + 1e-9 * (1.0 + std::abs(f)));
        double change = 0.0;
        for (Eigen::Index i = 0; i < L; ++i)
            change = std::max(change, std::abs(cand[i] - o[i]));
        o_prev.swap(o);
        grad_prev.swap(grad);
        have_prev = true;
        o = cand;
        f = fc;
        grad = we;  // objective(cand) left W(cand - r) in `we`
        if (f <= best_f) {
            best_f = f;
            best_o = o;
        }
        if (change < budget.tol) break;
    }
    return best_o;
}

/// Cyclic exact coordinate minimization for either penalty. One budget unit
/// is a full sweep; the objective is non-increasing across sweeps.
inline Vec solve_outlier_cd(const Vec& r, const Mat& W, const OutlierPenalty& p,
                            const SolverBudget& budget) {
    p.validate();
    detail::require(W.rows() == W.cols() && W.rows() == r.size(),
                    "solve_outlier_cd: dimension mismatch");
    budget.validate();
    const Eigen::Index L = r.size();
    for (Eigen::Index i = 0; i < L; ++i) {
        detail::require(W(i, i) > 0.0, "solve_outlier_cd: W diagonal must be positive");
        if (p.kind == PenaltyKind::Mcp)
            detail::require(W(i, i) * p.theta > 1.0,
                            "solve_outlier_cd: W_ii*theta must exceed 1");
    }

    Vec o = Vec::Zero(L);
    const Vec Wr = W * r;
    Vec w_inv(L), thr(L);
    for (Eigen::Index i = 0; i < L; ++i) {
        w_inv[i] = 1.0 / W(i, i);
        thr[i] = p.lambda * w_inv[i];
    }
#ifndef NDEBUG
    double f_prev = outlier_objective(o, r, W, p);
#endif
    for (int sweep = 0; sweep < budget.max_iters; ++sweep) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < L; ++i) {
            const double wii = W(i, i);
            // W is symmetric: the column dot product walks contiguous storage
            const double s = Wr[i] - (W.col(i).dot(o) - wii * o[i]);
            const double t = s * w_inv[i];
            const double nv = p.kind == PenaltyKind::L1
                                  ? soft_threshold(t, thr[i])
                                  : mcp_threshold(t, p.lambda, p.theta, wii);
            change = std::max(change, std::abs(nv - o[i]));
            o[i] = nv;
        }
#ifndef NDEBUG
        const double f_now = outlier_objective(o, r, W, p);
        assert(f_now <= f_prev + 1e-9 * (1.0 + std::abs(f_prev)));
        f_prev = f_now;
#endif
        if (change < budget.tol) break;
    }
    return o;
}

enum class InnerSolver { Admm, Fmhsdm, Gist, Cd };

/// Bundles a noise model's weighting with one inner solver and its
/// parameters. The (W + ρI) factorization for ADMM is computed once here and
/// reused for every sample; instances are read-only after construction and
/// safe to share across threads.
class OutlierSolver {
public:
    OutlierSolver() = default;

    OutlierSolver(const NoiseModel& noise, OutlierPenalty penalty, InnerSolver inner,
                  SolverBudget budget = {}, double rho_admm = 1.0, double beta = 1.0)
        : W_(noise.W),
          W_norm_(noise.W_norm),
          penalty_(penalty),
          inner_(inner),
          budget_(budget),
          rho_admm_(rho_admm),
          beta_(beta) {
        penalty_.validate();
        budget_.validate();
        switch (inner_) {
            case InnerSolver::Admm:
                detail::require(penalty_.kind == PenaltyKind::L1,
                                "OutlierSolver: ADMM handles the l1 penalty only");
                detail::require(rho_admm_ > 0.0, "OutlierSolver: rho must be positive");
                llt_.compute(W_ + rho_admm_ * Mat::Identity(W_.rows(), W_.cols()));
                if (llt_.info() != Eigen::Success)
                    throw std::invalid_argument("OutlierSolver: W + rho*I not positive definite");
                o_update_inv_ = llt_.solve(Mat::Identity(W_.rows(), W_.cols()));
                break;
            case InnerSolver::Fmhsdm:
                detail::require(penalty_.kind == PenaltyKind::L1,
                                "OutlierSolver: FMHSDM handles the l1 penalty only");
                detail::require(beta_ > 0.0 && beta_ <= 1.0,
                                "OutlierSolver: beta must lie in (0,1]");
                break;
            case InnerSolver::Gist:
                detail::require(penalty_.kind == PenaltyKind::Mcp,
                                "OutlierSolver: GIST handles the MCP penalty only");
                break;
            case InnerSolver::Cd:
                break;
        }
    }

    Vec solve(const Vec& residual) const {
        switch (inner_) {
            case InnerSolver::Admm:
                return solve_outlier_admm(residual, W_, penalty_.lambda, budget_, rho_admm_,
                                          &llt_, &o_update_inv_);
            case InnerSolver::Fmhsdm:
                return solve_outlier_fmhsdm(residual, W_, penalty_.lambda, budget_, beta_,
                                            W_norm_);
            case InnerSolver::Gist:
                return solve_outlier_gist(residual, W_, penalty_, budget_, W_norm_);
            case InnerSolver::Cd:
                return solve_outlier_cd(residual, W_, penalty_, budget_);
        }
        throw std::logic_error("OutlierSolver: unknown inner solver");
    }

    const OutlierPenalty& penalty() const { return penalty_; }
    InnerSolver inner() const { return inner_; }
    const SolverBudget& budget() const { return budget_; }

private:
    Mat W_;
    double W_norm_ = 0.0;
    OutlierPenalty penalty_;
    InnerSolver inner_ = InnerSolver::Fmhsdm;
    SolverBudget budget_;
    double rho_admm_ = 1.0;
    double beta_ = 1.0;
    Eigen::LLT<Mat> llt_;
    Mat o_update_inv_;  // (W + rho I)^{-1} from the one-time factorization
};

}  // namespace horls
