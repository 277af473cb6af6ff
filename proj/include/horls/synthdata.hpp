#pragma once

#include "horls/linalg.hpp"
#include "horls/noise.hpp"

#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

namespace horls {

enum class SystemKind { DenseGaussian, SparseOnes };

/// Full description of one synthetic scenario.
struct ScenarioConfig {
    int P = 20;
    int L = 10;
    double snr_db = 20.0;
    double p_o = 0.2;  // per-entry outlier probability
    SystemKind system_kind = SystemKind::DenseGaussian;
    std::optional<long> change_at;  // redraw the system before this sample
    long horizon = 5000;
    double ar_smax = 0.95;          // max singular value of the AR state matrix
    double outlier_variance = 1e4;  // variance of the nonzero outlier amplitude
    std::uint64_t seed = 1;
    double sparse_fraction = 0.1;   // fraction of unit entries for SparseOnes

    void validate() const {
        detail::require(P > 0 && L > 0, "ScenarioConfig: dimensions must be positive");
        detail::require(p_o >= 0.0 && p_o <= 1.0, "ScenarioConfig: p_o must lie in [0,1]");
        detail::require(ar_smax >= 0.0 && ar_smax < 1.0,
                        "ScenarioConfig: ar_smax must lie in [0,1)");
        detail::require(horizon >= 1, "ScenarioConfig: horizon must be positive");
        detail::require(outlier_variance > 0.0,
                        "ScenarioConfig: outlier_variance must be positive");
        detail::require(snr_db == snr_db, "ScenarioConfig: snr_db must be a number");
        detail::require(sparse_fraction > 0.0 && sparse_fraction <= 1.0,
                        "ScenarioConfig: sparse_fraction must lie in (0,1]");
        if (change_at)
            detail::require(*change_at >= 1 && *change_at <= horizon,
                            "ScenarioConfig: change_at must lie in [1, horizon]");
    }
};

/// Draw the unknown system: IID standard-normal entries, or exactly
/// round(fraction·L·P) unit entries at distinct uniform positions.
inline Mat make_system(const ScenarioConfig& cfg, std::mt19937_64& rng) {
    Mat F(cfg.L, cfg.P);
    if (cfg.system_kind == SystemKind::DenseGaussian) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < cfg.L; ++i)
            for (int j = 0; j < cfg.P; ++j) F(i, j) = gauss(rng);
        return F;
    }
    F.setZero();
    const long total = static_cast<long>(cfg.L) * cfg.P;
    const long ones = std::lround(cfg.sparse_fraction * static_cast<double>(total));
    std::vector<long> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    for (long k = 0; k < ones; ++k) {  // partial Fisher-Yates
        std::uniform_int_distribution<long> pick(k, total - 1);
        std::swap(idx[k], idx[pick(rng)]);
        F(idx[k] / cfg.P, idx[k] % cfg.P) = 1.0;
    }
    return F;
}

struct NoiseBuild {
    NoiseModel noise;
    Mat ar_A;            // AR state matrix, max singular value = cfg.ar_smax
    Mat innovation_cov;  // isotropic q·I
};

/// Construct the AR noise process: scale a random Gaussian matrix to the
/// requested maximum singular value, then pick the isotropic innovation
/// variance q so the stationary covariance meets the SNR
///   10·log10( trace(F* R_xx F*ᵀ) / trace(R_vv) ),  R_xx = I.
inline NoiseBuild make_noise(const ScenarioConfig& cfg, const Mat& F_star,
                             std::mt19937_64& rng) {
    cfg.validate();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Mat G(cfg.L, cfg.L);
    for (int i = 0; i < cfg.L; ++i)
        for (int j = 0; j < cfg.L; ++j) G(i, j) = gauss(rng);
    Mat A = cfg.ar_smax == 0.0 ? Mat::Zero(cfg.L, cfg.L)
                               : Mat(G * (cfg.ar_smax / max_singular_value(G)));

    const Mat sigma_unit = solve_lyapunov(A, Mat::Identity(cfg.L, cfg.L));
    const double signal_power = F_star.squaredNorm();  // trace(F* F*ᵀ), R_xx = I
    const double snr_lin = std::pow(10.0, cfg.snr_db / 10.0);
    const double q = signal_power / (snr_lin * sigma_unit.trace());

    NoiseBuild out;
    out.ar_A = std::move(A);
    out.innovation_cov = q * Mat::Identity(cfg.L, cfg.L);
    out.noise = NoiseModel(q * sigma_unit);
    return out;
}

struct Sample {
    Vec x;  // input
    Vec y;  // output = F* x + o + v
    Vec o;  // true outlier vector (sparse)
    Vec v;  // nominal AR noise
};

/// Streaming generator for one trial. Same seed ⇒ identical streams; the
/// mid-run system redraw consumes a dedicated random stream so the
/// input/noise/outlier sequences are unaffected by it.
class Generator {
public:
    explicit Generator(const ScenarioConfig& cfg) : Generator(cfg, cfg.seed) {}

    Generator(const ScenarioConfig& cfg, std::uint64_t seed)
        : cfg_(cfg), rng_(seed), rng_system_(seed ^ 0xd1b54a32d192ed03ull) {
        cfg_.validate();
        F_star_ = make_system(cfg_, rng_system_);
        build_ = make_noise(cfg_, F_star_, rng_);
        q_std_ = std::sqrt(build_.innovation_cov(0, 0));
        outlier_halfwidth_ = std::sqrt(3.0 * cfg_.outlier_variance);

        v_ = Vec::Zero(cfg_.L);
        for (int k = 0; k < 1000; ++k) ar_advance();  // burn-in to stationarity
    }

    const ScenarioConfig& config() const { return cfg_; }
    const Mat& F_star() const { return F_star_; }
    const NoiseModel& noise() const { return build_.noise; }
    const Mat& ar_A() const { return build_.ar_A; }
    const Mat& innovation_cov() const { return build_.innovation_cov; }
    long n() const { return n_; }

    Sample next() {
        const long n_cur = n_ + 1;
        if (cfg_.change_at && n_cur == *cfg_.change_at)
            F_star_ = make_system(cfg_, rng_system_);

        Sample s;
        s.x = Vec(cfg_.P);
        for (int j = 0; j < cfg_.P; ++j) s.x[j] = gauss_(rng_);

        ar_advance();
        s.v = v_;

        s.o = Vec::Zero(cfg_.L);
        for (int i = 0; i < cfg_.L; ++i) {
            if (unit_(rng_) < cfg_.p_o)
                s.o[i] = outlier_halfwidth_ * (2.0 * unit_(rng_) - 1.0);
        }

        s.y = F_star_ * s.x + s.o + s.v;
        n_ = n_cur;
        return s;
    }

private:
    void ar_advance() {
        Vec w(cfg_.L);
        for (int i = 0; i < cfg_.L; ++i) w[i] = q_std_ * gauss_(rng_);
        v_ = build_.ar_A * v_ + w;
    }

    ScenarioConfig cfg_;
    std::mt19937_64 rng_;
    std::mt19937_64 rng_system_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    Mat F_star_;
    NoiseBuild build_;
    double q_std_ = 0.0;
    double outlier_halfwidth_ = 0.0;
    Vec v_;
    long n_ = 0;
};

/// Columnar text dump of a generated stream, one line per sample:
/// x entries, then y entries, then o entries.
inline void dump_stream(std::ostream& os, const std::vector<Sample>& samples) {
    char buf[32];
    for (const Sample& s : samples) {
        bool first = true;
        const auto put = [&](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            if (!first) os << ' ';
            os << buf;
            first = false;
        };
        for (Eigen::Index j = 0; j < s.x.size(); ++j) put(s.x[j]);
        for (Eigen::Index i = 0; i < s.y.size(); ++i) put(s.y[i]);
        for (Eigen::Index i = 0; i < s.o.size(); ++i) put(s.o[i]);
        os << '\n';
    }
}

}  // namespace horls
