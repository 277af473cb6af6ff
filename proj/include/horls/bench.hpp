#pragma once

#include "horls/filters.hpp"
#include "horls/synthdata.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

namespace horls {

enum class Family { Rls, OrRls, OrHoRls };

/// One estimator in the benchmark roster.
struct MethodSpec {
    std::string name;
    Family family = Family::Rls;
    OutlierPenalty penalty;                     // OR families only
    InnerSolver inner = InnerSolver::Admm;      // OR families only
    GKind g_kind = GKind::Zero;                 // OR-HO-RLS only
    double lambda_g = 0.0;                      // OR-HO-RLS only
    double alpha = 0.5;                         // OR-HO-RLS only
    double eps_varpi = 5e-2;                    // OR-HO-RLS only
    SolverBudget budget;
    double rho_admm = 1.0;
    double beta_fmhsdm = 1.0;
    std::optional<long> freeze_outliers_after;  // OR-HO-RLS only

    void validate() const {
        detail::require(!name.empty(), "MethodSpec: empty name");
        if (family == Family::Rls) return;
        penalty.validate();
        budget.validate();
        if (family == Family::OrHoRls) {
            detail::require(alpha >= 0.5 && alpha <= 1.0,
                            "MethodSpec: alpha must lie in [0.5, 1]");
            detail::require(eps_varpi > 0.0, "MethodSpec: eps_varpi must be positive");
            detail::require(lambda_g >= 0.0, "MethodSpec: lambda_g must be nonnegative");
        }
    }
};

/// Run-level experiment description: the scenario plus everything shared by
/// all methods (forgetting factor, warm-start length, roster, trial count).
struct ExperimentConfig {
    ScenarioConfig scenario;
    double gamma = 1.0;
    int n0 = 500;
    std::vector<MethodSpec> methods;
    int trials = 20;
    std::string output_dir;  // empty: no CSV output

    void validate() const {
        scenario.validate();
        detail::require(gamma > 0.0 && gamma <= 1.0,
                        "ExperimentConfig: gamma must lie in (0,1]");
        detail::require(n0 >= scenario.P, "ExperimentConfig: n0 must be at least P");
        detail::require(scenario.horizon > n0,
                        "ExperimentConfig: horizon must exceed n0");
        detail::require(trials >= 1, "ExperimentConfig: trials must be >= 1");
        detail::require(!methods.empty(), "ExperimentConfig: no methods configured");
        for (std::size_t i = 0; i < methods.size(); ++i) {
            methods[i].validate();
            for (std::size_t j = i + 1; j < methods.size(); ++j)
                detail::require(methods[i].name != methods[j].name,
                                "ExperimentConfig: duplicate method name");
        }
    }
};

/// ‖F − F*‖_Fr / ‖F*‖_Fr.
inline double nrmse(const Mat& F, const Mat& F_star) {
    detail::require(F.rows() == F_star.rows() && F.cols() == F_star.cols(),
                    "nrmse: shape mismatch");
    const double denom = F_star.norm();
    if (denom == 0.0) throw std::invalid_argument("nrmse: reference system is zero");
    return (F - F_star).norm() / denom;
}

struct TrialTrace {
    std::string method;
    int trial = 0;
    std::vector<double> nrmse;                  // indexed by n = n0+1 .. horizon
    std::vector<std::int64_t> step_time_ns;
    bool diverged = false;
    long diverged_at = -1;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Seed for one trial; independent of the method so every method sees the
/// same data stream for a given (master seed, trial) pair.
inline std::uint64_t trial_seed(std::uint64_t master, int trial) {
    return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(trial) + 0x51ull));
}

/// Run one method over one generated stream: warm start on samples 1..n0
/// (untimed), then one recursion per sample with NRMSE recorded against the
/// currently active system. Deterministic given (cfg, method, seed).
inline TrialTrace run_trial(const ExperimentConfig& cfg, const MethodSpec& method,
                            std::uint64_t seed, int trial_index = 0) {
    cfg.validate();
    method.validate();
    const ScenarioConfig& sc = cfg.scenario;

    ScenarioConfig sc_seeded = sc;
    sc_seeded.seed = seed;
    Generator gen(sc_seeded);

    std::vector<Sample> samples;
    samples.reserve(static_cast<std::size_t>(sc.horizon));
    std::vector<Mat> systems{gen.F_star()};
    std::vector<int> sys_of_n(static_cast<std::size_t>(sc.horizon), 0);
    for (long n = 1; n <= sc.horizon; ++n) {
        samples.push_back(gen.next());
        if (sc.change_at && n == *sc.change_at) systems.push_back(gen.F_star());
        sys_of_n[static_cast<std::size_t>(n - 1)] = static_cast<int>(systems.size()) - 1;
    }

    const NoiseModel& noise = gen.noise();
    std::vector<Vec> warm_x, warm_y;
    warm_x.reserve(cfg.n0);
    warm_y.reserve(cfg.n0);
    for (int v = 0; v < cfg.n0; ++v) {
        warm_x.push_back(samples[static_cast<std::size_t>(v)].x);
        warm_y.push_back(samples[static_cast<std::size_t>(v)].y);
    }

    OutlierSolver solver;
    const bool robust = method.family != Family::Rls;
    if (robust)
        solver = OutlierSolver(noise, method.penalty, method.inner, method.budget,
                               method.rho_admm, method.beta_fmhsdm);

    const WarmStartResult warm =
        warm_start(warm_x, warm_y, noise, robust ? &solver : nullptr);

    TrialTrace trace;
    trace.method = method.name;
    trace.trial = trial_index;
    trace.nrmse.reserve(static_cast<std::size_t>(sc.horizon - cfg.n0));
    trace.step_time_ns.reserve(static_cast<std::size_t>(sc.horizon - cfg.n0));

    // Per-family state.
    RlsState rls;
    FilterEstimate ho;
    PowerState power;
    RunningCorrelations corrs;
    HoRlsConfig ho_cfg;
    if (method.family == Family::OrHoRls) {
        corrs = RunningCorrelations(sc.P, sc.L, cfg.gamma);
        for (int v = 0; v < cfg.n0; ++v)
            corrs.update(warm_x[static_cast<std::size_t>(v)],
                         warm_y[static_cast<std::size_t>(v)],
                         warm.o_hat[static_cast<std::size_t>(v)]);
        ho_cfg.alpha = method.alpha;
        ho_cfg.lambda_g = method.lambda_g;
        ho_cfg.eps_varpi = method.eps_varpi;
        ho_cfg.n0 = cfg.n0;
        ho_cfg.g_kind = method.g_kind;
        ho_cfg.penalty = method.penalty;
        ho_cfg.inner = method.inner;
        ho_cfg.budget = method.budget;
        ho_cfg.freeze_outliers_after = method.freeze_outliers_after;
        auto [st, pw] = horls_init(warm.F, corrs, noise, ho_cfg);
        ho = std::move(st);
        power = std::move(pw);
    } else {
        Mat S = Mat::Zero(sc.P, sc.P);
        for (int v = 0; v < cfg.n0; ++v) {
            const double w = std::pow(cfg.gamma, static_cast<double>(cfg.n0 - 1 - v));
            S.noalias() += w * (warm_x[static_cast<std::size_t>(v)] *
                                warm_x[static_cast<std::size_t>(v)].transpose());
        }
        Eigen::LLT<Mat> llt(S);
        if (llt.info() != Eigen::Success)
            llt.compute(S + (1e-10 * S.trace() / sc.P) * Mat::Identity(sc.P, sc.P));
        rls.F = warm.F;
        rls.Pmat = llt.solve(Mat::Identity(sc.P, sc.P));
        rls.Pmat = 0.5 * (rls.Pmat + rls.Pmat.transpose()).eval();
        rls.gamma = cfg.gamma;
    }

    using clock = std::chrono::steady_clock;
    for (long n = cfg.n0 + 1; n <= sc.horizon; ++n) {
        const Sample& s = samples[static_cast<std::size_t>(n - 1)];
        const clock::time_point t0 = clock::now();
        switch (method.family) {
            case Family::Rls:
                rls_step(rls, s.x, s.y);
                break;
            case Family::OrRls:
                or_rls_step(rls, s.x, s.y, solver);
                break;
            case Family::OrHoRls:
                horls_step(ho, power, corrs, s.x, s.y, noise, ho_cfg, solver);
                break;
        }
        const clock::time_point t1 = clock::now();

        const Mat& estimate = method.family == Family::OrHoRls ? ho.F : rls.F;
        if (!all_finite(estimate)) {
            trace.diverged = true;
            trace.diverged_at = n;
            break;
        }
        trace.nrmse.push_back(
            nrmse(estimate, systems[static_cast<std::size_t>(
                                sys_of_n[static_cast<std::size_t>(n - 1)])]));
        trace.step_time_ns.push_back(
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    }
    return trace;
}

struct MethodSummary {
    std::string method;
    std::vector<double> mean_nrmse;
    std::vector<double> std_nrmse;
    double mean_step_ns = 0.0;
    double std_step_ns = 0.0;
    int diverged_trials = 0;
};

struct ExperimentResult {
    std::vector<long> n_index;          // n0+1 .. horizon
    std::vector<TrialTrace> traces;     // method-major, trial-minor
    std::vector<MethodSummary> summary;
};

/// Single-threaded reduce over per-trial traces (trial order is irrelevant
/// to the result).
inline std::vector<MethodSummary> aggregate_traces(const std::vector<MethodSpec>& methods,
                                                   const std::vector<TrialTrace>& traces,
                                                   std::size_t trace_len) {
    std::vector<MethodSummary> out;
    for (const MethodSpec& m : methods) {
        MethodSummary s;
        s.method = m.name;
        s.mean_nrmse.assign(trace_len, 0.0);
        s.std_nrmse.assign(trace_len, 0.0);
        int used = 0;
        for (const TrialTrace& t : traces) {
            if (t.method != m.name) continue;
            if (t.diverged) {
                ++s.diverged_trials;
                continue;
            }
            for (std::size_t k = 0; k < trace_len; ++k) s.mean_nrmse[k] += t.nrmse[k];
            ++used;
        }
        if (used > 0)
            for (std::size_t k = 0; k < trace_len; ++k) s.mean_nrmse[k] /= used;
        else
            s.mean_nrmse.assign(trace_len, std::numeric_limits<double>::quiet_NaN());

        if (used > 1) {
            for (const TrialTrace& t : traces) {
                if (t.method != m.name || t.diverged) continue;
                for (std::size_t k = 0; k < trace_len; ++k) {
                    const double d = t.nrmse[k] - s.mean_nrmse[k];
                    s.std_nrmse[k] += d * d;
                }
            }
            for (std::size_t k = 0; k < trace_len; ++k)
                s.std_nrmse[k] = std::sqrt(s.std_nrmse[k] / (used - 1));
        }

        double sum = 0.0, sum2 = 0.0;
        std::size_t count = 0;
        for (const TrialTrace& t : traces) {
            if (t.method != m.name) continue;
            for (const std::int64_t ns : t.step_time_ns) {
                sum += static_cast<double>(ns);
                sum2 += static_cast<double>(ns) * static_cast<double>(ns);
                ++count;
            }
        }
        if (count > 0) {
            s.mean_step_ns = sum / static_cast<double>(count);
            if (count > 1) {
                const double var =
                    (sum2 - sum * sum / static_cast<double>(count)) /
                    static_cast<double>(count - 1);
                s.std_step_ns = var > 0.0 ? std::sqrt(var) : 0.0;
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

inline int thread_pool_size(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HORLS_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

inline void format_double(std::string& line, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    line += buf;
}

}  // namespace detail

inline void write_traces_csv(std::ostream& os, const std::vector<long>& n_index,
                             const std::vector<TrialTrace>& traces) {
    os << "method,trial,n,nrmse,step_time_ns\n";
    std::string line;
    for (const TrialTrace& t : traces) {
        for (std::size_t k = 0; k < t.nrmse.size(); ++k) {
            line.clear();
            line += t.method;
            line += ',';
            line += std::to_string(t.trial);
            line += ',';
            line += std::to_string(n_index[k]);
            line += ',';
            detail::format_double(line, t.nrmse[k]);
            line += ',';
            line += std::to_string(t.step_time_ns[k]);
            line += '\n';
            os << line;
        }
    }
}

inline void write_summary_csv(std::ostream& os, const std::vector<long>& n_index,
                              const std::vector<MethodSummary>& summary) {
    os << "method,n,mean_nrmse,std_nrmse\n";
    std::string line;
    for (const MethodSummary& s : summary) {
        for (std::size_t k = 0; k < s.mean_nrmse.size(); ++k) {
            line.clear();
            line += s.method;
            line += ',';
            line += std::to_string(n_index[k]);
            line += ',';
            detail::format_double(line, s.mean_nrmse[k]);
            line += ',';
            detail::format_double(line, s.std_nrmse[k]);
            line += '\n';
            os << line;
        }
    }
}

inline void write_timing_csv(std::ostream& os, const std::vector<MethodSummary>& summary) {
    os << "method,mean_step_time_ns,std_step_time_ns\n";
    std::string line;
    for (const MethodSummary& s : summary) {
        line.clear();
        line += s.method;
        line += ',';
        detail::format_double(line, s.mean_step_ns);
        line += ',';
        detail::format_double(line, s.std_step_ns);
        line += '\n';
        os << line;
    }
}

/// Run trials × methods (trials in parallel), aggregate, and optionally write
/// the three CSV artifacts into cfg.output_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int n_threads = 0) {
    cfg.validate();
    const std::size_t n_methods = cfg.methods.size();
    const std::size_t n_jobs = n_methods * static_cast<std::size_t>(cfg.trials);

    ExperimentResult result;
    result.traces.resize(n_jobs);
    for (long n = cfg.n0 + 1; n <= cfg.scenario.horizon; ++n) result.n_index.push_back(n);

    const int workers =
        std::max(1, std::min(thread_pool_size(n_threads), static_cast<int>(n_jobs)));
    std::atomic<std::size_t> next_job{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t job = next_job.fetch_add(1);
            if (job >= n_jobs) return;
            const std::size_t mi = job / static_cast<std::size_t>(cfg.trials);
            const int trial = static_cast<int>(job % static_cast<std::size_t>(cfg.trials));
            result.traces[job] = run_trial(cfg, cfg.methods[mi],
                                           trial_seed(cfg.scenario.seed, trial), trial);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    result.summary = aggregate_traces(cfg.methods, result.traces, result.n_index.size());

    if (!cfg.output_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(cfg.output_dir);
        const auto open = [&](const char* name) {
            std::ofstream f(fs::path(cfg.output_dir) / name, std::ios::binary);
            if (!f) throw std::runtime_error(std::string("cannot write ") + name + " in " +
                                             cfg.output_dir);
            return f;
        };
        auto tf = open("traces.csv");
        write_traces_csv(tf, result.n_index, result.traces);
        auto sf = open("summary.csv");
        write_summary_csv(sf, result.n_index, result.summary);
        auto mf = open("timing.csv");
        write_timing_csv(mf, result.summary);
    }
    return result;
}

}  // namespace horls
