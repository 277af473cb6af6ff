// Command-line front end: run benchmark experiments, reshape summaries into
// plot-ready data files, and grid-search per-method lambdas.

#include "CLI11.hpp"
#include "horls/horls.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace horls;

struct CommonOpts {
    std::string config_path;
    std::string preset;
    int trials = -1;
    long long seed = -1;
    std::string output_dir;
    std::vector<std::string> methods;
    int threads = 0;
};

ExperimentFile load_experiment(const CommonOpts& opts) {
    ExperimentFile f;
    if (!opts.config_path.empty())
        f = parse_config(opts.config_path);
    else if (!opts.preset.empty())
        f = make_preset(opts.preset);
    else
        throw ConfigError("either --config or --preset is required");

    if (opts.trials > 0) f.trials = opts.trials;
    if (opts.seed >= 0) f.scenario.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.output_dir.empty()) f.output_dir = opts.output_dir;
    if (f.output_dir.empty()) f.output_dir = "out";

    if (!opts.methods.empty()) {
        std::vector<MethodSpec> filtered;
        for (const std::string& want : opts.methods) {
            const auto it = std::find_if(f.methods.begin(), f.methods.end(),
                                         [&](const MethodSpec& m) { return m.name == want; });
            if (it == f.methods.end())
                throw ConfigError("--methods: no method named '" + want + "'");
            filtered.push_back(*it);
        }
        f.methods = std::move(filtered);
    }
    return f;
}

int cmd_run(const CommonOpts& opts, bool strict, const std::string& dump_stream_path) {
    const ExperimentFile f = load_experiment(opts);

    if (!dump_stream_path.empty()) {
        ScenarioConfig sc = f.scenario;
        sc.seed = trial_seed(f.scenario.seed, 0);
        Generator gen(sc);
        std::vector<Sample> samples;
        for (long n = 1; n <= sc.horizon; ++n) samples.push_back(gen.next());
        std::ofstream out(dump_stream_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write stream dump '" + dump_stream_path + "'");
        dump_stream(out, samples);
    }

    const ExperimentResult result = run_experiment(f, opts.threads);

    int diverged = 0;
    for (const MethodSummary& s : result.summary) {
        const double fin = s.mean_nrmse.empty() ? std::nan("") : s.mean_nrmse.back();
        std::printf("%-22s final mean NRMSE = %-12.6g", s.method.c_str(), fin);
        if (s.diverged_trials > 0) {
            std::printf("  [%d/%d trials diverged]", s.diverged_trials, f.trials);
            diverged += s.diverged_trials;
        }
        std::printf("\n");
    }
    std::printf("results written to %s\n", f.output_dir.c_str());
    return (strict && diverged > 0) ? 3 : 0;
}

struct SummaryTable {
    std::vector<long> n;
    std::vector<std::string> methods;                 // first-appearance order
    std::map<std::string, std::vector<double>> mean;  // method -> trace
};

SummaryTable read_summary_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open summary CSV '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("method,n,mean_nrmse", 0) != 0)
        throw std::runtime_error("'" + path + "' is not a summary CSV");
    SummaryTable t;
    bool first_method_done = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string method, n_s, mean_s, std_s;
        std::getline(ls, method, ',');
        std::getline(ls, n_s, ',');
        std::getline(ls, mean_s, ',');
        std::getline(ls, std_s, ',');
        if (t.mean.find(method) == t.mean.end()) {
            t.methods.push_back(method);
            if (!t.n.empty()) first_method_done = true;
        }
        if (!first_method_done) t.n.push_back(std::stol(n_s));
        t.mean[method].push_back(std::stod(mean_s));
    }
    if (t.methods.empty() || t.n.empty())
        throw std::runtime_error("summary CSV '" + path + "' contains no data rows");
    return t;
}

int cmd_plotdata(const std::string& summary_path, const std::string& out_path,
                 const std::vector<std::string>& methods) {
    SummaryTable t = read_summary_csv(summary_path);

    std::vector<std::string> cols = methods.empty() ? t.methods : methods;
    for (const std::string& m : cols)
        if (t.mean.find(m) == t.mean.end())
            throw std::runtime_error("no method named '" + m + "' in " + summary_path);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
    out << "n";
    for (const std::string& m : cols) out << ',' << m;
    out << '\n';
    char buf[40];
    for (std::size_t k = 0; k < t.n.size(); ++k) {
        out << t.n[k];
        for (const std::string& m : cols) {
            std::snprintf(buf, sizeof(buf), "%.17g", t.mean[m][k]);
            out << ',' << buf;
        }
        out << '\n';
    }
    std::printf("wrote %s (%zu rows, %zu methods)\n", out_path.c_str(), t.n.size(),
                cols.size());
    return 0;
}

// Anchor the lambda grid at 3x the typical standard deviation of a weighted
// noise-only residual entry, i.e. 3*sqrt(tr(W)/L): entries of W r have
// variance [W R_vv W]_ii = W_ii for r ~ N(0, R_vv).
double lambda_anchor(const ScenarioConfig& sc) {
    ScenarioConfig probe = sc;
    probe.seed = trial_seed(sc.seed, 0);
    Generator gen(probe);
    const NoiseModel& nm = gen.noise();
    return 3.0 * std::sqrt(nm.W.trace() / nm.L());
}

int cmd_tune(const CommonOpts& opts, int tune_trials, long tune_horizon,
             const std::string& out_path, const std::string& write_config_path) {
    ExperimentFile f = load_experiment(opts);
    ExperimentFile tune_cfg = f;
    tune_cfg.trials = tune_trials;
    tune_cfg.output_dir.clear();
    if (tune_horizon > 0) tune_cfg.scenario.horizon = tune_horizon;
    // Held-out seed block, disjoint from the evaluation seeds.
    tune_cfg.scenario.seed = splitmix64(f.scenario.seed ^ 0x71e5eedull);

    const double anchor = lambda_anchor(tune_cfg.scenario);
    std::vector<double> grid;
    for (int k = -3; k <= 3; ++k) grid.push_back(anchor * std::pow(10.0, 0.5 * k));

    std::ofstream out;
    if (!out_path.empty()) {
        out.open(out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        out << "method,lambda,mean_final_nrmse,selected\n";
    }

    for (MethodSpec& m : f.methods) {
        if (m.family == Family::Rls) continue;
        double best_lambda = m.penalty.lambda;
        double best_score = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, double>> scores;
        for (const double lam : grid) {
            ExperimentConfig one = tune_cfg;
            MethodSpec probe = m;
            probe.penalty.lambda = lam;
            one.methods = {probe};
            const ExperimentResult res = run_experiment(one, opts.threads);
            const MethodSummary& s = res.summary.front();
            const double score = (s.diverged_trials == tune_cfg.trials || s.mean_nrmse.empty())
                                     ? std::numeric_limits<double>::infinity()
                                     : s.mean_nrmse.back();
            scores.emplace_back(lam, score);
            if (score < best_score) {
                best_score = score;
                best_lambda = lam;
            }
            std::printf("%-22s lambda=%-10.4g mean final NRMSE=%.6g\n", m.name.c_str(), lam,
                        score);
        }
        m.penalty.lambda = best_lambda;
        std::printf("%-22s selected lambda=%.6g\n", m.name.c_str(), best_lambda);
        if (out)
            for (const auto& [lam, score] : scores)
                out << m.name << ',' << lam << ',' << score << ','
                    << (lam == best_lambda ? 1 : 0) << '\n';
    }

    if (!write_config_path.empty()) {
        std::ofstream cf(write_config_path, std::ios::binary);
        if (!cf) throw std::runtime_error("cannot write '" + write_config_path + "'");
        cf << write_config(f);
        std::printf("tuned config written to %s\n", write_config_path.c_str());
    }

    // Evaluate the tuned roster on the fresh (standard) seed block.
    std::printf("evaluation on fresh seeds:\n");
    ExperimentFile eval = f;
    eval.output_dir.clear();
    const ExperimentResult res = run_experiment(eval, opts.threads);
    for (const MethodSummary& s : res.summary)
        std::printf("%-22s final mean NRMSE = %.6g\n", s.method.c_str(),
                    s.mean_nrmse.empty() ? std::nan("") : s.mean_nrmse.back());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"outlier-robust recursive least squares benchmark"};
    app.require_subcommand(1);

    CommonOpts opts;
    bool strict = false;
    std::string dump_stream_path;

    CLI::App* run = app.add_subcommand("run", "run an experiment and write CSV results");
    run->add_option("--config", opts.config_path, "experiment config file");
    run->add_option("--preset", opts.preset, "built-in scenario preset (fig1a..fig1d)");
    run->add_option("--trials", opts.trials, "number of Monte Carlo trials");
    run->add_option("--seed", opts.seed, "master seed");
    run->add_option("--output-dir", opts.output_dir, "directory for CSV outputs");
    run->add_option("--methods", opts.methods, "comma-separated method subset")
        ->delimiter(',');
    run->add_option("--threads", opts.threads,
                    "trial pool size (default: HORLS_THREADS or hardware)");
    run->add_flag("--strict", strict, "exit nonzero if any trial diverged");
    run->add_option("--dump-stream", dump_stream_path,
                    "write the first trial's generated stream to this file");

    std::string summary_path = "out/summary.csv";
    std::string plot_out = "plotdata.csv";
    std::vector<std::string> plot_methods;
    CLI::App* plot = app.add_subcommand("plotdata", "reshape a summary CSV for plotting");
    plot->add_option("--summary", summary_path, "summary.csv produced by run");
    plot->add_option("--out", plot_out, "output data file");
    plot->add_option("--methods", plot_methods, "comma-separated method subset")
        ->delimiter(',');

    int tune_trials = 3;
    long tune_horizon = 0;
    std::string tune_out = "tuned.csv";
    std::string tune_write_config;
    CLI::App* tune = app.add_subcommand("tune", "grid-search per-method lambda");
    tune->add_option("--config", opts.config_path, "experiment config file");
    tune->add_option("--preset", opts.preset, "built-in scenario preset");
    tune->add_option("--trials", tune_trials, "held-out trials per grid point");
    tune->add_option("--horizon", tune_horizon, "override horizon during tuning");
    tune->add_option("--seed", opts.seed, "master seed");
    tune->add_option("--threads", opts.threads, "trial pool size");
    tune->add_option("--out", tune_out, "grid scores CSV");
    tune->add_option("--write-config", tune_write_config, "write tuned config here");
    tune->add_option("--methods", opts.methods, "comma-separated method subset")
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(opts, strict, dump_stream_path);
        if (plot->parsed()) return cmd_plotdata(summary_path, plot_out, plot_methods);
        if (tune->parsed())
            return cmd_tune(opts, tune_trials, tune_horizon, tune_out, tune_write_config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
