#pragma once

#include "horls/bench.hpp"

#include <cctype>
#include <cstring>
#include <sstream>
#include <string>
#include <string_view>

namespace horls {

/// Parse/validation failure with the offending file and line in the message.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using ExperimentFile = ExperimentConfig;

// ---------------------------------------------------------------------------
// Presets encoding the four benchmark scenarios. The per-method lambdas were
// selected by the `tune` grid search on held-out seeds (see README).
// ---------------------------------------------------------------------------

namespace detail {

inline MethodSpec method_rls() {
    MethodSpec m;
    m.name = "RLS";
    m.family = Family::Rls;
    return m;
}

inline MethodSpec method_or_rls(const char* name, OutlierPenalty p, InnerSolver inner) {
    MethodSpec m;
    m.name = name;
    m.family = Family::OrRls;
    m.penalty = p;
    m.inner = inner;
    return m;
}

inline MethodSpec method_or_horls(const char* name, OutlierPenalty p, InnerSolver inner,
                                  GKind g = GKind::Zero, double lambda_g = 0.0) {
    MethodSpec m;
    m.name = name;
    m.family = Family::OrHoRls;
    m.penalty = p;
    m.inner = inner;
    m.g_kind = g;
    m.lambda_g = lambda_g;
    return m;
}

struct PresetLambdas {
    double or_admm, or_cd_l1, or_mcp, or_cd_mcp;
    double ho_admm, ho_gist, ho_fmhsdm;
};

inline std::vector<MethodSpec> full_roster(const PresetLambdas& v, GKind g = GKind::Zero,
                                           double lambda_g = 0.0) {
    return {
        method_rls(),
        method_or_rls("OR-RLS(ADMM)", OutlierPenalty::l1(v.or_admm), InnerSolver::Admm),
        method_or_rls("OR-RLS(CD-L1)", OutlierPenalty::l1(v.or_cd_l1), InnerSolver::Cd),
        method_or_rls("OR-RLS(MCP)", OutlierPenalty::mcp(v.or_mcp), InnerSolver::Gist),
        method_or_rls("OR-RLS(CD-MCP)", OutlierPenalty::mcp(v.or_cd_mcp), InnerSolver::Cd),
        method_or_horls("OR-HO-RLS(ADMM)", OutlierPenalty::l1(v.ho_admm), InnerSolver::Admm,
                        g, lambda_g),
        method_or_horls("OR-HO-RLS(GIST)", OutlierPenalty::mcp(v.ho_gist), InnerSolver::Gist,
                        g, lambda_g),
        method_or_horls("OR-HO-RLS(FMHSDM)", OutlierPenalty::l1(v.ho_fmhsdm),
                        InnerSolver::Fmhsdm, g, lambda_g),
    };
}

}  // namespace detail

inline std::vector<std::string> preset_names() { return {"fig1a", "fig1b", "fig1c", "fig1d"}; }

/// The four benchmark scenarios: dense 20dB/p_o 0.2, dense 10dB/p_o 0.1,
/// sparse 20dB/p_o 0.2 with g = l1, and the non-stationary dense scenario
/// with a system change at 2,500 and gamma = 0.97.
inline ExperimentFile make_preset(const std::string& name) {
    ExperimentFile f;
    f.trials = 20;
    f.gamma = 1.0;
    f.n0 = 500;
    f.scenario.horizon = 5000;
    if (name == "fig1a") {
        f.scenario.snr_db = 20.0;
        f.scenario.p_o = 0.2;
        f.methods = detail::full_roster({2.21, 2.21, 6.99, 6.99, 2.21, 6.99, 2.21});
    } else if (name == "fig1b") {
        f.scenario.snr_db = 10.0;
        f.scenario.p_o = 0.1;
        f.methods = detail::full_roster({0.699, 0.699, 2.21, 2.21, 0.699, 2.21, 0.699});
    } else if (name == "fig1c") {
        f.scenario.snr_db = 20.0;
        f.scenario.p_o = 0.2;
        f.scenario.system_kind = SystemKind::SparseOnes;
        f.methods = detail::full_roster({22.2, 22.2, 22.2, 22.2, 22.2, 22.2, 22.2},
                                        GKind::L1, 1e-3);
    } else if (name == "fig1d") {
        f.scenario.snr_db = 20.0;
        f.scenario.p_o = 0.2;
        f.scenario.change_at = 2500;
        f.gamma = 0.97;
        f.methods = detail::full_roster({2.21, 2.21, 6.99, 6.99, 2.21, 6.99, 2.21});
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return f;
}

// ---------------------------------------------------------------------------
// Strict sectioned key-value parser. Unknown keys and out-of-range values are
// hard errors carrying the file name and line number.
// ---------------------------------------------------------------------------

namespace detail {

struct ParseCtx {
    std::string file;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
    }
};

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline double parse_double(const ParseCtx& ctx, const std::string& key, std::string_view v) {
    char* end = nullptr;
    const std::string tmp(v);
    const double d = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || tmp.empty())
        ctx.fail("value of '" + key + "' is not a number: '" + tmp + "'");
    return d;
}

inline long parse_long(const ParseCtx& ctx, const std::string& key, std::string_view v) {
    char* end = nullptr;
    const std::string tmp(v);
    const long d = std::strtol(tmp.c_str(), &end, 10);
    if (end != tmp.c_str() + tmp.size() || tmp.empty())
        ctx.fail("value of '" + key + "' is not an integer: '" + tmp + "'");
    return d;
}

inline void check_range(const ParseCtx& ctx, bool ok, const std::string& key,
                        const char* constraint) {
    if (!ok) ctx.fail("value of '" + key + "' out of range: " + constraint);
}

}  // namespace detail

inline ExperimentFile parse_config_text(const std::string& text,
                                        const std::string& filename = "<config>") {
    detail::ParseCtx ctx{filename, 0};
    ExperimentFile f;          // starts from documented defaults
    bool preset_loaded = false;
    bool roster_replaced = false;
    enum class Section { Top, Scenario, Method } section = Section::Top;
    MethodSpec* cur_method = nullptr;

    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
        ++ctx.line;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') ctx.fail("malformed section header");
            const std::string_view name = detail::trim(line.substr(1, line.size() - 2));
            if (name == "scenario") {
                section = Section::Scenario;
            } else if (name == "method") {
                section = Section::Method;
                if (!roster_replaced) {
                    f.methods.clear();  // explicit roster replaces any preset roster
                    roster_replaced = true;
                }
                f.methods.emplace_back();
                cur_method = &f.methods.back();
            } else {
                ctx.fail("unknown section '[" + std::string(name) + "]'");
            }
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) ctx.fail("expected 'key = value'");
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view val = detail::trim(line.substr(eq + 1));
        if (key.empty()) ctx.fail("empty key");
        if (val.empty()) ctx.fail("empty value for '" + key + "'");
        const std::string v(val);

        switch (section) {
            case Section::Top: {
                if (key == "scenario") {
                    if (preset_loaded) ctx.fail("duplicate 'scenario' preset line");
                    ExperimentFile preset;
                    try {
                        preset = make_preset(v);
                    } catch (const ConfigError&) {
                        ctx.fail("unknown preset '" + v + "'");
                    }
                    // keep any top-level keys already parsed
                    preset.trials = f.trials;
                    preset.output_dir = f.output_dir;
                    preset.scenario.seed = f.scenario.seed;
                    f = std::move(preset);
                    preset_loaded = true;
                } else if (key == "trials") {
                    f.trials = static_cast<int>(detail::parse_long(ctx, key, val));
                    detail::check_range(ctx, f.trials >= 1, key, "trials >= 1");
                } else if (key == "seed") {
                    f.scenario.seed = static_cast<std::uint64_t>(detail::parse_long(ctx, key, val));
                } else if (key == "output_dir") {
                    f.output_dir = v;
                } else {
                    ctx.fail("unknown key '" + key + "' at top level");
                }
                break;
            }
            case Section::Scenario: {
                ScenarioConfig& sc = f.scenario;
                if (key == "P") {
                    sc.P = static_cast<int>(detail::parse_long(ctx, key, val));
                    detail::check_range(ctx, sc.P >= 1, key, "P >= 1");
                } else if (key == "L") {
                    sc.L = static_cast<int>(detail::parse_long(ctx, key, val));
                    detail::check_range(ctx, sc.L >= 1, key, "L >= 1");
                } else if (key == "snr_db") {
                    sc.snr_db = detail::parse_double(ctx, key, val);
                } else if (key == "p_o") {
                    sc.p_o = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, sc.p_o >= 0.0 && sc.p_o <= 1.0, key,
                                        "0 <= p_o <= 1");
                } else if (key == "system") {
                    if (v == "dense")
                        sc.system_kind = SystemKind::DenseGaussian;
                    else if (v == "sparse")
                        sc.system_kind = SystemKind::SparseOnes;
                    else
                        ctx.fail("value of 'system' must be 'dense' or 'sparse'");
                } else if (key == "sparse_fraction") {
                    sc.sparse_fraction = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, sc.sparse_fraction > 0.0 && sc.sparse_fraction <= 1.0,
                                        key, "0 < sparse_fraction <= 1");
                } else if (key == "change_at") {
                    if (v == "none")
                        sc.change_at.reset();
                    else {
                        sc.change_at = detail::parse_long(ctx, key, val);
                        detail::check_range(ctx, *sc.change_at >= 1, key, "change_at >= 1");
                    }
                } else if (key == "horizon") {
                    sc.horizon = detail::parse_long(ctx, key, val);
                    detail::check_range(ctx, sc.horizon >= 1, key, "horizon >= 1");
                } else if (key == "ar_smax") {
                    sc.ar_smax = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, sc.ar_smax >= 0.0 && sc.ar_smax < 1.0, key,
                                        "0 <= ar_smax < 1");
                } else if (key == "outlier_variance") {
                    sc.outlier_variance = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, sc.outlier_variance > 0.0, key,
                                        "outlier_variance > 0");
                } else if (key == "gamma") {
                    f.gamma = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, f.gamma > 0.0 && f.gamma <= 1.0, key,
                                        "0 < gamma <= 1");
                } else if (key == "n0") {
                    f.n0 = static_cast<int>(detail::parse_long(ctx, key, val));
                    detail::check_range(ctx, f.n0 >= 1, key, "n0 >= 1");
                } else {
                    ctx.fail("unknown key '" + key + "' in [scenario]");
                }
                break;
            }
            case Section::Method: {
                MethodSpec& m = *cur_method;
                if (key == "name") {
                    m.name = v;
                } else if (key == "family") {
                    if (v == "RLS")
                        m.family = Family::Rls;
                    else if (v == "OR-RLS")
                        m.family = Family::OrRls;
                    else if (v == "OR-HO-RLS")
                        m.family = Family::OrHoRls;
                    else
                        ctx.fail("value of 'family' must be RLS, OR-RLS or OR-HO-RLS");
                } else if (key == "penalty") {
                    if (v == "l1")
                        m.penalty.kind = PenaltyKind::L1;
                    else if (v == "mcp")
                        m.penalty.kind = PenaltyKind::Mcp;
                    else
                        ctx.fail("value of 'penalty' must be 'l1' or 'mcp'");
                } else if (key == "lambda") {
                    m.penalty.lambda = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.penalty.lambda > 0.0, key, "lambda > 0");
                } else if (key == "theta") {
                    m.penalty.theta = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.penalty.theta > 0.0, key, "theta > 0");
                } else if (key == "inner") {
                    if (v == "admm")
                        m.inner = InnerSolver::Admm;
                    else if (v == "fmhsdm")
                        m.inner = InnerSolver::Fmhsdm;
                    else if (v == "gist")
                        m.inner = InnerSolver::Gist;
                    else if (v == "cd")
                        m.inner = InnerSolver::Cd;
                    else
                        ctx.fail("value of 'inner' must be admm, fmhsdm, gist or cd");
                } else if (key == "g") {
                    if (v == "zero")
                        m.g_kind = GKind::Zero;
                    else if (v == "l1")
                        m.g_kind = GKind::L1;
                    else
                        ctx.fail("value of 'g' must be 'zero' or 'l1'");
                } else if (key == "lambda_g") {
                    m.lambda_g = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.lambda_g >= 0.0, key, "lambda_g >= 0");
                } else if (key == "alpha") {
                    m.alpha = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.alpha >= 0.5 && m.alpha <= 1.0, key,
                                        "0.5 <= alpha <= 1");
                } else if (key == "eps_varpi") {
                    m.eps_varpi = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.eps_varpi > 0.0, key, "eps_varpi > 0");
                } else if (key == "max_iters") {
                    m.budget.max_iters = static_cast<int>(detail::parse_long(ctx, key, val));
                    detail::check_range(ctx, m.budget.max_iters >= 1, key, "max_iters >= 1");
                } else if (key == "tol") {
                    m.budget.tol = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.budget.tol >= 0.0, key, "tol >= 0");
                } else if (key == "rho_admm") {
                    m.rho_admm = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.rho_admm > 0.0, key, "rho_admm > 0");
                } else if (key == "beta") {
                    m.beta_fmhsdm = detail::parse_double(ctx, key, val);
                    detail::check_range(ctx, m.beta_fmhsdm > 0.0 && m.beta_fmhsdm <= 1.0, key,
                                        "0 < beta <= 1");
                } else if (key == "freeze_outliers_after") {
                    if (v == "none")
                        m.freeze_outliers_after.reset();
                    else {
                        m.freeze_outliers_after = detail::parse_long(ctx, key, val);
                        detail::check_range(ctx, *m.freeze_outliers_after >= 1, key,
                                            "freeze_outliers_after >= 1");
                    }
                } else {
                    ctx.fail("unknown key '" + key + "' in [method]");
                }
                break;
            }
        }
    }

    try {
        f.validate();
    } catch (const std::exception& e) {
        throw ConfigError(filename + ": " + e.what());
    }
    return f;
}

inline ExperimentFile parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Canonical writer; parse(write(parse(f))) == parse(f).
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string write_config(const ExperimentFile& f) {
    std::ostringstream os;
    os << "trials = " << f.trials << "\n";
    os << "seed = " << f.scenario.seed << "\n";
    if (!f.output_dir.empty()) os << "output_dir = " << f.output_dir << "\n";
    os << "\n[scenario]\n";
    os << "P = " << f.scenario.P << "\n";
    os << "L = " << f.scenario.L << "\n";
    os << "snr_db = " << detail::fmt_g(f.scenario.snr_db) << "\n";
    os << "p_o = " << detail::fmt_g(f.scenario.p_o) << "\n";
    os << "system = "
       << (f.scenario.system_kind == SystemKind::DenseGaussian ? "dense" : "sparse") << "\n";
    if (f.scenario.system_kind == SystemKind::SparseOnes)
        os << "sparse_fraction = " << detail::fmt_g(f.scenario.sparse_fraction) << "\n";
    if (f.scenario.change_at) os << "change_at = " << *f.scenario.change_at << "\n";
    os << "horizon = " << f.scenario.horizon << "\n";
    os << "ar_smax = " << detail::fmt_g(f.scenario.ar_smax) << "\n";
    os << "outlier_variance = " << detail::fmt_g(f.scenario.outlier_variance) << "\n";
    os << "gamma = " << detail::fmt_g(f.gamma) << "\n";
    os << "n0 = " << f.n0 << "\n";

    for (const MethodSpec& m : f.methods) {
        os << "\n[method]\n";
        os << "name = " << m.name << "\n";
        os << "family = "
           << (m.family == Family::Rls ? "RLS"
                                       : m.family == Family::OrRls ? "OR-RLS" : "OR-HO-RLS")
           << "\n";
        if (m.family == Family::Rls) continue;
        os << "penalty = " << (m.penalty.kind == PenaltyKind::L1 ? "l1" : "mcp") << "\n";
        os << "lambda = " << detail::fmt_g(m.penalty.lambda) << "\n";
        if (m.penalty.kind == PenaltyKind::Mcp)
            os << "theta = " << detail::fmt_g(m.penalty.theta) << "\n";
        const char* inner = m.inner == InnerSolver::Admm     ? "admm"
                            : m.inner == InnerSolver::Fmhsdm ? "fmhsdm"
                            : m.inner == InnerSolver::Gist   ? "gist"
                                                             : "cd";
        os << "inner = " << inner << "\n";
        os << "max_iters = " << m.budget.max_iters << "\n";
        if (m.budget.tol != 0.0) os << "tol = " << detail::fmt_g(m.budget.tol) << "\n";
        if (m.inner == InnerSolver::Admm)
            os << "rho_admm = " << detail::fmt_g(m.rho_admm) << "\n";
        if (m.inner == InnerSolver::Fmhsdm)
            os << "beta = " << detail::fmt_g(m.beta_fmhsdm) << "\n";
        if (m.family == Family::OrHoRls) {
            os << "g = " << (m.g_kind == GKind::Zero ? "zero" : "l1") << "\n";
            if (m.g_kind == GKind::L1 || m.lambda_g != 0.0)
                os << "lambda_g = " << detail::fmt_g(m.lambda_g) << "\n";
            os << "alpha = " << detail::fmt_g(m.alpha) << "\n";
            os << "eps_varpi = " << detail::fmt_g(m.eps_varpi) << "\n";
            if (m.freeze_outliers_after)
                os << "freeze_outliers_after = " << *m.freeze_outliers_after << "\n";
        }
    }
    return os.str();
}

}  // namespace horls
