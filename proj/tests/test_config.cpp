#include "horls/config.hpp"

#include <catch2/catch.hpp>

using namespace horls;

TEST_CASE("a minimal preset line populates the full fig1a experiment", "[config]") {
    const ExperimentFile f = parse_config_text("scenario = fig1a\n");
    CHECK(f.scenario.P == 20);
    CHECK(f.scenario.L == 10);
    CHECK(f.scenario.snr_db == 20.0);
    CHECK(f.scenario.p_o == 0.2);
    CHECK(f.scenario.system_kind == SystemKind::DenseGaussian);
    CHECK(f.scenario.horizon == 5000);
    CHECK(f.scenario.ar_smax == 0.95);
    CHECK(f.scenario.outlier_variance == 1e4);
    CHECK(f.gamma == 1.0);
    CHECK(f.n0 == 500);
    REQUIRE(f.methods.size() == 8);
    CHECK(f.methods[0].name == "RLS");
    CHECK(f.methods[7].name == "OR-HO-RLS(FMHSDM)");
    for (const MethodSpec& m : f.methods) {
        if (m.family != Family::OrHoRls) continue;
        CHECK(m.alpha == 0.5);
        CHECK(m.eps_varpi == 5e-2);
        CHECK(m.budget.max_iters == 100);
    }
}

TEST_CASE("presets encode the four scenarios", "[config]") {
    const ExperimentFile b = make_preset("fig1b");
    CHECK(b.scenario.snr_db == 10.0);
    CHECK(b.scenario.p_o == 0.1);
    CHECK(b.gamma == 1.0);

    const ExperimentFile c = make_preset("fig1c");
    CHECK(c.scenario.system_kind == SystemKind::SparseOnes);
    CHECK(c.scenario.snr_db == 20.0);
    CHECK(c.scenario.p_o == 0.2);
    for (const MethodSpec& m : c.methods)
        if (m.family == Family::OrHoRls) CHECK(m.g_kind == GKind::L1);

    const ExperimentFile d = make_preset("fig1d");
    REQUIRE(d.scenario.change_at.has_value());
    CHECK(*d.scenario.change_at == 2500);
    CHECK(d.gamma == 0.97);

    CHECK_THROWS_AS(make_preset("fig1e"), ConfigError);
}

TEST_CASE("range violations point at the offending line", "[config]") {
    const std::string text = "scenario = fig1a\n\n[scenario]\np_o = 1.5\n";
    try {
        parse_config_text(text, "exp.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("exp.cfg:4") != std::string::npos);
        CHECK(msg.find("p_o") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected with their line number", "[config]") {
    const std::string text = "scenario = fig1a\n[method]\nname = X\nfamily = OR-RLS\n"
                             "lambda_typo = 3\n";
    try {
        parse_config_text(text, "exp.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("exp.cfg:5") != std::string::npos);
        CHECK(msg.find("lambda_typo") != std::string::npos);
    }
}

TEST_CASE("malformed lines and sections are rejected", "[config]") {
    CHECK_THROWS_AS(parse_config_text("p_o 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[scenario\np_o = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[mystery]\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("scenario = nope\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("trials = many\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("explicit method sections replace the preset roster", "[config]") {
    const std::string text =
        "scenario = fig1a\n"
        "trials = 3\n"
        "[method]\n"
        "name = only\n"
        "family = OR-RLS\n"
        "penalty = mcp\n"
        "lambda = 2.5\n"
        "theta = 5\n"
        "inner = cd\n";
    const ExperimentFile f = parse_config_text(text);
    REQUIRE(f.methods.size() == 1);
    CHECK(f.methods[0].name == "only");
    CHECK(f.methods[0].family == Family::OrRls);
    CHECK(f.methods[0].penalty.kind == PenaltyKind::Mcp);
    CHECK(f.methods[0].penalty.lambda == 2.5);
    CHECK(f.methods[0].penalty.theta == 5.0);
    CHECK(f.methods[0].inner == InnerSolver::Cd);
    CHECK(f.trials == 3);
}

TEST_CASE("comments, blanks and overrides parse as documented", "[config]") {
    const std::string text =
        "# experiment\n"
        "scenario = fig1d   # preset first\n"
        "seed = 42\n"
        "\n"
        "[scenario]\n"
        "horizon = 1000   # shorter run\n"
        "change_at = 600\n"
        "gamma = 0.9\n";
    const ExperimentFile f = parse_config_text(text);
    CHECK(f.scenario.seed == 42);
    CHECK(f.scenario.horizon == 1000);
    CHECK(*f.scenario.change_at == 600);
    CHECK(f.gamma == 0.9);
    CHECK(f.methods.size() == 8);
}

TEST_CASE("write/parse round trip is the identity", "[config]") {
    for (const std::string& preset : preset_names()) {
        const ExperimentFile f = parse_config_text("scenario = " + preset + "\n");
        const std::string text1 = write_config(f);
        const ExperimentFile g = parse_config_text(text1);
        const std::string text2 = write_config(g);
        REQUIRE(text1 == text2);
    }

    const std::string custom =
        "trials = 5\n"
        "seed = 9\n"
        "output_dir = results\n"
        "[scenario]\n"
        "P = 6\n"
        "L = 4\n"
        "snr_db = 15\n"
        "p_o = 0.05\n"
        "system = sparse\n"
        "sparse_fraction = 0.25\n"
        "horizon = 900\n"
        "n0 = 60\n"
        "gamma = 0.99\n"
        "[method]\n"
        "name = M\n"
        "family = OR-HO-RLS\n"
        "penalty = l1\n"
        "lambda = 0.75\n"
        "inner = fmhsdm\n"
        "beta = 0.8\n"
        "g = l1\n"
        "lambda_g = 0.001\n"
        "alpha = 0.6\n"
        "eps_varpi = 0.02\n"
        "max_iters = 60\n"
        "tol = 1e-9\n"
        "freeze_outliers_after = 700\n";
    const ExperimentFile f = parse_config_text(custom);
    const std::string text1 = write_config(f);
    const ExperimentFile g = parse_config_text(text1);
    REQUIRE(write_config(g) == text1);
    CHECK(g.methods[0].beta_fmhsdm == 0.8);
    CHECK(g.methods[0].budget.tol == 1e-9);
    CHECK(*g.methods[0].freeze_outliers_after == 700);
}
