#include "horls/penalty.hpp"

#include "test_util.hpp"

#include <catch2/catch.hpp>

using namespace horls;
using namespace testutil;

TEST_CASE("penalty_value for l1 and MCP", "[penalty]") {
    Vec o(2);
    o << 1, -3;
    CHECK(penalty_value(OutlierPenalty::l1(2.0), o) == Approx(8.0));

    // mcp(0.5; 1, 2) = 0.5 - 0.25/4 = 0.4375, saturation at theta*lambda^2/2 = 1
    CHECK(mcp_value(0.5, 1.0, 2.0) == Approx(0.4375));
    CHECK(mcp_value(10.0, 1.0, 2.0) == Approx(1.0));
    CHECK(mcp_value(-10.0, 1.0, 2.0) == Approx(1.0));

    Vec t(1);
    t << 0.5;
    CHECK(penalty_value(OutlierPenalty::mcp(1.0, 2.0), t) == Approx(0.4375));
}

TEST_CASE("mcp_value equals the integral of its derivative", "[penalty]") {
    // d/dt mcp(t) = lambda - t/theta on [0, theta*lambda], 0 beyond; integrate
    // numerically and compare.
    const double lambda = 1.3, theta = 3.0;
    for (const double t : {0.3, 1.0, 2.5, theta * lambda, 7.0}) {
        const int steps = 200000;
        double acc = 0.0;
        const double upper = std::min(t, theta * lambda);
        const double h = upper / steps;
        for (int k = 0; k < steps; ++k) {
            const double u = (k + 0.5) * h;
            acc += (lambda - u / theta) * h;
        }
        CHECK(mcp_value(t, lambda, theta) == Approx(acc).epsilon(1e-6));
    }
}

TEST_CASE("soft_threshold against the grid-minimization oracle", "[penalty]") {
    // prox of tau|.|: argmin 0.5(x-t)^2 + tau|x|
    const auto oracle = [](double t, double tau) {
        return grid_argmin([&](double x) { return 0.5 * (x - t) * (x - t) + tau * std::abs(x); },
                           -2.0 * std::abs(t) - 2.0 * tau - 1.0,
                           2.0 * std::abs(t) + 2.0 * tau + 1.0, 1e-4);
    };
    CHECK(soft_threshold(3.0, 1.0) == Approx(2.0));
    CHECK(oracle(3.0, 1.0) == Approx(2.0).margin(2e-4));
    CHECK(soft_threshold(0.5, 1.0) == 0.0);
    CHECK(oracle(0.5, 1.0) == Approx(0.0).margin(2e-4));
    CHECK(soft_threshold(-2.5, 1.0) == Approx(-1.5));
    CHECK(soft_threshold(1.25, 0.0) == Approx(1.25));  // tau = 0 is the identity

    auto g = rng(99);
    std::uniform_real_distribution<double> ts(-4.0, 4.0), taus(0.0, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double t = ts(g), tau = taus(g);
        CHECK(std::abs(soft_threshold(t, tau) - oracle(t, tau)) <= 2e-4);
    }
}

TEST_CASE("mcp_threshold regions and grid oracle", "[penalty]") {
    // argmin 0.5*c*(x-t)^2 + mcp(x; lambda, theta)
    const auto objective = [](double x, double t, double lambda, double theta, double c) {
        return 0.5 * c * (x - t) * (x - t) + mcp_value(x, lambda, theta);
    };
    const auto oracle = [&](double t, double lambda, double theta, double c) {
        const double span = 2.0 * std::abs(t) + 2.0 * theta * lambda + 1.0;
        return grid_argmin([&](double x) { return objective(x, t, lambda, theta, c); }, -span,
                           span, 1e-4);
    };

    CHECK(mcp_threshold(0.2, 1.0, 4.0, 1.0) == 0.0);               // |t| <= lambda/c
    CHECK(mcp_threshold(5.0, 1.0, 4.0, 1.0) == Approx(5.0));       // pass-through
    CHECK(mcp_threshold(2.0, 1.0, 4.0, 1.0) == Approx(4.0 / 3.0));  // interpolation
    CHECK(oracle(5.0, 1.0, 4.0, 1.0) == Approx(5.0).margin(2e-4));
    CHECK(oracle(2.0, 1.0, 4.0, 1.0) == Approx(4.0 / 3.0).margin(2e-4));

    CHECK_THROWS_AS(mcp_threshold(1.0, 1.0, 0.5, 1.0), std::invalid_argument);  // c*theta <= 1

    auto g = rng(123);
    std::uniform_real_distribution<double> ts(-6.0, 6.0), cs(0.6, 3.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double t = ts(g), c = cs(g);
        const double lambda = 1.0, theta = 4.0;
        CHECK(std::abs(mcp_threshold(t, lambda, theta, c) - oracle(t, lambda, theta, c)) <=
              2e-4);
    }
}

TEST_CASE("prox_l1_mat thresholds entrywise", "[penalty]") {
    Mat F(2, 2);
    F << 3, -0.5, 0, 1.5;
    CHECK((prox_l1_mat(F, 0.0) - F).norm() == 0.0);  // lambda_g = 0 is the identity

    const Mat P = prox_l1_mat(F, 1.0);
    CHECK(P(0, 0) == Approx(2.0));
    CHECK(P(0, 1) == 0.0);
    CHECK(P(1, 0) == 0.0);
    CHECK(P(1, 1) == Approx(0.5));

    CHECK(prox_l1_mat(Mat::Zero(3, 2), 2.0).norm() == 0.0);
}
