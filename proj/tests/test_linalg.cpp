#include "horls/correlations.hpp"
#include "horls/linalg.hpp"
#include "horls/noise.hpp"

#include "test_util.hpp"

#include <catch2/catch.hpp>

using namespace horls;
using namespace testutil;

TEST_CASE("weighted_sq_norm basics", "[linalg]") {
    const Mat I2 = Mat::Identity(2, 2);
    CHECK(weighted_sq_norm(Vec::Zero(4), Mat::Identity(4, 4)) == 0.0);
    CHECK(weighted_sq_norm(Vec::Ones(2), I2) == Approx(2.0));

    Mat W(2, 2);
    W << 2, 0, 0, 3;
    Vec a(2);
    a << 1, 2;
    // hand expansion of the quadratic form: 1*2*1 + 2*3*2 = 14
    CHECK(weighted_sq_norm(a, W) == Approx(14.0));

    CHECK_THROWS_AS(weighted_sq_norm(Vec::Ones(3), I2), std::invalid_argument);
}

TEST_CASE("weighted_sq_norm dominates the scaled Euclidean norm", "[linalg]") {
    auto g = rng(42);
    for (int rep = 0; rep < 20; ++rep) {
        const Mat R_vv = random_spd(5, g);
        const NoiseModel nm(R_vv);
        const Vec a = random_vec(5, g, 2.0);
        const double bound = a.squaredNorm() / eig_max(R_vv);
        CHECK(weighted_sq_norm(a, nm.W) >= bound * (1.0 - 1e-9));
    }
}

TEST_CASE("corr_update single-sample and two-sample sums", "[linalg]") {
    RunningCorrelations c(4, 2, 1.0);
    Vec e1 = Vec::Zero(4), e2 = Vec::Zero(4);
    e1[0] = 1.0;
    e2[1] = 1.0;
    const Vec y = Vec::Zero(2), o = Vec::Zero(2);

    c.update(e1, y, o);
    CHECK(c.Gamma == Approx(1.0));
    CHECK((c.R_xx - e1 * e1.transpose()).norm() == Approx(0.0).margin(1e-15));

    c.update(e2, y, o);
    Mat expect = Mat::Zero(4, 4);
    expect(0, 0) = 0.5;
    expect(1, 1) = 0.5;
    CHECK((c.R_xx - expect).norm() == Approx(0.0).margin(1e-14));
}

TEST_CASE("corr_update scalar forgetting-factor recursion", "[linalg]") {
    RunningCorrelations c(1, 1, 0.5);
    Vec a1(1), a2(1);
    a1 << 1.0;
    a2 << 2.0;
    c.update(a1, a1, a1);
    c.update(a2, a2, a2);
    // definitional sum: (0.5*1 + 4) / (0.5 + 1) = 3
    CHECK(c.R_xx(0, 0) == Approx(3.0));
    CHECK(c.Gamma == Approx(1.5));
}

TEST_CASE("corr_update matches the definitional sum", "[linalg]") {
    auto g = rng(7);
    for (const double gamma : {1.0, 0.9, 0.5}) {
        RunningCorrelations c(3, 2, gamma);
        std::vector<Vec> xs, ys, os;
        for (int n = 0; n < 100; ++n) {
            xs.push_back(random_vec(3, g));
            ys.push_back(random_vec(2, g));
            os.push_back(random_vec(2, g));
            c.update(xs.back(), ys.back(), os.back());

            double gamma_sum = 0.0;
            const Mat rxx = defsum_corr(xs, xs, gamma, &gamma_sum);
            const Mat ryx = defsum_corr(ys, xs, gamma);
            const Mat rox = defsum_corr(os, xs, gamma);
            REQUIRE((c.R_xx - rxx).norm() <= 1e-10 * std::max(1.0, rxx.norm()));
            REQUIRE((c.R_yx - ryx).norm() <= 1e-10 * std::max(1.0, ryx.norm()));
            REQUIRE((c.R_ox - rox).norm() <= 1e-10 * std::max(1.0, rox.norm()));
            REQUIRE(c.Gamma == Approx(gamma_sum).epsilon(1e-12));
        }
        // symmetry of the accumulated input correlation
        CHECK((c.R_xx - c.R_xx.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("power_step identity, hand oracle and degenerate input", "[linalg]") {
    const Mat I3 = Mat::Identity(3, 3);
    PowerState s{Vec::Ones(3).normalized(), 0.0};

    const PowerState s1 = power_step(s, I3);
    CHECK((s1.p - s.p).norm() == Approx(0.0).margin(1e-15));
    CHECK(s1.estimate == Approx(1.0));

    Mat D(2, 2);
    D << 2, 0, 0, 1;
    PowerState t{Vec::Ones(2).normalized(), 0.0};
    const PowerState t1 = power_step(t, D);
    Vec expect(2);
    expect << 2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0);
    CHECK((t1.p - expect).norm() == Approx(0.0).margin(1e-14));
    CHECK(t1.estimate == Approx(1.8));

    const PowerState z = power_step(t, Mat::Zero(2, 2));
    CHECK((z.p - t.p).norm() == 0.0);
    CHECK(z.estimate == 0.0);
}

TEST_CASE("power_step iterates are monotone and converge to the top eigenvalue",
          "[linalg]") {
    auto g = rng(11);
    const Mat M = random_spd(6, g);
    const double top = eig_max(M);  // dense eigensolver as the oracle
    CHECK(spectral_norm(M, 1e-10) == Approx(top).epsilon(1e-8));

    PowerState s{Vec::Ones(6).normalized(), 0.0};
    double prev = 0.0;
    for (int k = 0; k < 200; ++k) {
        s = power_step(s, M);
        CHECK(s.estimate >= prev - 1e-12 * std::max(1.0, prev));
        CHECK(s.estimate <= top * (1.0 + 1e-12));
        prev = s.estimate;
    }
    CHECK(s.estimate == Approx(top).epsilon(1e-9));
}

TEST_CASE("spectral_norm closed-form cases", "[linalg]") {
    CHECK(spectral_norm(Mat::Identity(5, 5), 1e-10) == Approx(1.0));

    Mat D = Mat::Zero(3, 3);
    D(0, 0) = 5.0;
    D(1, 1) = 1.0;
    D(2, 2) = 0.1;
    CHECK(spectral_norm(D, 1e-10) == Approx(5.0).epsilon(1e-9));

    Mat S(2, 2);
    S << 2, 1, 1, 2;
    CHECK(spectral_norm(S, 1e-10) == Approx(3.0).epsilon(1e-9));

    Mat ns(2, 2);
    ns << 1, 2, 0, 1;
    CHECK_THROWS_AS(spectral_norm(ns, 1e-10), std::invalid_argument);
}

TEST_CASE("spectral_norm agrees with the dense eigensolver", "[linalg]") {
    auto g = rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const Mat M = random_spd(8, g);
        CHECK(spectral_norm(M, 1e-10) == Approx(eig_max(M)).epsilon(1e-8));
    }
}

TEST_CASE("solve_lyapunov closed forms", "[linalg]") {
    auto g = rng(3);
    const Mat Q = random_spd(3, g);
    CHECK((solve_lyapunov(Mat::Zero(3, 3), Q) - Q).norm() == Approx(0.0).margin(1e-12));

    Mat a(1, 1), q(1, 1);
    a << 0.5;
    q << 1.0;
    CHECK(solve_lyapunov(a, q)(0, 0) == Approx(4.0 / 3.0).epsilon(1e-9));

    const Mat A = 0.95 * Mat::Identity(2, 2);
    const Mat S = solve_lyapunov(A, Mat::Identity(2, 2));
    CHECK(S(0, 0) == Approx(1.0 / (1.0 - 0.9025)).epsilon(1e-8));
    CHECK(S(1, 1) == Approx(1.0 / (1.0 - 0.9025)).epsilon(1e-8));
    CHECK(std::abs(S(0, 1)) < 1e-9);
}

TEST_CASE("solve_lyapunov residual, symmetry and stability guard", "[linalg]") {
    auto g = rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        Mat A = random_mat(4, 4, g);
        A *= 0.9 / max_singular_value(A);
        const Mat Q = random_spd(4, g);
        const Mat S = solve_lyapunov(A, Q);
        const Mat resid = A * S * A.transpose() + Q - S;
        CHECK(resid.cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, S.cwiseAbs().maxCoeff()));
        CHECK((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        Eigen::SelfAdjointEigenSolver<Mat> es(S);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
    CHECK_THROWS_AS(solve_lyapunov(1.05 * Mat::Identity(2, 2), Mat::Identity(2, 2)),
                    std::runtime_error);
}
