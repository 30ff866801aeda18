#include <doctest.h>

#include <cmath>
#include <random>

#include "robstab/sdpcert.hpp"
#include "oracles.hpp"

using namespace robstab;

namespace {

ReducedJacobian wscc_jacobian(const char* spec, double lambda) {
    const auto c = parse_case("wscc9");
    return linearize(c, calibrate(c), parse_scenario(spec, c), lambda);
}

}  // namespace

TEST_CASE("block SDP solver on a problem with a closed-form optimum") {
    // max y  s.t.  C - y I >= 0  gives the smallest eigenvalue of C
    BlockSdp p;
    MatrixXd c(2, 2);
    c << 2, 1, 1, 3;
    p.c_sdp = {c};
    p.c_lp = VectorXd::Constant(1, 4.0);
    p.a_sdp = {{MatrixXd::Identity(2, 2)}};
    p.a_lp = {VectorXd::Constant(1, 1.0)};
    p.b = VectorXd::Constant(1, 1.0);
    const auto r = solve_block_sdp(p, VectorXd::Zero(1));
    CHECK(r.converged);
    CHECK(r.y(0) == doctest::Approx((5.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-8));

    // the orthant block becomes the binding one
    p.c_lp(0) = 1.0;
    const auto r2 = solve_block_sdp(p, VectorXd::Zero(1));
    CHECK(r2.y(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("negative identity is certified with the uniform Lyapunov matrix") {
    const auto j = ReducedJacobian::from_full(-MatrixXd::Identity(2, 2), 1);
    const auto cert = solve_certificate(j);
    CHECK(cert.status == CertStatus::RS);
    CHECK(cert.q_g(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cert.q_l(0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cert.rho == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("a pure rotation admits no strict certificate") {
    MatrixXd a(2, 2);
    a << 0, 1, -1, 0;
    for (int ng : {0, 1, 2}) {
        CAPTURE(ng);
        const auto cert = solve_certificate(ReducedJacobian::from_full(a, ng));
        CHECK(cert.status == CertStatus::NRS);
        CHECK(cert.rho <= 1e-8);
    }
}

TEST_CASE("reported residuals close against an independent evaluation") {
    for (double lam : {1.0, 2.5, 3.45}) {
        CAPTURE(lam);
        const auto j = wscc_jacobian("single:bus8", lam);
        const auto cert = solve_certificate(j);
        const MatrixXd a = build_a(j, TauAssignment::uniform(j.n_L, 1.0));
        const double top = oracle::lyapunov_max_eig(cert.q(), a);
        CHECK(top == doctest::Approx(cert.residuals.lmi_max_eig).epsilon(1e-9));
        CHECK(cert.rho == doctest::Approx(-top).epsilon(1e-9));
        CHECK(std::abs(cert.q().trace() - 1.0) < 1e-10);
        CHECK(cert.residuals.trace_err < 1e-8);
    }
}

TEST_CASE("an RS certificate transports to any positive time constants") {
    const auto j = wscc_jacobian("single:bus8", 2.0);
    const auto cert = solve_certificate(j);
    REQUIRE(cert.status == CertStatus::RS);
    std::mt19937_64 rng(0);
    int violations = 0;
    for (int k = 0; k < 200; ++k) {
        const auto tt = oracle::log_uniform_tau(rng, j.n_L, 1e-2, 1e2);
        const MatrixXd a = build_a(j, tt);
        const MatrixXd q = transport_q(cert, tt);
        // transported matrix satisfies Q~ A(tau~) = Q A(tau)
        CHECK((q * a - cert.q() * build_a(j, TauAssignment::uniform(j.n_L, 1.0))).cwiseAbs().maxCoeff() < 1e-8);
        if (!(oracle::lyapunov_max_eig(q, a) < 0.0)) ++violations;
        CHECK(oracle::abscissa(a) < 0.0);
        CHECK_NOTHROW(verify_certificate(j, tt, cert));
    }
    CHECK(violations == 0);
}

TEST_CASE("uniform scaling of the time constants keeps the certificate negative") {
    const auto j = wscc_jacobian("correlated:kc=1", 1.5);
    const auto cert = solve_certificate(j);
    REQUIRE(cert.status == CertStatus::RS);
    TauAssignment ten;
    ten.tau = 10.0 * cert.canonical_tau;
    CHECK(verify_certificate(j, ten, cert) < 0.0);
}

TEST_CASE("verdict does not depend on the canonical time constants") {
    std::mt19937_64 rng(9);
    for (double lam : {2.0, 3.45}) {
        CAPTURE(lam);
        const auto j = wscc_jacobian("single:bus8", lam);
        const auto ref = solve_certificate(j).status;
        for (int k = 0; k < 5; ++k) {
            const auto canon = oracle::log_uniform_tau(rng, j.n_L, 0.1, 10.0);
            CHECK(solve_certificate(j, canon).status == ref);
        }
    }
}

TEST_CASE("the test is one-sided: NRS does not imply instability") {
    MatrixXd a(2, 2);
    a << 0, 1, -1, -1;
    const auto j = ReducedJacobian::from_full(a, 0);
    CHECK(solve_certificate(j).status == CertStatus::NRS);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) CHECK(oracle::abscissa(build_a(j, oracle::log_uniform_tau(rng, 2, 1e-2, 1e2))) < 0.0);
}

TEST_CASE("verdict switches once along the upper branch") {
    const auto c = parse_case("wscc9");
    const auto cal = calibrate(c);
    const auto s = parse_scenario("correlated:kc=1", c);
    BoundaryOptions bo;
    bo.calibration = cal;
    const auto b = find_robust_boundary(c, s, bo);
    REQUIRE(b.rs_at_start);
    CHECK(b.s_lambda < b.snb_lambda);
    CHECK(b.margin_pct == doctest::Approx(margin_pct(b.s_lambda, b.snb_lambda)));
    int switches = 0;
    CertStatus prev = CertStatus::RS;
    for (int k = 0; k < 20; ++k) {
        const double lam = 0.1 + (b.snb_lambda * 0.999 - 0.1) * k / 19.0;
        const auto st = certify_at(c, cal, s, lam).status;
        if (lam < 0.99 * b.s_lambda) CHECK(st == CertStatus::RS);
        if (lam > 1.01 * b.s_lambda) CHECK(st == CertStatus::NRS);
        if (st != prev) ++switches;
        prev = st;
    }
    CHECK(switches <= 1);
}

TEST_CASE("margin arithmetic") {
    CHECK(margin_pct(3.0, 4.0) == doctest::Approx(25.0));
    CHECK(margin_pct(0.0, 2.0) == doctest::Approx(100.0));
    CHECK(margin_pct(1.0, 0.0) == 0.0);
}

TEST_CASE("malformed inputs") {
    MatrixXd a = MatrixXd::Identity(2, 2);
    a(0, 1) = std::nan("");
    CHECK_THROWS_AS(solve_certificate(ReducedJacobian::from_full(a, 1)), Error);
    const auto j = ReducedJacobian::from_full(-MatrixXd::Identity(3, 3), 1);
    const auto cert = solve_certificate(j);
    CHECK_THROWS_AS(transport_q(cert, TauAssignment::uniform(3, 1.0)), Error);
}
