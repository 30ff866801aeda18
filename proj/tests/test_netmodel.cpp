#include <doctest.h>

#include <cmath>
#include <random>

#include "robstab/netmodel.hpp"

using namespace robstab;

namespace {

DynamicLoad make_load(double p0, double a, double tau) {
    DynamicLoad l;
    l.bus = 2;
    l.p0 = p0;
    l.q0 = 0.5 * p0;
    l.exp_a = a;
    l.exp_b = a;
    l.tau_g = tau;
    l.tau_b = tau;
    return l;
}

}  // namespace

TEST_CASE("load_rhs hand values") {
    CHECK(load_rhs(make_load(1.0, 0.0, 1.0), 2.0, 0.0, 1.0).dg == doctest::Approx(-1.0));
    CHECK(load_rhs(make_load(1.0, 2.0, 1.0), 0.8, 0.0, 1.1).dg == doctest::Approx(0.242));
    const auto l = make_load(2.51, 0.0, 3.0);
    const double v = 0.87;
    CHECK(std::abs(load_rhs(l, 2.51 / (v * v), l.q0 / (v * v), v).dg) < 1e-14);
}

TEST_CASE("load_rhs refuses an uncertain time constant") {
    auto l = make_load(1.0, 0.0, 1.0);
    l.tau_b = Uncertain;
    CHECK_THROWS_WITH_AS(load_rhs(l, 1.0, 1.0, 1.0), doctest::Contains("requires concrete time constant"), Error);
}

TEST_CASE("load equilibrium iff consumption matches the static characteristic") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    for (int k = 0; k < 50; ++k) {
        const auto l = make_load(u(rng), std::floor(3 * u(rng)), u(rng));
        const double v = u(rng);
        const double g = l.p_static(v) / (v * v), b = l.q_static(v) / (v * v);
        const auto at = load_rhs(l, g, b, v);
        CHECK(std::abs(at.dg) < 1e-13);
        CHECK(std::abs(at.db) < 1e-13);
        const auto off = load_rhs(l, g * 1.01, b, v);
        CHECK(off.dg != 0.0);
    }
}

TEST_CASE("instantaneous power rate") {
    CHECK(instantaneous_power_rate(make_load(1.0, 0.0, 2.0), 1.0, 1.0, 0.1) == doctest::Approx(0.2));
    const auto l = make_load(1.3, 1.0, 2.0);
    CHECK(instantaneous_power_rate(l, l.p_static(0.9) / 0.81, 0.9, 0.0) == doctest::Approx(0.0).epsilon(1e-14));

    // d(g v^2)/dt by the chain rule from load_rhs.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 2.0), s(-1.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const auto ld = make_load(u(rng), std::floor(3 * u(rng)), u(rng));
        const double g = u(rng), v = u(rng), dv = s(rng);
        const double chain = load_rhs(ld, g, 0.0, v).dg * v * v + 2.0 * g * v * dv;
        const double got = instantaneous_power_rate(ld, g, v, dv);
        CHECK(got == doctest::Approx(chain).epsilon(1e-10));
    }
}

TEST_CASE("motor as a generic load") {
    InductionMotorParams m{0.1, 0.3, 0.5, 1.0, 1.0};
    CHECK(motor_h(m, 0.6) == doctest::Approx(0.6));
    CHECK(motor_as_generic(m, 0.6, 1.0) == doctest::Approx(0.65));

    // torque balance gives zero, excess electrical power decelerates
    const double s = 0.3, g = motor_h(m, s);
    const double v_bal = std::sqrt(m.P_m / (1.0 - s) / g);
    CHECK(std::abs(motor_as_generic(m, g, v_bal)) < 1e-12);
    CHECK(motor_as_generic(m, g, v_bal * 1.1) < 0.0);

    // chain rule: dg/dt = (dh/ds) * ds/dt
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 0.9), w(0.7, 1.2);
    for (int k = 0; k < 30; ++k) {
        const double sk = u(rng), v = w(rng);
        const double lhs = motor_as_generic(m, motor_h(m, sk), v);
        CHECK(lhs == doctest::Approx(motor_dh_ds(m) * motor_slip_rate(m, sk, v)).epsilon(1e-10));
    }
    CHECK_THROWS_WITH(motor_as_generic(m, 1.5, 1.0), doctest::Contains("slip recovery failed"));
}

TEST_CASE("tap changer and heating loads") {
    CHECK(ultc_as_generic(1.0, 1.0, 1.0, 1.0, 10.0) == doctest::Approx(0.0));
    CHECK(ultc_as_generic(1.0, 1.0, 1.1, 1.0, 10.0) == doctest::Approx(-0.02));
    // g_eq = g K^2 moves as 2 g K dK/dt with dK/dt = -(K v - v_set) / T
    const double g = 0.8, k = 1.05, v = 0.97, vs = 1.0, t = 20.0;
    CHECK(ultc_as_generic(g, k, v, vs, t) == doctest::Approx(2.0 * g * k * (-(k * v - vs) / t)));
    CHECK_THROWS_AS(ultc_as_generic(-1.0, 1.0, 1.0, 1.0, 1.0), Error);

    CHECK(heating_as_generic(1.0, 1.0, 1.0, 1.0 / 1.44, 1.2) == doctest::Approx(0.0));
    CHECK(heating_as_generic(1.0, 1.0, 1.0, 1.0, 1.2) == doctest::Approx(-0.44));
    CHECK(std::abs(heating_as_generic(1.0, 1.0, 0.0, 1e-6, 1.0)) < 1e-15);
    CHECK_THROWS_AS(heating_as_generic(1.0, 1.0, 1.0, 0.0, 1.0), Error);
}

TEST_CASE("embedded cases load with their data") {
    const auto w = parse_case("wscc9");
    CHECK(w.buses.size() == 9);
    CHECK(w.generators.size() == 3);
    CHECK(w.loads.size() == 3);
    bool saw45 = false, saw14 = false;
    for (const auto& b : w.branches) {
        if (b.from == 4 && b.to == 5) {
            saw45 = true;
            CHECK(b.r == 0.01);
            CHECK(b.x == 0.085);
            CHECK(b.b_half == 0.088);
        }
        if (b.from == 1 && b.to == 4) {
            saw14 = true;
            CHECK(b.x == 0.0576);
        }
    }
    CHECK(saw45);
    CHECK(saw14);

    const auto r = parse_case("rudimentary2");
    REQUIRE(r.generators.size() == 1);
    const auto& g = r.generators[0];
    CHECK(g.x_d == 1.2);
    CHECK(g.x_dp == 0.2);
    CHECK(g.T_d0p == 5.0);
    CHECK(g.T_exc == 0.39);
    CHECK(g.K_exc == 10.0);
    CHECK(r.branches.at(0).x == 0.1);
    CHECK_FALSE(r.loads.at(0).tau_g.has_value());
}

TEST_CASE("case round trip") {
    for (const char* name : {"rudimentary2", "wscc9"}) {
        const auto c = parse_case(name);
        CHECK(case_from_json(nlohmann::json::parse(serialize_case(c))) == c);
    }
}

TEST_CASE("schema violations are reported") {
    auto j = case_to_json(parse_case("wscc9"));
    auto missing = j;
    missing.erase("loads");
    CHECK_THROWS_AS(case_from_json(missing), Error);

    auto dangling = j;
    dangling["branches"][0]["to"] = 42;
    CHECK_THROWS_AS(case_from_json(dangling), Error);

    auto two_slack = j;
    two_slack["buses"][1]["kind"] = "slack";
    CHECK_THROWS_AS(case_from_json(two_slack), Error);

    auto bad_tau = j;
    bad_tau["loads"][0]["tau_g"] = "soon";
    CHECK_THROWS_AS(case_from_json(bad_tau), Error);

    auto negative_tau = j;
    negative_tau["loads"][0]["tau_g"] = -1.0;
    CHECK_THROWS_AS(case_from_json(negative_tau), Error);

    CHECK_THROWS_AS(parse_case("/nonexistent/case.json"), Error);
}
