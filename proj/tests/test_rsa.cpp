#include <doctest.h>

#include <cmath>

#include "robstab/rsa.hpp"

using namespace robstab;

TEST_CASE("two-bus system at moderate load is certified outright") {
    const auto c = parse_case("rudimentary2");
    const auto r = rsa_assess(c, parse_scenario("single:bus2", c), 1.0);
    CHECK(r.verdict == CertStatus::RS);
    CHECK(r.security_indicator > 0.0);
    CHECK_FALSE(r.fallback.has_value());
    CHECK(r.n_known_states == 0);
    CHECK(r.n_uncertain_states == 2);
    CHECK(r.steps.size() == 4);
}

TEST_CASE("direct analysis runs when no certificate exists and is seeded") {
    const auto c = parse_case("rudimentary2");
    const auto s = parse_scenario("single:bus2", c);
    RsaOptions opt;
    opt.seed = 3;
    const auto a = rsa_assess(c, s, 1.7, opt);
    const auto b = rsa_assess(c, s, 1.7, opt);
    REQUIRE(a.verdict == CertStatus::NRS);
    REQUIRE(a.fallback.has_value());
    CHECK(a.fallback->samples == 200);
    CHECK(a.fallback->unstable_samples > 0);
    CHECK(a.fallback->worst_abscissa > 0.0);
    CHECK(a.fallback->worst_abscissa == b.fallback->worst_abscissa);
    REQUIRE(a.fallback->hopf.has_value());
    CHECK(std::abs(a.fallback->hopf->abscissa) < 1e-6);
    CHECK(a.fallback->worst_tau.size() == 2);
}

TEST_CASE("declared time constants are absorbed before certification") {
    auto c = parse_case("wscc9");
    c.loads[0].tau_g = 2.0;
    c.loads[0].tau_b = 2.0;
    const auto r = rsa_assess(c, parse_scenario("single:bus8", c), 2.0);
    CHECK(r.n_known_states == 2);
    CHECK(r.n_uncertain_states == 4);
    CHECK(r.verdict == CertStatus::RS);
    CHECK(r.certificate.q_l.size() == 4);
}

TEST_CASE("JSON report shape") {
    const auto c = parse_case("rudimentary2");
    const auto j = to_json(rsa_assess(c, parse_scenario("single:bus2", c), 1.7));
    for (const char* k : {"verdict", "security_indicator", "steps", "certificate", "fallback"}) CHECK(j.contains(k));
    CHECK(j["verdict"] == "NRS");
    CHECK(j["certificate"].contains("rho"));
    CHECK(j["fallback"].contains("hopf"));
    CHECK(j["fallback"]["samples"] == 200);
}

TEST_CASE("contingency screening invariants") {
    const auto c = parse_case("wscc9");
    const auto cal = calibrate(c);
    const auto s = parse_scenario("single:bus8:q0.5", c);
    const std::vector<std::pair<int, int>> trips = {{1, 4}, {2, 7}, {7, 8}, {9, 3}};
    std::vector<TauAssignment> cases;
    for (double t : {1.0, 5.0, 10.0}) cases.push_back(TauAssignment::uniform(6, t));
    ScreeningOptions opt;
    opt.jobs = 2;
    const auto rep = screen_contingencies(c, cal, s, 1.8, trips, cases, opt);
    REQUIRE(rep.rows.size() == trips.size());
    for (std::size_t i = 0; i < trips.size(); ++i) {
        const auto& row = rep.rows[i];
        CAPTURE(i);
        CHECK(row.trip == trips[i]);
        CHECK(row.sims.size() == cases.size());
        CHECK(row.abscissa.size() == cases.size());
        CHECK_FALSE(row.soundness_violation);
        if (row.rsa_verdict == CertStatus::RS)
            for (const auto& cl : row.sims) CHECK(cl.label == SimLabel::Stable);
        if (!row.solved) {
            CHECK(row.rsa_verdict == CertStatus::NRS);
            for (const auto& cl : row.sims) CHECK(cl.collapse);
        }
    }
    // serial and parallel runs agree
    opt.jobs = 1;
    CHECK(to_json(screen_contingencies(c, cal, s, 1.8, trips, cases, opt)) == to_json(rep));
    const auto j = to_json(rep);
    CHECK(j["rows"].size() == trips.size());
    CHECK(format_table(rep).find("9-3") != std::string::npos);
}

TEST_CASE("branches ranked by flow") {
    const auto c = parse_case("wscc9");
    const auto eq = solve_powerflow(c, parse_scenario("global", c), 1.0);
    const auto ranked = rank_branches_by_flow(c, eq);
    CHECK(ranked.size() == c.branches.size());
    for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].second >= ranked[i].second);
    CHECK(ranked.front().second > 0.0);
}

TEST_CASE("sweep value parsing") {
    CHECK(parse_pf_value("0.9lag") == doctest::Approx(0.9));
    CHECK(parse_pf_value("0.9lead") == doctest::Approx(-0.9));
    CHECK(parse_pf_value("1.0") == doctest::Approx(1.0));
    for (const char* v : {"0.89lag", "0.98lead", "1.0"}) CHECK(parse_pf_value(format_pf_value(parse_pf_value(v))) == parse_pf_value(v));
    CHECK_THROWS_AS(parse_pf_value("1.2lag"), Error);
    CHECK_THROWS_AS(parse_pf_value("sideways"), Error);
    CHECK(parse_sweep_kind("kc") == SweepKind::LoadCorrelation);
    CHECK(parse_sweep_kind("pf") == SweepKind::PowerFactor);
    CHECK(parse_sweep_kind("gain") == SweepKind::ExciterGain);
    CHECK_THROWS_AS(parse_sweep_kind("tau"), Error);
}

TEST_CASE("load correlation sweep") {
    const auto c = parse_case("wscc9");
    SweepOptions opt;
    opt.jobs = 2;
    const auto rep = robust_region_report(c, parse_scenario("correlated:kc=1", c), SweepKind::LoadCorrelation, {1.0, 2.0, 4.0}, opt);
    REQUIRE(rep.cells.size() == 3);
    double prev = 1e9;
    for (const auto& cell : rep.cells) {
        REQUIRE(cell.boundary.has_value());
        const auto& b = *cell.boundary;
        CHECK(b.s_lambda <= b.snb_lambda);
        CHECK(b.margin_pct == doctest::Approx(margin_pct(b.s_lambda, b.snb_lambda)));
        // more load on bus 5 lowers the nose
        CHECK(b.snb_lambda < prev);
        prev = b.snb_lambda;
    }
    CHECK(to_json(rep)["cells"].size() == 3);
}
