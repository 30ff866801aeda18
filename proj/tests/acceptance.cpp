// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any non-optional criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "robstab/cli.hpp"
#include "robstab/eigscan.hpp"
#include "robstab/parallel.hpp"
#include "robstab/rsa.hpp"
#include "oracles.hpp"

using namespace robstab;

namespace {

int g_failures = 0;
const int kJobs = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));

enum class Outcome { Pass, Fail, Skip };

void report(int id, const char* title, Outcome o, const std::string& detail, double seconds) {
    const char* tag = o == Outcome::Pass ? "PASS" : o == Outcome::Fail ? "FAIL" : "SKIP";
    std::printf("[%s] %2d %s (%.1fs): %s\n", tag, id, title, seconds, detail.c_str());
    std::fflush(stdout);
    if (o == Outcome::Fail) ++g_failures;
}

void run(int id, const char* title, const std::function<Outcome(std::ostringstream&)>& fn) {
    std::ostringstream detail;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn(detail);
    } catch (const std::exception& e) {
        detail << "exception: " << e.what();
        o = Outcome::Fail;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, title, o, detail.str(), secs);
}

bool within(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

struct Loaded {
    NetworkCase c;
    Calibration cal;
    LoadingScenario s;
};

Loaded load(const char* name, const char* spec) {
    Loaded l{parse_case(name), {}, {}};
    l.cal = calibrate(l.c);
    l.s = parse_scenario(spec, l.c);
    return l;
}

// Certificates along the traced upper branch of every embedded scenario.
struct CertPoint {
    std::string where;
    double lambda;
    ReducedJacobian j;
    Certificate cert;
};

std::vector<CertPoint> branch_certificates() {
    const std::vector<std::pair<const char*, const char*>> setups = {
        {"rudimentary2", "single:bus2"}, {"wscc9", "single:bus8"}, {"wscc9", "correlated:kc=1"}};
    std::vector<CertPoint> pts;
    for (const auto& [name, spec] : setups) {
        const auto l = load(name, spec);
        const auto nose = trace_nose(l.c, l.cal, l.s, 0.0);
        for (const auto& p : nose.points) {
            CertPoint cp{std::string(name) + " " + spec, p.lambda, {}, {}};
            try {
                cp.j = linearize(l.c, l.cal, l.s, p.lambda, &p.eq);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::NearSingularAlgebraic) continue;
                throw;
            }
            pts.push_back(std::move(cp));
        }
    }
    parallel_for(static_cast<int>(pts.size()), kJobs, [&](int i) { pts[i].cert = solve_certificate(pts[i].j); });
    return pts;
}

Outcome soundness(std::ostringstream& d, const std::vector<CertPoint>& pts) {
    std::vector<int> bad(pts.size(), 0), checked(pts.size(), 0);
    parallel_for(static_cast<int>(pts.size()), kJobs, [&](int i) {
        if (pts[i].cert.status != CertStatus::RS) return;
        std::mt19937_64 rng(1000 + i);
        for (int k = 0; k < 200; ++k) {
            const auto tt = oracle::log_uniform_tau(rng, pts[i].j.n_L, 1e-2, 1e2);
            if (!(oracle::abscissa(build_a(pts[i].j, tt)) < 0.0)) ++bad[i];
            ++checked[i];
        }
    });
    int n_rs = 0, samples = 0, violations = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        n_rs += checked[i] > 0;
        samples += checked[i];
        violations += bad[i];
    }
    d << n_rs << " RS points, " << samples << " samples, " << violations << " violations";
    return violations == 0 && n_rs > 0 ? Outcome::Pass : Outcome::Fail;
}

Outcome residuals(std::ostringstream& d, const std::vector<CertPoint>& pts) {
    int n = 0, bad = 0;
    double worst = -1e300;
    for (const auto& p : pts) {
        if (p.cert.status != CertStatus::RS) continue;
        ++n;
        const MatrixXd a = build_a(p.j, TauAssignment::uniform(p.j.n_L, 1.0));
        const double top = oracle::lyapunov_max_eig(p.cert.q(), a);
        const double qmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(p.cert.q(), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
        worst = std::max(worst, top + p.cert.rho);
        if (!(top <= -p.cert.rho + 1e-7) || !(qmin > 0.0) || !(std::abs(p.cert.q().trace() - 1.0) < 1e-8)) ++bad;
    }
    d << n << " RS certificates, " << bad << " violating; max(lmi_max + rho) = " << worst;
    return bad == 0 && n > 0 ? Outcome::Pass : Outcome::Fail;
}

BoundaryOptions boundary_opts(const Calibration& cal) {
    BoundaryOptions bo;
    bo.calibration = cal;
    bo.jobs = kJobs;
    return bo;
}

Outcome two_bus(std::ostringstream& d) {
    const auto l = load("rudimentary2", "single:bus2:pf0.98lag");
    auto bo = boundary_opts(l.cal);
    bo.lambda_start = 0.0;
    const auto b = find_robust_boundary(l.c, l.s, bo);
    const bool s_ok = within(b.s_lambda, 2.51, 0.05), snb_ok = within(b.snb_lambda, 4.2, 0.05);
    d << "S=" << b.s_lambda << " (2.51) SNB=" << b.snb_lambda << " (4.2)";
    bool hopf_ok = false;
    try {
        const auto j = linearize(l.c, l.cal, l.s, 2.6);
        const auto h = find_hopf_tau(j, 0, TauAssignment::uniform(j.n_L, 1.0), 1e-2, 1e2);
        hopf_ok = within(h.parameter, 7.35, 0.05);
        d << " Hopf tau=" << h.parameter << " (7.35)";
    } catch (const Error& e) {
        d << " Hopf at P0=2.6: " << e.what();
    }
    return s_ok && snb_ok && hopf_ok ? Outcome::Pass : Outcome::Fail;
}

Outcome wscc_single(std::ostringstream& d) {
    const auto l = load("wscc9", "single:bus8");
    const auto b = find_robust_boundary(l.c, l.s, boundary_opts(l.cal));
    bool ok = within(b.s_lambda, 3.0, 0.05) && within(b.snb_lambda, 3.5, 0.05);
    d << "S=" << b.s_lambda << " (3.0) SNB=" << b.snb_lambda << " (3.5)";
    const int k8 = l.c.load_at_bus(8);
    for (const auto& [lam, want] : {std::pair{3.36, 15.57}, std::pair{3.45, 11.0}}) {
        const auto j = linearize(l.c, l.cal, l.s, lam);
        try {
            const auto h = find_hopf_tau(j, k8, TauAssignment::uniform(j.n_L, 1.0), 1e-2, 1e2);
            ok = ok && within(h.parameter, want, 0.10);
            d << " P8=" << lam << ": tau8=" << h.parameter << " (" << want << ")";
        } catch (const Error& e) {
            ok = false;
            d << " P8=" << lam << ": " << e.what();
        }
    }
    return ok ? Outcome::Pass : Outcome::Fail;
}

SweepReport sweep(SweepKind kind, const std::vector<double>& values) {
    const auto l = load("wscc9", "correlated:kc=1");
    SweepOptions so;
    so.jobs = kJobs;
    return robust_region_report(l.c, l.s, kind, values, so);
}

Outcome table2(std::ostringstream& d) {
    const double want_s[] = {2.70, 1.86, 1.07, 0.55}, want_snb[] = {3.10, 2.16, 1.22, 0.65};
    const auto r = sweep(SweepKind::LoadCorrelation, {0.5, 1, 2, 4});
    bool ok = true;
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        const auto& c = r.cells[i];
        if (!c.boundary) {
            ok = false;
            d << "kc=" << c.value << ": " << c.error << "; ";
            continue;
        }
        const auto& b = *c.boundary;
        const double want_m = margin_pct(want_s[i], want_snb[i]);
        ok = ok && within(b.s_lambda, want_s[i], 0.05) && within(b.snb_lambda, want_snb[i], 0.05) &&
             std::abs(b.margin_pct - want_m) <= 2.0;
        char buf[160];
        std::snprintf(buf, sizeof buf, "kc=%g S=%.3f(%.2f) SNB=%.3f(%.2f) m=%.1f(%.1f); ", c.value, b.s_lambda, want_s[i],
                      b.snb_lambda, want_snb[i], b.margin_pct, want_m);
        d << buf;
    }
    return ok ? Outcome::Pass : Outcome::Fail;
}

Outcome table3(std::ostringstream& d) {
    const double want[] = {5.00, 13.89, 16.06, 28.36, 54.17};
    const auto r = sweep(SweepKind::PowerFactor, {0.5, 0.9, 1.0, -0.9, -0.5});
    bool ok = true, monotone = true;
    double prev = -1e9;
    for (std::size_t i = 0; i < r.cells.size(); ++i) {
        const auto& c = r.cells[i];
        if (!c.boundary) {
            ok = false;
            d << format_pf_value(c.value) << ": " << c.error << "; ";
            continue;
        }
        const double m = c.boundary->margin_pct;
        ok = ok && std::abs(m - want[i]) <= 3.0;
        monotone = monotone && m >= prev;
        prev = m;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s m=%.2f(%.2f); ", format_pf_value(c.value).c_str(), m, want[i]);
        d << buf;
    }
    d << (monotone ? "monotone" : "not monotone");
    return ok && monotone ? Outcome::Pass : Outcome::Fail;
}

Outcome table4(std::ostringstream& d) {
    const auto r = sweep(SweepKind::ExciterGain, {5, 10, 20, 30, 40, 50});
    double lo = 1e300, hi = -1e300, prev_s = -1e300;
    bool monotone = true, ok = true;
    for (const auto& c : r.cells) {
        if (!c.boundary) {
            ok = false;
            d << "K=" << c.value << ": " << c.error << "; ";
            continue;
        }
        lo = std::min(lo, c.boundary->snb_lambda);
        hi = std::max(hi, c.boundary->snb_lambda);
        monotone = monotone && c.boundary->s_lambda >= prev_s;
        prev_s = c.boundary->s_lambda;
        char buf[80];
        std::snprintf(buf, sizeof buf, "K=%g S=%.3f SNB=%.3f; ", c.value, c.boundary->s_lambda, c.boundary->snb_lambda);
        d << buf;
    }
    const double variation = (hi - lo) / lo;
    d << "SNB variation " << 100.0 * variation << "%, S " << (monotone ? "non-decreasing" : "decreasing somewhere");
    return ok && variation < 0.005 && monotone ? Outcome::Pass : Outcome::Fail;
}

Outcome table1(std::ostringstream& d) {
    const auto l = load("wscc9", "single:bus8:q0.5");
    const std::vector<std::pair<int, int>> trips = {{1, 4}, {2, 7}, {7, 8}, {9, 3}};
    std::vector<TauAssignment> cases;
    for (double t : {1.0, 5.0, 10.0}) cases.push_back(TauAssignment::uniform(6, t));
    ScreeningOptions so;
    so.jobs = kJobs;
    const auto rep = screen_contingencies(l.c, l.cal, l.s, 1.8, trips, cases, so);
    const CertStatus want_rsa[] = {CertStatus::NRS, CertStatus::NRS, CertStatus::NRS, CertStatus::RS};
    const SimLabel S = SimLabel::Stable, LC = SimLabel::LimitCycle, U = SimLabel::Unstable;
    const SimLabel want_sim[3][4] = {{S, S, S, S}, {LC, S, S, S}, {U, U, LC, S}};
    bool rsa_ok = true;
    int mismatches = 0;
    std::ostringstream cells;
    d << "RSA (";
    for (std::size_t t = 0; t < trips.size(); ++t) {
        const auto& row = rep.rows[t];
        rsa_ok = rsa_ok && row.rsa_verdict == want_rsa[t];
        d << to_string(row.rsa_verdict) << (t + 1 < trips.size() ? "," : ") vs (NRS,NRS,NRS,RS)");
        for (int k = 0; k < 3; ++k) {
            const SimLabel got = row.sims[k].label, want = want_sim[k][t];
            if (got == want) continue;
            const bool swap = (got == LC && want == U) || (got == U && want == LC);
            const double ab = k < static_cast<int>(row.abscissa.size()) ? row.abscissa[k] : NAN;
            if (swap && std::abs(ab) < 1e-3) continue;
            ++mismatches;
            cells << " [" << row.trip.first << "-" << row.trip.second << " tau=" << cases[k].tau(0) << ": "
                  << to_string(got) << (row.sims[k].collapse ? "(collapse)" : "") << " vs " << to_string(want) << "]";
        }
    }
    d << "; " << mismatches << " simulation cells differ:" << cells.str();
    return rsa_ok && mismatches == 0 ? Outcome::Pass : Outcome::Fail;
}

std::string kinds(const EigTrajectory& tr) {
    std::string s;
    for (const auto& e : tr.events) s += std::string(s.empty() ? "" : ",") + to_string(e.event) + "@" + std::to_string(e.lambda);
    return "[" + s + "]";
}

Outcome trajectories(std::ostringstream& d) {
    const auto l = load("rudimentary2", "single:bus2");
    const double snb = trace_nose(l.c, l.cal, l.s, 0.0).snb_lambda;
    const auto grid = branch_grid(0.0, snb, 200);
    const auto slow = trace_critical_eigenvalues(l.c, l.cal, l.s, TauAssignment::uniform(2, 7.35), grid);
    const auto fast = trace_critical_eigenvalues(l.c, l.cal, l.s, TauAssignment::uniform(2, 1.0), grid);
    const std::vector<EigEvent> want_slow = {EigEvent::FirstHopf, EigEvent::Coalescence, EigEvent::SNBOriginTouch};
    const bool slow_ok = slow.event_kinds() == want_slow;
    const bool fast_ok = fast.event_kinds() == std::vector<EigEvent>{EigEvent::SNBOriginTouch};
    d << "tau=7.35 " << kinds(slow) << "; tau=1 " << kinds(fast);

    const auto w = load("wscc9", "correlated:kc=1");
    const double wsnb = trace_nose(w.c, w.cal, w.s, 0.1).snb_lambda;
    const auto wt = trace_critical_eigenvalues(w.c, w.cal, w.s, parse_tau_spec("5:6.5,6:5.9,8:5.35", w.c), branch_grid(0.1, wsnb, 200));
    int hopfs = 0;
    double second = NAN;
    for (const auto& e : wt.events)
        if (e.event == EigEvent::FirstHopf || e.event == EigEvent::SecondHopf)
            if (++hopfs == 2) second = e.lambda;
    const bool w_ok = hopfs == 2 && within(second, 2.14, 0.10);
    d << "; WSCC (6.5,5.9,5.35) " << kinds(wt);
    return slow_ok && fast_ok && w_ok ? Outcome::Pass : Outcome::Fail;
}

Outcome table5(std::ostringstream& d) {
    const auto l = load("rudimentary2", "single:bus2");
    const std::vector<std::pair<double, bool>> pfs = {{0.89, true}, {0.98, true}, {1.0, true}, {0.98, false}, {0.89, false}};
    const double want[] = {0.65, 1.10, 1.20, 2.31, 3.56};
    bool ok = true;
    for (std::size_t i = 0; i < pfs.size(); ++i) {
        LoadingScenario s = l.s;
        s.power_factor = pfs[i].first;
        s.lagging = pfs[i].second;
        d << format_pf_value(pfs[i].second ? pfs[i].first : -pfs[i].first) << ": ";
        try {
            const double re = coalescence_real_part(l.c, l.cal, s, TauAssignment::uniform(2, 7.35));
            ok = ok && within(std::abs(re), want[i], 0.10);
            d << re << " (" << want[i] << "); ";
        } catch (const Error& e) {
            ok = false;
            d << e.what() << "; ";
        }
    }
    return ok ? Outcome::Pass : Outcome::Fail;
}

Outcome oracles(std::ostringstream& d) {
    double pencil = 0.0;
    for (const auto& t : oracle::toy_systems()) pencil = std::max(pencil, oracle::pencil_mismatch(t));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> frac(0.05, 0.97);
    const std::vector<std::pair<const char*, const char*>> setups = {
        {"rudimentary2", "single:bus2"}, {"wscc9", "single:bus8"}, {"wscc9", "correlated:kc=1"}, {"wscc9", "global"}};
    double fd = 0.0;
    for (int k = 0; k < 20; ++k) {
        const auto l = load(setups[k % setups.size()].first, setups[k % setups.size()].second);
        const double lam = frac(rng) * trace_nose(l.c, l.cal, l.s, 0.0).snb_lambda;
        const auto m = make_model(l.c, l.cal, l.s, lam);
        const auto eq = solve_powerflow(l.c, l.cal, l.s, lam);
        const auto a = assemble_blocks(m, eq), f = assemble_blocks_fd(m, eq);
        const auto rel = [](const MatrixXd& x, const MatrixXd& y) {
            return x.size() ? (x - y).cwiseAbs().maxCoeff() / std::max(1.0, x.cwiseAbs().maxCoeff()) : 0.0;
        };
        for (const auto& [x, y] : {std::pair{&a.f_g_xg, &f.f_g_xg}, {&a.f_g_xl, &f.f_g_xl}, {&a.f_g_y, &f.f_g_y},
                                   {&a.f_l_xg, &f.f_l_xg}, {&a.f_l_xl, &f.f_l_xl}, {&a.f_l_y, &f.f_l_y},
                                   {&a.g_xg, &f.g_xg}, {&a.g_xl, &f.g_xl}, {&a.g_y, &f.g_y}})
            fd = std::max(fd, rel(*x, *y));
    }
    d << "pencil mismatch " << pencil << ", Jacobian FD mismatch " << fd;
    return pencil < 1e-8 && fd < 1e-6 ? Outcome::Pass : Outcome::Fail;
}

Outcome new_england(std::ostringstream& d) {
    for (const char* p : {"cases/ieee39.json", "cases/newengland39.json"})
        if (std::filesystem::exists(p)) {
            d << p << " present but the 39-bus study is not wired into this suite";
            return Outcome::Skip;
        }
    d << "optional 39-bus data not present";
    return Outcome::Skip;
}

}  // namespace

int main() {
    std::vector<CertPoint> pts;
    const auto t0 = std::chrono::steady_clock::now();
    run(1, "certificate soundness", [&](std::ostringstream& d) {
        pts = branch_certificates();
        const Outcome o = soundness(d, pts);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > 120.0) {
            d << "; runtime over 2 min";
            return Outcome::Fail;
        }
        return o;
    });
    run(2, "certificate residuals", [&](std::ostringstream& d) { return residuals(d, pts); });
    run(3, "two-bus boundary and Hopf", [&](std::ostringstream& d) {
        const auto s = std::chrono::steady_clock::now();
        Outcome o = two_bus(d);
        if (std::chrono::duration<double>(std::chrono::steady_clock::now() - s).count() > 60.0) {
            d << "; runtime over 1 min";
            o = Outcome::Fail;
        }
        return o;
    });
    run(4, "WSCC single-bus boundary and Hopf points", wscc_single);
    run(5, "load correlation sweep", table2);
    run(6, "power factor sweep", table3);
    run(7, "exciter gain sweep", table4);
    run(8, "contingency screening", table1);
    run(9, "eigenvalue trajectory events", trajectories);
    run(10, "coalescence points", table5);
    run(11, "oracle equivalence", oracles);
    run(12, "39-bus study (optional)", new_england);
    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
