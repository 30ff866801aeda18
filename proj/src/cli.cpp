#include "robstab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "robstab/parallel.hpp"
#include "robstab/rsa.hpp"

namespace robstab {

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

double to_num(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    usage(what + ": bad number '" + s + "'");
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

TauAssignment parse_tau_spec(const std::string& spec, const NetworkCase& c) {
    const int nl = static_cast<int>(c.loads.size());
    const auto parts = split(spec, ',');
    if (parts.empty()) usage("empty tau spec");
    std::vector<double> per_load(nl, 0.0);
    if (parts.size() == 1 && parts[0].find(':') == std::string::npos) {
        std::fill(per_load.begin(), per_load.end(), to_num(parts[0], "tau spec"));
    } else if (parts[0].find(':') == std::string::npos) {
        if (static_cast<int>(parts.size()) != nl)
            usage("tau spec lists " + std::to_string(parts.size()) + " values for " + std::to_string(nl) + " loads");
        for (int k = 0; k < nl; ++k) per_load[k] = to_num(parts[k], "tau spec");
    } else {
        std::vector<bool> set(nl, false);
        for (const auto& p : parts) {
            const auto kv = split(p, ':');
            if (kv.size() != 2) usage("tau spec entry must be bus:value, got '" + p + "'");
            const int k = c.load_at_bus(static_cast<int>(to_num(kv[0], "tau spec bus")));
            if (k < 0) usage("tau spec: no load at bus " + kv[0]);
            per_load[k] = to_num(kv[1], "tau spec");
            set[k] = true;
        }
        if (std::find(set.begin(), set.end(), false) != set.end()) usage("tau spec must cover every load");
    }
    for (double t : per_load)
        if (!(t > 0.0)) usage("time constants must be positive");
    return TauAssignment::per_load(per_load);
}

std::vector<std::pair<int, int>> parse_trips(const std::string& spec) {
    std::vector<std::pair<int, int>> out;
    for (const auto& p : split(spec, ',')) {
        const auto ab = split(p, '-');
        if (ab.size() != 2) usage("trip must look like 7-8, got '" + p + "'");
        out.push_back({static_cast<int>(to_num(ab[0], "trip")), static_cast<int>(to_num(ab[1], "trip"))});
    }
    if (out.empty()) usage("empty trip list");
    return out;
}

namespace {

struct Common {
    std::string case_path;
    std::string scenario;
    std::string out_path;
    std::string format;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::optional<int> monitored_bus;
};

struct Loaded {
    NetworkCase net;
    LoadingScenario scen;
    Calibration cal;
};

Loaded load(const Common& o) {
    Loaded l;
    l.net = parse_case(o.case_path);
    std::string spec = o.scenario;
    if (spec.empty()) {
        if (l.net.loads.empty()) usage("case has no loads");
        const int bus = l.net.study.reference_bus ? *l.net.study.reference_bus : l.net.loads.front().bus;
        spec = "single:bus" + std::to_string(bus);
    }
    l.scen = parse_scenario(spec, l.net);
    l.cal = calibrate(l.net);
    return l;
}

void emit(const Common& o, const std::string& text, std::ostream& out) {
    if (o.out_path.empty() || o.out_path == "-") {
        out << text;
        return;
    }
    std::ofstream f(o.out_path);
    if (!f) throw Error(ErrorKind::Usage, "cannot write " + o.out_path);
    f << text;
}

std::string header(const std::string& what, const Common& o) {
    return "# robstab " + what + " seed=" + std::to_string(o.seed) + "\n";
}

// ---------------------------------------------------------------- producers

std::string nose_csv(const Loaded& l, double lambda_start, bool with_cert, int jobs, const Common& o,
                     const std::string& what) {
    std::ostringstream os;
    os << header(what, o);
    TraceOptions topt;
    topt.monitored_bus = o.monitored_bus;
    if (!with_cert) {
        const auto nose = trace_nose(l.net, l.cal, l.scen, lambda_start, topt);
        os << "# case=" << l.net.name << " scenario=" << to_string(l.scen) << " snb=" << num(nose.snb_lambda) << "\n";
        os << "lambda,v_bus" << nose.monitored_bus << ",converged\n";
        for (const auto& p : nose.points) os << num(p.lambda) << "," << num(p.v_monitored) << ",1\n";
        return os.str();
    }
    BoundaryOptions bo;
    bo.jobs = jobs;
    bo.calibration = l.cal;
    bo.lambda_start = lambda_start;
    bo.trace = topt;
    const auto rb = find_robust_boundary(l.net, l.scen, bo);
    const auto& pts = rb.nose.points;
    std::vector<Certificate> certs(pts.size());
    parallel_for(static_cast<int>(pts.size()), jobs,
                 [&](int i) { certs[i] = certify_at(l.net, l.cal, l.scen, pts[i].lambda, &pts[i].eq); });
    os << "# case=" << l.net.name << " scenario=" << to_string(l.scen) << " S=" << num(rb.s_lambda)
       << " SNB=" << num(rb.snb_lambda) << " margin_pct=" << num(rb.margin_pct) << "\n";
    os << "lambda,v_bus" << rb.nose.monitored_bus << ",rho,status\n";
    for (std::size_t i = 0; i < pts.size(); ++i)
        os << num(pts[i].lambda) << "," << num(pts[i].v_monitored) << "," << num(certs[i].rho) << ","
           << to_string(certs[i].status) << "\n";
    return os.str();
}

std::string trajectory_csv(const Loaded& l, const TauAssignment& tau, double lambda_start, int grid, const Common& o,
                           const std::string& what) {
    const double snb = trace_nose(l.net, l.cal, l.scen, lambda_start).snb_lambda;
    const auto tr = trace_critical_eigenvalues(l.net, l.cal, l.scen, tau, branch_grid(lambda_start, snb, grid));
    std::ostringstream os;
    os << header(what, o);
    os << "# case=" << l.net.name << " scenario=" << to_string(l.scen) << " snb=" << num(tr.snb_lambda) << " events=";
    for (std::size_t k = 0; k < tr.events.size(); ++k)
        os << (k ? ";" : "") << to_string(tr.events[k].event) << "@" << num(tr.events[k].lambda);
    os << "\nlambda,re1,im1,re2,im2,abscissa,event\n";
    std::size_t next = 0;
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        const auto& s = tr.samples[k];
        std::string ev;
        const bool last = k + 1 == tr.samples.size();
        while (next < tr.events.size() && (tr.events[next].lambda <= s.lambda || last)) {
            ev += (ev.empty() ? "" : ";") + std::string(to_string(tr.events[next].event));
            ++next;
        }
        os << num(s.lambda) << "," << num(s.pair[0].real()) << "," << num(s.pair[0].imag()) << ","
           << num(s.pair[1].real()) << "," << num(s.pair[1].imag()) << "," << num(s.abscissa) << "," << ev << "\n";
    }
    return os.str();
}

std::string screening_csv(const ScreeningReport& r, const Common& o, const std::string& what) {
    std::ostringstream os;
    os << header(what, o);
    os << "trip,solved,rsa,rho";
    for (std::size_t k = 0; k < r.cases.size(); ++k) os << ",case" << k + 1;
    for (std::size_t k = 0; k < r.cases.size(); ++k) os << ",abscissa" << k + 1;
    os << ",soundness_violation\n";
    for (const auto& row : r.rows) {
        os << row.trip.first << "-" << row.trip.second << "," << (row.solved ? 1 : 0) << ","
           << to_string(row.rsa_verdict) << "," << num(row.rho);
        for (const auto& s : row.sims) os << "," << to_string(s.label) << (s.collapse ? "(collapse)" : "");
        for (double a : row.abscissa) os << "," << num(a);
        os << "," << (row.soundness_violation ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string sweep_csv(const SweepReport& r, const Common& o, const std::string& what) {
    std::ostringstream os;
    os << header(what, o);
    os << "# scenario=" << r.scenario << "\n";
    os << to_string(r.kind) << ",s,snb,margin_pct,error\n";
    for (const auto& c : r.cells) {
        os << (r.kind == SweepKind::PowerFactor ? format_pf_value(c.value) : num(c.value)) << ",";
        if (c.boundary)
            os << num(c.boundary->s_lambda) << "," << num(c.boundary->snb_lambda) << "," << num(c.boundary->margin_pct)
               << ",\n";
        else
            os << ",,," << c.error << "\n";
    }
    return os.str();
}

Loaded load_named(const std::string& case_name, const std::string& scen) {
    Common o;
    o.case_path = case_name;
    o.scenario = scen;
    return load(o);
}

std::vector<TauAssignment> uniform_cases(const NetworkCase& c, const std::vector<double>& taus) {
    std::vector<TauAssignment> out;
    for (double t : taus) out.push_back(TauAssignment::uniform(2 * static_cast<int>(c.loads.size()), t));
    return out;
}

std::string repro(const std::string& id, const Common& o) {
    const int jobs = resolve_jobs(o.jobs);
    if (id == "fig3") return nose_csv(load_named("rudimentary2", "single:bus2"), 0.0, true, jobs, o, "repro fig3");
    if (id == "fig5") return nose_csv(load_named("wscc9", "single:bus8"), 0.1, true, jobs, o, "repro fig5");
    if (id == "fig6") return nose_csv(load_named("wscc9", "correlated:kc=1"), 0.1, true, jobs, o, "repro fig6");
    if (id == "fig9" || id == "fig14") {
        const auto l = load_named("rudimentary2", "single:bus2");
        return trajectory_csv(l, TauAssignment::uniform(2, id == "fig9" ? 7.35 : 1.0), 0.0, 200, o, "repro " + id);
    }
    if (id == "fig10") {
        const auto l = load_named("wscc9", "correlated:kc=1");
        return trajectory_csv(l, parse_tau_spec("5:6.5,6:5.9,8:5.35", l.net), 0.0, 200, o, "repro fig10");
    }
    if (id == "table1") {
        // Contingency base: declared loads except bus 8 at 1.8 + j0.5.
        const auto l = load_named("wscc9", "single:bus8:q0.5");
        ScreeningOptions so;
        so.jobs = jobs;
        so.rsa.seed = o.seed;
        const auto r = screen_contingencies(l.net, l.cal, l.scen, 1.8, parse_trips("1-4,2-7,7-8,9-3"), uniform_cases(l.net, {1, 5, 10}), so);
        return screening_csv(r, o, "repro table1");
    }
    if (id == "table2" || id == "table3" || id == "table4") {
        const auto l = load_named("wscc9", "correlated:kc=1");
        SweepOptions so;
        so.jobs = jobs;
        std::vector<double> values;
        SweepKind kind = SweepKind::LoadCorrelation;
        if (id == "table2") values = {0.5, 1, 2, 4};
        if (id == "table3") kind = SweepKind::PowerFactor, values = {0.5, 0.9, 1.0, -0.9, -0.5};
        if (id == "table4") kind = SweepKind::ExciterGain, values = {5, 10, 20, 30, 40, 50};
        return sweep_csv(robust_region_report(l.net, l.scen, kind, values, so), o, "repro " + id);
    }
    if (id == "table5") {
        const auto base = load_named("rudimentary2", "single:bus2");
        const std::vector<std::string> pfs = {"0.89lag", "0.98lag", "1.0", "0.98lead", "0.89lead"};
        std::vector<std::string> cells(pfs.size());
        parallel_for(static_cast<int>(pfs.size()), jobs, [&](int i) {
            LoadingScenario s = base.scen;
            const double v = parse_pf_value(pfs[i]);
            s.power_factor = std::abs(v);
            s.lagging = v > 0.0;
            try {
                cells[i] = num(coalescence_real_part(base.net, base.cal, s, TauAssignment::uniform(2, 7.35))) + ",";
            } catch (const Error& e) {
                cells[i] = "," + std::string(e.what());
            }
        });
        std::ostringstream os;
        os << header("repro table5", o) << "pf,re_at_merge,error\n";
        for (std::size_t i = 0; i < pfs.size(); ++i) os << pfs[i] << "," << cells[i] << "\n";
        return os.str();
    }
    usage("unknown repro target '" + id + "' (fig3 fig5 fig6 fig9 fig10 fig14 table1..table5)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust small-signal stability certification under uncertain load dynamics", "robstab"};
    app.require_subcommand(1);
    Common o;
    std::vector<std::pair<CLI::App*, std::string>> default_format;
    auto common = [&](CLI::App* s, bool need_case, const std::string& fmt) {
        if (need_case) {
            s->add_option("--case", o.case_path, "Case file or embedded case name")->required();
            s->add_option("--scenario", o.scenario, "Loading scenario, e.g. single:bus8 or correlated:kc=1");
        }
        s->add_option("--out", o.out_path, "Output file (default stdout)");
        default_format.emplace_back(s, fmt);
        s->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--seed", o.seed, "Sampling seed")->default_val(0);
        s->add_option("--jobs", o.jobs, "Worker threads (default ROBSTAB_JOBS or 1)");
    };

    double lambda = std::nan(""), lambda_start = 0.0, t_end = 200.0, g_scale = std::nan("");
    std::string tau_spec, trip, trips = "1-4,2-7,7-8,9-3", tau_cases = "1,5,10", kind, values, hopf, target;
    int grid = 200, which = 1, load_bus = 0;
    double lo = 1e-2, hi = 1e2;

    auto* trace = app.add_subcommand("trace", "Trace the nose curve");
    common(trace, true, "csv");
    trace->add_option("--lambda-start", lambda_start, "First load level");
    trace->add_option("--monitored-bus", o.monitored_bus, "Bus whose voltage is reported (default: scenario reference bus)");

    auto* lin = app.add_subcommand("linearize", "Linearize at one load level");
    common(lin, true, "json");
    lin->add_option("--lambda", lambda, "Load level")->required();
    lin->add_option("--tau-spec", tau_spec, "Time constants for the state matrix");

    auto* cert = app.add_subcommand("certify", "Robust stability assessment at one load level");
    common(cert, true, "json");
    cert->add_option("--lambda", lambda, "Load level")->required();

    auto* scan = app.add_subcommand("scan", "Critical eigenvalue trajectory or Hopf search");
    common(scan, true, "csv");
    scan->add_option("--tau-spec", tau_spec, "Time constants")->required();
    scan->add_option("--grid", grid, "Number of load levels")->check(CLI::Range(2, 100000));
    scan->add_option("--lambda-start", lambda_start, "First load level");
    scan->add_option("--hopf", hopf, "Bisect for a Hopf point in 'tau' or 'load'")
        ->check(CLI::IsMember({"tau", "load"}));
    scan->add_option("--lambda", lambda, "Load level for --hopf tau");
    scan->add_option("--load-bus", load_bus, "Load whose tau varies for --hopf tau");
    scan->add_option("--lo", lo, "Lower end of the search range");
    scan->add_option("--hi", hi, "Upper end of the search range");
    scan->add_option("--which", which, "Crossing number for --hopf load")->check(CLI::PositiveNumber);

    auto* sim = app.add_subcommand("simulate", "Time-domain simulation");
    common(sim, true, "csv");
    sim->add_option("--tau-spec", tau_spec, "Time constants")->required();
    sim->add_option("--lambda", lambda, "Load level (default: the case's base)");
    sim->add_option("--trip", trip, "Branch tripped at t=0, e.g. 7-8");
    sim->add_option("--t-end", t_end, "Horizon in seconds")->check(CLI::PositiveNumber);
    sim->add_option("--g-scale", g_scale, "Multiplier on load conductances at t=0");

    auto* screen = app.add_subcommand("screen", "Contingency screening");
    common(screen, true, "json");
    screen->add_option("--lambda", lambda, "Load level (default: the case's base)");
    screen->add_option("--trips", trips, "Comma separated branch list");
    screen->add_option("--tau-cases", tau_cases, "Uniform time constants, one simulated case each");
    screen->add_option("--t-end", t_end, "Simulation horizon")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "Robust boundary over a parameter sweep");
    common(sweep, true, "csv");
    sweep->add_option("--kind", kind, "kc, pf or gain")->required()->check(CLI::IsMember({"kc", "pf", "gain"}));
    sweep->add_option("--values", values, "Comma separated values (pf as 0.9lag, 1.0, 0.9lead)")->required();

    auto* rep = app.add_subcommand("repro", "Regenerate the data behind a figure or table");
    common(rep, false, "csv");
    rep->add_option("target", target, "fig3 fig5 fig6 fig9 fig10 fig14 table1 table2 table3 table4 table5")
        ->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(std::move(rev));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }
    if (o.format.empty())
        for (const auto& [sub, fmt] : default_format)
            if (sub->parsed()) o.format = fmt;

    try {
        if (trace->parsed()) {
            const auto l = load(o);
            if (o.format == "json") {
                TraceOptions topt;
                topt.monitored_bus = o.monitored_bus;
                const auto nose = trace_nose(l.net, l.cal, l.scen, lambda_start, topt);
                nlohmann::json j = {{"seed", o.seed}, {"snb", nose.snb_lambda}, {"monitored_bus", nose.monitored_bus}};
                for (const auto& p : nose.points) j["points"].push_back({p.lambda, p.v_monitored});
                emit(o, j.dump(1) + "\n", out);
            } else {
                emit(o, nose_csv(l, lambda_start, false, o.jobs, o, "trace"), out);
            }
            return kExitOk;
        }
        if (lin->parsed()) {
            const auto l = load(o);
            Equilibrium eq;
            const auto j = linearize(l.net, l.cal, l.scen, lambda, nullptr, &eq);
            auto mat = [](const MatrixXd& m) {
                nlohmann::json a = nlohmann::json::array();
                for (Eigen::Index r = 0; r < m.rows(); ++r) {
                    std::vector<double> row(m.cols());
                    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
                    a.push_back(row);
                }
                return a;
            };
            nlohmann::json js = {{"seed", o.seed}, {"lambda", lambda}, {"n_G", j.n_G}, {"n_L", j.n_L},
                                 {"j", mat(j.full())}};
            js["v"] = std::vector<double>(eq.v.data(), eq.v.data() + eq.v.size());
            if (!tau_spec.empty()) {
                const MatrixXd a = build_a(j, parse_tau_spec(tau_spec, l.net));
                const auto sp = spectrum(a);
                js["a"] = mat(a);
                js["abscissa"] = sp.abscissa;
                for (const auto& e : sp.eigenvalues) js["eigenvalues"].push_back({e.real(), e.imag()});
            }
            if (o.format == "json") {
                emit(o, js.dump(1) + "\n", out);
            } else {
                std::ostringstream os;
                os << header("linearize", o) << "# n_G=" << j.n_G << " n_L=" << j.n_L << "\n";
                const MatrixXd f = j.full();
                for (Eigen::Index r = 0; r < f.rows(); ++r)
                    for (Eigen::Index c = 0; c < f.cols(); ++c) os << num(f(r, c)) << (c + 1 < f.cols() ? "," : "\n");
                emit(o, os.str(), out);
            }
            return kExitOk;
        }
        if (cert->parsed()) {
            const auto l = load(o);
            RsaOptions ro;
            ro.seed = o.seed;
            const auto r = rsa_assess(l.net, l.cal, l.scen, lambda, nullptr, ro);
            nlohmann::json j = to_json(r);
            j["seed"] = o.seed;
            j["lambda"] = lambda;
            if (o.format == "json") {
                emit(o, j.dump(1) + "\n", out);
            } else {
                emit(o, header("certify", o) + "lambda,verdict,rho\n" + num(lambda) + "," + to_string(r.verdict) + "," +
                            num(r.security_indicator) + "\n",
                     out);
            }
            return r.verdict == CertStatus::RS ? kExitOk : r.verdict == CertStatus::NRS ? kExitNrs : kExitFailure;
        }
        if (scan->parsed()) {
            const auto l = load(o);
            const auto tau = parse_tau_spec(tau_spec, l.net);
            if (hopf.empty()) {
                emit(o, trajectory_csv(l, tau, lambda_start, grid, o, "scan"), out);
                return kExitOk;
            }
            HopfPoint hp;
            if (hopf == "tau") {
                if (std::isnan(lambda)) usage("--hopf tau needs --lambda");
                const int k = l.net.load_at_bus(load_bus);
                if (k < 0) usage("--load-bus must name a load bus");
                hp = find_hopf_tau(linearize(l.net, l.cal, l.scen, lambda), k, tau, lo, hi);
            } else {
                hp = find_hopf_load(l.net, l.cal, l.scen, tau, lo, hi, which);
            }
            if (o.format == "json") {
                emit(o, nlohmann::json({{"seed", o.seed}, {"parameter", hp.parameter}, {"frequency", hp.frequency},
                                        {"abscissa", hp.abscissa}})
                                .dump(1) + "\n",
                     out);
            } else {
                emit(o, header("scan", o) + "parameter,frequency,abscissa\n" + num(hp.parameter) + "," +
                            num(hp.frequency) + "," + num(hp.abscissa) + "\n",
                     out);
            }
            return kExitOk;
        }
        if (sim->parsed()) {
            const auto l = load(o);
            const auto tau = parse_tau_spec(tau_spec, l.net);
            const double lam = std::isnan(lambda) ? base_lambda(l.net, l.scen) : lambda;
            const auto eq = solve_powerflow(l.net, l.cal, l.scen, lam);
            Perturbation p;
            if (!trip.empty()) {
                const auto t = parse_trips(trip);
                if (t.size() != 1) usage("--trip takes one branch");
                p = Perturbation::branch_trip(t[0].first, t[0].second);
            }
            if (!std::isnan(g_scale)) p.g_scale = g_scale;
            SimOptions so;
            so.t_end = t_end;
            const auto tr = simulate(l.net, l.cal, tau, eq, p, so);
            const auto cl = classify(tr);
            if (o.format == "json") {
                nlohmann::json j = {{"seed", o.seed}, {"label", to_string(cl.label)}, {"collapse", cl.collapse},
                                    {"reason", tr.reason}, {"t", tr.t}, {"load_buses", tr.load_buses}};
                for (const auto& v : tr.v_loads) j["v_loads"].push_back(std::vector<double>(v.data(), v.data() + v.size()));
                emit(o, j.dump() + "\n", out);
            } else {
                std::ostringstream os;
                os << header("simulate", o);
                if (!tr.reason.empty()) os << "# terminated: " << tr.reason << "\n";
                os << "t";
                for (int b : tr.load_buses) os << ",v_bus" << b;
                os << ",label\n";
                for (std::size_t k = 0; k < tr.t.size(); ++k) {
                    os << num(tr.t[k]);
                    for (Eigen::Index j = 0; j < tr.v_loads[k].size(); ++j) os << "," << num(tr.v_loads[k](j));
                    os << "," << (k + 1 == tr.t.size() ? std::string(to_string(cl.label)) + (cl.collapse ? "(collapse)" : "") : "")
                       << "\n";
                }
                emit(o, os.str(), out);
            }
            return kExitOk;
        }
        if (screen->parsed()) {
            const auto l = load(o);
            std::vector<double> taus;
            for (const auto& t : split(tau_cases, ',')) taus.push_back(to_num(t, "--tau-cases"));
            ScreeningOptions so;
            so.jobs = o.jobs;
            so.rsa.seed = o.seed;
            so.sim.t_end = t_end;
            const double lam = std::isnan(lambda) ? base_lambda(l.net, l.scen) : lambda;
            const auto r = screen_contingencies(l.net, l.cal, l.scen, lam, parse_trips(trips),
                                                uniform_cases(l.net, taus), so);
            if (o.format == "json") emit(o, to_json(r).dump(1) + "\n", out);
            else emit(o, screening_csv(r, o, "screen"), out);
            return kExitOk;
        }
        if (sweep->parsed()) {
            const auto l = load(o);
            const SweepKind k = parse_sweep_kind(kind);
            std::vector<double> vals;
            for (const auto& v : split(values, ','))
                vals.push_back(k == SweepKind::PowerFactor ? parse_pf_value(v) : to_num(v, "--values"));
            SweepOptions so;
            so.jobs = o.jobs;
            so.boundary.calibration = l.cal;
            const auto r = robust_region_report(l.net, l.scen, k, vals, so);
            if (o.format == "json") {
                auto j = to_json(r);
                j["seed"] = o.seed;
                emit(o, j.dump(1) + "\n", out);
            } else {
                emit(o, sweep_csv(r, o, "sweep"), out);
            }
            return kExitOk;
        }
        if (rep->parsed()) {
            emit(o, repro(target, o), out);
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        if (e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Schema) {
            err << "\n" << app.help();
            return kExitUsage;
        }
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace robstab
