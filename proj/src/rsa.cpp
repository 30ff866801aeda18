#include "robstab/rsa.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "robstab/parallel.hpp"

namespace robstab {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

FallbackSummary direct_analysis(const ReducedJacobian& j, const RsaOptions& opt) {
    FallbackSummary fb;
    fb.worst_abscissa = -std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(std::log(opt.tau_lo), std::log(opt.tau_hi));
    TauAssignment t;
    t.tau.resize(j.n_L);
    for (int k = 0; k < opt.samples; ++k) {
        for (int i = 0; i < j.n_L; ++i) t.tau(i) = std::exp(u(rng));
        const double a = spectrum(build_a(j, t)).abscissa;
        ++fb.samples;
        if (a >= 0.0) ++fb.unstable_samples;
        if (a > fb.worst_abscissa) {
            fb.worst_abscissa = a;
            fb.worst_tau = t.tau;
        }
    }
    if (!opt.hopf_attempt) return fb;
    if (j.n_L % 2 != 0) {
        fb.note = "uncertain states do not come in load pairs; Hopf search skipped";
        return fb;
    }
    // One bisection attempt per uncertain load, the others held at 1 s.
    for (int load = 0; load < j.n_L / 2; ++load) {
        try {
            fb.hopf = find_hopf_tau(j, load, TauAssignment::uniform(j.n_L, 1.0), opt.tau_lo, opt.tau_hi);
            fb.hopf_load = load;
            return fb;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoCrossing) throw;
        }
    }
    fb.note = "no Hopf crossing in the sampled tau range";
    return fb;
}

}  // namespace

RsaReport rsa_assess_equilibrium(const NetworkCase& c, const Calibration& cal, const Equilibrium& eq,
                                 const RsaOptions& opt) {
    RsaReport rep;
    rep.steps.push_back("input: " + c.name + ", " + to_string(eq.loading) + ", lambda=" + fmt("%.6g", eq.lambda));
    const auto known = declared_taus(c);
    for (const auto& k : known) (k ? rep.n_known_states : rep.n_uncertain_states)++;
    rep.steps.push_back("initialization: " + std::to_string(rep.n_known_states) + " known and " +
                        std::to_string(rep.n_uncertain_states) + " uncertain load states");

    const DaeModel m = make_model(c, cal, eq.loading, eq.lambda);
    ReducedJacobian j;
    try {
        j = absorb_known_dynamics(reduce(assemble_blocks(m, eq)), known);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NearSingularAlgebraic) throw;
        rep.steps.push_back(std::string("linearization: ") + e.what());
        rep.verdict = CertStatus::NRS;
        rep.security_indicator = -std::numeric_limits<double>::infinity();
        rep.certificate.status = CertStatus::NRS;
        rep.certificate.rho = rep.security_indicator;
        FallbackSummary fb;
        fb.note = "algebraic Jacobian singular; direct analysis not possible";
        rep.fallback = fb;
        return rep;
    }
    rep.steps.push_back("linearization: " + std::to_string(j.n_G) + " certain and " + std::to_string(j.n_L) +
                        " uncertain states");

    rep.certificate = solve_certificate(j, opt.cert);
    rep.verdict = rep.certificate.status;
    rep.security_indicator = rep.certificate.rho;
    rep.steps.push_back(std::string("optimization: ") + to_string(rep.verdict) + ", rho=" +
                        fmt("%.6g", rep.certificate.rho) + ", " + std::to_string(rep.certificate.iterations) +
                        " iterations");
    if (rep.verdict != CertStatus::RS) {
        rep.fallback = direct_analysis(j, opt);
        const auto& fb = *rep.fallback;
        std::string line = "direct analysis: worst abscissa " + fmt("%.6g", fb.worst_abscissa) + " over " +
                           std::to_string(fb.samples) + " draws";
        if (fb.hopf) line += ", Hopf at tau=" + fmt("%.6g", fb.hopf->parameter);
        rep.steps.push_back(line);
    }
    return rep;
}

RsaReport rsa_assess(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s, double lambda,
                     const Equilibrium* warm, const RsaOptions& opt) {
    return rsa_assess_equilibrium(c, cal, solve_powerflow(c, cal, s, lambda, warm), opt);
}

RsaReport rsa_assess(const NetworkCase& c, const LoadingScenario& s, double lambda, const RsaOptions& opt) {
    return rsa_assess(c, calibrate(c), s, lambda, nullptr, opt);
}

ScreeningReport screen_contingencies(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                                     double lambda, const std::vector<std::pair<int, int>>& trips,
                                     const std::vector<TauAssignment>& tau_cases, const ScreeningOptions& opt) {
    ScreeningReport rep;
    rep.cases = tau_cases;
    rep.seed = opt.rsa.seed;
    rep.rows.resize(trips.size());
    const Equilibrium base = solve_powerflow(c, cal, s, lambda);

    parallel_for(static_cast<int>(trips.size()), opt.jobs, [&](int i) {
        ScreeningRow& row = rep.rows[i];
        row.trip = trips[i];
        PostContingency pc;
        Equilibrium post;
        try {
            pc = apply_trip(c, cal, base, trips[i].first, trips[i].second);
            const Equilibrium guess = restrict_to(base, pc);
            post = solve_powerflow(pc.net, pc.cal, s, lambda, &guess);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Schema) throw;
            row.solved = false;
            row.note = e.what();
            row.rsa_verdict = CertStatus::NRS;
            row.rho = -std::numeric_limits<double>::infinity();
            Classification cl;
            cl.label = SimLabel::Unstable;
            cl.collapse = true;
            row.sims.assign(tau_cases.size(), cl);
            row.abscissa.assign(tau_cases.size(), std::numeric_limits<double>::quiet_NaN());
            return;
        }
        const RsaReport r = rsa_assess_equilibrium(pc.net, pc.cal, post, opt.rsa);
        row.rsa_verdict = r.verdict;
        row.rho = r.security_indicator;

        std::optional<ReducedJacobian> j;
        try {
            j = linearize(pc.net, pc.cal, s, lambda, &post);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NearSingularAlgebraic) throw;
        }
        Perturbation p = Perturbation::branch_trip(trips[i].first, trips[i].second);
        p.g_scale = opt.g_scale;
        for (const auto& tau : tau_cases) {
            row.abscissa.push_back(j ? spectrum(build_a(*j, tau)).abscissa
                                     : std::numeric_limits<double>::quiet_NaN());
            row.sims.push_back(classify(simulate(c, cal, tau, base, p, opt.sim)));
            if (row.rsa_verdict == CertStatus::RS && row.sims.back().label != SimLabel::Stable)
                row.soundness_violation = true;
        }
    });
    return rep;
}

std::vector<std::pair<std::pair<int, int>, double>> rank_branches_by_flow(const NetworkCase& c,
                                                                           const Equilibrium& eq) {
    using C = std::complex<double>;
    std::vector<std::pair<std::pair<int, int>, double>> out;
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from), t = c.bus_index(br.to);
        const C y = 1.0 / C(br.r, br.x), bc(0.0, br.b_half);
        const C vf = std::polar(eq.v(f), eq.theta(f)), vt = std::polar(eq.v(t), eq.theta(t));
        const C i_f = (y + bc) / (br.tap * br.tap) * vf - y / br.tap * vt;
        const C i_t = (y + bc) * vt - y / br.tap * vf;
        const double s = std::max(std::abs(vf * std::conj(i_f)), std::abs(vt * std::conj(i_t)));
        out.push_back({{br.from, br.to}, s});
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

const char* to_string(SweepKind k) {
    switch (k) {
        case SweepKind::LoadCorrelation: return "kc";
        case SweepKind::PowerFactor: return "pf";
        case SweepKind::ExciterGain: return "gain";
    }
    return "?";
}

SweepKind parse_sweep_kind(const std::string& s) {
    if (s == "kc") return SweepKind::LoadCorrelation;
    if (s == "pf") return SweepKind::PowerFactor;
    if (s == "gain") return SweepKind::ExciterGain;
    throw Error(ErrorKind::Usage, "sweep kind must be kc, pf or gain: " + s);
}

double parse_pf_value(const std::string& s) {
    std::string num = s;
    double sign = 1.0;
    if (s.size() > 3 && s.compare(s.size() - 3, 3, "lag") == 0) {
        num = s.substr(0, s.size() - 3);
    } else if (s.size() > 4 && s.compare(s.size() - 4, 4, "lead") == 0) {
        num = s.substr(0, s.size() - 4);
        sign = -1.0;
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(num, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != num.size() || !(v > 0.0 && v <= 1.0))
        throw Error(ErrorKind::Usage, "power factor must be in (0, 1] with optional lag/lead: " + s);
    return sign * v;
}

std::string format_pf_value(double v) {
    if (std::abs(v) == 1.0) return "1.0";
    return fmt("%g", std::abs(v)) + (v > 0.0 ? "lag" : "lead");
}

SweepReport robust_region_report(const NetworkCase& c, const LoadingScenario& base, SweepKind kind,
                                 const std::vector<double>& values, const SweepOptions& opt) {
    if (kind == SweepKind::LoadCorrelation && base.kind != LoadingScenario::Kind::Correlated)
        throw Error(ErrorKind::Usage, "a k_c sweep needs a correlated scenario");
    SweepReport rep;
    rep.kind = kind;
    rep.scenario = to_string(base);
    rep.cells.resize(values.size());
    const int outer = resolve_jobs(opt.jobs);
    parallel_for(static_cast<int>(values.size()), outer, [&](int i) {
        SweepCell& cell = rep.cells[i];
        cell.value = values[i];
        NetworkCase net = c;
        LoadingScenario s = base;
        switch (kind) {
            case SweepKind::LoadCorrelation: s.k_c = values[i]; break;
            case SweepKind::PowerFactor:
                s.power_factor = std::abs(values[i]);
                s.lagging = values[i] > 0.0;
                s.fixed_q.reset();
                break;
            case SweepKind::ExciterGain:
                for (auto& g : net.generators) g.K_exc = values[i];
                break;
        }
        BoundaryOptions bo = opt.boundary;
        if (kind == SweepKind::ExciterGain) bo.calibration.reset();
        if (outer > 1) bo.jobs = 1;
        try {
            cell.boundary = find_robust_boundary(net, s, bo);
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });
    return rep;
}

namespace {

nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
}

}  // namespace

nlohmann::json to_json(const RsaReport& r) {
    nlohmann::json j;
    j["verdict"] = to_string(r.verdict);
    j["security_indicator"] = num(r.security_indicator);
    j["steps"] = r.steps;
    j["known_states"] = r.n_known_states;
    j["uncertain_states"] = r.n_uncertain_states;
    const auto& c = r.certificate;
    j["certificate"] = {{"rho", num(c.rho)},
                        {"iterations", c.iterations},
                        {"gap", num(c.gap)},
                        {"lmi_max_eig", num(c.residuals.lmi_max_eig)},
                        {"q_min_eig", num(c.residuals.q_min_eig)},
                        {"trace_err", num(c.residuals.trace_err)},
                        {"q_l", std::vector<double>(c.q_l.data(), c.q_l.data() + c.q_l.size())}};
    if (r.fallback) {
        const auto& f = *r.fallback;
        nlohmann::json fb = {{"samples", f.samples},
                             {"worst_abscissa", num(f.worst_abscissa)},
                             {"unstable_samples", f.unstable_samples},
                             {"note", f.note}};
        if (f.hopf)
            fb["hopf"] = {{"load", f.hopf_load}, {"tau", f.hopf->parameter}, {"frequency", f.hopf->frequency}};
        j["fallback"] = fb;
    } else {
        j["fallback"] = nullptr;
    }
    return j;
}

nlohmann::json to_json(const ScreeningReport& r) {
    nlohmann::json j;
    j["seed"] = r.seed;
    for (const auto& t : r.cases) j["cases"].push_back(std::vector<double>(t.tau.data(), t.tau.data() + t.tau.size()));
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json jr = {{"trip", std::to_string(row.trip.first) + "-" + std::to_string(row.trip.second)},
                             {"solved", row.solved},
                             {"rsa", to_string(row.rsa_verdict)},
                             {"rho", num(row.rho)},
                             {"soundness_violation", row.soundness_violation},
                             {"note", row.note}};
        for (std::size_t k = 0; k < row.sims.size(); ++k) {
            const auto& cl = row.sims[k];
            jr["simulations"].push_back({{"label", to_string(cl.label)},
                                         {"collapse", cl.collapse},
                                         {"abscissa", num(row.abscissa[k])},
                                         {"amplitude", cl.amplitude},
                                         {"min_voltage", cl.min_voltage},
                                         {"settle_time", cl.settle_time}});
        }
        j["rows"].push_back(jr);
    }
    return j;
}

nlohmann::json to_json(const SweepReport& r) {
    nlohmann::json j;
    j["kind"] = to_string(r.kind);
    j["scenario"] = r.scenario;
    j["cells"] = nlohmann::json::array();
    for (const auto& c : r.cells) {
        nlohmann::json jc;
        jc["value"] = r.kind == SweepKind::PowerFactor ? nlohmann::json(format_pf_value(c.value)) : nlohmann::json(c.value);
        if (c.boundary) {
            jc["s"] = c.boundary->s_lambda;
            jc["snb"] = c.boundary->snb_lambda;
            jc["margin_pct"] = c.boundary->margin_pct;
        } else {
            jc["error"] = c.error;
        }
        j["cells"].push_back(jc);
    }
    return j;
}

std::string format_table(const ScreeningReport& r) {
    std::ostringstream os;
    os << "# seed " << r.seed << "\n";
    os << "trip";
    for (const auto& row : r.rows) os << "\t" << row.trip.first << "-" << row.trip.second;
    os << "\nRSA";
    for (const auto& row : r.rows) os << "\t" << to_string(row.rsa_verdict);
    os << "\nrho";
    for (const auto& row : r.rows) os << "\t" << fmt("%.3g", row.rho);
    for (std::size_t k = 0; k < r.cases.size(); ++k) {
        os << "\ncase" << k + 1;
        for (const auto& row : r.rows) {
            os << "\t" << to_string(row.sims[k].label);
            if (row.sims[k].collapse) os << "(collapse)";
        }
    }
    os << "\n";
    return os.str();
}

std::string format_table(const SweepReport& r) {
    std::ostringstream os;
    os << to_string(r.kind);
    for (const auto& c : r.cells)
        os << "\t" << (r.kind == SweepKind::PowerFactor ? format_pf_value(c.value) : fmt("%g", c.value));
    const char* names[] = {"S", "SNB", "margin%"};
    for (int row = 0; row < 3; ++row) {
        os << "\n" << names[row];
        for (const auto& c : r.cells) {
            if (!c.boundary) {
                os << "\terror: " << c.error;
                continue;
            }
            const double v = row == 0 ? c.boundary->s_lambda : row == 1 ? c.boundary->snb_lambda : c.boundary->margin_pct;
            os << "\t" << fmt("%.4f", v);
        }
    }
    os << "\n";
    return os.str();
}

}  // namespace robstab
