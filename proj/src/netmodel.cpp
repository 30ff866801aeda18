#include "robstab/netmodel.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace robstab {

using nlohmann::json;

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Schema: return "Schema";
        case ErrorKind::Domain: return "Domain";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::SingularJacobian: return "SingularJacobian";
        case ErrorKind::NearSingularAlgebraic: return "NearSingularAlgebraic";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NoCrossing: return "NoCrossing";
        case ErrorKind::NoCoalescence: return "NoCoalescence";
        case ErrorKind::TrackingAmbiguity: return "TrackingAmbiguity";
        case ErrorKind::CertificateViolated: return "CertificateViolated";
        case ErrorKind::Usage: return "Usage";
    }
    return "Unknown";
}

double DynamicLoad::p_static(double v) const { return p0 * std::pow(v, exp_a); }
double DynamicLoad::q_static(double v) const { return q0 * std::pow(v, exp_b); }

Rates load_rhs(const DynamicLoad& load, double g, double b, double v) {
    if (!load.tau_g || !load.tau_b)
        throw Error(ErrorKind::Domain, "load_rhs requires concrete time constant");
    if (!(v > 0.0)) throw Error(ErrorKind::Domain, "load_rhs requires v > 0");
    return {-(g * v * v - load.p_static(v)) / *load.tau_g,
            -(b * v * v - load.q_static(v)) / *load.tau_b};
}

double instantaneous_power_rate(const DynamicLoad& load, double g, double v, double dv) {
    if (!load.tau_g) throw Error(ErrorKind::Domain, "requires concrete time constant");
    if (!(v > 0.0)) throw Error(ErrorKind::Domain, "requires v > 0");
    const double p = g * v * v;
    return 2.0 * (p / v) * dv - (p - load.p_static(v)) * v * v / *load.tau_g;
}

double motor_h(const InductionMotorParams& m, double s) {
    return m.R_m * s / (m.R_m * m.R_m + m.X_m * m.X_m);
}

double motor_dh_ds(const InductionMotorParams& m) {
    return m.R_m / (m.R_m * m.R_m + m.X_m * m.X_m);
}

double motor_slip(const InductionMotorParams& m, double g) {
    const double s = g / motor_dh_ds(m);
    if (!(s > 0.0 && s < 1.0) || !std::isfinite(s))
        throw Error(ErrorKind::Domain, "slip recovery failed");
    return s;
}

double motor_slip_rate(const InductionMotorParams& m, double s, double v) {
    const double alpha = 1.0 / (m.I_inertia * m.omega0 * m.omega0);
    return alpha * (m.P_m / (1.0 - s) - v * v * motor_h(m, s));
}

double motor_as_generic(const InductionMotorParams& m, double g, double v) {
    if (!(m.R_m > 0 && m.X_m > 0 && m.P_m > 0 && m.I_inertia > 0 && m.omega0 > 0))
        throw Error(ErrorKind::Domain, "motor parameters must be positive");
    const double s = motor_slip(m, g);
    const double alpha = 1.0 / (m.I_inertia * m.omega0 * m.omega0);
    return alpha * motor_dh_ds(m) * (m.P_m / (1.0 - s) - g * v * v);
}

double ultc_as_generic(double g_load, double k_ratio, double v, double v_set, double t_tap) {
    const double g_eq = g_load * k_ratio * k_ratio;
    if (!(g_load > 0.0) || !(g_eq > 0.0) || !(t_tap > 0.0))
        throw Error(ErrorKind::Domain, "ULTC conductances and tap time must be positive");
    return -(2.0 / t_tap) * std::sqrt(g_load * g_eq) * (k_ratio * v - v_set);
}

double heating_as_generic(double r_coef, double t_thermal, double p_loss, double g, double v) {
    if (!(g > 0.0) || !(r_coef > 0.0) || !(t_thermal > 0.0))
        throw Error(ErrorKind::Domain, "heating load needs g, r, T > 0");
    return -(r_coef * g * g / t_thermal) * (g * v * v - p_loss);
}

int NetworkCase::bus_index(int id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    throw Error(ErrorKind::Schema, "unknown bus id " + std::to_string(id));
}

int NetworkCase::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
    throw Error(ErrorKind::Schema, "case has no slack bus");
}

int NetworkCase::load_at_bus(int id) const {
    for (std::size_t i = 0; i < loads.size(); ++i)
        if (loads[i].bus == id) return static_cast<int>(i);
    return -1;
}

namespace {

[[noreturn]] void schema(const std::string& msg) { throw Error(ErrorKind::Schema, msg); }

template <class T>
T need(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) schema(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        schema(where + ": bad type for '" + key + "'");
    }
}

template <class T>
T opt(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    return need<T>(j, key, where);
}

TimeConstant parse_tau(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return Uncertain;
    const auto& v = j.at(key);
    if (v.is_string()) {
        if (v.get<std::string>() == "uncertain") return Uncertain;
        schema(where + ": " + key + " must be a number or \"uncertain\"");
    }
    if (!v.is_number()) schema(where + ": " + key + " must be a number or \"uncertain\"");
    const double t = v.get<double>();
    if (!(t > 0.0)) schema(where + ": " + key + " must be positive");
    return t;
}

json tau_json(const TimeConstant& t) {
    return t ? json(*t) : json("uncertain");
}

BusKind parse_kind(const std::string& s, const std::string& where) {
    if (s == "slack" || s == "Slack") return BusKind::Slack;
    if (s == "pv" || s == "PV") return BusKind::PV;
    if (s == "pq" || s == "PQ") return BusKind::PQ;
    schema(where + ": unknown bus kind '" + s + "'");
}

const char* kind_name(BusKind k) {
    switch (k) {
        case BusKind::Slack: return "slack";
        case BusKind::PV: return "pv";
        case BusKind::PQ: return "pq";
    }
    return "pq";
}

void validate(const NetworkCase& c) {
    if (c.buses.empty()) schema("case has no buses");
    std::set<int> ids;
    int slack = 0;
    for (const auto& b : c.buses) {
        if (!ids.insert(b.id).second) schema("duplicate bus id " + std::to_string(b.id));
        if (b.kind == BusKind::Slack) ++slack;
        if (b.kind != BusKind::PQ && !(b.v_setpoint > 0.0))
            schema("bus " + std::to_string(b.id) + ": v_setpoint must be positive");
    }
    if (slack != 1) schema(slack == 0 ? "case has no slack bus" : "duplicate slack bus");
    for (const auto& br : c.branches) {
        const std::string w = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
        if (!ids.count(br.from) || !ids.count(br.to)) schema(w + ": dangling bus reference");
        if (br.from == br.to) schema(w + ": from == to");
        if (br.x == 0.0) schema(w + ": x must be nonzero");
        if (!(br.tap > 0.0)) schema(w + ": tap must be positive");
    }
    std::set<int> gen_buses;
    for (const auto& g : c.generators) {
        const std::string w = "generator at bus " + std::to_string(g.bus);
        if (!ids.count(g.bus)) schema(w + ": dangling bus reference");
        if (!gen_buses.insert(g.bus).second) schema(w + ": more than one generator on bus");
        if (!(g.x_d > g.x_dp && g.x_dp > 0.0)) schema(w + ": need x_d > x_dp > 0");
        if (!(g.T_d0p > 0.0 && g.T_exc > 0.0 && g.K_exc > 0.0))
            schema(w + ": T_d0p, T_exc, K_exc must be positive");
        if (c.buses[c.bus_index(g.bus)].kind == BusKind::PQ)
            schema(w + ": generator must sit on a slack or PV bus");
    }
    for (const auto& b : c.buses)
        if (b.kind != BusKind::PQ && !gen_buses.count(b.id))
            schema("bus " + std::to_string(b.id) + ": slack/PV bus without generator");
    for (const auto& l : c.loads) {
        const std::string w = "load at bus " + std::to_string(l.bus);
        if (!ids.count(l.bus)) schema(w + ": dangling bus reference");
        if (!std::isfinite(l.exp_a) || !std::isfinite(l.exp_b)) schema(w + ": exponents must be finite");
    }
    if (c.study.reference_bus && c.load_at_bus(*c.study.reference_bus) < 0)
        schema("study.reference_bus has no load");
    if (!(c.study.power_factor > 0.0 && c.study.power_factor <= 1.0))
        schema("study.power_factor must lie in (0, 1]");
    if (!(c.s_base > 0.0)) schema("s_base must be positive");
}

}  // namespace

NetworkCase case_from_json(const json& j) {
    if (!j.is_object()) schema("case root must be an object");
    for (const char* key : {"buses", "branches", "generators", "loads", "s_base"})
        if (!j.contains(key)) schema(std::string("missing top-level key '") + key + "'");

    NetworkCase c;
    c.name = opt<std::string>(j, "name", "", "case");
    c.s_base = need<double>(j, "s_base", "case");
    for (const auto& jb : j.at("buses")) {
        Bus b;
        b.id = need<int>(jb, "id", "bus");
        const std::string w = "bus " + std::to_string(b.id);
        b.kind = parse_kind(need<std::string>(jb, "kind", w), w);
        b.v_setpoint = opt<double>(jb, "v_setpoint", 1.0, w);
        b.angle_ref = opt<double>(jb, "angle_ref", 0.0, w);
        c.buses.push_back(b);
    }
    for (const auto& jb : j.at("branches")) {
        Branch br;
        br.from = need<int>(jb, "from", "branch");
        br.to = need<int>(jb, "to", "branch");
        const std::string w = "branch " + std::to_string(br.from) + "-" + std::to_string(br.to);
        br.r = opt<double>(jb, "r", 0.0, w);
        br.x = need<double>(jb, "x", w);
        br.b_half = opt<double>(jb, "b_half", 0.0, w);
        br.tap = opt<double>(jb, "tap", 1.0, w);
        br.in_service = opt<bool>(jb, "in_service", true, w);
        c.branches.push_back(br);
    }
    for (const auto& jg : j.at("generators")) {
        Generator g;
        g.bus = need<int>(jg, "bus", "generator");
        const std::string w = "generator at bus " + std::to_string(g.bus);
        g.x_d = need<double>(jg, "x_d", w);
        g.x_dp = need<double>(jg, "x_dp", w);
        g.T_d0p = need<double>(jg, "T_d0p", w);
        g.T_exc = need<double>(jg, "T_exc", w);
        g.K_exc = need<double>(jg, "K_exc", w);
        g.p_setpoint = opt<double>(jg, "p_setpoint", 0.0, w);
        if (jg.contains("E_r") && !jg.at("E_r").is_null()) g.E_r = need<double>(jg, "E_r", w);
        c.generators.push_back(g);
    }
    for (const auto& jl : j.at("loads")) {
        DynamicLoad l;
        l.bus = need<int>(jl, "bus", "load");
        const std::string w = "load at bus " + std::to_string(l.bus);
        l.p0 = need<double>(jl, "p0", w);
        l.q0 = need<double>(jl, "q0", w);
        l.exp_a = opt<double>(jl, "exp_a", 0.0, w);
        l.exp_b = opt<double>(jl, "exp_b", 0.0, w);
        l.tau_g = parse_tau(jl, "tau_g", w);
        l.tau_b = parse_tau(jl, "tau_b", w);
        c.loads.push_back(l);
    }
    if (j.contains("study")) {
        const auto& js = j.at("study");
        if (js.contains("reference_bus")) c.study.reference_bus = need<int>(js, "reference_bus", "study");
        c.study.power_factor = opt<double>(js, "power_factor", 1.0, "study");
        c.study.lagging = opt<bool>(js, "lagging", true, "study");
        const auto d = opt<std::string>(js, "dispatch", "slack", "study");
        if (d == "slack") c.study.dispatch = Dispatch::Slack;
        else if (d == "even") c.study.dispatch = Dispatch::Even;
        else schema("study.dispatch must be \"slack\" or \"even\"");
    }
    validate(c);
    return c;
}

json case_to_json(const NetworkCase& c) {
    json j;
    j["name"] = c.name;
    j["s_base"] = c.s_base;
    j["buses"] = json::array();
    for (const auto& b : c.buses)
        j["buses"].push_back({{"id", b.id}, {"kind", kind_name(b.kind)},
                              {"v_setpoint", b.v_setpoint}, {"angle_ref", b.angle_ref}});
    j["branches"] = json::array();
    for (const auto& br : c.branches)
        j["branches"].push_back({{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x},
                                 {"b_half", br.b_half}, {"tap", br.tap}, {"in_service", br.in_service}});
    j["generators"] = json::array();
    for (const auto& g : c.generators) {
        json jg = {{"bus", g.bus}, {"x_d", g.x_d}, {"x_dp", g.x_dp}, {"T_d0p", g.T_d0p},
                   {"T_exc", g.T_exc}, {"K_exc", g.K_exc}, {"p_setpoint", g.p_setpoint}};
        if (g.E_r) jg["E_r"] = *g.E_r;
        j["generators"].push_back(jg);
    }
    j["loads"] = json::array();
    for (const auto& l : c.loads)
        j["loads"].push_back({{"bus", l.bus}, {"p0", l.p0}, {"q0", l.q0}, {"exp_a", l.exp_a},
                              {"exp_b", l.exp_b}, {"tau_g", tau_json(l.tau_g)}, {"tau_b", tau_json(l.tau_b)}});
    json js = {{"power_factor", c.study.power_factor}, {"lagging", c.study.lagging},
               {"dispatch", c.study.dispatch == Dispatch::Even ? "even" : "slack"}};
    if (c.study.reference_bus) js["reference_bus"] = *c.study.reference_bus;
    j["study"] = js;
    return j;
}

std::string serialize_case(const NetworkCase& c) { return case_to_json(c).dump(2); }

std::string resolve_case_path(const std::string& name_or_path) {
    namespace fs = std::filesystem;
    if (fs::exists(name_or_path)) return name_or_path;
    for (const fs::path dir : {fs::path("cases"), fs::path(ROBSTAB_CASES_DIR)}) {
        const auto p = dir / (name_or_path + ".json");
        if (fs::exists(p)) return p.string();
    }
    return name_or_path;
}

NetworkCase parse_case(const std::string& path) {
    const auto resolved = resolve_case_path(path);
    std::ifstream in(resolved);
    if (!in) schema("cannot open case file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        schema("case file '" + path + "' is not valid JSON: " + e.what());
    }
    return case_from_json(j);
}

}  // namespace robstab
