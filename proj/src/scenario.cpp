#include "robstab/scenario.hpp"

#include <cmath>
#include <sstream>

namespace robstab {

namespace {

[[noreturn]] void usage(const std::string& msg) { throw Error(ErrorKind::Usage, msg); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_num(const std::string& s, const std::string& spec) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        usage("scenario '" + spec + "': bad number '" + s + "'");
    }
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

void parse_pf(const std::string& tok, const std::string& spec, LoadingScenario& s) {
    std::string body = tok.substr(2);
    s.lagging = true;
    if (body.size() > 3 && body.ends_with("lag")) {
        body.resize(body.size() - 3);
    } else if (body.size() > 4 && body.ends_with("lead")) {
        body.resize(body.size() - 4);
        s.lagging = false;
    }
    s.power_factor = to_num(body, spec);
    if (!(s.power_factor > 0.0 && s.power_factor <= 1.0))
        usage("scenario '" + spec + "': power factor must lie in (0, 1]");
}

int parse_target(const std::string& tok, const std::string& spec, const NetworkCase& c) {
    if (starts_with(tok, "bus")) {
        const int id = static_cast<int>(to_num(tok.substr(3), spec));
        if (c.load_at_bus(id) < 0) usage("scenario '" + spec + "': no load at bus " + tok.substr(3));
        return id;
    }
    if (starts_with(tok, "load")) {
        const int k = static_cast<int>(to_num(tok.substr(4), spec));
        if (k < 1 || k > static_cast<int>(c.loads.size()))
            usage("scenario '" + spec + "': load index out of range");
        return c.loads[k - 1].bus;
    }
    const int id = static_cast<int>(to_num(tok, spec));
    if (c.load_at_bus(id) < 0) usage("scenario '" + spec + "': no load at bus " + tok);
    return id;
}

int default_reference(const NetworkCase& c, const std::string& spec) {
    if (c.study.reference_bus) return *c.study.reference_bus;
    if (c.loads.empty()) usage("scenario '" + spec + "': case has no loads");
    return c.loads.front().bus;
}

}  // namespace

double LoadingScenario::tan_phi() const {
    const double t = std::sqrt(std::max(0.0, 1.0 - power_factor * power_factor)) / power_factor;
    return lagging ? t : -t;
}

LoadingScenario parse_scenario(const std::string& spec, const NetworkCase& c) {
    const auto parts = split(spec, ':');
    if (parts.empty()) usage("empty scenario");
    LoadingScenario s;
    s.power_factor = c.study.power_factor;
    s.lagging = c.study.lagging;
    const std::string& kind = parts[0];
    if (kind == "single") {
        s.kind = LoadingScenario::Kind::SingleBus;
        if (parts.size() < 2) usage("scenario '" + spec + "': single needs a target bus or load");
        s.bus = parse_target(parts[1], spec, c);
        for (std::size_t i = 2; i < parts.size(); ++i) {
            if (starts_with(parts[i], "pf")) parse_pf(parts[i], spec, s);
            else if (starts_with(parts[i], "q")) s.fixed_q = to_num(parts[i].substr(1), spec);
            else usage("scenario '" + spec + "': unknown token '" + parts[i] + "'");
        }
    } else if (kind == "correlated") {
        s.kind = LoadingScenario::Kind::Correlated;
        s.bus = default_reference(c, spec);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const auto& t = parts[i];
            if (starts_with(t, "ref=")) s.bus = parse_target(t.substr(4), spec, c);
            else if (starts_with(t, "kc=")) s.k_c = to_num(t.substr(3), spec);
            else if (starts_with(t, "pf")) parse_pf(t, spec, s);
            else usage("scenario '" + spec + "': unknown token '" + t + "'");
        }
        if (!(s.k_c >= 0.0)) usage("scenario '" + spec + "': kc must be non-negative");
    } else if (kind == "global") {
        s.kind = LoadingScenario::Kind::GlobalScale;
        s.bus = default_reference(c, spec);
        if (parts.size() > 1) usage("scenario '" + spec + "': global takes no options");
    } else {
        usage("scenario '" + spec + "': kind must be single, correlated or global");
    }
    return s;
}

std::string to_string(const LoadingScenario& s) {
    std::ostringstream os;
    os.precision(12);
    auto pf = [&] {
        os << ":pf" << s.power_factor;
        if (s.power_factor < 1.0) os << (s.lagging ? "lag" : "lead");
    };
    switch (s.kind) {
        case LoadingScenario::Kind::SingleBus:
            os << "single:bus" << s.bus;
            if (s.fixed_q) os << ":q" << *s.fixed_q;
            else pf();
            break;
        case LoadingScenario::Kind::Correlated:
            os << "correlated:ref=" << s.bus << ":kc=" << s.k_c;
            pf();
            break;
        case LoadingScenario::Kind::GlobalScale:
            os << "global";
            break;
    }
    return os.str();
}

LoadLevels load_levels(const NetworkCase& c, const LoadingScenario& s, double lambda) {
    LoadLevels out;
    const double t = s.tan_phi();
    for (const auto& l : c.loads) {
        double p = l.p0;
        double q = l.q0;
        switch (s.kind) {
            case LoadingScenario::Kind::SingleBus:
                if (l.bus == s.bus) {
                    p = lambda;
                    q = s.fixed_q ? *s.fixed_q : lambda * t;
                }
                break;
            case LoadingScenario::Kind::Correlated: {
                const double k = (l.bus == s.bus) ? 1.0 : s.k_c;
                p = k * lambda;
                q = k * lambda * t;
                break;
            }
            case LoadingScenario::Kind::GlobalScale:
                p = lambda * l.p0;
                q = lambda * l.q0;
                break;
        }
        out.p.push_back(p);
        out.q.push_back(q);
    }
    return out;
}

std::vector<double> dispatch_shift(const NetworkCase& c, const LoadingScenario& s, double lambda) {
    std::vector<double> shift(c.generators.size(), 0.0);
    if (c.study.dispatch != Dispatch::Even || c.generators.empty()) return shift;
    const auto lv = load_levels(c, s, lambda);
    double delta = 0.0;
    for (std::size_t i = 0; i < c.loads.size(); ++i) delta += lv.p[i] - c.loads[i].p0;
    for (auto& d : shift) d = delta / static_cast<double>(c.generators.size());
    return shift;
}

double base_lambda(const NetworkCase& c, const LoadingScenario& s) {
    if (s.kind == LoadingScenario::Kind::GlobalScale) return 1.0;
    const int k = c.load_at_bus(s.bus);
    return k >= 0 ? c.loads[k].p0 : 0.0;
}

int default_monitored_bus(const NetworkCase&, const LoadingScenario& s) { return s.bus; }

}  // namespace robstab
