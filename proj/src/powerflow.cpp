#include "robstab/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace robstab {

VectorXd Equilibrium::states() const {
    const auto ng = e_prime.size(), nl = g.size();
    VectorXd x(2 * ng + 2 * nl);
    for (Eigen::Index i = 0; i < ng; ++i) {
        x(2 * i) = e_prime(i);
        x(2 * i + 1) = e_fd(i);
    }
    for (Eigen::Index j = 0; j < nl; ++j) {
        x(2 * ng + 2 * j) = g(j);
        x(2 * ng + 2 * j + 1) = b(j);
    }
    return x;
}

VectorXd Equilibrium::algebraic(const DaeModel& m) const {
    const int nb = m.n_bus();
    VectorXd y(m.ny());
    y.head(nb) = theta;
    y.segment(nb, nb) = v;
    for (int i = 0; i < m.n_gen(); ++i)
        if (m.delta_slot(i) >= 0) y(m.delta_slot(i)) = delta_prime(i);
    return y;
}

Equilibrium unpack(const DaeModel& m, const VectorXd& x, const VectorXd& y) {
    const int nb = m.n_bus(), ng = m.n_gen(), nl = m.n_load();
    Equilibrium e;
    e.theta = y.head(nb);
    e.v = y.segment(nb, nb);
    e.e_prime.resize(ng);
    e.e_fd.resize(ng);
    e.delta_prime.resize(ng);
    for (int i = 0; i < ng; ++i) {
        e.e_prime(i) = x(2 * i);
        e.e_fd(i) = x(2 * i + 1);
        e.delta_prime(i) = m.delta(y, i);
    }
    e.g.resize(nl);
    e.b.resize(nl);
    for (int j = 0; j < nl; ++j) {
        e.g(j) = x(2 * ng + 2 * j);
        e.b(j) = x(2 * ng + 2 * j + 1);
    }
    VectorXd r(m.nx() + m.ny());
    r << m.f(x, y), m.g(x, y);
    e.residual = r.lpNorm<Eigen::Infinity>();
    return e;
}

PvSolution solve_pv_powerflow(const NetworkCase& c, const PowerFlowOptions& opt) {
    const int nb = static_cast<int>(c.buses.size());
    const MatrixXc ybus = build_ybus(c);
    std::vector<int> ang, mag;
    VectorXd v = VectorXd::Ones(nb), th = VectorXd::Zero(nb);
    VectorXd p_gen = VectorXd::Zero(nb);
    for (int k = 0; k < nb; ++k) {
        const auto& bus = c.buses[k];
        if (bus.kind != BusKind::Slack) ang.push_back(k);
        if (bus.kind == BusKind::PQ) mag.push_back(k);
        if (bus.kind != BusKind::PQ) v(k) = bus.v_setpoint;
        if (bus.kind == BusKind::Slack) th(k) = bus.angle_ref;
    }
    for (const auto& g : c.generators) p_gen(c.bus_index(g.bus)) += g.p_setpoint;

    const int na = static_cast<int>(ang.size()), nm = static_cast<int>(mag.size());
    auto load_pq = [&](const VectorXd& vv, VectorXd& pl, VectorXd& ql, VectorXd& dpl, VectorXd& dql) {
        pl = ql = dpl = dql = VectorXd::Zero(nb);
        for (const auto& l : c.loads) {
            const int k = c.bus_index(l.bus);
            pl(k) += l.p_static(vv(k));
            ql(k) += l.q_static(vv(k));
            dpl(k) += l.exp_a * l.p0 * std::pow(vv(k), l.exp_a - 1.0);
            dql(k) += l.exp_b * l.q0 * std::pow(vv(k), l.exp_b - 1.0);
        }
    };

    MatrixXc ds_da, ds_dv;
    VectorXc s;
    VectorXd pl, ql, dpl, dql;
    bool converged = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
        power_derivatives(ybus, th, v, ds_da, ds_dv, s);
        load_pq(v, pl, ql, dpl, dql);
        VectorXd mis(na + nm);
        for (int a = 0; a < na; ++a) mis(a) = s(ang[a]).real() + pl(ang[a]) - p_gen(ang[a]);
        for (int b = 0; b < nm; ++b) mis(na + b) = s(mag[b]).imag() + ql(mag[b]);
        if (mis.size() == 0 || mis.lpNorm<Eigen::Infinity>() < opt.tol) {
            converged = true;
            break;
        }
        if (it == opt.max_iter) break;
        MatrixXd jac(na + nm, na + nm);
        for (int r = 0; r < na; ++r) {
            for (int q = 0; q < na; ++q) jac(r, q) = ds_da(ang[r], ang[q]).real();
            for (int q = 0; q < nm; ++q)
                jac(r, na + q) = ds_dv(ang[r], mag[q]).real() + (ang[r] == mag[q] ? dpl(mag[q]) : 0.0);
        }
        for (int r = 0; r < nm; ++r) {
            for (int q = 0; q < na; ++q) jac(na + r, q) = ds_da(mag[r], ang[q]).imag();
            for (int q = 0; q < nm; ++q)
                jac(na + r, na + q) = ds_dv(mag[r], mag[q]).imag() + (r == q ? dql(mag[q]) : 0.0);
        }
        Eigen::PartialPivLU<MatrixXd> lu(jac);
        if (!(lu.rcond() > 1e-14)) throw Error(ErrorKind::SingularJacobian, "power-flow Jacobian is singular");
        const VectorXd dx = lu.solve(-mis);
        for (int a = 0; a < na; ++a) th(ang[a]) += dx(a);
        for (int b = 0; b < nm; ++b) v(mag[b]) += dx(na + b);
    }
    if (!converged || !v.allFinite())
        throw Error(ErrorKind::NoConvergence, "base-case power flow did not converge");

    PvSolution out;
    out.v = v;
    out.theta = th;
    out.s_gen.resize(static_cast<Eigen::Index>(c.generators.size()));
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        const int k = c.bus_index(c.generators[i].bus);
        out.s_gen(static_cast<Eigen::Index>(i)) = s(k) + std::complex<double>(pl(k), ql(k));
    }
    return out;
}

Equilibrium init_dynamic_states(const NetworkCase& c, const PvSolution& pf, Calibration* cal_out) {
    const int ng = static_cast<int>(c.generators.size());
    const int nl = static_cast<int>(c.loads.size());
    Equilibrium e;
    e.v = pf.v;
    e.theta = pf.theta;
    e.e_prime.resize(ng);
    e.delta_prime.resize(ng);
    e.e_fd.resize(ng);
    Calibration cal;
    const int slack = c.slack_index();
    for (int i = 0; i < ng; ++i) {
        const auto& gen = c.generators[i];
        const int k = c.bus_index(gen.bus);
        const std::complex<double> vt = std::polar(pf.v(k), pf.theta(k));
        const std::complex<double> cur = std::conj(pf.s_gen(i) / vt);
        const std::complex<double> ep = vt + std::complex<double>(0.0, gen.x_dp) * cur;
        if (!(std::abs(ep) > 0.0))
            throw Error(ErrorKind::Domain, "inconsistent generator terminal conditions");
        e.e_prime(i) = std::abs(ep);
        e.delta_prime(i) = std::arg(ep);
        e.e_fd(i) = (gen.x_d / gen.x_dp) * e.e_prime(i) -
                    ((gen.x_d - gen.x_dp) / gen.x_dp) * pf.v(k) * std::cos(pf.theta(k) - e.delta_prime(i));
        cal.E_r.push_back(gen.E_r ? *gen.E_r : pf.v(k) + e.e_fd(i) / gen.K_exc);
        cal.P_m.push_back(pf.s_gen(i).real());
        if (k == slack) cal.delta_ref = e.delta_prime(i);
    }
    e.g.resize(nl);
    e.b.resize(nl);
    for (int j = 0; j < nl; ++j) {
        const auto& l = c.loads[j];
        const double vk = pf.v(c.bus_index(l.bus));
        e.g(j) = l.p_static(vk) / (vk * vk);
        e.b(j) = l.q_static(vk) / (vk * vk);
    }
    DaeModel m(c, cal);
    const VectorXd x = e.states(), y = e.algebraic(m);
    VectorXd r(m.nx() + m.ny());
    r << m.f(x, y), m.g(x, y);
    e.residual = r.lpNorm<Eigen::Infinity>();
    if (cal_out) *cal_out = cal;
    return e;
}

Calibration calibrate(const NetworkCase& c) {
    Calibration cal;
    init_dynamic_states(c, solve_pv_powerflow(c), &cal);
    return cal;
}

DaeModel make_model(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s, double lambda) {
    DaeModel m(c, cal);
    const auto lv = load_levels(c, s, lambda);
    m.set_demand(lv.p, lv.q);
    m.set_mech_shift(dispatch_shift(c, s, lambda));
    return m;
}

namespace {

VectorXd residual(const DaeModel& m, const VectorXd& z) {
    const VectorXd x = z.head(m.nx()), y = z.tail(m.ny());
    VectorXd r(z.size());
    r << m.f(x, y), m.g(x, y);
    return r;
}

MatrixXd full_jacobian(const DaeModel& m, const VectorXd& z) {
    const auto J = m.jacobian(z.head(m.nx()), z.tail(m.ny()));
    const int nx = m.nx(), ny = m.ny();
    MatrixXd out(nx + ny, nx + ny);
    out << J.fx, J.fy, J.gx, J.gy;
    return out;
}

// Newton with residual backtracking; returns false instead of throwing so
// that continuation can shrink its step.
bool newton(const DaeModel& m, VectorXd& z, const PowerFlowOptions& opt, bool* singular = nullptr) {
    VectorXd r = residual(m, z);
    double rn = r.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < opt.max_iter; ++it) {
        if (rn < opt.tol) return true;
        Eigen::PartialPivLU<MatrixXd> lu(full_jacobian(m, z));
        if (!(lu.rcond() > 1e-15)) {
            if (singular) *singular = true;
            return false;
        }
        const VectorXd dz = lu.solve(-r);
        double step = 1.0;
        for (int k = 0; k < 8; ++k, step *= 0.5) {
            const VectorXd zt = z + step * dz;
            const VectorXd rt = residual(m, zt);
            const double rtn = rt.lpNorm<Eigen::Infinity>();
            if (std::isfinite(rtn) && (rtn < rn || k == 7)) {
                z = zt;
                r = rt;
                rn = rtn;
                break;
            }
        }
        if (!std::isfinite(rn)) return false;
    }
    return rn < opt.tol;
}

VectorXd pack(const DaeModel& m, const Equilibrium& e) {
    VectorXd z(m.nx() + m.ny());
    z << e.states(), e.algebraic(m);
    return z;
}

bool low_voltage(const DaeModel& m, const VectorXd& z) {
    return z.segment(m.nx() + m.n_bus(), m.n_bus()).minCoeff() < 0.05;
}

}  // namespace

Equilibrium solve_equilibrium(const DaeModel& m, const Equilibrium& guess, const PowerFlowOptions& opt) {
    VectorXd z = pack(m, guess);
    bool singular = false;
    if (!newton(m, z, opt, &singular) || low_voltage(m, z)) {
        if (singular) throw Error(ErrorKind::SingularJacobian, "equilibrium Jacobian is singular");
        throw Error(ErrorKind::NoConvergence, "equilibrium Newton did not converge");
    }
    return unpack(m, z.head(m.nx()), z.tail(m.ny()));
}

Equilibrium solve_powerflow(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                            double lambda, const Equilibrium* warm, const PowerFlowOptions& opt) {
    DaeModel m = make_model(c, cal, s, lambda);
    if (warm) {
        VectorXd z = pack(m, *warm);
        if (newton(m, z, opt) && !low_voltage(m, z)) {
            auto e = unpack(m, z.head(m.nx()), z.tail(m.ny()));
            e.lambda = lambda;
            e.loading = s;
            return e;
        }
    }

    // Homotopy from the calibrated base point towards the target demand.
    DaeModel base(c, cal);
    VectorXd z = pack(base, init_dynamic_states(c, solve_pv_powerflow(c)));
    if (!newton(base, z, opt))
        throw Error(ErrorKind::NoConvergence, "base equilibrium did not converge");
    const auto target = load_levels(c, s, lambda);
    const auto shift = dispatch_shift(c, s, lambda);
    std::vector<double> p0(c.loads.size()), q0(c.loads.size());
    for (std::size_t j = 0; j < c.loads.size(); ++j) {
        p0[j] = c.loads[j].p0;
        q0[j] = c.loads[j].q0;
    }
    double t = 0.0, dt = 1.0;
    while (t < 1.0) {
        const double tn = std::min(1.0, t + dt);
        std::vector<double> p(p0.size()), q(q0.size()), sh(shift.size());
        for (std::size_t j = 0; j < p.size(); ++j) {
            p[j] = p0[j] + tn * (target.p[j] - p0[j]);
            q[j] = q0[j] + tn * (target.q[j] - q0[j]);
        }
        for (std::size_t i = 0; i < sh.size(); ++i) sh[i] = tn * shift[i];
        base.set_demand(p, q);
        base.set_mech_shift(sh);
        VectorXd zt = z;
        if (newton(base, zt, opt) && !low_voltage(base, zt)) {
            z = zt;
            t = tn;
            dt = std::min(1.0, 2.0 * dt);
        } else {
            dt *= 0.5;
            if (dt < 1e-4)
                throw Error(ErrorKind::NoConvergence,
                            "no equilibrium reached at lambda=" + std::to_string(lambda));
        }
    }
    auto e = unpack(m, z.head(m.nx()), z.tail(m.ny()));
    e.lambda = lambda;
    e.loading = s;
    return e;
}

Equilibrium solve_powerflow(const NetworkCase& c, const LoadingScenario& s, double lambda,
                            const Equilibrium* warm, const PowerFlowOptions& opt) {
    return solve_powerflow(c, calibrate(c), s, lambda, warm, opt);
}

namespace {

struct ArcPoint {
    VectorXd z;
    double lambda = 0.0;
    VectorXd tangent;  // over [z; lambda]
};

VectorXd dr_dlambda(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                    const VectorXd& z, double lambda) {
    // Demand and dispatch are affine in lambda, so a unit difference is exact.
    const DaeModel m0 = make_model(c, cal, s, lambda);
    const DaeModel m1 = make_model(c, cal, s, lambda + 1.0);
    return residual(m1, z) - residual(m0, z);
}

VectorXd tangent_at(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                    const VectorXd& z, double lambda, const VectorXd& prev) {
    const DaeModel m = make_model(c, cal, s, lambda);
    const auto n = z.size();
    MatrixXd a(n + 1, n + 1);
    a.topLeftCorner(n, n) = full_jacobian(m, z);
    a.topRightCorner(n, 1) = dr_dlambda(c, cal, s, z, lambda);
    a.bottomRows(1) = prev.transpose();
    VectorXd rhs = VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    VectorXd t = a.partialPivLu().solve(rhs);
    return t / t.norm();
}

// Pseudo-arclength corrector from `from` along its tangent by arclength h.
bool corrector(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
               const ArcPoint& from, double h, ArcPoint& out) {
    const auto n = from.z.size();
    VectorXd w(n + 1);
    w << from.z, from.lambda;
    const VectorXd wp = w + h * from.tangent;
    VectorXd wk = wp;
    for (int it = 0; it < 30; ++it) {
        const double lam = wk(n);
        const DaeModel m = make_model(c, cal, s, lam);
        const VectorXd z = wk.head(n);
        VectorXd r(n + 1);
        r << residual(m, z), from.tangent.dot(wk - wp);
        if (!r.allFinite()) return false;
        if (r.lpNorm<Eigen::Infinity>() < 1e-10) {
            if (low_voltage(m, z)) return false;
            out.z = z;
            out.lambda = lam;
            out.tangent = tangent_at(c, cal, s, z, lam, from.tangent);
            return true;
        }
        MatrixXd a(n + 1, n + 1);
        a.topLeftCorner(n, n) = full_jacobian(m, z);
        a.topRightCorner(n, 1) = dr_dlambda(c, cal, s, z, lam);
        a.bottomRows(1) = from.tangent.transpose();
        Eigen::PartialPivLU<MatrixXd> lu(a);
        if (!(lu.rcond() > 1e-15)) return false;
        wk -= lu.solve(r);
    }
    return false;
}

}  // namespace

NoseCurve trace_nose(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                     double lambda_start, const TraceOptions& opt) {
    NoseCurve curve;
    curve.monitored_bus = opt.monitored_bus.value_or(default_monitored_bus(c, s));
    const int mon = c.bus_index(curve.monitored_bus);

    const Equilibrium e0 = solve_powerflow(c, cal, s, lambda_start);
    const DaeModel m0 = make_model(c, cal, s, lambda_start);
    const auto n = m0.nx() + m0.ny();
    const int nx = m0.nx(), nb = m0.n_bus();
    auto record = [&](const ArcPoint& p) {
        const DaeModel m = make_model(c, cal, s, p.lambda);
        auto e = unpack(m, p.z.head(nx), p.z.tail(m.ny()));
        e.lambda = p.lambda;
        e.loading = s;
        curve.points.push_back({p.lambda, p.z(nx + nb + mon), std::move(e)});
    };

    ArcPoint cur;
    cur.z = pack(m0, e0);
    cur.lambda = lambda_start;
    VectorXd seed = VectorXd::Zero(n + 1);
    seed(n) = 1.0;
    cur.tangent = tangent_at(c, cal, s, cur.z, cur.lambda, seed);
    if (cur.tangent(n) < 0) cur.tangent = -cur.tangent;
    record(cur);

    double h = opt.step;
    for (int guard = 0; guard < 20000; ++guard) {
        ArcPoint next;
        if (!corrector(c, cal, s, cur, h, next)) {
            h *= 0.5;
            if (h < opt.min_step) {
                // Corrector breakdown before a detected fold.
                curve.snb_lambda = cur.lambda;
                curve.snb_bracket = h;
                return curve;
            }
            continue;
        }
        if (next.tangent(n) > 0.0 && next.lambda > cur.lambda) {
            cur = next;
            record(cur);
            h = std::min(opt.max_step, 1.5 * h);
            continue;
        }

        // Fold between cur (lambda rising) and next (lambda falling): bisect
        // on arclength for the sign change of dlambda/ds.
        double lo = 0.0, hi = h;
        ArcPoint best_lo = cur, best_hi = next;
        for (int k = 0; k < 60 && hi - lo > 1e-9 * (1.0 + h); ++k) {
            const double mid = 0.5 * (lo + hi);
            ArcPoint pm;
            if (!corrector(c, cal, s, cur, mid, pm)) {
                hi = mid;
                continue;
            }
            if (pm.tangent(n) > 0.0) {
                lo = mid;
                best_lo = pm;
            } else {
                hi = mid;
                best_hi = pm;
            }
        }
        const double lam_top = std::max(best_lo.lambda, best_hi.lambda);
        curve.snb_lambda = lam_top;
        curve.snb_bracket = std::abs(best_lo.lambda - best_hi.lambda) + (hi - lo);
        if (best_lo.lambda > curve.points.back().lambda) record(best_lo);
        return curve;
    }
    curve.snb_lambda = cur.lambda;
    curve.snb_bracket = h;
    return curve;
}

NoseCurve trace_nose(const NetworkCase& c, const LoadingScenario& s, double lambda_start, double step) {
    TraceOptions opt;
    opt.step = step;
    return trace_nose(c, calibrate(c), s, lambda_start, opt);
}

NetworkCase with_branch_tripped(const NetworkCase& c, int from, int to) {
    NetworkCase out = c;
    for (auto& br : out.branches) {
        if (br.in_service && ((br.from == from && br.to == to) || (br.from == to && br.to == from))) {
            br.in_service = false;
            return out;
        }
    }
    throw Error(ErrorKind::Schema,
                "no in-service branch " + std::to_string(from) + "-" + std::to_string(to));
}

bool is_connected(const NetworkCase& c) {
    const int nb = static_cast<int>(c.buses.size());
    std::vector<std::vector<int>> adj(nb);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from), t = c.bus_index(br.to);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<bool> seen(nb, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int count = 1;
    while (!q.empty()) {
        const int k = q.front();
        q.pop();
        for (int nb2 : adj[k])
            if (!seen[nb2]) {
                seen[nb2] = true;
                ++count;
                q.push(nb2);
            }
    }
    return count == nb;
}

namespace {

std::vector<int> components(const NetworkCase& c) {
    const int nb = static_cast<int>(c.buses.size());
    std::vector<std::vector<int>> adj(nb);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from), t = c.bus_index(br.to);
        adj[f].push_back(t);
        adj[t].push_back(f);
    }
    std::vector<int> comp(nb, -1);
    int label = 0;
    for (int s = 0; s < nb; ++s) {
        if (comp[s] >= 0) continue;
        std::queue<int> q;
        q.push(s);
        comp[s] = label;
        while (!q.empty()) {
            const int k = q.front();
            q.pop();
            for (int n : adj[k])
                if (comp[n] < 0) {
                    comp[n] = label;
                    q.push(n);
                }
        }
        ++label;
    }
    return comp;
}

}  // namespace

PostContingency apply_trip(const NetworkCase& c, const Calibration& cal, const Equilibrium& pre, int from, int to) {
    const NetworkCase tripped = with_branch_tripped(c, from, to);
    const auto comp = components(tripped);
    const int nb = static_cast<int>(c.buses.size());

    // Keep the component holding the most buses; everything else must be a
    // lone generator bus with no load.
    std::vector<int> size(nb, 0);
    for (int k : comp) ++size[k];
    const int main = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    PostContingency pc;
    for (int k = 0; k < nb; ++k) {
        if (comp[k] == main) {
            pc.kept_buses.push_back(k);
            continue;
        }
        const int id = c.buses[k].id;
        const bool has_gen = std::any_of(c.generators.begin(), c.generators.end(),
                                         [&](const Generator& g) { return g.bus == id; });
        if (size[comp[k]] != 1 || !has_gen || c.load_at_bus(id) >= 0)
            throw Error(ErrorKind::Domain, "branch " + std::to_string(from) + "-" + std::to_string(to) +
                                               " islands part of the network");
    }

    NetworkCase& n = pc.net;
    n = tripped;
    n.buses.clear();
    for (int k : pc.kept_buses) n.buses.push_back(c.buses[k]);
    auto kept_id = [&](int id) {
        return std::any_of(n.buses.begin(), n.buses.end(), [&](const Bus& b) { return b.id == id; });
    };
    n.branches.erase(std::remove_if(n.branches.begin(), n.branches.end(),
                                    [&](const Branch& b) { return !kept_id(b.from) || !kept_id(b.to); }),
                     n.branches.end());
    n.generators.clear();
    pc.cal.delta_ref = cal.delta_ref;
    for (std::size_t i = 0; i < c.generators.size(); ++i) {
        if (!kept_id(c.generators[i].bus)) continue;
        pc.kept_generators.push_back(static_cast<int>(i));
        n.generators.push_back(c.generators[i]);
        pc.cal.E_r.push_back(cal.E_r[i]);
        pc.cal.P_m.push_back(cal.P_m[i]);
    }
    if (n.generators.empty()) throw Error(ErrorKind::Domain, "outage leaves no generator in service");

    const bool has_slack =
        std::any_of(n.buses.begin(), n.buses.end(), [](const Bus& b) { return b.kind == BusKind::Slack; });
    if (!has_slack) {
        const int ref = n.generators.front().bus;
        for (auto& b : n.buses)
            if (b.id == ref) b.kind = BusKind::Slack;
        pc.cal.delta_ref = pre.delta_prime(pc.kept_generators.front());
    }
    return pc;
}

Equilibrium restrict_to(const Equilibrium& pre, const PostContingency& pc) {
    Equilibrium e = pre;
    const int nb = static_cast<int>(pc.kept_buses.size());
    const int ng = static_cast<int>(pc.kept_generators.size());
    e.v.resize(nb);
    e.theta.resize(nb);
    for (int k = 0; k < nb; ++k) {
        e.v(k) = pre.v(pc.kept_buses[k]);
        e.theta(k) = pre.theta(pc.kept_buses[k]);
    }
    e.e_prime.resize(ng);
    e.delta_prime.resize(ng);
    e.e_fd.resize(ng);
    for (int i = 0; i < ng; ++i) {
        e.e_prime(i) = pre.e_prime(pc.kept_generators[i]);
        e.delta_prime(i) = pre.delta_prime(pc.kept_generators[i]);
        e.e_fd(i) = pre.e_fd(pc.kept_generators[i]);
    }
    return e;
}

}  // namespace robstab
