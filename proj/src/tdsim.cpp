#include "robstab/tdsim.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

namespace robstab {

const char* to_string(SimLabel l) {
    switch (l) {
        case SimLabel::Stable: return "Stable";
        case SimLabel::LimitCycle: return "LimitCycle";
        case SimLabel::Unstable: return "Unstable";
        case SimLabel::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

struct Stepper {
    const DaeModel& m;
    VectorXd d;  // row scaling: 1 for machine states, 1/tau for load states
    int nx, ny;

    VectorXd rate(const VectorXd& x, const VectorXd& y) const { return d.cwiseProduct(m.f(x, y)); }

    // Trapezoidal step from (x0, y0) with stored rate r0; (x, y) hold the
    // initial guess and receive the solution.
    bool solve(const VectorXd& x0, const VectorXd& r0, double h, VectorXd& x, VectorXd& y, double tol,
               int max_iter, double& g_res) const {
        for (int it = 0; it < max_iter; ++it) {
            const VectorXd gv = m.g(x, y);
            VectorXd r(nx + ny);
            r << x - x0 - 0.5 * h * (r0 + rate(x, y)), gv;
            if (!r.allFinite()) return false;
            if (r.lpNorm<Eigen::Infinity>() < tol) {
                g_res = gv.lpNorm<Eigen::Infinity>();
                return true;
            }
            const auto jac = m.jacobian(x, y);
            MatrixXd j(nx + ny, nx + ny);
            j.topLeftCorner(nx, nx) = MatrixXd::Identity(nx, nx) - 0.5 * h * d.asDiagonal() * jac.fx;
            j.topRightCorner(nx, ny) = -0.5 * h * d.asDiagonal() * jac.fy;
            j.bottomLeftCorner(ny, nx) = jac.gx;
            j.bottomRightCorner(ny, ny) = jac.gy;
            const Eigen::PartialPivLU<MatrixXd> lu(j);
            const VectorXd dz = lu.solve(-r);
            if (!dz.allFinite()) return false;
            x += dz.head(nx);
            y += dz.tail(ny);
        }
        return false;
    }
};

bool solve_algebraic(const DaeModel& m, const VectorXd& x, VectorXd& y, double tol) {
    for (int it = 0; it < 30; ++it) {
        const VectorXd r = m.g(x, y);
        if (!r.allFinite()) return false;
        if (r.lpNorm<Eigen::Infinity>() < tol) return true;
        const VectorXd dy = Eigen::PartialPivLU<MatrixXd>(m.jacobian(x, y).gy).solve(-r);
        if (!dy.allFinite()) return false;
        y += dy;
    }
    return false;
}

VectorXd load_voltages(const DaeModel& m, const VectorXd& y) {
    VectorXd v(m.n_load());
    for (int j = 0; j < m.n_load(); ++j) v(j) = y(m.n_bus() + m.load_bus(j));
    return v;
}

}  // namespace

SimTrace simulate(const DaeModel& m, const TauAssignment& tau, const VectorXd& x0_in, const VectorXd& y0_in,
                  const SimOptions& opt) {
    const int nx = m.nx(), ny = m.ny(), ng = m.n_g_states();
    if (x0_in.size() != nx || y0_in.size() != ny || tau.tau.size() != nx - ng)
        throw Error(ErrorKind::DimensionMismatch, "simulation state does not match the model");
    for (Eigen::Index k = 0; k < tau.tau.size(); ++k)
        if (!(tau.tau(k) > 0.0)) throw Error(ErrorKind::Domain, "simulation requires positive time constants");

    Stepper st{m, VectorXd::Ones(nx), nx, ny};
    st.d.tail(nx - ng) = tau.tau.cwiseInverse();

    SimTrace tr;
    for (int j = 0; j < m.n_load(); ++j) tr.load_buses.push_back(m.network().buses[m.load_bus(j)].id);

    VectorXd x = x0_in, y = y0_in;
    if (!solve_algebraic(m, x, y, opt.newton_tol)) {
        tr.t.push_back(0.0);
        tr.states.push_back(x);
        tr.v_loads.push_back(load_voltages(m, y));
        tr.rate.push_back(0.0);
        tr.terminated_early = true;
        tr.reason = "algebraic solve failed at t=0";
        return tr;
    }
    VectorXd r = st.rate(x, y), r_prev;
    double t = 0.0, h = opt.dt, h_prev = 0.0;
    auto record = [&] {
        tr.t.push_back(t);
        tr.states.push_back(x);
        tr.v_loads.push_back(load_voltages(m, y));
        tr.rate.push_back(r.lpNorm<Eigen::Infinity>());
    };
    record();
    tr.max_algebraic_residual = m.g(x, y).lpNorm<Eigen::Infinity>();

    while (t < opt.t_end * (1.0 - 1e-12)) {
        h = std::min({h, opt.dt_max, opt.t_end - t});
        // Explicit predictor: Euler on the first step, variable-step AB2 after.
        VectorXd xp = x + h * r;
        if (h_prev > 0.0) xp += (0.5 * h * h / h_prev) * (r - r_prev);
        VectorXd x1 = xp, y1 = y;
        double g_res = 0.0;
        if (!st.solve(x, r, h, x1, y1, opt.newton_tol, opt.max_newton, g_res)) {
            h *= 0.5;
            if (h < opt.dt_min) {
                tr.terminated_early = true;
                tr.reason = "algebraic Newton failed below dt_min";
                return tr;
            }
            continue;
        }
        const double err = (x1 - xp).lpNorm<Eigen::Infinity>() / 6.0;
        if (err > opt.local_tol && h > opt.dt_min * 1.0001) {
            h = std::max(opt.dt_min, h * std::max(0.2, 0.9 * std::cbrt(opt.local_tol / err)));
            continue;
        }
        r_prev = r;
        h_prev = h;
        t += h;
        x = x1;
        y = y1;
        r = st.rate(x, y);
        tr.max_algebraic_residual = std::max(tr.max_algebraic_residual, g_res);
        record();
        if (tr.v_loads.back().minCoeff() < opt.v_collapse) {
            tr.terminated_early = true;
            tr.reason = "load voltage collapse";
            return tr;
        }
        const double grow = err > 0.0 ? 0.9 * std::cbrt(opt.local_tol / err) : 2.0;
        h *= std::clamp(grow, 0.2, 2.0);
    }
    return tr;
}

SimTrace simulate(const NetworkCase& c, const Calibration& cal, const TauAssignment& tau, const Equilibrium& eq,
                  const Perturbation& p, const SimOptions& opt) {
    NetworkCase net = c;
    Calibration post_cal = cal;
    Equilibrium start = eq;
    if (p.trip) {
        const auto pc = apply_trip(c, cal, eq, p.trip->first, p.trip->second);
        net = pc.net;
        post_cal = pc.cal;
        start = restrict_to(eq, pc);
    }
    const DaeModel m = make_model(net, post_cal, eq.loading, eq.lambda);
    VectorXd x = start.states();
    const int ng = m.n_g_states();
    for (int j = 0; j < m.n_load(); ++j) x(ng + 2 * j) *= p.g_scale;
    if (p.state_offset) {
        if (p.state_offset->size() != x.size())
            throw Error(ErrorKind::DimensionMismatch, "state offset has the wrong length");
        x += *p.state_offset;
    }
    return simulate(m, tau, x, start.algebraic(m), opt);
}

Classification classify(const SimTrace& tr, const ClassifyOptions& opt) {
    Classification cl;
    if (tr.t.empty()) return cl;
    cl.min_voltage = tr.v_loads.front().minCoeff();
    for (const auto& v : tr.v_loads) cl.min_voltage = std::min(cl.min_voltage, v.minCoeff());
    if (tr.terminated_early) {
        cl.label = SimLabel::Unstable;
        cl.collapse = true;
        return cl;
    }

    const double t_end = tr.t.back();
    const double peak = *std::max_element(tr.rate.begin(), tr.rate.end());
    // nothing moves beyond integration noise
    if (peak < 1e-8) {
        cl.label = SimLabel::Stable;
        cl.settle_time = 0.0;
        return cl;
    }
    // Settled: the rate stays under settle_ratio * peak from some time on.
    std::size_t k = tr.rate.size();
    while (k > 0 && tr.rate[k - 1] < opt.settle_ratio * peak) --k;
    if (k < tr.rate.size()) cl.settle_time = tr.t[k];

    const double w0 = t_end * (1.0 - opt.window), wm = t_end * (1.0 - 0.5 * opt.window);
    const int nl = static_cast<int>(tr.v_loads.front().size());
    double a1 = 0.0, a2 = 0.0;
    int crossings = 0;
    for (int j = 0; j < nl; ++j) {
        double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300, mean = 0.0;
        int cnt = 0;
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            if (tr.t[i] < w0) continue;
            const double v = tr.v_loads[i](j);
            mean += v;
            ++cnt;
            if (tr.t[i] < wm) {
                lo1 = std::min(lo1, v);
                hi1 = std::max(hi1, v);
            } else {
                lo2 = std::min(lo2, v);
                hi2 = std::max(hi2, v);
            }
        }
        if (cnt == 0 || hi1 < lo1 || hi2 < lo2) continue;
        mean /= cnt;
        a1 = std::max(a1, hi1 - lo1);
        a2 = std::max(a2, hi2 - lo2);
        int cj = 0;
        double prev = 0.0;
        for (std::size_t i = 0; i < tr.t.size(); ++i) {
            if (tr.t[i] < w0) continue;
            const double dv = tr.v_loads[i](j) - mean;
            if (prev != 0.0 && (dv < 0.0) != (prev < 0.0)) ++cj;
            if (dv != 0.0) prev = dv;
        }
        crossings = std::max(crossings, cj);
    }
    cl.amplitude = a2;

    if (cl.settle_time >= 0.0 && cl.settle_time < t_end) {
        cl.label = SimLabel::Stable;
        return cl;
    }
    if (a2 < opt.amplitude_floor || a1 <= 0.0) return cl;  // undecided
    const bool oscillating = crossings >= 4;
    if (oscillating && std::abs(a2 / a1 - 1.0) < opt.amplitude_band) cl.label = SimLabel::LimitCycle;
    else if (a2 > (1.0 + opt.amplitude_band) * a1) cl.label = SimLabel::Unstable;
    return cl;
}

}  // namespace robstab
