#include "robstab/dae.hpp"

#include <cmath>

namespace robstab {

MatrixXc build_ybus(const NetworkCase& c) {
    const int nb = static_cast<int>(c.buses.size());
    MatrixXc y = MatrixXc::Zero(nb, nb);
    const std::complex<double> j(0.0, 1.0);
    for (const auto& br : c.branches) {
        if (!br.in_service) continue;
        const int f = c.bus_index(br.from);
        const int t = c.bus_index(br.to);
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const double a = br.tap;
        y(f, f) += (ys + j * br.b_half) / (a * a);
        y(t, t) += ys + j * br.b_half;
        y(f, t) -= ys / a;
        y(t, f) -= ys / a;
    }
    return y;
}

void power_derivatives(const MatrixXc& ybus, const VectorXd& theta, const VectorXd& v,
                       MatrixXc& ds_da, MatrixXc& ds_dv, VectorXc& s) {
    const auto nb = theta.size();
    VectorXc vc(nb), vn(nb);
    for (Eigen::Index k = 0; k < nb; ++k) {
        vc(k) = std::polar(v(k), theta(k));
        vn(k) = std::polar(1.0, theta(k));
    }
    const VectorXc ibus = ybus * vc;
    s = vc.cwiseProduct(ibus.conjugate());
    const std::complex<double> jj(0.0, 1.0);
    ds_da = -(ybus * vc.asDiagonal()).conjugate();
    ds_da.diagonal() += ibus.conjugate();
    ds_da = (jj * vc).asDiagonal() * ds_da;
    ds_dv = vc.asDiagonal() * (ybus * vn.asDiagonal()).conjugate();
    ds_dv.diagonal() += ibus.conjugate().cwiseProduct(vn);
}

DaeModel::DaeModel(const NetworkCase& c, Calibration cal)
    : case_(c), cal_(std::move(cal)), ybus_(build_ybus(c)) {
    const int slack_bus = c.slack_index();
    int next = 2 * n_bus();
    for (int i = 0; i < n_gen(); ++i) {
        gen_bus_.push_back(c.bus_index(c.generators[i].bus));
        if (gen_bus_.back() == slack_bus) {
            slack_gen_ = i;
            slot_.push_back(-1);
        } else {
            slot_.push_back(next++);
        }
    }
    for (const auto& l : c.loads) {
        load_bus_.push_back(c.bus_index(l.bus));
        p_.push_back(l.p0);
        q_.push_back(l.q0);
    }
    shift_.assign(n_gen(), 0.0);
    if (static_cast<int>(cal_.E_r.size()) != n_gen() || static_cast<int>(cal_.P_m.size()) != n_gen())
        throw Error(ErrorKind::DimensionMismatch, "calibration does not match generator count");
}

void DaeModel::set_demand(const std::vector<double>& p, const std::vector<double>& q) {
    if (static_cast<int>(p.size()) != n_load() || static_cast<int>(q.size()) != n_load())
        throw Error(ErrorKind::DimensionMismatch, "demand vector does not match load count");
    p_ = p;
    q_ = q;
}

void DaeModel::set_mech_shift(const std::vector<double>& shift) {
    if (static_cast<int>(shift.size()) != n_gen())
        throw Error(ErrorKind::DimensionMismatch, "dispatch vector does not match generator count");
    shift_ = shift;
}

int DaeModel::delta_slot(int i) const { return slot_[i]; }

double DaeModel::delta(const VectorXd& y, int i) const {
    return slot_[i] < 0 ? cal_.delta_ref : y(slot_[i]);
}

VectorXd DaeModel::f(const VectorXd& x, const VectorXd& y) const {
    VectorXd out(nx());
    const int nb = n_bus();
    for (int i = 0; i < n_gen(); ++i) {
        const auto& gen = case_.generators[i];
        const int k = gen_bus_[i];
        const double ep = x(2 * i), efd = x(2 * i + 1);
        const double v = y(nb + k), th = y(k), d = delta(y, i);
        const double c = (gen.x_d - gen.x_dp) / gen.x_dp;
        out(2 * i) = (-(gen.x_d / gen.x_dp) * ep + c * v * std::cos(th - d) + efd) / gen.T_d0p;
        out(2 * i + 1) = (-efd - gen.K_exc * (v - cal_.E_r[i])) / gen.T_exc;
    }
    const int off = 2 * n_gen();
    for (int j = 0; j < n_load(); ++j) {
        const auto& l = case_.loads[j];
        const double v = y(nb + load_bus_[j]);
        const double v2 = v * v;
        out(off + 2 * j) = -(x(off + 2 * j) * v2 - p_[j] * std::pow(v, l.exp_a));
        out(off + 2 * j + 1) = -(x(off + 2 * j + 1) * v2 - q_[j] * std::pow(v, l.exp_b));
    }
    return out;
}

VectorXd DaeModel::g(const VectorXd& x, const VectorXd& y) const {
    const int nb = n_bus();
    VectorXc vc(nb);
    for (int k = 0; k < nb; ++k) vc(k) = std::polar(y(nb + k), y(k));
    const VectorXc s = vc.cwiseProduct((ybus_ * vc).conjugate());
    VectorXd out = VectorXd::Zero(ny());
    for (int k = 0; k < nb; ++k) {
        out(k) = -s(k).real();
        out(nb + k) = -s(k).imag();
    }
    for (int i = 0; i < n_gen(); ++i) {
        const auto& gen = case_.generators[i];
        const int k = gen_bus_[i];
        const double ep = x(2 * i), v = y(nb + k), a = delta(y, i) - y(k);
        const double pe = ep * v * std::sin(a) / gen.x_dp;
        out(k) += pe;
        out(nb + k) += (ep * v * std::cos(a) - v * v) / gen.x_dp;
        if (slot_[i] >= 0) out(slot_[i]) = pe - mech_power(i);
    }
    const int off = 2 * n_gen();
    for (int j = 0; j < n_load(); ++j) {
        const int k = load_bus_[j];
        const double v2 = y(nb + k) * y(nb + k);
        out(k) -= x(off + 2 * j) * v2;
        out(nb + k) -= x(off + 2 * j + 1) * v2;
    }
    return out;
}

DaeModel::Jacobian DaeModel::jacobian(const VectorXd& x, const VectorXd& y) const {
    const int nb = n_bus();
    Jacobian J{MatrixXd::Zero(nx(), nx()), MatrixXd::Zero(nx(), ny()),
               MatrixXd::Zero(ny(), nx()), MatrixXd::Zero(ny(), ny())};

    // Generator differential rows.
    for (int i = 0; i < n_gen(); ++i) {
        const auto& gen = case_.generators[i];
        const int k = gen_bus_[i];
        const double v = y(nb + k), th = y(k), d = delta(y, i);
        const double c = (gen.x_d - gen.x_dp) / gen.x_dp;
        const int r = 2 * i;
        J.fx(r, r) = -(gen.x_d / gen.x_dp) / gen.T_d0p;
        J.fx(r, r + 1) = 1.0 / gen.T_d0p;
        J.fy(r, nb + k) = c * std::cos(th - d) / gen.T_d0p;
        J.fy(r, k) = -c * v * std::sin(th - d) / gen.T_d0p;
        if (slot_[i] >= 0) J.fy(r, slot_[i]) = c * v * std::sin(th - d) / gen.T_d0p;
        J.fx(r + 1, r + 1) = -1.0 / gen.T_exc;
        J.fy(r + 1, nb + k) = -gen.K_exc / gen.T_exc;
    }

    // Load differential rows (numerators only).
    const int off = 2 * n_gen();
    for (int j = 0; j < n_load(); ++j) {
        const auto& l = case_.loads[j];
        const int k = load_bus_[j];
        const double v = y(nb + k);
        const int r = off + 2 * j;
        J.fx(r, r) = -v * v;
        J.fx(r + 1, r + 1) = -v * v;
        J.fy(r, nb + k) = -2.0 * x(r) * v + l.exp_a * p_[j] * std::pow(v, l.exp_a - 1.0);
        J.fy(r + 1, nb + k) = -2.0 * x(r + 1) * v + l.exp_b * q_[j] * std::pow(v, l.exp_b - 1.0);
    }

    // Network part of the algebraic rows: -dS/dtheta, -dS/dV.
    MatrixXc ds_da, ds_dv;
    VectorXc sinj;
    power_derivatives(ybus_, y.head(nb), y.segment(nb, nb), ds_da, ds_dv, sinj);
    J.gy.block(0, 0, nb, nb) = -ds_da.real();
    J.gy.block(0, nb, nb, nb) = -ds_dv.real();
    J.gy.block(nb, 0, nb, nb) = -ds_da.imag();
    J.gy.block(nb, nb, nb, nb) = -ds_dv.imag();

    for (int i = 0; i < n_gen(); ++i) {
        const auto& gen = case_.generators[i];
        const int k = gen_bus_[i];
        const double ep = x(2 * i), v = y(nb + k), a = delta(y, i) - y(k);
        const double s = std::sin(a), co = std::cos(a), xd = gen.x_dp;
        // P_e = E' V sin(a) / x'd,  Q_e = (E' V cos(a) - V^2) / x'd,  a = delta - theta
        const double dp_de = v * s / xd, dp_dv = ep * s / xd, dp_da = ep * v * co / xd;
        const double dq_de = v * co / xd, dq_dv = (ep * co - 2.0 * v) / xd, dq_da = -ep * v * s / xd;
        J.gx(k, 2 * i) += dp_de;
        J.gy(k, nb + k) += dp_dv;
        J.gy(k, k) -= dp_da;
        J.gx(nb + k, 2 * i) += dq_de;
        J.gy(nb + k, nb + k) += dq_dv;
        J.gy(nb + k, k) -= dq_da;
        if (slot_[i] >= 0) {
            const int c = slot_[i];
            J.gy(k, c) += dp_da;
            J.gy(nb + k, c) += dq_da;
            J.gx(c, 2 * i) = dp_de;
            J.gy(c, nb + k) = dp_dv;
            J.gy(c, k) = -dp_da;
            J.gy(c, c) = dp_da;
        }
    }
    for (int j = 0; j < n_load(); ++j) {
        const int k = load_bus_[j];
        const double v = y(nb + k);
        const int r = off + 2 * j;
        J.gx(k, r) -= v * v;
        J.gx(nb + k, r + 1) -= v * v;
        J.gy(k, nb + k) -= 2.0 * x(r) * v;
        J.gy(nb + k, nb + k) -= 2.0 * x(r + 1) * v;
    }
    return J;
}

}  // namespace robstab
