#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "robstab/netmodel.hpp"

namespace robstab {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

// Quantities fixed by the base-case initialization and held while the load
// level varies.
struct Calibration {
    std::vector<double> E_r;   // exciter references
    std::vector<double> P_m;   // mechanical power at base dispatch
    double delta_ref = 0.0;    // internal angle of the slack machine
};

MatrixXc build_ybus(const NetworkCase& c);

// Partial derivatives of the complex bus injections S = V .* conj(Y V) with
// respect to bus angles and magnitudes.
void power_derivatives(const MatrixXc& ybus, const VectorXd& theta, const VectorXd& v,
                       MatrixXc& ds_da, MatrixXc& ds_dv, VectorXc& s);

// Semi-explicit DAE of the whole plant:
//   states    x = [E'_1, E_fd_1, ..., E'_nG, E_fd_nG, g_1, b_1, ..., g_nL, b_nL]
//   algebraic y = [theta_1..theta_nb, V_1..V_nb, delta'_i for non-slack machines]
// Generator rows carry their own time constants. Load rows are the bare
// numerators -(g V^2 - P^s) so that the load time constants factor out.
class DaeModel {
public:
    DaeModel(const NetworkCase& c, Calibration cal);

    int n_gen() const { return static_cast<int>(case_.generators.size()); }
    int n_load() const { return static_cast<int>(case_.loads.size()); }
    int n_bus() const { return static_cast<int>(case_.buses.size()); }
    int nx() const { return 2 * n_gen() + 2 * n_load(); }
    int ny() const { return 2 * n_bus() + n_gen() - 1; }
    int n_g_states() const { return 2 * n_gen(); }

    const NetworkCase& network() const { return case_; }
    const Calibration& calibration() const { return cal_; }
    int gen_bus(int i) const { return gen_bus_[i]; }
    int load_bus(int j) const { return load_bus_[j]; }
    int slack_gen() const { return slack_gen_; }

    void set_demand(const std::vector<double>& p, const std::vector<double>& q);
    void set_mech_shift(const std::vector<double>& shift);
    const std::vector<double>& demand_p() const { return p_; }
    const std::vector<double>& demand_q() const { return q_; }
    double mech_power(int i) const { return cal_.P_m[i] + shift_[i]; }

    // Internal angle of machine i (the slack machine's is the fixed reference).
    double delta(const VectorXd& y, int i) const;
    int delta_slot(int i) const;  // index into y, or -1 for the slack machine

    VectorXd f(const VectorXd& x, const VectorXd& y) const;
    VectorXd g(const VectorXd& x, const VectorXd& y) const;

    struct Jacobian {
        MatrixXd fx, fy, gx, gy;
    };
    Jacobian jacobian(const VectorXd& x, const VectorXd& y) const;

private:
    NetworkCase case_;
    Calibration cal_;
    MatrixXc ybus_;
    std::vector<int> gen_bus_, load_bus_, slot_;
    int slack_gen_ = 0;
    std::vector<double> p_, q_, shift_;
};

}  // namespace robstab
