#pragma once

#include <vector>

#include "robstab/powerflow.hpp"

namespace robstab {

struct DaeBlocks {
    MatrixXd f_g_xg, f_g_xl, f_g_y;
    MatrixXd f_l_xg, f_l_xl, f_l_y;  // load rows without the 1/tau scaling
    MatrixXd g_xg, g_xl, g_y;
    int n_G = 0, n_L = 0, m = 0;
};

struct ReducedJacobian {
    MatrixXd j_gg, j_gl, j_lg, j_ll;
    int n_G = 0, n_L = 0;

    MatrixXd full() const;
    static ReducedJacobian from_full(const MatrixXd& j, int n_G);
};

// Diagonal of the load time-constant matrix, ordered (tau_g, tau_b) per load.
struct TauAssignment {
    VectorXd tau;

    static TauAssignment uniform(int n_L, double value);
    // One (tau_g = tau_b) value per load.
    static TauAssignment per_load(const std::vector<double>& taus);
};

DaeBlocks assemble_blocks(const DaeModel& m, const Equilibrium& eq);
DaeBlocks assemble_blocks(const NetworkCase& c, const Calibration& cal, const Equilibrium& eq);

// Central-difference version of assemble_blocks; a test oracle only.
DaeBlocks assemble_blocks_fd(const DaeModel& m, const Equilibrium& eq, double h = 1e-6);

double algebraic_condition(const DaeBlocks& b);

ReducedJacobian reduce(const DaeBlocks& b, double max_condition = 1e12);

MatrixXd build_a(const ReducedJacobian& j, const TauAssignment& tau);

// Power flow + assembly + reduction in one call.
ReducedJacobian linearize(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                          double lambda, const Equilibrium* warm = nullptr, Equilibrium* eq_out = nullptr);

// Moves load states whose time constants are known into the generator block,
// scaling their rows by 1/tau. `known` has one entry per load state; absent
// entries stay in the uncertain block. Relative order is preserved.
ReducedJacobian absorb_known_dynamics(const ReducedJacobian& j, const std::vector<TimeConstant>& known);

// Per-load-state time constants declared in the case (tau_g, tau_b per load).
std::vector<TimeConstant> declared_taus(const NetworkCase& c);

}  // namespace robstab
