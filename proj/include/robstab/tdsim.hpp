#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "robstab/linmodel.hpp"

namespace robstab {

struct Perturbation {
    double g_scale = 1.01;                 // multiplies every load conductance state
    std::optional<VectorXd> state_offset;  // added to x after scaling
    std::optional<std::pair<int, int>> trip;

    static Perturbation none() { return {1.0, std::nullopt, std::nullopt}; }
    static Perturbation branch_trip(int from, int to) { return {1.0, std::nullopt, std::pair{from, to}}; }
};

struct SimOptions {
    double t_end = 200.0;
    double dt = 1e-3;        // first step
    double dt_min = 1e-5;
    double dt_max = 0.5;
    double local_tol = 1e-6;
    double v_collapse = 0.05;
    double newton_tol = 1e-10;
    int max_newton = 15;
};

struct SimTrace {
    std::vector<double> t;
    std::vector<VectorXd> states;   // x ordering of DaeModel (post-event layout)
    std::vector<VectorXd> v_loads;  // voltage at each load's bus
    std::vector<double> rate;       // inf-norm of dx/dt at each point
    std::vector<int> load_buses;
    double max_algebraic_residual = 0.0;
    bool terminated_early = false;
    std::string reason;
};

// Trapezoidal integration of the DAE with the algebraic equations solved
// simultaneously by Newton. The step is adapted from the difference to an
// explicit second-order predictor. Integration stops early when a load
// voltage drops below v_collapse, Newton fails, or the step falls below dt_min.
SimTrace simulate(const DaeModel& m, const TauAssignment& tau, const VectorXd& x0, const VectorXd& y0,
                  const SimOptions& opt = {});

// Starts from an equilibrium of `c`; a trip is applied at t = 0+ with the
// states held and the algebraic variables re-solved.
SimTrace simulate(const NetworkCase& c, const Calibration& cal, const TauAssignment& tau, const Equilibrium& eq,
                  const Perturbation& p, const SimOptions& opt = {});

enum class SimLabel { Stable, LimitCycle, Unstable, Inconclusive };
const char* to_string(SimLabel l);

struct Classification {
    SimLabel label = SimLabel::Inconclusive;
    bool collapse = false;
    double settle_time = -1.0;  // negative when never settled
    double amplitude = 0.0;     // peak-to-peak load voltage over the trailing window
    double min_voltage = 0.0;
};

struct ClassifyOptions {
    double settle_ratio = 1e-4;    // rate must fall below this fraction of its peak
    double window = 0.2;           // trailing fraction of the horizon
    double amplitude_band = 0.05;  // relative amplitude change allowed for a limit cycle
    double amplitude_floor = 1e-6;
};

Classification classify(const SimTrace& tr, const ClassifyOptions& opt = {});

}  // namespace robstab
