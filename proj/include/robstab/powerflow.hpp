#pragma once

#include <optional>
#include <vector>

#include "robstab/dae.hpp"
#include "robstab/scenario.hpp"

namespace robstab {

struct Equilibrium {
    VectorXd v, theta;                     // per bus
    VectorXd e_prime, delta_prime, e_fd;   // per generator
    VectorXd g, b;                         // per load
    double lambda = 0.0;
    LoadingScenario loading;
    double residual = 0.0;                 // inf-norm of [F; G]

    VectorXd states() const;               // x ordering of DaeModel
    VectorXd algebraic(const DaeModel& m) const;
};

Equilibrium unpack(const DaeModel& m, const VectorXd& x, const VectorXd& y);

struct PowerFlowOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

// Classical PV/PQ Newton power flow at the case's declared base loads.
struct PvSolution {
    VectorXd v, theta;
    VectorXc s_gen;  // complex generation at each generator's bus
};
PvSolution solve_pv_powerflow(const NetworkCase& c, const PowerFlowOptions& opt = {});

// Base-case initialization: states from the PV solution, then E_r, P_m and
// the slack internal angle are frozen into a Calibration.
Equilibrium init_dynamic_states(const NetworkCase& c, const PvSolution& pf, Calibration* cal_out = nullptr);
Calibration calibrate(const NetworkCase& c);

// Builds a DaeModel with demand and dispatch set for (scenario, lambda).
DaeModel make_model(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s, double lambda);

// Newton on the frozen DAE equilibrium [F; G] = 0. Without a warm start the
// solve is a homotopy from the calibrated base point, which selects the
// upper branch.
Equilibrium solve_powerflow(const NetworkCase& c, const LoadingScenario& s, double lambda,
                            const Equilibrium* warm = nullptr, const PowerFlowOptions& opt = {});
Equilibrium solve_powerflow(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                            double lambda, const Equilibrium* warm = nullptr,
                            const PowerFlowOptions& opt = {});

// Generic equilibrium solve on an already configured model.
Equilibrium solve_equilibrium(const DaeModel& m, const Equilibrium& guess, const PowerFlowOptions& opt = {});

struct NosePoint {
    double lambda = 0.0;
    double v_monitored = 0.0;
    Equilibrium eq;
};

struct NoseCurve {
    std::vector<NosePoint> points;
    double snb_lambda = 0.0;
    double snb_bracket = 0.0;  // width of the final lambda bracket
    int monitored_bus = 0;
};

struct TraceOptions {
    double step = 0.05;         // initial arclength step
    double max_step = 0.25;
    double min_step = 1e-7;
    double rel_bracket = 1e-3;
    std::optional<int> monitored_bus;
};

NoseCurve trace_nose(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                     double lambda_start, const TraceOptions& opt = {});
NoseCurve trace_nose(const NetworkCase& c, const LoadingScenario& s, double lambda_start,
                     double step = 0.05);

// Returns a copy of the case with the branch between the two buses out of
// service; throws Schema error if no such in-service branch exists.
NetworkCase with_branch_tripped(const NetworkCase& c, int from, int to);
bool is_connected(const NetworkCase& c);

// Network after a branch outage. A generator bus left without any other
// connection is dropped together with its machine; if that machine was the
// angle reference, the first remaining machine takes over with its
// pre-outage internal angle. Any other islanding is rejected.
struct PostContingency {
    NetworkCase net;
    Calibration cal;
    std::vector<int> kept_generators;  // indices into the pre-outage case
    std::vector<int> kept_buses;
};
PostContingency apply_trip(const NetworkCase& c, const Calibration& cal, const Equilibrium& pre, int from, int to);

// Pre-outage equilibrium projected onto the post-outage layout; a starting
// guess, not a solution.
Equilibrium restrict_to(const Equilibrium& pre, const PostContingency& pc);

}  // namespace robstab
