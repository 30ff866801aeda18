#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robstab/linmodel.hpp"

namespace robstab {

// Dense block SDP in dual form:
//   maximize b'y  subject to  C - sum_i y_i A_i  >= 0
// over a product of symmetric PSD blocks and one nonnegative-orthant block.
struct BlockSdp {
    std::vector<MatrixXd> c_sdp;
    VectorXd c_lp;
    std::vector<std::vector<MatrixXd>> a_sdp;  // [constraint][block]
    std::vector<VectorXd> a_lp;                // [constraint]
    VectorXd b;

    int m() const { return static_cast<int>(b.size()); }
};

struct SdpOptions {
    int max_iter = 200;
    double gap_tol = 1e-10;   // on the scaled problem
    double feas_tol = 1e-10;
    double step_fraction = 0.95;
};

struct SdpResult {
    VectorXd y;
    bool converged = false;
    int iterations = 0;
    double gap = 0.0;          // <X, Z>
    double primal_infeas = 0.0;
};

// Primal-dual path following (HKM direction, Mehrotra corrector). The start
// y0 must be strictly dual feasible; every iterate stays dual feasible.
SdpResult solve_block_sdp(const BlockSdp& p, const VectorXd& y0, const SdpOptions& opt = {});

enum class CertStatus { RS, NRS, SolverFailure };
const char* to_string(CertStatus s);

struct CertResiduals {
    double lmi_max_eig = 0.0;
    double q_min_eig = 0.0;
    double trace_err = 0.0;
};

struct Certificate {
    double rho = 0.0;
    MatrixXd q_g;
    VectorXd q_l;
    CertResiduals residuals;
    CertStatus status = CertStatus::SolverFailure;
    int iterations = 0;
    double gap = 0.0;          // unscaled duality gap
    VectorXd canonical_tau;    // tau used to build A inside the solver

    MatrixXd q() const;
};

struct CertOptions {
    double rho_tol = 1e-8;
    SdpOptions sdp;
};

Certificate solve_certificate(const ReducedJacobian& j, const CertOptions& opt = {});
Certificate solve_certificate(const ReducedJacobian& j, const TauAssignment& canonical,
                              const CertOptions& opt = {});

// Lyapunov matrix carried from the canonical tau to tau_tilde so that
// Q~ A(tau~) = Q A(tau).
MatrixXd transport_q(const Certificate& cert, const TauAssignment& tau_tilde);

// Largest eigenvalue of Q~ A(tau~) + A(tau~)' Q~. Throws CertificateViolated
// when it is not negative.
double verify_certificate(const ReducedJacobian& j, const TauAssignment& tau_tilde, const Certificate& cert);

struct RobustBoundary {
    double s_lambda = 0.0;
    double snb_lambda = 0.0;
    double margin_pct = 0.0;
    bool rs_at_start = true;
    NoseCurve nose;
};

struct BoundaryOptions {
    double lambda_start = 0.1;
    double rel_bracket = 1e-3;
    int jobs = 0;
    std::optional<Calibration> calibration;
    CertOptions cert;
    TraceOptions trace;
};

// Verdict at one loading; NearSingularAlgebraic maps to NRS with rho = -inf.
Certificate certify_at(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                       double lambda, const Equilibrium* warm = nullptr, const CertOptions& opt = {});

RobustBoundary find_robust_boundary(const NetworkCase& c, const LoadingScenario& s,
                                    const BoundaryOptions& opt = {});

double margin_pct(double s_lambda, double snb_lambda);

}  // namespace robstab
