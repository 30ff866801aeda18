#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "robstab/linmodel.hpp"

namespace robstab {

using Complex = std::complex<double>;

struct Spectrum {
    std::vector<Complex> eigenvalues;  // descending real part, then descending imag
    double abscissa = 0.0;
};

Spectrum spectrum(const MatrixXd& a);

struct HopfPoint {
    double parameter = 0.0;
    double frequency = 0.0;
    int crossing_pair_index = 0;  // position of the crossing eigenvalue in the sorted spectrum
    double abscissa = 0.0;
};

struct HopfSearchOptions {
    int grid = 81;
    double abscissa_tol = 1e-8;
    double rel_bracket = 1e-6;
    double min_frequency = 1e-6;
};

// Scans the load's time constant (tau_g = tau_b together) on a log grid over
// [lo, hi] and bisects the first sign change of the spectral abscissa.
HopfPoint find_hopf_tau(const ReducedJacobian& j, int varying_load, const TauAssignment& fixed,
                        double lo, double hi, const HopfSearchOptions& opt = {});

// Bisects on the load level for the `which`-th (1-based) Hopf crossing of the
// abscissa along the upper branch.
HopfPoint find_hopf_load(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                         const TauAssignment& tau, double lo, double hi, int which = 1,
                         const HopfSearchOptions& opt = {});

enum class EigEvent { FirstHopf, Coalescence, SecondHopf, SNBOriginTouch };
const char* to_string(EigEvent e);

struct EigSample {
    double lambda = 0.0;
    std::array<Complex, 2> pair;
    double abscissa = 0.0;
    Spectrum spectrum;
};

struct EigMarker {
    EigEvent event;
    double lambda = 0.0;
};

struct EigTrajectory {
    std::vector<EigSample> samples;
    std::vector<EigMarker> events;
    double snb_lambda = 0.0;

    std::vector<EigEvent> event_kinds() const;
};

struct TrackOptions {
    double ambiguity_ratio = 0.8;   // second-nearest / nearest distance below this is ambiguous
    int max_halvings = 12;
    double imag_tol = 1e-6;
};

// Tracks the rightmost eigenvalue pair across the grid (nearest-neighbour
// matching with step halving) and marks Hopf crossings, coalescence on the
// real axis, and an eigenvalue reaching the origin at the nose.
EigTrajectory trace_critical_eigenvalues(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                                         const TauAssignment& tau, const std::vector<double>& grid,
                                         const TrackOptions& opt = {});

// Evenly spaced grid over [lo, snb * (1 - gap)] of the traced nose.
std::vector<double> branch_grid(double lo, double snb, int n, double gap = 1e-4);

// Real-axis location where the tracked complex pair merges.
double coalescence_real_part(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                             const TauAssignment& tau, int grid_points = 200);

}  // namespace robstab
