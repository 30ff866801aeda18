#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "robstab/eigscan.hpp"
#include "robstab/sdpcert.hpp"
#include "robstab/tdsim.hpp"

namespace robstab {

struct FallbackSummary {
    int samples = 0;
    double worst_abscissa = 0.0;
    VectorXd worst_tau;               // uncertain-state time constants of the worst draw
    int unstable_samples = 0;
    std::optional<HopfPoint> hopf;
    int hopf_load = -1;               // index among the uncertain loads
    std::string note;
};

struct RsaReport {
    CertStatus verdict = CertStatus::SolverFailure;
    double security_indicator = 0.0;  // rho
    Certificate certificate;
    std::optional<FallbackSummary> fallback;
    std::vector<std::string> steps;   // one line per pipeline stage
    int n_known_states = 0;
    int n_uncertain_states = 0;
};

struct RsaOptions {
    CertOptions cert;
    int samples = 200;
    std::uint64_t seed = 0;
    double tau_lo = 1e-2;   // log-uniform sampling range for the fallback
    double tau_hi = 1e2;
    bool hopf_attempt = true;
};

// Input, partition of known and uncertain dynamics, linearization,
// certificate, and (when not certified) a sampled direct analysis.
RsaReport rsa_assess(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s, double lambda,
                     const Equilibrium* warm = nullptr, const RsaOptions& opt = {});
RsaReport rsa_assess(const NetworkCase& c, const LoadingScenario& s, double lambda, const RsaOptions& opt = {});

// Assessment of an already solved equilibrium (the post-outage path).
RsaReport rsa_assess_equilibrium(const NetworkCase& c, const Calibration& cal, const Equilibrium& eq,
                                 const RsaOptions& opt = {});

struct ScreeningRow {
    std::pair<int, int> trip;
    bool solved = true;               // post-outage equilibrium found
    std::string note;
    CertStatus rsa_verdict = CertStatus::NRS;
    double rho = 0.0;
    std::vector<Classification> sims;  // one per tau case
    std::vector<double> abscissa;      // post-outage spectral abscissa per tau case
    bool soundness_violation = false;  // RS together with a non-Stable simulation
};

struct ScreeningReport {
    std::vector<ScreeningRow> rows;
    std::vector<TauAssignment> cases;
    std::uint64_t seed = 0;
};

struct ScreeningOptions {
    int jobs = 0;
    SimOptions sim;
    RsaOptions rsa;
    double g_scale = 1.0;  // extra conductance offset applied with the trip
};

ScreeningReport screen_contingencies(const NetworkCase& c, const Calibration& cal, const LoadingScenario& s,
                                     double lambda, const std::vector<std::pair<int, int>>& trips,
                                     const std::vector<TauAssignment>& tau_cases,
                                     const ScreeningOptions& opt = {});

// In-service branches ordered by apparent power flow at the given
// equilibrium, largest first.
std::vector<std::pair<std::pair<int, int>, double>> rank_branches_by_flow(const NetworkCase& c,
                                                                           const Equilibrium& eq);

enum class SweepKind { LoadCorrelation, PowerFactor, ExciterGain };
const char* to_string(SweepKind k);
SweepKind parse_sweep_kind(const std::string& s);

// Power-factor sweep values are signed: positive lagging, negative leading.
double parse_pf_value(const std::string& s);
std::string format_pf_value(double v);

struct SweepCell {
    double value = 0.0;
    std::optional<RobustBoundary> boundary;
    std::string error;
};

struct SweepReport {
    SweepKind kind = SweepKind::LoadCorrelation;
    std::string scenario;
    std::vector<SweepCell> cells;
};

struct SweepOptions {
    int jobs = 0;
    BoundaryOptions boundary;
};

SweepReport robust_region_report(const NetworkCase& c, const LoadingScenario& base, SweepKind kind,
                                 const std::vector<double>& values, const SweepOptions& opt = {});

nlohmann::json to_json(const RsaReport& r);
nlohmann::json to_json(const ScreeningReport& r);
nlohmann::json to_json(const SweepReport& r);
std::string format_table(const ScreeningReport& r);
std::string format_table(const SweepReport& r);

}  // namespace robstab
