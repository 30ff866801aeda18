#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "robstab/error.hpp"

namespace robstab {

enum class BusKind { Slack, PV, PQ };

struct Bus {
    int id = 0;
    BusKind kind = BusKind::PQ;
    double v_setpoint = 1.0;  // Slack/PV only
    double angle_ref = 0.0;   // Slack only
    bool operator==(const Bus&) const = default;
};

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;
    double x = 0.0;
    double b_half = 0.0;
    double tap = 1.0;
    bool in_service = true;
    bool operator==(const Branch&) const = default;
};

struct Generator {
    int bus = 0;
    double x_d = 0.0;
    double x_dp = 0.0;
    double T_d0p = 0.0;
    double T_exc = 0.0;
    double K_exc = 0.0;
    double p_setpoint = 0.0;        // base dispatch of PV units
    std::optional<double> E_r;      // if set, overrides base-case calibration
    bool operator==(const Generator&) const = default;
};

// An absent value is the distinguished "uncertain" time constant.
using TimeConstant = std::optional<double>;
inline constexpr std::nullopt_t Uncertain = std::nullopt;

struct DynamicLoad {
    int bus = 0;
    double p0 = 0.0;
    double q0 = 0.0;
    double exp_a = 0.0;
    double exp_b = 0.0;
    TimeConstant tau_g = Uncertain;
    TimeConstant tau_b = Uncertain;
    bool operator==(const DynamicLoad&) const = default;

    double p_static(double v) const;
    double q_static(double v) const;
};

enum class Dispatch { Slack, Even };

// Defaults used when a scenario string leaves the reference load or power
// factor unspecified.
struct StudyDefaults {
    std::optional<int> reference_bus;
    double power_factor = 1.0;
    bool lagging = true;
    Dispatch dispatch = Dispatch::Slack;
    bool operator==(const StudyDefaults&) const = default;
};

struct NetworkCase {
    std::string name;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<DynamicLoad> loads;
    double s_base = 100.0;
    StudyDefaults study;
    bool operator==(const NetworkCase&) const = default;

    // Position of bus `id` in `buses`; throws Schema error when absent.
    int bus_index(int id) const;
    int slack_index() const;
    // Index of the first load attached to bus `id`, or -1.
    int load_at_bus(int id) const;
};

struct InductionMotorParams {
    double R_m = 0.0;
    double X_m = 0.0;
    double P_m = 0.0;
    double I_inertia = 0.0;
    double omega0 = 0.0;
};

struct Rates {
    double dg = 0.0;
    double db = 0.0;
};

Rates load_rhs(const DynamicLoad& load, double g, double b, double v);

double instantaneous_power_rate(const DynamicLoad& load, double g, double v, double dv);

// h(s) = R s / (R^2 + X^2) and its slip inverse.
double motor_h(const InductionMotorParams& m, double s);
double motor_dh_ds(const InductionMotorParams& m);
double motor_slip(const InductionMotorParams& m, double g);
double motor_slip_rate(const InductionMotorParams& m, double s, double v);
double motor_as_generic(const InductionMotorParams& m, double g, double v);

double ultc_as_generic(double g_load, double k_ratio, double v, double v_set, double t_tap);
double heating_as_generic(double r_coef, double t_thermal, double p_loss, double g, double v);

NetworkCase parse_case(const std::string& path);
NetworkCase case_from_json(const nlohmann::json& j);
nlohmann::json case_to_json(const NetworkCase& c);
std::string serialize_case(const NetworkCase& c);

// Resolves a bare embedded-case name ("wscc9") or a path.
std::string resolve_case_path(const std::string& name_or_path);

}  // namespace robstab
