#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robstab/netmodel.hpp"

namespace robstab {

// How the scalar load level lambda maps onto individual loads.
//  SingleBus:   the target load draws P = lambda (Q from the power factor or
//               held at fixed_q); every other load stays at its base value.
//  Correlated:  the reference load draws P = lambda, every other load draws
//               k_c * lambda; all share one power factor.
//  GlobalScale: every load is its base value times lambda.
struct LoadingScenario {
    enum class Kind { SingleBus, Correlated, GlobalScale };
    Kind kind = Kind::SingleBus;
    int bus = 0;
    double k_c = 1.0;
    double power_factor = 1.0;
    bool lagging = true;
    std::optional<double> fixed_q;

    double tan_phi() const;
    bool operator==(const LoadingScenario&) const = default;
};

struct LoadLevels {
    std::vector<double> p;
    std::vector<double> q;
};

// Grammar (colon separated):
//   single:bus8[:pf0.894lag|:q0.5]     single:load1[:pf...]
//   correlated[:ref=8][:kc=1][:pf0.9lead]
//   global
// Missing reference bus and power factor fall back to the case's study block.
LoadingScenario parse_scenario(const std::string& spec, const NetworkCase& c);
std::string to_string(const LoadingScenario& s);

LoadLevels load_levels(const NetworkCase& c, const LoadingScenario& s, double lambda);

// Extra mechanical power per generator relative to the base dispatch.
std::vector<double> dispatch_shift(const NetworkCase& c, const LoadingScenario& s, double lambda);

// Load level at which the scenario reproduces the case's declared loads
// (the scenario bus's base demand; 1 for a global scaling).
double base_lambda(const NetworkCase& c, const LoadingScenario& s);

// The bus whose voltage is reported along a nose curve by default.
int default_monitored_bus(const NetworkCase& c, const LoadingScenario& s);

}  // namespace robstab
