#pragma once

#include "aidcots/ots_model.hpp"
#include "aidcots/power_flow.hpp"

namespace aidcots {

struct Violation {
    enum class Kind : std::uint8_t { VLow, VHigh, QMin, QMax, Thermal, Islanded };
    Kind kind;
    std::string entity;     // "bus 3", "line 7"
    double magnitude = 0.0; // p.u. distance outside the limit
};

const char* to_string(Violation::Kind kind);

/// Outcome of re-evaluating a switching decision under AC physics. The cost
/// is approximate: DC redispatch priced with losses absorbed by the slack
/// generator, not a nonlinear OPF.
struct ACEvalReport {
    bool converged = false;
    bool feasible = false;
    double total_gen_cost = 0.0;  // dollars
    double losses = 0.0;          // p.u.
    std::vector<Violation> violations;
    std::vector<double> dispatch;  // p.u. per generator, slack absorption applied
    PFState state;                 // on the slack component, padded with setpoints
};

struct EvalOptions {
    double voltage_tol = 1e-4;
    double reactive_tol = 1e-4;
    double thermal_tol = 1e-4;
    OTSConfig dispatch;  // angle box and cost handling for the redispatch LP
};

/// Load buses disconnected from the slack under the mask. Pure graph check.
std::vector<int> islanded_load_buses(const Network& net, std::span<const std::uint8_t> mask);

/// Economic DC redispatch on a fixed topology. Throws InfeasibleError when
/// the LP has no solution (islanded load or insufficient deliverable
/// capacity).
std::vector<double> redispatch_dc(const Network& net, std::span<const std::uint8_t> mask,
                                  const OTSConfig& cfg = {});

/// Redispatch, AC power flow with the slack absorbing losses, then limit
/// checks. All failure modes are report outcomes, not errors.
ACEvalReport evaluate_topology(const Network& net, std::span<const std::uint8_t> mask,
                               const EvalOptions& opts = {});

}  // namespace aidcots
