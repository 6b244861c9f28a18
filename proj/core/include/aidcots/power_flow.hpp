#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <optional>

#include "aidcots/admittance.hpp"
#include "aidcots/network.hpp"

namespace aidcots {

/// Power-flow state: per-bus voltage magnitudes (p.u.) and angles (radians),
/// plus convergence metadata from the Newton solve that produced it.
struct PFState {
    Eigen::VectorXd v_mag;
    Eigen::VectorXd v_ang;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = std::numeric_limits<double>::infinity();
    std::vector<double> mismatch_history;  // max-norm per iteration, starting value first
};

/// Net complex injections per bus (generation minus demand), p.u.
struct InjectionSpec {
    Eigen::VectorXd p_inject;
    Eigen::VectorXd q_inject;
};

/// Reduction of the full state to the power-flow unknowns: angles at every
/// non-slack bus followed by magnitudes at every PQ bus. Mismatch equations
/// use the matching order (P at non-slack, then Q at PQ).
class UnknownIndexing {
public:
    explicit UnknownIndexing(const Network& net);

    int size() const noexcept { return static_cast<int>(ang_buses_.size() + mag_buses_.size()); }
    int angle_count() const noexcept { return static_cast<int>(ang_buses_.size()); }

    const std::vector<int>& angle_buses() const noexcept { return ang_buses_; }
    const std::vector<int>& magnitude_buses() const noexcept { return mag_buses_; }

    /// Unknown position of the angle at a bus, -1 when fixed (slack).
    int angle_pos(int bus) const { return ang_pos_[static_cast<std::size_t>(bus)]; }
    /// Unknown position of the magnitude at a bus, -1 when fixed (PV/slack).
    int magnitude_pos(int bus) const { return mag_pos_[static_cast<std::size_t>(bus)]; }

private:
    std::vector<int> ang_buses_, mag_buses_;
    std::vector<int> ang_pos_, mag_pos_;
};

/// Residual of the reduced power-flow equations: computed minus specified
/// injection, ordered by UnknownIndexing equations.
Eigen::VectorXd mismatch(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                         const UnknownIndexing& idx);
Eigen::VectorXd mismatch(const AdmittanceView& view, const PFState& x, const InjectionSpec& s);

/// Exact power-flow Jacobian d(residual)/d(unknowns) at x.
Eigen::SparseMatrix<double> pf_jacobian(const AdmittanceView& view, const PFState& x,
                                        const UnknownIndexing& idx);
Eigen::SparseMatrix<double> pf_jacobian(const AdmittanceView& view, const PFState& x);

struct PFOptions {
    double tolerance = 1e-8;  // max-norm mismatch, p.u.
    int max_iterations = 50;
};

/// Full-step Newton power flow. Starts flat (setpoints at PV/slack, 1.0 at
/// PQ, angles 0) unless x0 is given. Non-convergence is reported through the
/// returned state, a disconnected topology or singular Jacobian throws.
PFState solve_pf(const Network& net, std::span<const std::uint8_t> mask, const InjectionSpec& s,
                 const PFState* x0 = nullptr, const PFOptions& opts = {});
PFState solve_pf(const AdmittanceView& view, const InjectionSpec& s, const PFState* x0 = nullptr,
                 const PFOptions& opts = {});

/// Flat-start state: magnitudes at setpoints for PV/slack and 1.0 elsewhere,
/// angles at the slack reference.
PFState flat_start(const Network& net);

/// Injections for a generator dispatch (per in-file generator order, p.u.).
/// Reactive injections carry only negated demand; PV and slack buses ignore
/// them during the solve.
InjectionSpec injections_for_dispatch(const Network& net, std::span<const double> p_gen);

/// Computed complex injections at every bus for a given state.
void computed_injections(const AdmittanceView& view, const PFState& x, Eigen::VectorXd& p,
                         Eigen::VectorXd& q);

}  // namespace aidcots
