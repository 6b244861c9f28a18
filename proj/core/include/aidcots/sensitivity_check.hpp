#pragma once

#include "aidcots/sensitivity.hpp"

namespace aidcots {

/// Finite-difference cross-checks for the closed-form derivative code. All
/// checks use central differences and re-solve or re-evaluate through the
/// plain power-flow path, independent of the analytic expressions they test.
/// Exposed on the CLI through `sens --check-fd`.

struct FdReport {
    double max_rel_error = 0.0;
    int worst_line = -1;
    int lines_checked = 0;
};

/// Entrywise FD of the reduced mismatch against pf_jacobian.
/// Relative error uses max(1, |analytic|) as denominator.
double fd_check_pf_jacobian(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                            double step = 1e-6);

/// Per-line FD of the injection residual w.r.t. g_l and b_l against the
/// closed-form admittance Jacobian columns.
FdReport fd_check_admittance_jacobian(const AdmittanceView& view, const PFState& x,
                                      const InjectionSpec& s, double step = 1e-6);

/// FD through the solver: perturb g_l (and b_l), re-solve the power flow and
/// difference the states. Error is the per-column inf-norm relative mismatch
/// against xi columns.
FdReport fd_check_first_order(const Network& net, std::span<const std::uint8_t> mask,
                              const InjectionSpec& s, const PFState& x, const FirstOrderSens& first,
                              double rel_step = 1e-5);

/// Second central difference of the solved state against the same-line
/// second-order columns.
FdReport fd_check_second_order(const Network& net, std::span<const std::uint8_t> mask,
                               const InjectionSpec& s, const PFState& x,
                               const SecondOrderSens& second, double rel_step = 1e-4);

/// Directional second difference of the mismatch against hessian_xx_apply.
double fd_check_hessian_xx(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& v, double step = 1e-4);

/// FD of the admittance-Jacobian column along a state direction against
/// mixed_hessian_apply.
double fd_check_mixed_hessian(const AdmittanceView& view, const PFState& x, LineParam which,
                              int line, const Eigen::VectorXd& u, double step = 1e-4);

/// Residual of the four second-order systems by direct substitution,
/// max over lines of the inf-norm.
double second_order_residual(const AdmittanceView& view, const PFState& x,
                             const FirstOrderSens& first, const SecondOrderSens& second);

struct TaylorReport {
    // per-line relative l1 errors; negative entries mark lines skipped
    // because the perturbed power flow did not converge
    std::vector<double> first_order_error;
    std::vector<double> with_second_order_error;
};

/// Re-solves the power flow after a multiplicative perturbation of each line
/// admittance and compares the true state change against the first-order and
/// first-plus-second-order predictions.
TaylorReport taylor_prediction_errors(const Network& net, std::span<const std::uint8_t> mask,
                                      const InjectionSpec& s, const PFState& x,
                                      const FirstOrderSens& first, const SecondOrderSens& second,
                                      double rel_perturbation = 0.01);

}  // namespace aidcots
