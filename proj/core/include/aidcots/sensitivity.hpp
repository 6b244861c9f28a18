#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <memory>

#include "aidcots/power_flow.hpp"

namespace aidcots {

enum class LineParam { Conductance, Susceptance };

/// Derivatives of the reduced injection equations with respect to the series
/// conductance and susceptance of every line. Column l touches only the
/// equations of the two endpoint buses of line l.
struct AdmittanceJacobian {
    Eigen::SparseMatrix<double> wrt_g;  // n_x rows x L columns
    Eigen::SparseMatrix<double> wrt_b;
};

/// First-order state response to per-line series parameter changes,
/// Xi = -J^{-1} J_alpha, split by parameter.
struct FirstOrderSens {
    Eigen::MatrixXd xi_g;  // n_x x L
    Eigen::MatrixXd xi_b;
    /// xi_l = ||xi_g[:,l]||_1 + ||xi_b[:,l]||_1
    Eigen::VectorXd per_line_norm;
};

/// Same-line second derivatives of the state, one column per line, and the
/// per-line aggregate of the four parameter pairings.
struct SecondOrderSens {
    Eigen::MatrixXd s_gg, s_bb, s_gb, s_bg;  // n_x x L
    Eigen::MatrixXd aggregate;               // s_gg + s_bb + s_gb + s_bg
    Eigen::VectorXd per_line_norm;           // ||aggregate[:,l]||_1
};

struct SensitivityBundle {
    FirstOrderSens first;
    SecondOrderSens second;
};

/// Shares one factorization of the power-flow Jacobian across all the
/// right-hand sides of the first- and second-order systems. The view and
/// state must outlive the engine and x must be a converged solution.
class SensitivityEngine {
public:
    SensitivityEngine(const AdmittanceView& view, const PFState& x);

    const UnknownIndexing& indexing() const noexcept { return idx_; }

    AdmittanceJacobian admittance_jacobian() const;
    FirstOrderSens first_order() const;
    SecondOrderSens second_order(const FirstOrderSens& first) const;

    /// Bilinear form of the state Hessian: w_r = sum_{m,n} d2f_r/dx_m dx_n u_m v_n.
    Eigen::VectorXd hessian_xx_apply(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

    /// Mixed second derivative applied to a state direction:
    /// (d2f / dx d(param_l)) u. Nonzero only in the endpoint equations.
    Eigen::VectorXd mixed_hessian_apply(LineParam which, int line, const Eigen::VectorXd& u) const;

    /// Solves J w = rhs with the shared factorization.
    Eigen::VectorXd solve_jacobian(const Eigen::VectorXd& rhs) const;

private:
    const AdmittanceView* view_;
    const PFState* x_;
    UnknownIndexing idx_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    Eigen::VectorXd p_calc_, q_calc_;
};

AdmittanceJacobian admittance_jacobian(const AdmittanceView& view, const PFState& x);
FirstOrderSens first_order(const AdmittanceView& view, const PFState& x);
SecondOrderSens second_order(const AdmittanceView& view, const PFState& x,
                             const FirstOrderSens& first);
SensitivityBundle compute_sensitivities(const AdmittanceView& view, const PFState& x);

}  // namespace aidcots
