#pragma once

#include <Eigen/Dense>

#include "aidcots/ots_model.hpp"

namespace aidcots {

enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, AtZero };

/// Simplex basis snapshot, used to warm start child nodes in the search tree.
struct Basis {
    std::vector<int> basic;            // column per row
    std::vector<VarStatus> status;     // per column (structurals + slacks)
    bool valid() const { return !basic.empty(); }
};

enum class LPStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

struct LPResult {
    LPStatus status = LPStatus::Infeasible;
    Eigen::VectorXd x;       // structural variables only
    double objective = 0.0;  // includes the model constant
    Eigen::VectorXd duals;   // per row, sign follows the equality form
    Basis basis;
    int iterations = 0;
};

/// Equality-form LP with bounded variables: A x = b after one slack per row,
/// l <= x <= u elementwise. Built once per model; bound changes are cheap.
class LinearProgram {
public:
    explicit LinearProgram(const ModelDescription& model);

    int structural_count() const noexcept { return n_; }
    int row_count() const noexcept { return m_; }
    int column_count() const noexcept { return n_ + m_; }

    void set_bounds(int var, double lb, double ub);
    double lower(int var) const { return lb_[var]; }
    double upper(int var) const { return ub_[var]; }

    const std::vector<std::pair<int, double>>& column(int j) const {
        return cols_[static_cast<std::size_t>(j)];
    }
    double cost(int j) const { return j < n_ ? c_[j] : 0.0; }
    double constant() const noexcept { return c0_; }
    const Eigen::VectorXd& rhs() const noexcept { return b_; }

private:
    int n_ = 0, m_ = 0;
    std::vector<std::vector<std::pair<int, double>>> cols_;  // all columns incl. slacks
    Eigen::VectorXd c_;
    double c0_ = 0.0;
    Eigen::VectorXd b_;
    Eigen::VectorXd lb_, ub_;

    friend class SimplexSolver;
};

/// Bounded-variable revised primal simplex. Phase 1 minimizes the sum of
/// basic bound violations with a composite cost, so any basis (in particular
/// a parent-node basis after a bound change) is a valid starting point.
/// Product-form eta updates sit on top of a periodically refreshed dense LU.
class SimplexSolver {
public:
    explicit SimplexSolver(LinearProgram lp) : lp_(std::move(lp)) {}

    LinearProgram& program() noexcept { return lp_; }
    const LinearProgram& program() const noexcept { return lp_; }

    LPResult solve(const Basis* warm = nullptr);

private:
    LinearProgram lp_;
};

/// Relaxes integrality and solves the model as an LP. The model must already
/// be free of quadratic parts (see milp_reduction).
LPResult solve_lp(const ModelDescription& model);

}  // namespace aidcots
