#pragma once

#include <Eigen/Dense>
#include <string>

#include "aidcots/network.hpp"
#include "aidcots/sensitivity.hpp"
#include "aidcots/tolerances.hpp"

namespace aidcots {

enum class VarKind : std::uint8_t { Angle, Flow, Dispatch, Switch, CostEpigraph, SocpT, SocpV };
enum class Sense : char { LE = '<', GE = '>', EQ = '=' };

struct Variable {
    std::string name;
    double lb = 0.0, ub = 0.0;
    bool is_binary = false;
    VarKind kind = VarKind::Angle;
    int entity = -1;  // bus, branch or generator index behind the variable
};

struct LinearConstraint {
    std::vector<std::pair<int, double>> terms;  // (variable, coefficient)
    Sense sense = Sense::LE;
    double rhs = 0.0;
    std::string name;
};

/// coeff * (1 - z)^2 with z binary; only this diagonal-binary quadratic shape
/// appears in the models.
struct QuadBinaryTerm {
    int z_var = -1;
    double coeff = 0.0;
};

struct QuadConstraint {
    QuadBinaryTerm term;
    double rhs = 0.0;
    std::string name;
};

struct Objective {
    double constant = 0.0;
    std::vector<double> linear;  // aligned with variables
    std::vector<QuadBinaryTerm> quad;
};

enum class OTSVariant : std::uint8_t { Dc, Aidc };
enum class Reformulation : std::uint8_t { Miqcqp, Milp, Misocp };

struct OTSConfig {
    OTSVariant variant = OTSVariant::Dc;
    Reformulation reform = Reformulation::Milp;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double angle_min = -0.6;  // radians
    double angle_max = 0.6;
    bool protect_bridges = true;
    int pwl_segments = 8;
    /// When non-empty, restricts switching candidates to these 0-based lines.
    std::vector<int> candidate_filter;
};

struct BigMVector {
    Eigen::VectorXd m;  // per line, p.u.
};

/// Solver-agnostic model description plus the metadata linking variables back
/// to network entities.
struct ModelDescription {
    std::vector<Variable> vars;
    std::vector<LinearConstraint> rows;
    std::vector<QuadConstraint> quad_rows;
    Objective obj;

    const Network* net = nullptr;
    OTSVariant variant = OTSVariant::Dc;
    Reformulation reform = Reformulation::Milp;
    std::vector<int> theta_var;  // per bus
    std::vector<int> flow_var;   // per branch
    std::vector<int> z_var;      // per branch, -1 when not a candidate
    std::vector<int> pg_var;     // per generator, -1 when out of service
    // aidc context (zero for the plain dc model)
    Eigen::VectorXd xi, s_agg, eps_lin, eps_quad;
    double gamma1 = 0.0, gamma2 = 0.0;

    int add_var(Variable v);
    bool has_quadratic_parts() const { return !obj.quad.empty() || !quad_rows.empty(); }
};

/// Raw outcome of a mixed-integer solve, before mapping back to the grid.
struct RawSolverResult {
    enum class Status { Optimal, TimeLimit, Infeasible } status = Status::Infeasible;
    std::vector<double> point;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    double wall_seconds = 0.0;
    long nodes = 0;
};

struct OTSSolution {
    SwitchMask z;
    std::vector<double> p_gen;  // p.u., per generator in file order
    Eigen::VectorXd theta;      // radians
    Eigen::VectorXd flows;      // p.u., per branch
    double model_cost = 0.0;    // dollars
    enum class Status { Optimal, TimeLimit, Infeasible } status = Status::Infeasible;
    double gap = 0.0;
    double wall_seconds = 0.0;
    bool disconnects_network = false;

    std::vector<int> opened_lines_1based() const;
};

/// Angle-box big-M bound: M_l = |b_l| (theta_max - theta_min) with the DC
/// susceptance of line l.
BigMVector big_m(const Network& net, double angle_min, double angle_max);

ModelDescription build_dc_ots(const Network& net, const BigMVector& big_m, const OTSConfig& cfg);

/// DC optimal dispatch on a fixed topology: no binaries, flow-definition
/// equalities only for the closed lines of the mask.
ModelDescription build_dc_opf(const Network& net, std::span<const std::uint8_t> mask,
                              const OTSConfig& cfg = {});

/// Adds the sensitivity repair costs and trust-region rows in the configured
/// reformulation. Lines whose first- or second-order magnitude exceeds its
/// tolerance are fixed closed.
ModelDescription augment_aidc(const ModelDescription& model, const FirstOrderSens& first,
                              const SecondOrderSens& second, const ToleranceSet& tols,
                              const OTSConfig& cfg);

/// Rewrites every (1-z)^2 piece as (1-z), exact for binary z. The result has
/// no quadratic parts and is what the solver consumes.
ModelDescription milp_reduction(const ModelDescription& model);

OTSSolution extract_solution(const ModelDescription& model, const RawSolverResult& raw);

/// LP-format text for external debugging. Covers bounds, binaries, linear
/// constraints and the diagonal quadratic objective terms.
std::string to_lp_format(const ModelDescription& model);

}  // namespace aidcots
