#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "aidcots/network.hpp"
#include "aidcots/ots_model.hpp"

namespace aidcots::testing {

/// Naive dense bus admittance matrix, built independently of AdmittanceView:
/// complex arithmetic straight from the pi model, no triplet machinery.
Eigen::MatrixXcd dense_admittance(const Network& net, const SwitchMask& mask);

enum class OracleStatus { Optimal, Infeasible, Unbounded };

struct OracleLP {
    OracleStatus status = OracleStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Textbook two-phase dense tableau simplex on the standard form with
/// variable shifting and explicit upper-bound rows. Slow and simple; used as
/// the independent reference for the production solver.
OracleLP tableau_lp(const ModelDescription& model);

/// Small knapsack-like MILP with seeded coefficients: binary selections with
/// a capacity row and a continuous overflow variable.
ModelDescription random_knapsack(std::uint64_t seed, int binaries = 8);

}  // namespace aidcots::testing
