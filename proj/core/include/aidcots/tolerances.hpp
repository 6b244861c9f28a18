#pragma once

#include "aidcots/sensitivity.hpp"

namespace aidcots {

struct ToleranceConfig {
    double alpha1 = 1.0;
    double alpha2 = 1.0;
    int norm_p = 1;  // 1 or 2
    double floor_lin = 1e-6;
    double floor_quad = 1e-6;
    double cap_lin = std::numeric_limits<double>::infinity();
    double cap_quad = std::numeric_limits<double>::infinity();
};

/// Line-specific trust-region bounds built from sensitivity magnitudes:
///   eps_lin_l  = clamp(alpha1 * ||Xi_l||_p * ||y_l||_p, floor, cap)
///   eps_quad_l = clamp(alpha2 * 1/2 * ||S_l||_p * ||y_l||_p^2, floor, cap)
/// with ||y_l||_p the p-norm of the 2-vector (g_l, b_l).
struct ToleranceSet {
    Eigen::VectorXd eps_lin;
    Eigen::VectorXd eps_quad;
    ToleranceConfig config;
};

ToleranceSet build_tolerances(const FirstOrderSens& first, const SecondOrderSens& second,
                              const Network& net, const ToleranceConfig& cfg = {});

}  // namespace aidcots
