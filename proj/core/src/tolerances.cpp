#include "aidcots/tolerances.hpp"

#include <cmath>

namespace aidcots {

namespace {

double vec_norm(const Eigen::VectorXd& v, int p) {
    return p == 1 ? v.lpNorm<1>() : v.norm();
}

double pair_norm(double a, double b, int p) {
    return p == 1 ? std::abs(a) + std::abs(b) : std::hypot(a, b);
}

}  // namespace

ToleranceSet build_tolerances(const FirstOrderSens& first, const SecondOrderSens& second,
                              const Network& net, const ToleranceConfig& cfg) {
    if (cfg.alpha1 <= 0.0 || cfg.alpha2 <= 0.0) throw Error("tolerance weights must be positive");
    if (cfg.norm_p != 1 && cfg.norm_p != 2) throw Error("norm index must be 1 or 2");
    if (cfg.floor_lin > cfg.cap_lin || cfg.floor_quad > cfg.cap_quad) {
        throw Error("tolerance floor above cap");
    }

    const int L = static_cast<int>(net.branch_count());
    ToleranceSet out;
    out.config = cfg;
    out.eps_lin.resize(L);
    out.eps_quad.resize(L);
    for (int l = 0; l < L; ++l) {
        const std::complex<double> y = net.branches()[static_cast<std::size_t>(l)].series_admittance();
        const double yn = pair_norm(y.real(), y.imag(), cfg.norm_p);
        const double xi = vec_norm(first.xi_g.col(l), cfg.norm_p) +
                          vec_norm(first.xi_b.col(l), cfg.norm_p);
        const double sn = vec_norm(second.aggregate.col(l), cfg.norm_p);
        out.eps_lin[l] =
            std::min(std::max(cfg.alpha1 * xi * yn, cfg.floor_lin), cfg.cap_lin);
        out.eps_quad[l] =
            std::min(std::max(cfg.alpha2 * 0.5 * sn * yn * yn, cfg.floor_quad), cfg.cap_quad);
    }
    return out;
}

}  // namespace aidcots
