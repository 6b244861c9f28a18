#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aidcots/ac_eval.hpp"
#include "aidcots/power_flow.hpp"
#include "aidcots/sensitivity_check.hpp"
#include "support/fixtures.hpp"

using namespace aidcots;
using namespace aidcots::testing;

namespace {

InjectionSpec base_injections(const Network& net) {
    const std::vector<double> dispatch = redispatch_dc(net, net.all_closed());
    return injections_for_dispatch(net, dispatch);
}

}  // namespace

TEST_CASE("flat start on a lossless unloaded network has zero residual") {
    const Network net = parse_matpower(kTwoBusLossless);
    AdmittanceView view(net, net.all_closed());
    const PFState x = flat_start(net);
    InjectionSpec s;
    s.p_inject.setZero(2);
    s.q_inject.setZero(2);
    const Eigen::VectorXd r = mismatch(view, x, s);
    CHECK(r.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("two-bus case solves against the hand Newton solution") {
    // P = 0.1, Q = 0.02 p.u. at bus 2 through z = 0.01 + j0.1
    const Network net = parse_matpower(kTwoBusCase);
    AdmittanceView view(net, net.all_closed());
    InjectionSpec s;
    s.p_inject.setZero(2);
    s.q_inject.setZero(2);
    s.p_inject[1] = -0.1;
    s.q_inject[1] = -0.02;
    const PFState x = solve_pf(view, s);
    REQUIRE(x.converged);
    CHECK(x.iterations <= 5);
    const Eigen::VectorXd r = mismatch(view, x, s);
    CHECK(r.cwiseAbs().maxCoeff() <= 1e-10);

    // independent fixed-point iteration on V2 = conj(S/V2) path
    std::complex<double> v2(1.0, 0.0);
    const std::complex<double> z(0.01, 0.1);
    const std::complex<double> s2(-0.1, -0.02);
    for (int it = 0; it < 200; ++it) {
        v2 = 1.0 + z * std::conj(s2 / v2);
    }
    CHECK(x.v_mag[1] == doctest::Approx(std::abs(v2)).epsilon(1e-8));
    CHECK(x.v_ang[1] == doctest::Approx(std::arg(v2)).epsilon(1e-8));
}

TEST_CASE("residual grows linearly under small state perturbations") {
    const Network net = parse_matpower(kTwoBusCase);
    AdmittanceView view(net, net.all_closed());
    InjectionSpec s;
    s.p_inject.setZero(2);
    s.q_inject.setZero(2);
    s.p_inject[1] = -0.1;
    const PFState x = solve_pf(view, s);
    REQUIRE(x.converged);
    const Eigen::MatrixXd jac = Eigen::MatrixXd(pf_jacobian(view, x));
    for (double h : {1e-5, 1e-6}) {
        PFState y = x;
        y.v_ang[1] += h;
        const Eigen::VectorXd r = mismatch(view, y, s);
        // slope along the angle column of the Jacobian
        const double expected = std::abs(jac(0, 0)) * h;
        CHECK(r.cwiseAbs().maxCoeff() == doctest::Approx(expected).epsilon(1e-3));
    }
}

TEST_CASE("jacobian matches central finite differences") {
    SUBCASE("case14 at a solved state") {
        const Network net = load_case14();
        AdmittanceView view(net, net.all_closed());
        const InjectionSpec s = base_injections(net);
        const PFState x = solve_pf(view, s);
        REQUIRE(x.converged);
        CHECK(fd_check_pf_jacobian(view, x, s) < 1e-6);
    }
    SUBCASE("triangle at a perturbed interior state") {
        const Network net = parse_matpower(kTriangleCase);
        AdmittanceView view(net, net.all_closed());
        InjectionSpec s;
        s.p_inject.setZero(3);
        s.q_inject.setZero(3);
        s.p_inject[2] = -0.4;
        s.q_inject[2] = -0.1;
        PFState x = solve_pf(view, s);
        REQUIRE(x.converged);
        x.v_ang[1] += 0.03;
        x.v_mag[2] -= 0.02;
        CHECK(fd_check_pf_jacobian(view, x, s) < 1e-6);
    }
}

TEST_CASE("two-bus lossless jacobian at flat start matches the b-only closed form") {
    const Network net = parse_matpower(kTwoBusLossless);
    AdmittanceView view(net, net.all_closed());
    const PFState x = flat_start(net);
    const Eigen::MatrixXd jac = Eigen::MatrixXd(pf_jacobian(view, x));
    // unknowns: theta2, v2; equations: P2, Q2; b = 10
    REQUIRE(jac.rows() == 2);
    CHECK(jac(0, 0) == doctest::Approx(10.0));   // dP2/dtheta2 = b v1 v2
    CHECK(jac(0, 1) == doctest::Approx(0.0));    // dP2/dv2 at flat start
    CHECK(jac(1, 0) == doctest::Approx(0.0));    // dQ2/dtheta2
    CHECK(jac(1, 1) == doctest::Approx(10.0));   // dQ2/dv2 = -B22 v2 + ...
}

TEST_CASE("jacobian is reproducible across calls") {
    const Network net = load_case14();
    AdmittanceView view(net, net.all_closed());
    const InjectionSpec s = base_injections(net);
    const PFState x = solve_pf(view, s);
    const Eigen::MatrixXd a = Eigen::MatrixXd(pf_jacobian(view, x));
    const Eigen::MatrixXd b = Eigen::MatrixXd(pf_jacobian(view, x));
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jacobian sparsity follows the bus adjacency") {
    const Network net = load_case14();
    AdmittanceView view(net, net.all_closed());
    const UnknownIndexing idx(net);
    const InjectionSpec s = base_injections(net);
    const PFState x = solve_pf(view, s);
    const Eigen::MatrixXd jac = Eigen::MatrixXd(pf_jacobian(view, x, idx));
    const Eigen::MatrixXd b = Eigen::MatrixXd(view.B());
    const int n = static_cast<int>(net.bus_count());
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const bool adjacent = i == k || b(i, k) != 0.0;
            if (adjacent) continue;
            for (int ri : {idx.angle_pos(i), idx.magnitude_pos(i)}) {
                for (int ck : {idx.angle_pos(k), idx.magnitude_pos(k)}) {
                    if (ri >= 0 && ck >= 0) CHECK(jac(ri, ck) == 0.0);
                }
            }
        }
    }
}

TEST_CASE("case14 converges from flat start") {
    const Network net = load_case14();
    const InjectionSpec s = base_injections(net);
    const PFState x = solve_pf(net, net.all_closed(), s);
    REQUIRE(x.converged);
    CHECK(x.iterations <= 10);
    CHECK(x.max_mismatch <= 1e-8);
}

TEST_CASE("zero-injection network converges immediately") {
    const Network net = parse_matpower(kTwoBusLossless);
    InjectionSpec s;
    s.p_inject.setZero(2);
    s.q_inject.setZero(2);
    const PFState x = solve_pf(net, net.all_closed(), s);
    REQUIRE(x.converged);
    CHECK(x.iterations <= 1);
}

TEST_CASE("islanding a bus raises DisconnectedNetwork") {
    const Network net = load_case14();
    SwitchMask mask = net.all_closed();
    mask[13] = 0;  // line 14 = (7,8), the radial feed of bus 8
    const InjectionSpec s = base_injections(net);
    CHECK_THROWS_AS(solve_pf(net, mask, s), DisconnectedNetworkError);
    try {
        solve_pf(net, mask, s);
    } catch (const DisconnectedNetworkError& e) {
        CHECK(e.components().size() == 2);
    }
}

TEST_CASE("newton convergence is quadratic near the solution") {
    const Network net = load_case14();
    const InjectionSpec s = base_injections(net);
    const PFState x = solve_pf(net, net.all_closed(), s);
    REQUIRE(x.converged);
    REQUIRE(x.mismatch_history.size() >= 3);
    const auto& h = x.mismatch_history;
    // last two reductions satisfy m_{k+1} <= c m_k^2 with a moderate c
    for (std::size_t k = h.size() - 3; k + 1 < h.size(); ++k) {
        if (h[k] < 1e-14) continue;  // at rounding floor
        CHECK(h[k + 1] <= 1e4 * h[k] * h[k]);
    }
}

TEST_CASE("converged state re-evaluates within tolerance") {
    const Network net = load_case30();
    AdmittanceView view(net, net.all_closed());
    const InjectionSpec s = base_injections(net);
    const PFState x = solve_pf(view, s);
    REQUIRE(x.converged);
    CHECK(mismatch(view, x, s).cwiseAbs().maxCoeff() <= 1e-8);
}
