#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "aidcots/ac_eval.hpp"
#include "aidcots/sensitivity_check.hpp"
#include "support/fixtures.hpp"

using namespace aidcots;
using namespace aidcots::testing;

namespace {

struct Solved {
    Network net;
    SwitchMask mask;
    InjectionSpec inj;
    PFState state;

    static Solved make(Network n) {
        const SwitchMask closed = n.all_closed();
        const std::vector<double> dispatch = redispatch_dc(n, closed);
        InjectionSpec s = injections_for_dispatch(n, dispatch);
        PFState x = solve_pf(n, closed, s, nullptr, {1e-12, 60});
        REQUIRE(x.converged);
        return Solved{std::move(n), closed, std::move(s), std::move(x)};
    }
};

}  // namespace

TEST_CASE("flat-start admittance derivatives cancel on a lossless line") {
    const Network net = parse_matpower(kTwoBusLossless);
    AdmittanceView view(net, net.all_closed());
    const PFState x = flat_start(net);
    SensitivityEngine eng(view, x);
    const AdmittanceJacobian ja = eng.admittance_jacobian();
    // dp/dg = |v|^2 - |v||v| cos 0 = 0 and dq/db = -|v|^2 + |v||v| cos 0 = 0
    CHECK(Eigen::MatrixXd(ja.wrt_g).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(Eigen::MatrixXd(ja.wrt_b).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("admittance jacobian matches finite differences on case14") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    const FdReport rep = fd_check_admittance_jacobian(view, s.state, s.inj);
    CHECK(rep.lines_checked == 20);
    CHECK(rep.max_rel_error < 1e-6);
}

TEST_CASE("admittance jacobian columns touch only endpoint equations") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    const UnknownIndexing idx(s.net);
    SensitivityEngine eng(view, s.state);
    const AdmittanceJacobian ja = eng.admittance_jacobian();
    const Eigen::MatrixXd dg = Eigen::MatrixXd(ja.wrt_g);
    for (int l = 0; l < 20; ++l) {
        const int f = s.net.from_index(l), t = s.net.to_index(l);
        for (int i = 0; i < static_cast<int>(s.net.bus_count()); ++i) {
            if (i == f || i == t) continue;
            if (idx.angle_pos(i) >= 0) CHECK(dg(idx.angle_pos(i), l) == 0.0);
            if (idx.magnitude_pos(i) >= 0) CHECK(dg(idx.magnitude_pos(i), l) == 0.0);
        }
    }
}

TEST_CASE("injections are affine in the series parameters") {
    // the second derivative of any injection w.r.t. its own line parameter
    // vanishes, which is what drops the H_alpha_alpha term
    const Solved s = Solved::make(load_case14());
    const UnknownIndexing idx(s.net);
    std::vector<std::complex<double>> y0(s.net.branch_count());
    for (std::size_t l = 0; l < s.net.branch_count(); ++l) {
        y0[l] = s.net.branches()[l].series_admittance();
    }
    for (int l : {0, 6, 13}) {
        const double h = 5e-2;
        auto yp = y0, ym = y0;
        yp[static_cast<std::size_t>(l)] += h;
        ym[static_cast<std::size_t>(l)] -= h;
        AdmittanceView base(s.net, s.mask), hi(s.net, s.mask, yp), lo(s.net, s.mask, ym);
        const Eigen::VectorXd second =
            (mismatch(hi, s.state, s.inj, idx) - 2.0 * mismatch(base, s.state, s.inj, idx) +
             mismatch(lo, s.state, s.inj, idx)) /
            (h * h);
        CHECK(second.cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("first-order sensitivities match solver finite differences") {
    for (const char* which : {"case14", "case30"}) {
        CAPTURE(which);
        const Solved s =
            Solved::make(std::string(which) == "case14" ? load_case14() : load_case30());
        AdmittanceView view(s.net, s.mask);
        const FirstOrderSens first = first_order(view, s.state);
        const FdReport rep = fd_check_first_order(s.net, s.mask, s.inj, s.state, first);
        CHECK(rep.lines_checked > 0);
        CHECK(rep.max_rel_error < 1e-4);
    }
}

TEST_CASE("duplicate parallel lines get identical sensitivity columns") {
    std::string text = kTriangleCase;
    const std::string dup = "  2 3 0.01 0.09 0.02 80.0 0 0 0 0 1 -360 360;\n";
    const auto pos = text.rfind("];");
    text.insert(pos, dup);
    const Solved s = Solved::make(parse_matpower(text));
    AdmittanceView view(s.net, s.mask);
    const FirstOrderSens first = first_order(view, s.state);
    CHECK((first.xi_g.col(2) - first.xi_g.col(3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((first.xi_b.col(2) - first.xi_b.col(3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(first.per_line_norm[2] == doctest::Approx(first.per_line_norm[3]));
}

TEST_CASE("radial two-bus sensitivity equals the scalar implicit derivative") {
    const Network net = parse_matpower(kTwoBusCase);
    const Solved s = Solved::make(parse_matpower(kTwoBusCase));
    AdmittanceView view(s.net, s.mask);
    const FirstOrderSens first = first_order(view, s.state);
    // scalar check through the solver with a tiny step
    const double h = 1e-7;
    std::vector<std::complex<double>> yp{s.net.branches()[0].series_admittance() + h};
    std::vector<std::complex<double>> ym{s.net.branches()[0].series_admittance() - h};
    AdmittanceView vp(s.net, s.mask, yp), vm(s.net, s.mask, ym);
    const PFState xp = solve_pf(vp, s.inj, &s.state, {1e-13, 60});
    const PFState xm = solve_pf(vm, s.inj, &s.state, {1e-13, 60});
    REQUIRE(xp.converged);
    REQUIRE(xm.converged);
    const double d_ang = (xp.v_ang[1] - xm.v_ang[1]) / (2.0 * h);
    const double d_mag = (xp.v_mag[1] - xm.v_mag[1]) / (2.0 * h);
    CHECK(first.xi_g(0, 0) == doctest::Approx(d_ang).epsilon(1e-5));
    CHECK(first.xi_g(1, 0) == doctest::Approx(d_mag).epsilon(1e-5));
    (void)net;
}

TEST_CASE("state hessian bilinear form") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    SensitivityEngine eng(view, s.state);
    const int nx = eng.indexing().size();

    SUBCASE("zero directions give the zero vector") {
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(nx);
        CHECK(eng.hessian_xx_apply(z, z).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bilinearity is exact") {
        Eigen::VectorXd u(nx), v(nx);
        for (int i = 0; i < nx; ++i) {
            u[i] = std::sin(1.0 + i);
            v[i] = std::cos(2.0 + 0.5 * i);
        }
        const Eigen::VectorXd a = eng.hessian_xx_apply(u, 2.0 * v);
        const Eigen::VectorXd b = 2.0 * eng.hessian_xx_apply(u, v);
        CHECK((a - b).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("agrees with a directional second difference") {
        Eigen::VectorXd u(nx), v(nx);
        for (int i = 0; i < nx; ++i) {
            u[i] = 0.5 * std::sin(3.0 * i + 1.0);
            v[i] = 0.5 * std::cos(2.0 * i + 0.7);
        }
        CHECK(fd_check_hessian_xx(view, s.state, s.inj, u, v) < 1e-4);
    }
}

TEST_CASE("mixed hessian apply") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    SensitivityEngine eng(view, s.state);
    const int nx = eng.indexing().size();
    Eigen::VectorXd u(nx);
    for (int i = 0; i < nx; ++i) u[i] = std::sin(0.3 * i + 0.2);

    SUBCASE("zero direction maps to zero") {
        const Eigen::VectorXd z = Eigen::VectorXd::Zero(nx);
        for (int l : {0, 5, 13}) {
            CHECK(eng.mixed_hessian_apply(LineParam::Conductance, l, z).cwiseAbs().maxCoeff() ==
                  0.0);
        }
    }
    SUBCASE("matches the finite difference of the parameter column") {
        for (int l : {0, 3, 9, 17}) {
            CAPTURE(l);
            CHECK(fd_check_mixed_hessian(view, s.state, LineParam::Conductance, l, u) < 1e-4);
            CHECK(fd_check_mixed_hessian(view, s.state, LineParam::Susceptance, l, u) < 1e-4);
        }
    }
    SUBCASE("flat-start diagonal entry matches the closed form") {
        // on an r = 0 line at flat start: d2p_k / d|v_k| d g_kj = 2 - cos 0 = 1
        const Network net2 = parse_matpower(kTwoBusLossless);
        AdmittanceView view2(net2, net2.all_closed());
        const PFState x2 = flat_start(net2);
        SensitivityEngine eng2(view2, x2);
        const int nx2 = eng2.indexing().size();
        REQUIRE(nx2 == 2);
        // direction that moves only |v_2|
        Eigen::VectorXd dv = Eigen::VectorXd::Zero(nx2);
        dv[1] = 1.0;
        const Eigen::VectorXd w = eng2.mixed_hessian_apply(LineParam::Conductance, 0, dv);
        // P2 row responds with 2|v2| - |v1| cos = 1
        CHECK(w[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("second-order sensitivities") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    SensitivityEngine eng(view, s.state);
    const FirstOrderSens first = eng.first_order();
    const SecondOrderSens second = eng.second_order(first);

    SUBCASE("gb and bg columns agree (Schwarz symmetry)") {
        CHECK((second.s_gb - second.s_bg).cwiseAbs().maxCoeff() < 1e-8);
    }
    SUBCASE("direct substitution residuals vanish") {
        CHECK(second_order_residual(view, s.state, first, second) < 1e-8);
    }
    SUBCASE("matches solver second differences") {
        const FdReport rep = fd_check_second_order(s.net, s.mask, s.inj, s.state, second);
        CHECK(rep.lines_checked == 20);
        CHECK(rep.max_rel_error < 1e-3);
    }
}

TEST_CASE("second-order columns vanish on a linear network") {
    // lossless line, no load: the solved state sits at flat voltage where
    // the model is locally linear in the susceptance
    const Network net = parse_matpower(kTwoBusLossless);
    AdmittanceView view(net, net.all_closed());
    InjectionSpec s;
    s.p_inject.setZero(2);
    s.q_inject.setZero(2);
    const PFState x = solve_pf(view, s, nullptr, {1e-13, 50});
    REQUIRE(x.converged);
    SensitivityEngine eng(view, x);
    const FirstOrderSens first = eng.first_order();
    const SecondOrderSens second = eng.second_order(first);
    CHECK(second.s_bb.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("taylor prediction quality on case14") {
    const Solved s = Solved::make(load_case14());
    AdmittanceView view(s.net, s.mask);
    const SensitivityBundle bundle = compute_sensitivities(view, s.state);
    const TaylorReport rep = taylor_prediction_errors(s.net, s.mask, s.inj, s.state, bundle.first,
                                                      bundle.second, 0.01);
    int checked = 0, improved = 0;
    for (std::size_t l = 0; l < rep.first_order_error.size(); ++l) {
        if (rep.first_order_error[l] < 0.0) continue;
        ++checked;
        CHECK(rep.first_order_error[l] <= 0.05);
        if (rep.with_second_order_error[l] <= rep.first_order_error[l] + 1e-12) ++improved;
    }
    CHECK(checked == 20);
    CHECK(improved >= (checked * 9) / 10);
}

TEST_CASE("per-line norms are invariant under bus reordering") {
    // same triangle with buses relabeled 1->3, 2->1, 3->2 and rows reordered
    const char* permuted = R"(
function mpc = triangle_permuted
mpc.version = '2';
mpc.baseMVA = 100.0;
mpc.bus = [
  2 1 40.0 10.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  3 3 0.0  0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
  1 2 0.0  0.0 0.0 0.0 1 1.0 0.0 0.0 1 1.10 0.90;
];
mpc.gen = [
  3 0.0 0.0 50.0 -50.0 1.0 100.0 1 60.0 0.0;
  1 0.0 0.0 50.0 -50.0 1.0 100.0 1 60.0 0.0;
];
mpc.gencost = [
  2 0.0 0.0 3 0.0 5.0 0.0;
  2 0.0 0.0 3 0.0 9.0 0.0;
];
mpc.branch = [
  3 1 0.01 0.08 0.02 80.0 0 0 0 0 1 -360 360;
  3 2 0.02 0.16 0.02 80.0 0 0 0 0 1 -360 360;
  1 2 0.01 0.09 0.02 80.0 0 0 0 0 1 -360 360;
];
)";
    const Solved a = Solved::make(parse_matpower(kTriangleCase));
    const Solved b = Solved::make(parse_matpower(permuted));
    AdmittanceView va(a.net, a.mask), vb(b.net, b.mask);
    const SensitivityBundle sa = compute_sensitivities(va, a.state);
    const SensitivityBundle sb = compute_sensitivities(vb, b.state);
    for (int l = 0; l < 3; ++l) {
        CHECK(sa.first.per_line_norm[l] ==
              doctest::Approx(sb.first.per_line_norm[l]).epsilon(1e-9));
        CHECK(sa.second.per_line_norm[l] ==
              doctest::Approx(sb.second.per_line_norm[l]).epsilon(1e-8));
    }
}
