#include "aidcots/sensitivity.hpp"

#include <cmath>

namespace aidcots {

namespace {

// Injection-like quantities evaluated with a 2x2 parameter-derivative stamp
// in place of the admittance matrix. Because injections are affine in the
// matrix entries, these are exactly the rows of dp/d(alpha_l), dq/d(alpha_l),
// and their state Jacobian gives the mixed Hessian block.
struct StampBlock {
    int f, t;                      // dense endpoint indices
    double g[2][2], b[2][2];       // derivative stamp, real and imaginary
    double pt[2], qt[2];           // p-tilde, q-tilde at (f, t)

    StampBlock(const AdmittanceView& view, const PFState& x, LineParam which, int line) {
        const Network& net = view.net();
        f = net.from_index(line);
        t = net.to_index(line);
        const LineStamp& s = view.stamp(line);
        const std::complex<double> w =
            which == LineParam::Conductance ? std::complex<double>(1.0, 0.0)
                                            : std::complex<double>(0.0, 1.0);
        const std::complex<double> d[2][2] = {{s.dff * w, s.dft * w}, {s.dtf * w, s.dtt * w}};
        const int bus[2] = {f, t};
        for (int a = 0; a < 2; ++a) {
            for (int c = 0; c < 2; ++c) {
                g[a][c] = d[a][c].real();
                b[a][c] = d[a][c].imag();
            }
        }
        for (int a = 0; a < 2; ++a) {
            const int i = bus[a];
            double pi = 0.0, qi = 0.0;
            for (int c = 0; c < 2; ++c) {
                const int k = bus[c];
                const double th = x.v_ang[i] - x.v_ang[k];
                const double cs = std::cos(th), sn = std::sin(th);
                pi += x.v_mag[k] * (g[a][c] * cs + b[a][c] * sn);
                qi += x.v_mag[k] * (g[a][c] * sn - b[a][c] * cs);
            }
            pt[a] = x.v_mag[i] * pi;
            qt[a] = x.v_mag[i] * qi;
        }
    }
};

}  // namespace

SensitivityEngine::SensitivityEngine(const AdmittanceView& view, const PFState& x)
    : view_(&view), x_(&x), idx_(view.net()) {
    Eigen::SparseMatrix<double> jac = pf_jacobian(view, x, idx_);
    lu_.compute(jac);
    if (lu_.info() != Eigen::Success) throw SingularJacobianError(0);
    computed_injections(view, x, p_calc_, q_calc_);
}

Eigen::VectorXd SensitivityEngine::solve_jacobian(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd w = lu_.solve(rhs);
    if (!w.allFinite()) throw SingularJacobianError(0);
    return w;
}

AdmittanceJacobian SensitivityEngine::admittance_jacobian() const {
    const Network& net = view_->net();
    const int L = static_cast<int>(net.branch_count());
    std::vector<Eigen::Triplet<double>> tg, tb;
    tg.reserve(4 * static_cast<std::size_t>(L));
    tb.reserve(4 * static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        if (!view_->active(l)) continue;
        for (LineParam which : {LineParam::Conductance, LineParam::Susceptance}) {
            StampBlock sb(*view_, *x_, which, l);
            auto& out = which == LineParam::Conductance ? tg : tb;
            const int bus[2] = {sb.f, sb.t};
            for (int a = 0; a < 2; ++a) {
                const int p_row = idx_.angle_pos(bus[a]);
                const int q_row = idx_.magnitude_pos(bus[a]);
                if (p_row >= 0 && sb.pt[a] != 0.0) out.emplace_back(p_row, l, sb.pt[a]);
                if (q_row >= 0 && sb.qt[a] != 0.0) out.emplace_back(q_row, l, sb.qt[a]);
            }
        }
    }
    AdmittanceJacobian out;
    out.wrt_g.resize(idx_.size(), L);
    out.wrt_b.resize(idx_.size(), L);
    out.wrt_g.setFromTriplets(tg.begin(), tg.end());
    out.wrt_b.setFromTriplets(tb.begin(), tb.end());
    out.wrt_g.makeCompressed();
    out.wrt_b.makeCompressed();
    return out;
}

FirstOrderSens SensitivityEngine::first_order() const {
    const int L = static_cast<int>(view_->net().branch_count());
    const AdmittanceJacobian ja = admittance_jacobian();
    FirstOrderSens out;
    out.xi_g.setZero(idx_.size(), L);
    out.xi_b.setZero(idx_.size(), L);
    out.per_line_norm.setZero(L);
    for (int l = 0; l < L; ++l) {
        if (!view_->active(l)) continue;
        out.xi_g.col(l) = solve_jacobian(-Eigen::VectorXd(ja.wrt_g.col(l)));
        out.xi_b.col(l) = solve_jacobian(-Eigen::VectorXd(ja.wrt_b.col(l)));
        out.per_line_norm[l] =
            out.xi_g.col(l).template lpNorm<1>() + out.xi_b.col(l).template lpNorm<1>();
    }
    return out;
}

Eigen::VectorXd SensitivityEngine::hessian_xx_apply(const Eigen::VectorXd& u,
                                                    const Eigen::VectorXd& v) const {
    const Network& net = view_->net();
    const int n = static_cast<int>(net.bus_count());
    const PFState& x = *x_;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(idx_.size());

    auto uc = [&](int pos) { return pos >= 0 ? u[pos] : 0.0; };
    auto vc = [&](int pos) { return pos >= 0 ? v[pos] : 0.0; };

    for (int i = 0; i < n; ++i) {
        const int p_row = idx_.angle_pos(i);
        const int q_row = idx_.magnitude_pos(i);
        if (p_row < 0 && q_row < 0) continue;

        const double vi = x.v_mag[i];
        const double u_vi = uc(idx_.magnitude_pos(i)), v_vi = vc(idx_.magnitude_pos(i));
        const double u_ti = uc(idx_.angle_pos(i)), v_ti = vc(idx_.angle_pos(i));

        double gii = 0.0, bii = 0.0;
        double acc_p = 0.0, acc_q = 0.0;

        for (const auto& e : view_->row(i)) {
            if (e.bus == i) {
                gii = e.g;
                bii = e.b;
                continue;
            }
            const int k = e.bus;
            const double vk = x.v_mag[k];
            const double th = x.v_ang[i] - x.v_ang[k];
            const double c = e.g * std::cos(th) + e.b * std::sin(th);
            const double s = e.g * std::sin(th) - e.b * std::cos(th);
            const double u_vk = uc(idx_.magnitude_pos(k)), v_vk = vc(idx_.magnitude_pos(k));
            const double u_tk = uc(idx_.angle_pos(k)), v_tk = vc(idx_.angle_pos(k));

            const double vv = u_vi * v_vk + u_vk * v_vi;
            const double vt_ii = u_vi * v_ti + u_ti * v_vi;  // (v_i, theta_i) pairing
            const double vt_ik = u_vi * v_tk + u_tk * v_vi;
            const double vt_ki = u_vk * v_ti + u_ti * v_vk;
            const double vt_kk = u_vk * v_tk + u_tk * v_vk;
            const double tt_ik = u_ti * v_tk + u_tk * v_ti;

            acc_p += c * vv;
            acc_p += (-vk * s) * vt_ii + (vk * s) * vt_ik;
            acc_p += (-vi * s) * vt_ki + (vi * s) * vt_kk;
            acc_p += (-vi * vk * c) * (u_ti * v_ti) + (vi * vk * c) * tt_ik +
                     (-vi * vk * c) * (u_tk * v_tk);

            acc_q += s * vv;
            acc_q += (vk * c) * vt_ii + (-vk * c) * vt_ik;
            acc_q += (vi * c) * vt_ki + (-vi * c) * vt_kk;
            acc_q += (-vi * vk * s) * (u_ti * v_ti) + (vi * vk * s) * tt_ik +
                     (-vi * vk * s) * (u_tk * v_tk);
        }
        acc_p += 2.0 * gii * u_vi * v_vi;
        acc_q += -2.0 * bii * u_vi * v_vi;

        if (p_row >= 0) w[p_row] = acc_p;
        if (q_row >= 0) w[q_row] = acc_q;
    }
    return w;
}

Eigen::VectorXd SensitivityEngine::mixed_hessian_apply(LineParam which, int line,
                                                       const Eigen::VectorXd& u) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(idx_.size());
    if (!view_->active(line)) return w;
    const PFState& x = *x_;
    StampBlock sb(*view_, x, which, line);
    const int bus[2] = {sb.f, sb.t};
    auto uc = [&](int pos) { return pos >= 0 ? u[pos] : 0.0; };

    for (int a = 0; a < 2; ++a) {
        const int i = bus[a];
        const double vi = x.v_mag[i];
        const int p_row = idx_.angle_pos(i);
        const int q_row = idx_.magnitude_pos(i);
        if (p_row < 0 && q_row < 0) continue;

        double dp = 0.0, dq = 0.0;
        // diagonal state entries of the tilde Jacobian
        const double u_ti = uc(idx_.angle_pos(i));
        const double u_vi = uc(idx_.magnitude_pos(i));
        dp += (-sb.qt[a] - sb.b[a][a] * vi * vi) * u_ti;
        dp += (sb.pt[a] / vi + sb.g[a][a] * vi) * u_vi;
        dq += (sb.pt[a] - sb.g[a][a] * vi * vi) * u_ti;
        dq += (sb.qt[a] / vi - sb.b[a][a] * vi) * u_vi;

        const int c = 1 - a;
        const int k = bus[c];
        const double vk = x.v_mag[k];
        const double th = x.v_ang[i] - x.v_ang[k];
        const double ct = sb.g[a][c] * std::cos(th) + sb.b[a][c] * std::sin(th);
        const double st = sb.g[a][c] * std::sin(th) - sb.b[a][c] * std::cos(th);
        const double u_tk = uc(idx_.angle_pos(k));
        const double u_vk = uc(idx_.magnitude_pos(k));
        dp += (vi * vk * st) * u_tk + (vi * ct) * u_vk;
        dq += (-vi * vk * ct) * u_tk + (vi * st) * u_vk;

        if (p_row >= 0) w[p_row] += dp;
        if (q_row >= 0) w[q_row] += dq;
    }
    return w;
}

SecondOrderSens SensitivityEngine::second_order(const FirstOrderSens& first) const {
    const int L = static_cast<int>(view_->net().branch_count());
    SecondOrderSens out;
    out.s_gg.setZero(idx_.size(), L);
    out.s_bb.setZero(idx_.size(), L);
    out.s_gb.setZero(idx_.size(), L);
    out.s_bg.setZero(idx_.size(), L);
    out.per_line_norm.setZero(L);

    for (int l = 0; l < L; ++l) {
        if (!view_->active(l)) continue;
        const Eigen::VectorXd sg = first.xi_g.col(l);
        const Eigen::VectorXd sb = first.xi_b.col(l);

        // d2f/d(alpha)d(alpha) vanishes identically: injections are affine in
        // the series parameters, so only state curvature and mixed terms remain.
        const Eigen::VectorXd hg_sg = mixed_hessian_apply(LineParam::Conductance, l, sg);
        const Eigen::VectorXd hg_sb = mixed_hessian_apply(LineParam::Conductance, l, sb);
        const Eigen::VectorXd hb_sg = mixed_hessian_apply(LineParam::Susceptance, l, sg);
        const Eigen::VectorXd hb_sb = mixed_hessian_apply(LineParam::Susceptance, l, sb);

        out.s_gg.col(l) = solve_jacobian(-(hessian_xx_apply(sg, sg) + 2.0 * hg_sg));
        out.s_bb.col(l) = solve_jacobian(-(hessian_xx_apply(sb, sb) + 2.0 * hb_sb));
        out.s_gb.col(l) = solve_jacobian(-(hessian_xx_apply(sg, sb) + hg_sb + hb_sg));
        out.s_bg.col(l) = solve_jacobian(-(hessian_xx_apply(sb, sg) + hb_sg + hg_sb));
    }
    out.aggregate = out.s_gg + out.s_bb + out.s_gb + out.s_bg;
    for (int l = 0; l < L; ++l) out.per_line_norm[l] = out.aggregate.col(l).lpNorm<1>();
    return out;
}

AdmittanceJacobian admittance_jacobian(const AdmittanceView& view, const PFState& x) {
    return SensitivityEngine(view, x).admittance_jacobian();
}

FirstOrderSens first_order(const AdmittanceView& view, const PFState& x) {
    return SensitivityEngine(view, x).first_order();
}

SecondOrderSens second_order(const AdmittanceView& view, const PFState& x,
                             const FirstOrderSens& first) {
    return SensitivityEngine(view, x).second_order(first);
}

SensitivityBundle compute_sensitivities(const AdmittanceView& view, const PFState& x) {
    SensitivityEngine eng(view, x);
    SensitivityBundle out;
    out.first = eng.first_order();
    out.second = eng.second_order(out.first);
    return out;
}

}  // namespace aidcots
