#include "aidcots/sensitivity_check.hpp"

#include <cmath>

namespace aidcots {

namespace {

// Perturbed solves share the solver path under test only through solve_pf,
// never through the closed-form derivative code.
const PFOptions kTightSolve{1e-12, 60};

Eigen::VectorXd state_in_unknown_order(const PFState& x, const UnknownIndexing& idx) {
    Eigen::VectorXd out(idx.size());
    int row = 0;
    for (int bus : idx.angle_buses()) out[row++] = x.v_ang[bus];
    for (int bus : idx.magnitude_buses()) out[row++] = x.v_mag[bus];
    return out;
}

std::vector<std::complex<double>> base_series(const AdmittanceView& view) {
    const std::size_t L = view.net().branch_count();
    std::vector<std::complex<double>> y(L);
    for (std::size_t l = 0; l < L; ++l) y[l] = view.series(static_cast<int>(l));
    return y;
}

PFState solve_perturbed(const Network& net, std::span<const std::uint8_t> mask,
                        std::span<const std::complex<double>> series, const InjectionSpec& s,
                        const PFState& warm) {
    AdmittanceView view(net, mask, series);
    return solve_pf(view, s, &warm, kTightSolve);
}

}  // namespace

double fd_check_pf_jacobian(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                            double step) {
    const UnknownIndexing idx(view.net());
    const Eigen::SparseMatrix<double> jac = pf_jacobian(view, x, idx);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(jac);
    double worst = 0.0;
    for (int j = 0; j < idx.size(); ++j) {
        PFState hi = x, lo = x;
        double h;
        if (j < idx.angle_count()) {
            const int bus = idx.angle_buses()[static_cast<std::size_t>(j)];
            h = step * std::max(1.0, std::abs(x.v_ang[bus]));
            hi.v_ang[bus] += h;
            lo.v_ang[bus] -= h;
        } else {
            const int bus = idx.magnitude_buses()[static_cast<std::size_t>(j - idx.angle_count())];
            h = step * std::max(1.0, std::abs(x.v_mag[bus]));
            hi.v_mag[bus] += h;
            lo.v_mag[bus] -= h;
        }
        const Eigen::VectorXd fd =
            (mismatch(view, hi, s, idx) - mismatch(view, lo, s, idx)) / (2.0 * h);
        for (int i = 0; i < idx.size(); ++i) {
            const double rel = std::abs(fd[i] - dense(i, j)) / std::max(1.0, std::abs(dense(i, j)));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

FdReport fd_check_admittance_jacobian(const AdmittanceView& view, const PFState& x,
                                      const InjectionSpec& s, double step) {
    const Network& net = view.net();
    const UnknownIndexing idx(net);
    const AdmittanceJacobian ja = admittance_jacobian(view, x);
    const auto y0 = base_series(view);
    FdReport rep;
    for (int l = 0; l < static_cast<int>(net.branch_count()); ++l) {
        if (!view.active(l)) continue;
        ++rep.lines_checked;
        for (LineParam which : {LineParam::Conductance, LineParam::Susceptance}) {
            const bool is_g = which == LineParam::Conductance;
            const double base = is_g ? y0[static_cast<std::size_t>(l)].real()
                                     : y0[static_cast<std::size_t>(l)].imag();
            const double h = step * std::max(1.0, std::abs(base));
            auto yp = y0, ym = y0;
            const std::complex<double> dh = is_g ? std::complex<double>(h, 0.0)
                                                 : std::complex<double>(0.0, h);
            yp[static_cast<std::size_t>(l)] += dh;
            ym[static_cast<std::size_t>(l)] -= dh;
            AdmittanceView vp(net, view.mask(), yp), vm(net, view.mask(), ym);
            const Eigen::VectorXd fd =
                (mismatch(vp, x, s, idx) - mismatch(vm, x, s, idx)) / (2.0 * h);
            const Eigen::VectorXd an = is_g ? Eigen::VectorXd(ja.wrt_g.col(l))
                                            : Eigen::VectorXd(ja.wrt_b.col(l));
            const double err =
                (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
            if (err > rep.max_rel_error) {
                rep.max_rel_error = err;
                rep.worst_line = l;
            }
        }
    }
    return rep;
}

FdReport fd_check_first_order(const Network& net, std::span<const std::uint8_t> mask,
                              const InjectionSpec& s, const PFState& x, const FirstOrderSens& first,
                              double rel_step) {
    const UnknownIndexing idx(net);
    AdmittanceView base_view(net, mask);
    const auto y0 = base_series(base_view);
    FdReport rep;
    for (int l = 0; l < static_cast<int>(net.branch_count()); ++l) {
        if (!base_view.active(l)) continue;
        ++rep.lines_checked;
        for (LineParam which : {LineParam::Conductance, LineParam::Susceptance}) {
            const bool is_g = which == LineParam::Conductance;
            const double base = is_g ? y0[static_cast<std::size_t>(l)].real()
                                     : y0[static_cast<std::size_t>(l)].imag();
            const double h = rel_step * std::max(1.0, std::abs(base));
            auto yp = y0, ym = y0;
            const std::complex<double> dh = is_g ? std::complex<double>(h, 0.0)
                                                 : std::complex<double>(0.0, h);
            yp[static_cast<std::size_t>(l)] += dh;
            ym[static_cast<std::size_t>(l)] -= dh;
            const PFState xp = solve_perturbed(net, mask, yp, s, x);
            const PFState xm = solve_perturbed(net, mask, ym, s, x);
            if (!xp.converged || !xm.converged) continue;
            const Eigen::VectorXd fd =
                (state_in_unknown_order(xp, idx) - state_in_unknown_order(xm, idx)) / (2.0 * h);
            const Eigen::VectorXd an = is_g ? first.xi_g.col(l) : first.xi_b.col(l);
            const double err =
                (fd - an).cwiseAbs().maxCoeff() / std::max(1e-6, an.cwiseAbs().maxCoeff());
            if (err > rep.max_rel_error) {
                rep.max_rel_error = err;
                rep.worst_line = l;
            }
        }
    }
    return rep;
}

FdReport fd_check_second_order(const Network& net, std::span<const std::uint8_t> mask,
                               const InjectionSpec& s, const PFState& x,
                               const SecondOrderSens& second, double rel_step) {
    const UnknownIndexing idx(net);
    AdmittanceView base_view(net, mask);
    const auto y0 = base_series(base_view);
    // re-solve the base point at the tight tolerance so the second difference
    // is not dominated by solver noise
    const PFState x0 = solve_perturbed(net, mask, y0, s, x);
    const Eigen::VectorXd x0v = state_in_unknown_order(x0, idx);
    FdReport rep;

    auto column_error = [&](const Eigen::VectorXd& fd, const Eigen::VectorXd& an) {
        return (fd - an).cwiseAbs().maxCoeff() / std::max(1e-6, an.cwiseAbs().maxCoeff());
    };

    for (int l = 0; l < static_cast<int>(net.branch_count()); ++l) {
        if (!base_view.active(l)) continue;
        ++rep.lines_checked;
        const double gl = y0[static_cast<std::size_t>(l)].real();
        const double bl = y0[static_cast<std::size_t>(l)].imag();

        auto shifted = [&](double dg, double db) {
            auto y = y0;
            y[static_cast<std::size_t>(l)] += std::complex<double>(dg, db);
            return solve_perturbed(net, mask, y, s, x0);
        };

        // Second differences divide the solver tolerance by h^2, so lines
        // with nearly flat columns sit under the rounding floor at the base
        // step. Retrying with enlarged steps keeps the check meaningful:
        // one of the step sizes lands between the noise and truncation
        // regimes.
        double err = std::numeric_limits<double>::infinity();
        for (const double scale : {1.0, 16.0, 64.0}) {
            const double hg = scale * rel_step * std::max(1.0, std::abs(gl));
            const double hb = scale * rel_step * std::max(1.0, std::abs(bl));
            const PFState gp = shifted(hg, 0.0), gm = shifted(-hg, 0.0);
            const PFState bp = shifted(0.0, hb), bm = shifted(0.0, -hb);
            if (!gp.converged || !gm.converged || !bp.converged || !bm.converged) continue;

            const Eigen::VectorXd fd_gg =
                (state_in_unknown_order(gp, idx) - 2.0 * x0v + state_in_unknown_order(gm, idx)) /
                (hg * hg);
            const Eigen::VectorXd fd_bb =
                (state_in_unknown_order(bp, idx) - 2.0 * x0v + state_in_unknown_order(bm, idx)) /
                (hb * hb);
            double trial = std::max(column_error(fd_gg, second.s_gg.col(l)),
                                    column_error(fd_bb, second.s_bb.col(l)));

            const PFState pp = shifted(hg, hb), pm = shifted(hg, -hb);
            const PFState mp = shifted(-hg, hb), mm = shifted(-hg, -hb);
            if (pp.converged && pm.converged && mp.converged && mm.converged) {
                const Eigen::VectorXd fd_gb =
                    (state_in_unknown_order(pp, idx) - state_in_unknown_order(pm, idx) -
                     state_in_unknown_order(mp, idx) + state_in_unknown_order(mm, idx)) /
                    (4.0 * hg * hb);
                trial = std::max(trial, column_error(fd_gb, second.s_gb.col(l)));
            }
            err = std::min(err, trial);
            if (err < 1e-4) break;
        }
        if (std::isinf(err)) continue;  // perturbed solves failed at every step
        if (err > rep.max_rel_error) {
            rep.max_rel_error = err;
            rep.worst_line = l;
        }
    }
    return rep;
}

double fd_check_hessian_xx(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& v, double step) {
    const UnknownIndexing idx(view.net());
    SensitivityEngine eng(view, x);
    const Eigen::VectorXd an = eng.hessian_xx_apply(u, v);

    auto shifted = [&](double a, double b) {
        PFState y = x;
        int row = 0;
        for (int bus : idx.angle_buses()) {
            y.v_ang[bus] += a * u[row] + b * v[row];
            ++row;
        }
        for (int bus : idx.magnitude_buses()) {
            y.v_mag[bus] += a * u[row] + b * v[row];
            ++row;
        }
        return mismatch(view, y, s, idx);
    };

    const Eigen::VectorXd fd =
        (shifted(step, step) - shifted(step, 0.0) - shifted(0.0, step) + shifted(0.0, 0.0)) /
        (step * step);
    return (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
}

double fd_check_mixed_hessian(const AdmittanceView& view, const PFState& x, LineParam which,
                              int line, const Eigen::VectorXd& u, double step) {
    const Network& net = view.net();
    const UnknownIndexing idx(net);
    SensitivityEngine eng(view, x);
    const Eigen::VectorXd an = eng.mixed_hessian_apply(which, line, u);

    auto state_shift = [&](double a) {
        PFState y = x;
        int row = 0;
        for (int bus : idx.angle_buses()) y.v_ang[bus] += a * u[row++];
        for (int bus : idx.magnitude_buses()) y.v_mag[bus] += a * u[row++];
        return y;
    };
    const PFState xp = state_shift(step), xm = state_shift(-step);
    const AdmittanceJacobian jp = admittance_jacobian(view, xp);
    const AdmittanceJacobian jm = admittance_jacobian(view, xm);
    const bool is_g = which == LineParam::Conductance;
    const Eigen::VectorXd colp =
        is_g ? Eigen::VectorXd(jp.wrt_g.col(line)) : Eigen::VectorXd(jp.wrt_b.col(line));
    const Eigen::VectorXd colm =
        is_g ? Eigen::VectorXd(jm.wrt_g.col(line)) : Eigen::VectorXd(jm.wrt_b.col(line));
    const Eigen::VectorXd fd = (colp - colm) / (2.0 * step);
    return (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
}

double second_order_residual(const AdmittanceView& view, const PFState& x,
                             const FirstOrderSens& first, const SecondOrderSens& second) {
    const Network& net = view.net();
    const UnknownIndexing idx(net);
    const Eigen::SparseMatrix<double> jac = pf_jacobian(view, x, idx);
    SensitivityEngine eng(view, x);
    double worst = 0.0;
    for (int l = 0; l < static_cast<int>(net.branch_count()); ++l) {
        if (!view.active(l)) continue;
        const Eigen::VectorXd sg = first.xi_g.col(l);
        const Eigen::VectorXd sb = first.xi_b.col(l);
        const Eigen::VectorXd hg_sg = eng.mixed_hessian_apply(LineParam::Conductance, l, sg);
        const Eigen::VectorXd hg_sb = eng.mixed_hessian_apply(LineParam::Conductance, l, sb);
        const Eigen::VectorXd hb_sg = eng.mixed_hessian_apply(LineParam::Susceptance, l, sg);
        const Eigen::VectorXd hb_sb = eng.mixed_hessian_apply(LineParam::Susceptance, l, sb);

        const Eigen::VectorXd r_gg =
            jac * second.s_gg.col(l) + eng.hessian_xx_apply(sg, sg) + 2.0 * hg_sg;
        const Eigen::VectorXd r_bb =
            jac * second.s_bb.col(l) + eng.hessian_xx_apply(sb, sb) + 2.0 * hb_sb;
        const Eigen::VectorXd r_gb =
            jac * second.s_gb.col(l) + eng.hessian_xx_apply(sg, sb) + hg_sb + hb_sg;
        const Eigen::VectorXd r_bg =
            jac * second.s_bg.col(l) + eng.hessian_xx_apply(sb, sg) + hb_sg + hg_sb;
        worst = std::max({worst, r_gg.cwiseAbs().maxCoeff(), r_bb.cwiseAbs().maxCoeff(),
                          r_gb.cwiseAbs().maxCoeff(), r_bg.cwiseAbs().maxCoeff()});
    }
    return worst;
}

TaylorReport taylor_prediction_errors(const Network& net, std::span<const std::uint8_t> mask,
                                      const InjectionSpec& s, const PFState& x,
                                      const FirstOrderSens& first, const SecondOrderSens& second,
                                      double rel_perturbation) {
    const UnknownIndexing idx(net);
    AdmittanceView base_view(net, mask);
    const auto y0 = base_series(base_view);
    const PFState x0 = solve_perturbed(net, mask, y0, s, x);
    const Eigen::VectorXd x0v = state_in_unknown_order(x0, idx);

    TaylorReport rep;
    rep.first_order_error.assign(net.branch_count(), -1.0);
    rep.with_second_order_error.assign(net.branch_count(), -1.0);

    for (int l = 0; l < static_cast<int>(net.branch_count()); ++l) {
        if (!base_view.active(l)) continue;
        const std::complex<double> dy = rel_perturbation * y0[static_cast<std::size_t>(l)];
        auto y = y0;
        y[static_cast<std::size_t>(l)] += dy;
        const PFState xp = solve_perturbed(net, mask, y, s, x0);
        if (!xp.converged) continue;
        const Eigen::VectorXd truth = state_in_unknown_order(xp, idx) - x0v;
        const double dg = dy.real(), db = dy.imag();
        const Eigen::VectorXd pred1 = first.xi_g.col(l) * dg + first.xi_b.col(l) * db;
        const Eigen::VectorXd pred2 =
            pred1 + 0.5 * (second.s_gg.col(l) * dg * dg + second.s_bb.col(l) * db * db +
                           (second.s_gb.col(l) + second.s_bg.col(l)) * dg * db);
        const double denom = std::max(truth.lpNorm<1>(), 1e-12);
        rep.first_order_error[static_cast<std::size_t>(l)] = (truth - pred1).lpNorm<1>() / denom;
        rep.with_second_order_error[static_cast<std::size_t>(l)] =
            (truth - pred2).lpNorm<1>() / denom;
    }
    return rep;
}

}  // namespace aidcots
