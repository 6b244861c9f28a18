#include "aidcots/power_flow.hpp"

#include <Eigen/SparseLU>
#include <cmath>

namespace aidcots {

UnknownIndexing::UnknownIndexing(const Network& net) {
    const int n = static_cast<int>(net.bus_count());
    ang_pos_.assign(static_cast<std::size_t>(n), -1);
    mag_pos_.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        if (net.buses()[static_cast<std::size_t>(i)].kind != BusKind::Slack) {
            ang_pos_[static_cast<std::size_t>(i)] = static_cast<int>(ang_buses_.size());
            ang_buses_.push_back(i);
        }
    }
    const int na = static_cast<int>(ang_buses_.size());
    for (int i = 0; i < n; ++i) {
        if (net.buses()[static_cast<std::size_t>(i)].kind == BusKind::PQ) {
            mag_pos_[static_cast<std::size_t>(i)] = na + static_cast<int>(mag_buses_.size());
            mag_buses_.push_back(i);
        }
    }
}

void computed_injections(const AdmittanceView& view, const PFState& x, Eigen::VectorXd& p,
                         Eigen::VectorXd& q) {
    const int n = static_cast<int>(view.net().bus_count());
    p.setZero(n);
    q.setZero(n);
    for (int i = 0; i < n; ++i) {
        const double vi = x.v_mag[i];
        const double ti = x.v_ang[i];
        double pi = 0.0, qi = 0.0;
        for (const auto& e : view.row(i)) {
            const double th = ti - x.v_ang[e.bus];
            const double c = std::cos(th), s = std::sin(th);
            pi += x.v_mag[e.bus] * (e.g * c + e.b * s);
            qi += x.v_mag[e.bus] * (e.g * s - e.b * c);
        }
        p[i] = vi * pi;
        q[i] = vi * qi;
    }
}

Eigen::VectorXd mismatch(const AdmittanceView& view, const PFState& x, const InjectionSpec& s,
                         const UnknownIndexing& idx) {
    Eigen::VectorXd p, q;
    computed_injections(view, x, p, q);
    Eigen::VectorXd r(idx.size());
    int row = 0;
    for (int bus : idx.angle_buses()) r[row++] = p[bus] - s.p_inject[bus];
    for (int bus : idx.magnitude_buses()) r[row++] = q[bus] - s.q_inject[bus];
    return r;
}

Eigen::VectorXd mismatch(const AdmittanceView& view, const PFState& x, const InjectionSpec& s) {
    return mismatch(view, x, s, UnknownIndexing(view.net()));
}

Eigen::SparseMatrix<double> pf_jacobian(const AdmittanceView& view, const PFState& x,
                                        const UnknownIndexing& idx) {
    const int n = static_cast<int>(view.net().bus_count());
    Eigen::VectorXd p, q;
    computed_injections(view, x, p, q);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(8 * n));

    for (int i = 0; i < n; ++i) {
        const double vi = x.v_mag[i];
        const int p_row = idx.angle_pos(i);      // P equation lives at the angle slot
        const int q_row = idx.magnitude_pos(i);  // Q equation at the magnitude slot
        if (p_row < 0 && q_row < 0) continue;

        double gii = 0.0, bii = 0.0;
        for (const auto& e : view.row(i)) {
            if (e.bus == i) {
                gii = e.g;
                bii = e.b;
                break;
            }
        }

        // diagonal state entries
        const int ti_col = idx.angle_pos(i);
        const int vi_col = idx.magnitude_pos(i);
        if (p_row >= 0) {
            if (ti_col >= 0) trip.emplace_back(p_row, ti_col, -q[i] - bii * vi * vi);
            if (vi_col >= 0) trip.emplace_back(p_row, vi_col, p[i] / vi + gii * vi);
        }
        if (q_row >= 0) {
            if (ti_col >= 0) trip.emplace_back(q_row, ti_col, p[i] - gii * vi * vi);
            if (vi_col >= 0) trip.emplace_back(q_row, vi_col, q[i] / vi - bii * vi);
        }

        for (const auto& e : view.row(i)) {
            const int k = e.bus;
            if (k == i) continue;
            const double vk = x.v_mag[k];
            const double th = x.v_ang[i] - x.v_ang[k];
            const double c = e.g * std::cos(th) + e.b * std::sin(th);
            const double s = e.g * std::sin(th) - e.b * std::cos(th);
            const int tk_col = idx.angle_pos(k);
            const int vk_col = idx.magnitude_pos(k);
            if (p_row >= 0) {
                if (tk_col >= 0) trip.emplace_back(p_row, tk_col, vi * vk * s);
                if (vk_col >= 0) trip.emplace_back(p_row, vk_col, vi * c);
            }
            if (q_row >= 0) {
                if (tk_col >= 0) trip.emplace_back(q_row, tk_col, -vi * vk * c);
                if (vk_col >= 0) trip.emplace_back(q_row, vk_col, vi * s);
            }
        }
    }

    Eigen::SparseMatrix<double> jac(idx.size(), idx.size());
    jac.setFromTriplets(trip.begin(), trip.end());
    jac.makeCompressed();
    return jac;
}

Eigen::SparseMatrix<double> pf_jacobian(const AdmittanceView& view, const PFState& x) {
    return pf_jacobian(view, x, UnknownIndexing(view.net()));
}

PFState flat_start(const Network& net) {
    const int n = static_cast<int>(net.bus_count());
    PFState x;
    x.v_mag.resize(n);
    x.v_ang.resize(n);
    const double ref = net.buses()[static_cast<std::size_t>(net.slack_index())].a_setpoint;
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses()[static_cast<std::size_t>(i)];
        x.v_mag[i] = b.kind == BusKind::PQ ? 1.0 : b.v_setpoint;
        x.v_ang[i] = ref;
    }
    return x;
}

InjectionSpec injections_for_dispatch(const Network& net, std::span<const double> p_gen) {
    const int n = static_cast<int>(net.bus_count());
    InjectionSpec s;
    s.p_inject.setZero(n);
    s.q_inject.setZero(n);
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses()[static_cast<std::size_t>(i)];
        s.p_inject[i] = -b.p_demand;
        s.q_inject[i] = -b.q_demand;
    }
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        if (!net.generators()[g].in_service) continue;
        s.p_inject[net.bus_index(net.generators()[g].bus)] += p_gen[g];
    }
    return s;
}

PFState solve_pf(const AdmittanceView& view, const InjectionSpec& s, const PFState* x0,
                 const PFOptions& opts) {
    const Network& net = view.net();
    if (!net.is_connected(view.mask())) {
        throw DisconnectedNetworkError(net.components(view.mask()));
    }
    const UnknownIndexing idx(net);

    PFState x = x0 ? *x0 : flat_start(net);
    // fixed entries always obey the bus setpoints
    for (int i = 0; i < static_cast<int>(net.bus_count()); ++i) {
        const Bus& b = net.buses()[static_cast<std::size_t>(i)];
        if (b.kind != BusKind::PQ) x.v_mag[i] = b.v_setpoint;
        if (b.kind == BusKind::Slack) x.v_ang[i] = b.a_setpoint;
    }
    x.converged = false;
    x.iterations = 0;
    x.mismatch_history.clear();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    for (int it = 0; it <= opts.max_iterations; ++it) {
        Eigen::VectorXd r = mismatch(view, x, s, idx);
        x.max_mismatch = idx.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff();
        x.mismatch_history.push_back(x.max_mismatch);
        if (x.max_mismatch <= opts.tolerance) {
            x.converged = true;
            x.iterations = it;
            return x;
        }
        if (it == opts.max_iterations) break;

        Eigen::SparseMatrix<double> jac = pf_jacobian(view, x, idx);
        lu.compute(jac);
        if (lu.info() != Eigen::Success) throw SingularJacobianError(it);
        Eigen::VectorXd step = lu.solve(-r);
        if (!step.allFinite()) throw SingularJacobianError(it);

        int row = 0;
        for (int bus : idx.angle_buses()) x.v_ang[bus] += step[row++];
        for (int bus : idx.magnitude_buses()) x.v_mag[bus] += step[row++];
    }
    x.iterations = opts.max_iterations;
    return x;  // converged stays false
}

PFState solve_pf(const Network& net, std::span<const std::uint8_t> mask, const InjectionSpec& s,
                 const PFState* x0, const PFOptions& opts) {
    AdmittanceView view(net, mask);
    return solve_pf(view, s, x0, opts);
}

}  // namespace aidcots
