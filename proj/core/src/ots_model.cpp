#include "aidcots/ots_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace aidcots {

int ModelDescription::add_var(Variable v) {
    vars.push_back(std::move(v));
    obj.linear.push_back(0.0);
    return static_cast<int>(vars.size()) - 1;
}

std::vector<int> OTSSolution::opened_lines_1based() const {
    std::vector<int> out;
    for (std::size_t l = 0; l < z.size(); ++l) {
        if (z[l] == 0) out.push_back(static_cast<int>(l) + 1);
    }
    return out;
}

BigMVector big_m(const Network& net, double angle_min, double angle_max) {
    if (!(angle_min <= angle_max)) throw Error("empty angle box");
    const double range = angle_max - angle_min;
    BigMVector out;
    out.m.resize(static_cast<int>(net.branch_count()));
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        out.m[static_cast<int>(l)] = std::abs(net.branches()[l].dc_susceptance()) * range;
    }
    return out;
}

namespace {

std::set<int> candidate_lines(const Network& net, const OTSConfig& cfg) {
    std::set<int> cands;
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const Branch& br = net.branches()[l];
        if (br.in_service && br.switchable) cands.insert(static_cast<int>(l));
    }
    if (cfg.protect_bridges) {
        for (int b : net.bridges()) cands.erase(b);
    }
    if (!cfg.candidate_filter.empty()) {
        std::set<int> keep(cfg.candidate_filter.begin(), cfg.candidate_filter.end());
        std::set<int> filtered;
        for (int l : cands) {
            if (keep.count(l)) filtered.insert(l);
        }
        cands = std::move(filtered);
    }
    return cands;
}

void add_generator_cost(ModelDescription& m, const Network& net, int gen_idx, int pg,
                        int pwl_segments) {
    const Generator& g = net.generators()[static_cast<std::size_t>(gen_idx)];
    const double base = net.base_mva();
    if (g.cost_c2 < 0.0) throw UnboundedCostError(gen_idx);
    m.obj.constant += g.cost_c0;
    m.obj.linear[static_cast<std::size_t>(pg)] += g.cost_c1 * base;
    if (g.cost_c2 == 0.0) return;

    // epigraph of the residual quadratic part c2*P^2, tangent cuts refined
    // until the sagitta is within 0.1% of the cost scale
    const double lo = g.p_min * base, hi = g.p_max * base;
    if (hi <= lo) {
        m.obj.constant += g.cost_c2 * lo * lo;
        return;
    }
    const double scale = std::max({std::abs(g.cost_at_mw(lo)), std::abs(g.cost_at_mw(hi)), 1.0});
    int segments = std::max(1, pwl_segments);
    while (g.cost_c2 * std::pow((hi - lo) / segments, 2) / 4.0 > 1e-3 * scale) segments *= 2;

    Variable epi;
    epi.name = "cq_" + std::to_string(gen_idx);
    epi.lb = 0.0;
    epi.ub = std::numeric_limits<double>::infinity();
    epi.kind = VarKind::CostEpigraph;
    epi.entity = gen_idx;
    const int y = m.add_var(epi);
    m.obj.linear[static_cast<std::size_t>(y)] += 1.0;
    for (int k = 0; k <= segments; ++k) {
        const double p_hat = lo + (hi - lo) * k / segments;
        const double slope = 2.0 * g.cost_c2 * p_hat;  // d(c2 P^2)/dP
        LinearConstraint cut;
        cut.name = "cut_" + std::to_string(gen_idx) + "_" + std::to_string(k);
        cut.sense = Sense::GE;
        cut.rhs = g.cost_c2 * p_hat * p_hat - slope * p_hat;
        cut.terms = {{y, 1.0}, {pg, -slope * base}};
        m.rows.push_back(std::move(cut));
    }
}

}  // namespace

namespace {

// Shared core of the switching model and the fixed-topology dispatch LP.
// When binaries are requested the mask marks the closed state of every
// in-service line; candidates get z variables, the rest stay as equalities.
ModelDescription build_dc_core(const Network& net, const BigMVector* bigm,
                               std::span<const std::uint8_t> mask, bool with_binaries,
                               const OTSConfig& cfg);

}  // namespace

ModelDescription build_dc_ots(const Network& net, const BigMVector& bigm, const OTSConfig& cfg) {
    const SwitchMask closed = net.all_closed();
    return build_dc_core(net, &bigm, closed, true, cfg);
}

ModelDescription build_dc_opf(const Network& net, std::span<const std::uint8_t> mask,
                              const OTSConfig& cfg) {
    return build_dc_core(net, nullptr, mask, false, cfg);
}

namespace {

ModelDescription build_dc_core(const Network& net, const BigMVector* bigm,
                               std::span<const std::uint8_t> mask, bool with_binaries,
                               const OTSConfig& cfg) {
    const int n = static_cast<int>(net.bus_count());
    const int L = static_cast<int>(net.branch_count());
    const int G = static_cast<int>(net.generator_count());

    ModelDescription m;
    m.net = &net;
    m.variant = OTSVariant::Dc;
    m.reform = cfg.reform;
    m.theta_var.assign(static_cast<std::size_t>(n), -1);
    m.flow_var.assign(static_cast<std::size_t>(L), -1);
    m.z_var.assign(static_cast<std::size_t>(L), -1);
    m.pg_var.assign(static_cast<std::size_t>(G), -1);
    m.xi.setZero(L);
    m.s_agg.setZero(L);
    m.eps_lin.setZero(L);
    m.eps_quad.setZero(L);

    for (int i = 0; i < n; ++i) {
        Variable v;
        v.name = "th_" + std::to_string(net.buses()[static_cast<std::size_t>(i)].id);
        v.kind = VarKind::Angle;
        v.entity = i;
        if (i == net.slack_index()) {
            v.lb = v.ub = 0.0;
        } else {
            v.lb = cfg.angle_min;
            v.ub = cfg.angle_max;
        }
        m.theta_var[static_cast<std::size_t>(i)] = m.add_var(v);
    }

    const std::set<int> cands = with_binaries ? candidate_lines(net, cfg) : std::set<int>{};
    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches()[static_cast<std::size_t>(l)];
        Variable f;
        f.name = "f_" + std::to_string(l + 1);
        f.kind = VarKind::Flow;
        f.entity = l;
        if (net.branch_active(l, mask)) {
            f.lb = -br.rate_a;
            f.ub = br.rate_a;
        } else {
            f.lb = f.ub = 0.0;
        }
        m.flow_var[static_cast<std::size_t>(l)] = m.add_var(f);
        if (cands.count(l)) {
            Variable z;
            z.name = "z_" + std::to_string(l + 1);
            z.kind = VarKind::Switch;
            z.entity = l;
            z.lb = 0.0;
            z.ub = 1.0;
            z.is_binary = true;
            m.z_var[static_cast<std::size_t>(l)] = m.add_var(z);
        }
    }

    for (int g = 0; g < G; ++g) {
        const Generator& gen = net.generators()[static_cast<std::size_t>(g)];
        if (!gen.in_service) continue;
        Variable v;
        v.name = "pg_" + std::to_string(g);
        v.kind = VarKind::Dispatch;
        v.entity = g;
        v.lb = gen.p_min;
        v.ub = gen.p_max;
        const int pg = m.add_var(v);
        m.pg_var[static_cast<std::size_t>(g)] = pg;
        add_generator_cost(m, net, g, pg, cfg.pwl_segments);
    }

    // nodal balance: sum(pg) - sum(sigma * f) = demand
    for (int i = 0; i < n; ++i) {
        LinearConstraint row;
        row.name = "bal_" + std::to_string(net.buses()[static_cast<std::size_t>(i)].id);
        row.sense = Sense::EQ;
        row.rhs = net.buses()[static_cast<std::size_t>(i)].p_demand;
        for (int g : net.generators_at(i)) {
            if (m.pg_var[static_cast<std::size_t>(g)] >= 0) {
                row.terms.emplace_back(m.pg_var[static_cast<std::size_t>(g)], 1.0);
            }
        }
        for (int l = 0; l < L; ++l) {
            if (!net.branch_active(l, mask)) continue;
            const int fv = m.flow_var[static_cast<std::size_t>(l)];
            if (net.from_index(l) == i) row.terms.emplace_back(fv, -1.0);
            if (net.to_index(l) == i) row.terms.emplace_back(fv, 1.0);
        }
        m.rows.push_back(std::move(row));
    }

    // flow definition and limits
    for (int l = 0; l < L; ++l) {
        const Branch& br = net.branches()[static_cast<std::size_t>(l)];
        if (!net.branch_active(l, mask)) continue;
        const double b = br.dc_susceptance();
        const int fv = m.flow_var[static_cast<std::size_t>(l)];
        const int ti = m.theta_var[static_cast<std::size_t>(net.from_index(l))];
        const int tj = m.theta_var[static_cast<std::size_t>(net.to_index(l))];
        const int zv = m.z_var[static_cast<std::size_t>(l)];
        const double shift_rhs = -b * br.shift;
        if (zv < 0) {
            LinearConstraint eq;
            eq.name = "fdef_" + std::to_string(l + 1);
            eq.sense = Sense::EQ;
            eq.rhs = shift_rhs;
            eq.terms = {{fv, 1.0}, {ti, -b}, {tj, b}};
            m.rows.push_back(std::move(eq));
            continue;
        }
        const double M = bigm->m[l];
        LinearConstraint up, dn, cap_up, cap_dn;
        up.name = "fdefu_" + std::to_string(l + 1);
        up.sense = Sense::LE;
        up.rhs = M + shift_rhs;
        up.terms = {{fv, 1.0}, {ti, -b}, {tj, b}, {zv, M}};
        dn.name = "fdefl_" + std::to_string(l + 1);
        dn.sense = Sense::GE;
        dn.rhs = -M + shift_rhs;
        dn.terms = {{fv, 1.0}, {ti, -b}, {tj, b}, {zv, -M}};
        cap_up.name = "fcapu_" + std::to_string(l + 1);
        cap_up.sense = Sense::LE;
        cap_up.rhs = 0.0;
        cap_up.terms = {{fv, 1.0}, {zv, -br.rate_a}};
        cap_dn.name = "fcapl_" + std::to_string(l + 1);
        cap_dn.sense = Sense::GE;
        cap_dn.rhs = 0.0;
        cap_dn.terms = {{fv, 1.0}, {zv, br.rate_a}};
        m.rows.push_back(std::move(up));
        m.rows.push_back(std::move(dn));
        m.rows.push_back(std::move(cap_up));
        m.rows.push_back(std::move(cap_dn));
    }

    return m;
}

}  // namespace

ModelDescription augment_aidc(const ModelDescription& model, const FirstOrderSens& first,
                              const SecondOrderSens& second, const ToleranceSet& tols,
                              const OTSConfig& cfg) {
    if (first.per_line_norm.size() == 0 || second.per_line_norm.size() == 0) {
        throw MissingSensitivitiesError();
    }
    if (cfg.gamma1 < 0.0 || cfg.gamma2 < 0.0) throw Error("gamma weights must be nonnegative");

    ModelDescription m = model;
    m.variant = OTSVariant::Aidc;
    m.reform = cfg.reform;
    m.gamma1 = cfg.gamma1;
    m.gamma2 = cfg.gamma2;
    m.xi = first.per_line_norm;
    m.s_agg = second.per_line_norm;
    m.eps_lin = tols.eps_lin;
    m.eps_quad = tols.eps_quad;

    const int L = static_cast<int>(m.z_var.size());
    for (int l = 0; l < L; ++l) {
        const int zv = m.z_var[static_cast<std::size_t>(l)];
        if (zv < 0) continue;
        const double xi = first.per_line_norm[l];
        const double sh = 0.5 * second.per_line_norm[l];  // 1/2 ||S_l||_1
        const double el = tols.eps_lin[l];
        const double eq = tols.eps_quad[l];

        // first-order repair cost gamma1 * (1-z) * xi, linear in every reformulation
        m.obj.constant += cfg.gamma1 * xi;
        m.obj.linear[static_cast<std::size_t>(zv)] -= cfg.gamma1 * xi;

        // first-order trust region (1-z) xi <= eps_lin; the left side is
        // nonnegative so the lower branch of the paper's two-sided bound is
        // vacuous
        LinearConstraint tr;
        tr.name = "trlin_" + std::to_string(l + 1);
        tr.sense = Sense::LE;
        tr.rhs = el - xi;
        tr.terms = {{zv, -xi}};
        m.rows.push_back(std::move(tr));
        if (xi > el) m.vars[static_cast<std::size_t>(zv)].lb = 1.0;  // line must stay closed

        switch (cfg.reform) {
            case Reformulation::Milp: {
                m.obj.constant += cfg.gamma2 * sh;
                m.obj.linear[static_cast<std::size_t>(zv)] -= cfg.gamma2 * sh;
                LinearConstraint q;
                q.name = "trquad_" + std::to_string(l + 1);
                q.sense = Sense::LE;
                q.rhs = eq - sh;
                q.terms = {{zv, -sh}};
                m.rows.push_back(std::move(q));
                break;
            }
            case Reformulation::Miqcqp: {
                m.obj.quad.push_back({zv, cfg.gamma2 * sh});
                m.quad_rows.push_back({{zv, sh}, eq, "trquad_" + std::to_string(l + 1)});
                break;
            }
            case Reformulation::Misocp: {
                Variable t;
                t.name = "t_" + std::to_string(l + 1);
                t.kind = VarKind::SocpT;
                t.entity = l;
                t.lb = 0.0;
                t.ub = 1.0;
                const int tv = m.add_var(t);
                Variable vv;
                vv.name = "v_" + std::to_string(l + 1);
                vv.kind = VarKind::SocpV;
                vv.entity = l;
                vv.lb = 0.0;
                vv.ub = std::max(0.0, second.per_line_norm[l]);
                const int vvar = m.add_var(vv);
                LinearConstraint tdef, vdef, vcap;
                tdef.name = "tdef_" + std::to_string(l + 1);
                tdef.sense = Sense::EQ;
                tdef.rhs = 1.0;
                tdef.terms = {{tv, 1.0}, {zv, 1.0}};
                vdef.name = "vdef_" + std::to_string(l + 1);
                vdef.sense = Sense::EQ;
                vdef.rhs = 0.0;
                vdef.terms = {{vvar, 1.0}, {tv, -second.per_line_norm[l]}};
                // |0.5 v| <= eps_quad collapses to one row because v >= 0
                vcap.name = "trquad_" + std::to_string(l + 1);
                vcap.sense = Sense::LE;
                vcap.rhs = eq;
                vcap.terms = {{vvar, 0.5}};
                m.rows.push_back(std::move(tdef));
                m.rows.push_back(std::move(vdef));
                m.rows.push_back(std::move(vcap));
                m.obj.linear[static_cast<std::size_t>(vvar)] += cfg.gamma2 * 0.5;
                break;
            }
        }
        if (sh > eq) m.vars[static_cast<std::size_t>(zv)].lb = 1.0;
    }
    return m;
}

ModelDescription milp_reduction(const ModelDescription& model) {
    ModelDescription m = model;
    for (const QuadBinaryTerm& t : model.obj.quad) {
        // c (1-z)^2 == c (1-z) on binaries
        m.obj.constant += t.coeff;
        m.obj.linear[static_cast<std::size_t>(t.z_var)] -= t.coeff;
    }
    m.obj.quad.clear();
    for (const QuadConstraint& qc : model.quad_rows) {
        LinearConstraint row;
        row.name = qc.name;
        row.sense = Sense::LE;
        row.rhs = qc.rhs - qc.term.coeff;
        row.terms = {{qc.term.z_var, -qc.term.coeff}};
        m.rows.push_back(std::move(row));
        if (qc.term.coeff > qc.rhs) m.vars[static_cast<std::size_t>(qc.term.z_var)].lb = 1.0;
    }
    m.quad_rows.clear();
    return m;
}

namespace {

double evaluate_objective(const ModelDescription& m, const std::vector<double>& point) {
    double v = m.obj.constant;
    for (std::size_t j = 0; j < point.size(); ++j) v += m.obj.linear[j] * point[j];
    for (const QuadBinaryTerm& t : m.obj.quad) {
        const double omz = 1.0 - point[static_cast<std::size_t>(t.z_var)];
        v += t.coeff * omz * omz;
    }
    return v;
}

double row_violation(const LinearConstraint& row, const std::vector<double>& point) {
    double lhs = 0.0;
    for (const auto& [var, coef] : row.terms) lhs += coef * point[static_cast<std::size_t>(var)];
    switch (row.sense) {
        case Sense::LE: return std::max(0.0, lhs - row.rhs);
        case Sense::GE: return std::max(0.0, row.rhs - lhs);
        case Sense::EQ: return std::abs(lhs - row.rhs);
    }
    return 0.0;
}

}  // namespace

OTSSolution extract_solution(const ModelDescription& model, const RawSolverResult& raw) {
    OTSSolution out;
    out.gap = raw.gap;
    out.wall_seconds = raw.wall_seconds;
    if (raw.status == RawSolverResult::Status::Infeasible) {
        out.status = OTSSolution::Status::Infeasible;
        return out;
    }
    out.status = raw.status == RawSolverResult::Status::Optimal ? OTSSolution::Status::Optimal
                                                                : OTSSolution::Status::TimeLimit;

    const Network& net = *model.net;
    const std::vector<double>& pt = raw.point;

    double worst = 0.0;
    for (const LinearConstraint& row : model.rows) worst = std::max(worst, row_violation(row, pt));
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
        worst = std::max(worst, std::max(model.vars[j].lb - pt[j], pt[j] - model.vars[j].ub));
    }
    if (worst > 1e-6) throw InconsistentPointError(worst);

    out.model_cost = evaluate_objective(model, pt);
    if (std::abs(out.model_cost - raw.objective) >
        1e-6 * std::max(1.0, std::abs(out.model_cost))) {
        throw InconsistentPointError(std::abs(out.model_cost - raw.objective));
    }

    out.z.assign(net.branch_count(), 0);
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const int zv = model.z_var[l];
        if (zv >= 0) {
            out.z[l] = pt[static_cast<std::size_t>(zv)] > 0.5 ? 1 : 0;
        } else {
            out.z[l] = net.branches()[l].in_service ? 1 : 0;
        }
    }
    out.theta.resize(static_cast<int>(net.bus_count()));
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        out.theta[static_cast<int>(i)] = pt[static_cast<std::size_t>(model.theta_var[i])];
    }
    out.flows.resize(static_cast<int>(net.branch_count()));
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        out.flows[static_cast<int>(l)] = pt[static_cast<std::size_t>(model.flow_var[l])];
    }
    out.p_gen.assign(net.generator_count(), 0.0);
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        if (model.pg_var[g] >= 0) out.p_gen[g] = pt[static_cast<std::size_t>(model.pg_var[g])];
    }
    out.disconnects_network = !net.is_connected(out.z);
    return out;
}

std::string to_lp_format(const ModelDescription& m) {
    std::ostringstream os;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    os << "\\ " << (m.variant == OTSVariant::Aidc ? "aidc-ots" : "dc-ots") << " model\nMinimize\n obj:";
    bool lead = true;
    for (std::size_t j = 0; j < m.vars.size(); ++j) {
        const double c = m.obj.linear[j];
        if (c == 0.0) continue;
        os << (c < 0 ? " - " : (lead ? " " : " + ")) << num(std::abs(c)) << ' ' << m.vars[j].name;
        lead = false;
    }
    if (!m.obj.quad.empty()) {
        // expand c(1-z)^2 = c - 2cz + cz^2; the z^2 part goes in the [] block
        double shift = 0.0;
        for (const QuadBinaryTerm& t : m.obj.quad) {
            shift += t.coeff;
            os << " - " << num(2.0 * t.coeff) << ' ' << m.vars[static_cast<std::size_t>(t.z_var)].name;
        }
        os << " + [";
        bool first = true;
        for (const QuadBinaryTerm& t : m.obj.quad) {
            os << (first ? " " : " + ") << num(2.0 * t.coeff) << ' '
               << m.vars[static_cast<std::size_t>(t.z_var)].name << " ^ 2";
            first = false;
        }
        os << " ] / 2";
        if (shift != 0.0) os << " + " << num(shift);
    }
    if (m.obj.constant != 0.0) os << " + " << num(m.obj.constant);
    os << "\nSubject To\n";
    for (const LinearConstraint& row : m.rows) {
        os << ' ' << row.name << ':';
        bool first = true;
        for (const auto& [var, coef] : row.terms) {
            os << (coef < 0 ? " - " : (first ? " " : " + ")) << num(std::abs(coef)) << ' '
               << m.vars[static_cast<std::size_t>(var)].name;
            first = false;
        }
        os << (row.sense == Sense::LE ? " <= " : row.sense == Sense::GE ? " >= " : " = ")
           << num(row.rhs) << '\n';
    }
    for (const QuadConstraint& qc : m.quad_rows) {
        const std::string& zn = m.vars[static_cast<std::size_t>(qc.term.z_var)].name;
        os << ' ' << qc.name << ": - " << num(2.0 * qc.term.coeff) << ' ' << zn << " + [ "
           << num(2.0 * qc.term.coeff) << ' ' << zn << " ^ 2 ] / 2 <= " << num(qc.rhs - qc.term.coeff)
           << '\n';
    }
    os << "Bounds\n";
    for (const Variable& v : m.vars) {
        if (v.lb == v.ub) {
            os << ' ' << v.name << " = " << num(v.lb) << '\n';
        } else {
            os << ' ' << (std::isinf(v.lb) ? "-inf" : num(v.lb)) << " <= " << v.name << " <= "
               << (std::isinf(v.ub) ? "+inf" : num(v.ub)) << '\n';
        }
    }
    os << "Binaries\n";
    for (const Variable& v : m.vars) {
        if (v.is_binary) os << ' ' << v.name;
    }
    os << "\nEnd\n";
    return os.str();
}

}  // namespace aidcots
