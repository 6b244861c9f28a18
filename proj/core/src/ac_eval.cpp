#include "aidcots/ac_eval.hpp"

#include <algorithm>
#include <cmath>

#include "aidcots/simplex.hpp"

namespace aidcots {

const char* to_string(Violation::Kind kind) {
    switch (kind) {
        case Violation::Kind::VLow: return "v_low";
        case Violation::Kind::VHigh: return "v_high";
        case Violation::Kind::QMin: return "q_min";
        case Violation::Kind::QMax: return "q_max";
        case Violation::Kind::Thermal: return "thermal";
        case Violation::Kind::Islanded: return "islanded";
    }
    return "?";
}

namespace {

std::vector<char> slack_component(const Network& net, std::span<const std::uint8_t> mask) {
    std::vector<char> in_comp(net.bus_count(), 0);
    for (const auto& comp : net.components(mask)) {
        if (std::find(comp.begin(), comp.end(), net.slack_index()) != comp.end()) {
            for (int b : comp) in_comp[static_cast<std::size_t>(b)] = 1;
            break;
        }
    }
    return in_comp;
}

struct SubNetwork {
    Network net;
    std::vector<int> bus_of;     // sub bus -> original dense bus
    std::vector<int> branch_of;  // sub branch -> original dense branch
    std::vector<int> gen_of;     // sub gen -> original gen
};

// Restriction of the grid to the slack component under a mask. External ids
// are preserved so reports read in original terms.
SubNetwork restrict_to_slack_component(const Network& net, std::span<const std::uint8_t> mask) {
    const std::vector<char> keep = slack_component(net, mask);
    std::vector<int> bus_of, branch_of, gen_of;

    std::vector<Bus> buses;
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        if (!keep[i]) continue;
        buses.push_back(net.buses()[i]);
        bus_of.push_back(static_cast<int>(i));
    }
    std::vector<Branch> branches;
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        if (!net.branch_active(static_cast<int>(l), mask)) continue;
        if (!keep[static_cast<std::size_t>(net.from_index(static_cast<int>(l)))]) continue;
        branches.push_back(net.branches()[l]);
        branch_of.push_back(static_cast<int>(l));
    }
    std::vector<Generator> gens;
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        if (!keep[static_cast<std::size_t>(net.bus_index(net.generators()[g].bus))]) continue;
        gens.push_back(net.generators()[g]);
        gen_of.push_back(static_cast<int>(g));
    }
    return SubNetwork{Network(net.base_mva(), std::move(buses), std::move(branches),
                              std::move(gens), net.name()),
                      std::move(bus_of), std::move(branch_of), std::move(gen_of)};
}

}  // namespace

std::vector<int> islanded_load_buses(const Network& net, std::span<const std::uint8_t> mask) {
    const std::vector<char> keep = slack_component(net, mask);
    std::vector<int> out;
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const Bus& b = net.buses()[i];
        if (!keep[i] && (b.p_demand != 0.0 || b.q_demand != 0.0)) {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::vector<double> redispatch_dc(const Network& net, std::span<const std::uint8_t> mask,
                                  const OTSConfig& cfg) {
    ModelDescription model = build_dc_opf(net, mask, cfg);
    const LPResult lp = solve_lp(model);
    if (lp.status != LPStatus::Optimal) {
        throw InfeasibleError("dc redispatch infeasible on the given topology");
    }
    std::vector<double> dispatch(net.generator_count(), 0.0);
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        if (model.pg_var[g] >= 0) dispatch[g] = lp.x[model.pg_var[g]];
    }
    return dispatch;
}

ACEvalReport evaluate_topology(const Network& net, std::span<const std::uint8_t> mask,
                               const EvalOptions& opts) {
    ACEvalReport rep;
    rep.dispatch.assign(net.generator_count(), 0.0);

    for (int bus : islanded_load_buses(net, mask)) {
        rep.violations.push_back({Violation::Kind::Islanded,
                                  "bus " + std::to_string(net.buses()[static_cast<std::size_t>(bus)].id),
                                  net.buses()[static_cast<std::size_t>(bus)].p_demand});
    }
    if (!rep.violations.empty()) return rep;  // structurally dead topology

    const SubNetwork sub = restrict_to_slack_component(net, mask);
    const Network& snet = sub.net;
    const SwitchMask closed = snet.all_closed();

    std::vector<double> sub_dispatch;
    try {
        sub_dispatch = redispatch_dc(snet, closed, opts.dispatch);
    } catch (const InfeasibleError&) {
        // islanding was excluded above, so capacity or deliverability failed
        rep.violations.push_back({Violation::Kind::Thermal, "network", 0.0});
        return rep;
    }
    for (std::size_t g = 0; g < sub.gen_of.size(); ++g) {
        rep.dispatch[static_cast<std::size_t>(sub.gen_of[g])] = sub_dispatch[g];
    }

    const InjectionSpec inj = injections_for_dispatch(snet, sub_dispatch);
    AdmittanceView view(snet, closed);
    PFState state = solve_pf(view, inj);
    rep.converged = state.converged;
    if (!state.converged) return rep;

    Eigen::VectorXd p_calc, q_calc;
    computed_injections(view, state, p_calc, q_calc);
    rep.losses = p_calc.sum();

    // slack generator absorbs the loss imbalance
    {
        const int slack = snet.slack_index();
        const double slack_gen_total =
            p_calc[slack] + snet.buses()[static_cast<std::size_t>(slack)].p_demand;
        double dispatched = 0.0;
        int first_gen = -1;
        for (int g : snet.generators_at(slack)) {
            if (!snet.generators()[static_cast<std::size_t>(g)].in_service) continue;
            if (first_gen < 0) first_gen = g;
            dispatched += sub_dispatch[static_cast<std::size_t>(g)];
        }
        if (first_gen >= 0) {
            const int orig = sub.gen_of[static_cast<std::size_t>(first_gen)];
            rep.dispatch[static_cast<std::size_t>(orig)] += slack_gen_total - dispatched;
        }
    }
    rep.total_gen_cost = 0.0;
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        const Generator& gen = net.generators()[g];
        if (!gen.in_service) continue;
        rep.total_gen_cost += gen.cost_at_mw(rep.dispatch[g] * net.base_mva());
    }

    // voltage band
    for (std::size_t i = 0; i < snet.bus_count(); ++i) {
        const Bus& b = snet.buses()[i];
        const double v = state.v_mag[static_cast<int>(i)];
        if (v < b.v_min - opts.voltage_tol) {
            rep.violations.push_back(
                {Violation::Kind::VLow, "bus " + std::to_string(b.id), b.v_min - v});
        } else if (v > b.v_max + opts.voltage_tol) {
            rep.violations.push_back(
                {Violation::Kind::VHigh, "bus " + std::to_string(b.id), v - b.v_max});
        }
    }

    // generator reactive capability, aggregated per bus
    for (std::size_t i = 0; i < snet.bus_count(); ++i) {
        double q_min = 0.0, q_max = 0.0;
        bool has_gen = false;
        for (int g : snet.generators_at(static_cast<int>(i))) {
            const Generator& gen = snet.generators()[static_cast<std::size_t>(g)];
            if (!gen.in_service) continue;
            has_gen = true;
            q_min += gen.q_min;
            q_max += gen.q_max;
        }
        if (!has_gen) continue;
        const double q_gen = q_calc[static_cast<int>(i)] + snet.buses()[i].q_demand;
        const int id = snet.buses()[i].id;
        if (q_gen < q_min - opts.reactive_tol) {
            rep.violations.push_back(
                {Violation::Kind::QMin, "bus " + std::to_string(id), q_min - q_gen});
        } else if (q_gen > q_max + opts.reactive_tol) {
            rep.violations.push_back(
                {Violation::Kind::QMax, "bus " + std::to_string(id), q_gen - q_max});
        }
    }

    // apparent-power thermal limits at both ends
    for (std::size_t l = 0; l < snet.branch_count(); ++l) {
        const LineStamp& s = view.stamp(static_cast<int>(l));
        const int f = snet.from_index(static_cast<int>(l));
        const int t = snet.to_index(static_cast<int>(l));
        const std::complex<double> vf = std::polar(state.v_mag[f], state.v_ang[f]);
        const std::complex<double> vt = std::polar(state.v_mag[t], state.v_ang[t]);
        const double s_from = std::abs(vf * std::conj(s.ff * vf + s.ft * vt));
        const double s_to = std::abs(vt * std::conj(s.tf * vf + s.tt * vt));
        const double flow = std::max(s_from, s_to);
        const double rate = snet.branches()[l].rate_a;
        if (flow > rate + opts.thermal_tol) {
            rep.violations.push_back(
                {Violation::Kind::Thermal,
                 "line " + std::to_string(sub.branch_of[l] + 1), flow - rate});
        }
    }

    rep.feasible = rep.converged && rep.violations.empty();

    // expose the state padded back to full bus count
    PFState full = flat_start(net);
    for (std::size_t i = 0; i < snet.bus_count(); ++i) {
        full.v_mag[sub.bus_of[i]] = state.v_mag[static_cast<int>(i)];
        full.v_ang[sub.bus_of[i]] = state.v_ang[static_cast<int>(i)];
    }
    full.converged = state.converged;
    full.iterations = state.iterations;
    full.max_mismatch = state.max_mismatch;
    rep.state = std::move(full);
    return rep;
}

}  // namespace aidcots
