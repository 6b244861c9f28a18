#include "aidcots/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "aidcots/ac_eval.hpp"

namespace aidcots {

namespace {

using Clock = std::chrono::steady_clock;

double lap(Clock::time_point& mark) {
    const auto now = Clock::now();
    const double dt = std::chrono::duration<double>(now - mark).count();
    mark = now;
    return dt;
}

Json config_to_json(const RunConfig& cfg, double gamma1, double gamma2) {
    Json j;
    j["model"] = to_string(cfg.variant);
    j["reformulation"] = to_string(cfg.reform);
    j["gamma1"] = gamma1;
    j["gamma2"] = gamma2;
    j["alpha1"] = cfg.tol.alpha1;
    j["alpha2"] = cfg.tol.alpha2;
    j["norm_p"] = cfg.tol.norm_p;
    j["floor_lin"] = cfg.tol.floor_lin;
    j["floor_quad"] = cfg.tol.floor_quad;
    j["cap_lin"] = cfg.tol.cap_lin;
    j["cap_quad"] = cfg.tol.cap_quad;
    j["angle_min"] = cfg.angle_min;
    j["angle_max"] = cfg.angle_max;
    j["protect_bridges"] = cfg.protect_bridges;
    j["switchable_transformers"] = cfg.switchable_transformers;
    j["time_limit"] = cfg.time_limit;
    j["rel_gap"] = cfg.rel_gap;
    j["seed"] = cfg.seed;
    return j;
}

}  // namespace

const char* to_string(OTSVariant v) { return v == OTSVariant::Aidc ? "aidc" : "dc"; }

const char* to_string(Reformulation r) {
    switch (r) {
        case Reformulation::Miqcqp: return "miqcqp";
        case Reformulation::Milp: return "milp";
        case Reformulation::Misocp: return "misocp";
    }
    return "?";
}

Reformulation reformulation_from(const std::string& s) {
    if (s == "miqcqp") return Reformulation::Miqcqp;
    if (s == "milp") return Reformulation::Milp;
    if (s == "misocp") return Reformulation::Misocp;
    throw Error("unknown reformulation: " + s);
}

PipelineResult run_pipeline(const RunConfig& cfg) {
    PipelineResult out;
    const auto t_start = Clock::now();
    auto mark = t_start;

    MatpowerOptions mopts;
    mopts.switchable_transformers = cfg.switchable_transformers;
    const Network net = load_case(cfg.case_path, mopts);
    out.timings.parse_s = lap(mark);

    OTSConfig ots;
    ots.variant = cfg.variant;
    ots.reform = cfg.reform;
    ots.angle_min = cfg.angle_min;
    ots.angle_max = cfg.angle_max;
    ots.protect_bridges = cfg.protect_bridges;

    // base operating point: dc dispatch on the full topology, then ac power
    // flow with the slack picking up losses
    const SwitchMask closed = net.all_closed();
    const std::vector<double> base_dispatch = redispatch_dc(net, closed, ots);
    out.base_cost = 0.0;
    for (std::size_t g = 0; g < net.generator_count(); ++g) {
        const Generator& gen = net.generators()[g];
        if (gen.in_service) out.base_cost += gen.cost_at_mw(base_dispatch[g] * net.base_mva());
    }
    const InjectionSpec base_inj = injections_for_dispatch(net, base_dispatch);
    AdmittanceView base_view(net, closed);
    const PFState base_state = solve_pf(base_view, base_inj);
    if (!base_state.converged && cfg.variant == OTSVariant::Aidc) {
        throw Error("base-topology power flow did not converge, no operating point for sensitivities");
    }
    out.timings.base_s = lap(mark);

    double gamma1 = cfg.gamma1, gamma2 = cfg.gamma2;
    if (gamma1 < 0.0) gamma1 = 0.05 * out.base_cost / 1000.0;
    if (gamma2 < 0.0) gamma2 = 0.05 * out.base_cost / 1000.0;

    SensitivityBundle sens;
    ToleranceSet tols;
    if (cfg.variant == OTSVariant::Aidc) {
        sens = compute_sensitivities(base_view, base_state);
        tols = build_tolerances(sens.first, sens.second, net, cfg.tol);
    }
    out.timings.sensitivity_s = lap(mark);

    ModelDescription model = build_dc_ots(net, big_m(net, cfg.angle_min, cfg.angle_max), ots);
    if (cfg.variant == OTSVariant::Aidc) {
        OTSConfig aug = ots;
        aug.gamma1 = gamma1;
        aug.gamma2 = gamma2;
        model = augment_aidc(model, sens.first, sens.second, tols, aug);
        if (model.has_quadratic_parts()) model = milp_reduction(model);
    }
    out.timings.model_s = lap(mark);

    BnBOptions bnb;
    bnb.time_limit = cfg.time_limit;
    bnb.rel_gap = cfg.rel_gap;
    bnb.seed = cfg.seed;
    bnb.branching = cfg.branching;
    const RawSolverResult raw = solve_canonical(model, bnb);
    out.solution = extract_solution(model, raw);
    out.timings.solve_s = lap(mark);

    if (out.solution.status != OTSSolution::Status::Infeasible) {
        out.ac = evaluate_topology(net, out.solution.z, EvalOptions{.dispatch = ots});
    }
    out.timings.eval_s = lap(mark);
    out.timings.total_s = std::chrono::duration<double>(Clock::now() - t_start).count();

    Json rep;
    rep["case"] = net.name();
    rep["case_path"] = cfg.case_path;
    rep["model"] = to_string(cfg.variant);
    rep["reformulation"] = to_string(cfg.reform);
    rep["solution"] = solution_to_json(out.solution);
    rep["base_cost"] = out.base_cost;
    rep["ac"] = report_to_json(out.ac);
    rep["config"] = config_to_json(cfg, gamma1, gamma2);
    Json tj;
    tj["parse_s"] = out.timings.parse_s;
    tj["base_s"] = out.timings.base_s;
    tj["sensitivity_s"] = out.timings.sensitivity_s;
    tj["model_s"] = out.timings.model_s;
    tj["solve_s"] = out.timings.solve_s;
    tj["eval_s"] = out.timings.eval_s;
    tj["total_s"] = out.timings.total_s;
    rep["timings"] = tj;
    out.report = std::move(rep);
    out.exit_code = out.solution.status == OTSSolution::Status::TimeLimit ? 2 : 0;
    return out;
}

Json bench_cases(const std::vector<std::string>& case_paths,
                 const std::vector<OTSVariant>& models, const RunConfig& base) {
    Json rows = Json::array();
    for (const std::string& path : case_paths) {
        for (OTSVariant model : models) {
            RunConfig cfg = base;
            cfg.case_path = path;
            cfg.variant = model;
            Json row;
            row["case"] = path;
            row["model"] = to_string(model);
            try {
                const PipelineResult res = run_pipeline(cfg);
                row["lines_opened"] = res.solution.opened_lines_1based();
                row["model_cost"] = res.solution.model_cost;
                row["ac_feasible"] = res.ac.feasible;
                if (res.ac.feasible) {
                    row["ac_cost"] = res.ac.total_gen_cost;
                } else {
                    row["ac_cost"] = nullptr;
                }
                row["time_s"] = res.timings.total_s;
            } catch (const std::exception& e) {
                row["error"] = e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

Json sweep_gamma(const RunConfig& base, const std::vector<double>& gammas) {
    Json rows = Json::array();
    for (double g : gammas) {
        RunConfig cfg = base;
        cfg.variant = OTSVariant::Aidc;
        cfg.gamma1 = g;
        cfg.gamma2 = g;
        Json row;
        row["gamma"] = g;
        try {
            const PipelineResult res = run_pipeline(cfg);
            row["model_cost"] = res.solution.model_cost;
            row["lines_opened"] = res.solution.opened_lines_1based();
            row["ac_feasible"] = res.ac.feasible;
            row["ac_cost"] = res.ac.feasible ? Json(res.ac.total_gen_cost) : Json(nullptr);
            row["time_s"] = res.timings.total_s;
        } catch (const std::exception& e) {
            row["error"] = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_from_rows(const Json& rows) {
    std::string out;
    if (!rows.is_array() || rows.empty()) return out;
    // header union over rows, first-seen order
    std::vector<std::string> cols;
    for (const Json& row : rows) {
        for (auto it = row.begin(); it != row.end(); ++it) {
            if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) {
                cols.push_back(it.key());
            }
        }
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out += cols[c];
        out += c + 1 < cols.size() ? ',' : '\n';
    }
    for (const Json& row : rows) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (row.contains(cols[c])) {
                const Json& v = row.at(cols[c]);
                if (v.is_string()) {
                    out += '"' + v.get<std::string>() + '"';
                } else if (v.is_array()) {
                    std::string s = v.dump();
                    for (char& ch : s) {
                        if (ch == ',') ch = ';';
                    }
                    out += '"' + s + '"';
                } else if (v.is_null()) {
                    out += "Inf";
                } else {
                    out += v.dump();
                }
            }
            out += c + 1 < cols.size() ? ',' : '\n';
        }
    }
    return out;
}

}  // namespace aidcots
