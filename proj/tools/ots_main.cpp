// Command-line front end: power flow, sensitivities, switching optimization,
// AC re-evaluation, multi-case benchmarks and parameter sweeps.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "aidcots/ac_eval.hpp"
#include "aidcots/pipeline.hpp"
#include "aidcots/sensitivity_check.hpp"

namespace {

using namespace aidcots;

std::string resolve_case(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::exists(path)) return path;
    if (const char* dir = std::getenv("AIDCOTS_CASE_DIR")) {
        const fs::path candidate = fs::path(dir) / path;
        if (fs::exists(candidate)) return candidate.string();
    }
    return path;  // let the loader report the failure
}

void emit(const Json& j, const std::string& format, const std::string& out_path) {
    std::string text;
    if (format == "csv") {
        text = csv_from_rows(j);
    } else if (format == "table") {
        text = j.dump(2);
    } else {
        text = j.dump(2);
        text += '\n';
    }
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        out << text;
    }
}

struct CommonFlags {
    std::string format = "json";
    std::string output;
    RunConfig run;

    void attach(CLI::App* cmd, bool with_model = true) {
        cmd->add_option("--format", format, "Output format: json, csv, table");
        cmd->add_option("-o,--output", output, "Write the report to this file");
        cmd->add_option("--alpha1", run.tol.alpha1, "First-order tolerance factor");
        cmd->add_option("--alpha2", run.tol.alpha2, "Second-order tolerance factor");
        cmd->add_option("--p", run.tol.norm_p, "Norm index for tolerances (1 or 2)");
        cmd->add_option("--floor-lin", run.tol.floor_lin, "Linear tolerance floor");
        cmd->add_option("--floor-quad", run.tol.floor_quad, "Quadratic tolerance floor");
        cmd->add_option("--cap-lin", run.tol.cap_lin, "Linear tolerance cap");
        cmd->add_option("--cap-quad", run.tol.cap_quad, "Quadratic tolerance cap");
        cmd->add_option("--angle-min", run.angle_min, "Angle box lower bound (rad)");
        cmd->add_option("--angle-max", run.angle_max, "Angle box upper bound (rad)");
        cmd->add_option("--time-limit", run.time_limit, "Solver time limit (s)");
        cmd->add_option("--rel-gap", run.rel_gap, "Relative MIP gap target");
        cmd->add_option("--seed", run.seed, "Seed for randomized components");
        cmd->add_flag("--protect-bridges,!--no-protect-bridges", run.protect_bridges,
                      "Keep bridge lines out of the candidate set");
        cmd->add_flag("--switch-transformers,!--no-switch-transformers",
                      run.switchable_transformers, "Allow switching transformer branches");
        if (with_model) {
            cmd->add_option("--gamma1", run.gamma1, "First-order repair weight");
            cmd->add_option("--gamma2", run.gamma2, "Second-order repair weight");
        }
    }
};

int cmd_pf(const std::string& case_path, const CommonFlags& flags) {
    const Network net = load_case(resolve_case(case_path));
    const SwitchMask closed = net.all_closed();
    OTSConfig ots;
    ots.angle_min = flags.run.angle_min;
    ots.angle_max = flags.run.angle_max;
    const std::vector<double> dispatch = redispatch_dc(net, closed, ots);
    const InjectionSpec inj = injections_for_dispatch(net, dispatch);
    const PFState state = solve_pf(net, closed, inj);

    Json j;
    j["case"] = net.name();
    j["converged"] = state.converged;
    j["iterations"] = state.iterations;
    j["max_mismatch"] = state.max_mismatch;
    Json buses = Json::array();
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        buses.push_back({{"bus", net.buses()[i].id},
                         {"v_mag", state.v_mag[static_cast<int>(i)]},
                         {"v_ang", state.v_ang[static_cast<int>(i)]}});
    }
    j["state"] = buses;
    emit(flags.format == "csv" ? buses : j, flags.format, flags.output);
    return state.converged ? 0 : 1;
}

int cmd_sens(const std::string& case_path, const CommonFlags& flags, bool check_fd) {
    const Network net = load_case(resolve_case(case_path));
    const SwitchMask closed = net.all_closed();
    OTSConfig ots;
    const std::vector<double> dispatch = redispatch_dc(net, closed, ots);
    const InjectionSpec inj = injections_for_dispatch(net, dispatch);
    AdmittanceView view(net, closed);
    const PFState state = solve_pf(view, inj);
    if (!state.converged) {
        std::cerr << "power flow did not converge\n";
        return 1;
    }
    const SensitivityBundle sens = compute_sensitivities(view, state);
    const ToleranceSet tols = build_tolerances(sens.first, sens.second, net, flags.run.tol);

    Json rows = Json::array();
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        rows.push_back({{"line", l + 1},
                        {"xi", sens.first.per_line_norm[static_cast<int>(l)]},
                        {"s", sens.second.per_line_norm[static_cast<int>(l)]},
                        {"eps_lin", tols.eps_lin[static_cast<int>(l)]},
                        {"eps_quad", tols.eps_quad[static_cast<int>(l)]}});
    }
    if (check_fd) {
        const double jac_err = fd_check_pf_jacobian(view, state, inj);
        const FdReport ja = fd_check_admittance_jacobian(view, state, inj);
        const FdReport fo = fd_check_first_order(net, closed, inj, state, sens.first);
        const FdReport so = fd_check_second_order(net, closed, inj, state, sens.second);
        const double res = second_order_residual(view, state, sens.first, sens.second);
        std::cerr << "fd max relative errors:\n"
                  << "  pf_jacobian          " << jac_err << '\n'
                  << "  admittance_jacobian  " << ja.max_rel_error << '\n'
                  << "  first_order          " << fo.max_rel_error << '\n'
                  << "  second_order         " << so.max_rel_error << '\n'
                  << "  system residual      " << res << '\n';
    }
    emit(rows, flags.format, flags.output);
    return 0;
}

int cmd_eval(const std::string& case_path, const std::vector<int>& open_lines,
             const CommonFlags& flags) {
    const Network net = load_case(resolve_case(case_path));
    SwitchMask mask = net.all_closed();
    for (int l : open_lines) {
        if (l < 1 || l > static_cast<int>(mask.size())) {
            std::cerr << "line index out of range: " << l << '\n';
            return 1;
        }
        mask[static_cast<std::size_t>(l - 1)] = 0;
    }
    EvalOptions opts;
    opts.dispatch.angle_min = flags.run.angle_min;
    opts.dispatch.angle_max = flags.run.angle_max;
    const ACEvalReport rep = evaluate_topology(net, mask, opts);
    emit(report_to_json(rep), flags.format, flags.output);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AC-informed DC optimal transmission switching toolkit"};
    app.require_subcommand(1);

    std::string case_path;
    std::string model = "dc";
    std::string reform = "milp";
    std::vector<int> open_lines;
    std::vector<std::string> bench_cases_arg;
    std::vector<double> gamma_list;
    std::vector<std::string> bench_models = {"dc", "aidc"};
    bool check_fd = false;
    CommonFlags flags;

    CLI::App* pf = app.add_subcommand("pf", "Solve the base-topology AC power flow");
    pf->add_option("case", case_path, "MATPOWER case file")->required();

    CLI::App* sens = app.add_subcommand("sens", "Per-line sensitivity and tolerance table");
    sens->add_option("case", case_path, "MATPOWER case file")->required();
    sens->add_flag("--check-fd", check_fd, "Run finite-difference cross checks");

    CLI::App* ots = app.add_subcommand("ots", "Optimize the switching topology");
    ots->add_option("case", case_path, "MATPOWER case file")->required();
    ots->add_option("--model", model, "dc or aidc");
    ots->add_option("--reform", reform, "miqcqp, milp or misocp");

    CLI::App* eval = app.add_subcommand("eval", "AC-evaluate a switching decision");
    eval->add_option("case", case_path, "MATPOWER case file")->required();
    eval->add_option("--open", open_lines, "1-based line indices to open")->delimiter(',');

    CLI::App* bench = app.add_subcommand("bench", "Run multiple cases and models");
    bench->add_option("cases", bench_cases_arg, "MATPOWER case files");
    bench->add_option("--models", bench_models, "Models to run per case")->delimiter(',');

    CLI::App* sweep = app.add_subcommand("sweep", "Sweep the aidc penalty weights");
    sweep->add_option("case", case_path, "MATPOWER case file")->required();
    sweep->add_option("--gamma", gamma_list, "Gamma values to try")->delimiter(',')->required();

    for (CLI::App* cmd : {pf, sens, ots, eval, bench, sweep}) flags.attach(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (pf->parsed()) return cmd_pf(case_path, flags);
        if (sens->parsed()) return cmd_sens(case_path, flags, check_fd);
        if (eval->parsed()) return cmd_eval(case_path, open_lines, flags);
        if (ots->parsed()) {
            RunConfig cfg = flags.run;
            cfg.case_path = resolve_case(case_path);
            cfg.variant = model == "aidc" ? OTSVariant::Aidc : OTSVariant::Dc;
            cfg.reform = reformulation_from(reform);
            const PipelineResult res = run_pipeline(cfg);
            emit(res.report, flags.format, flags.output);
            return res.exit_code;
        }
        if (bench->parsed()) {
            std::vector<OTSVariant> models;
            for (const std::string& m : bench_models) {
                models.push_back(m == "aidc" ? OTSVariant::Aidc : OTSVariant::Dc);
            }
            std::vector<std::string> paths;
            for (const std::string& p : bench_cases_arg) paths.push_back(resolve_case(p));
            emit(bench_cases(paths, models, flags.run), flags.format, flags.output);
            return 0;
        }
        if (sweep->parsed()) {
            RunConfig cfg = flags.run;
            cfg.case_path = resolve_case(case_path);
            emit(sweep_gamma(cfg, gamma_list), flags.format, flags.output);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
