#pragma once

#include "aidcots/branch_and_bound.hpp"
#include "aidcots/json_io.hpp"
#include "aidcots/matpower.hpp"
#include "aidcots/sensitivity.hpp"
#include "aidcots/tolerances.hpp"

namespace aidcots {

/// End-to-end run configuration; one instance describes one (case, model)
/// pipeline execution and serializes into the report for reproducibility.
struct RunConfig {
    std::string case_path;
    OTSVariant variant = OTSVariant::Dc;
    Reformulation reform = Reformulation::Milp;
    // negative gamma selects the default rule 0.05 * base_cost / 1000
    double gamma1 = -1.0;
    double gamma2 = -1.0;
    ToleranceConfig tol;
    double angle_min = -0.6;
    double angle_max = 0.6;
    bool protect_bridges = true;
    bool switchable_transformers = true;
    double time_limit = 1800.0;
    double rel_gap = 1e-6;
    std::uint64_t seed = 0;
    BnBOptions::Branching branching = BnBOptions::Branching::MostFractional;
};

struct StageTimings {
    double parse_s = 0, base_s = 0, sensitivity_s = 0, model_s = 0, solve_s = 0, eval_s = 0,
           total_s = 0;
};

struct PipelineResult {
    OTSSolution solution;
    ACEvalReport ac;
    double base_cost = 0.0;  // dc dispatch cost on the full topology, dollars
    StageTimings timings;
    Json report;
    int exit_code = 0;  // 2 when the solver hit its time limit
};

/// Base operating point, sensitivities, tolerances, model build, solve and
/// AC re-evaluation, reported as one JSON document.
PipelineResult run_pipeline(const RunConfig& cfg);

/// One row per (case, model); per-case failures become rows and the run
/// continues.
Json bench_cases(const std::vector<std::string>& case_paths,
                 const std::vector<OTSVariant>& models, const RunConfig& base);

/// AIDC runs over a list of gamma values (applied to both weights).
Json sweep_gamma(const RunConfig& base, const std::vector<double>& gammas);

std::string csv_from_rows(const Json& rows);

const char* to_string(OTSVariant v);
const char* to_string(Reformulation r);
Reformulation reformulation_from(const std::string& s);

}  // namespace aidcots
