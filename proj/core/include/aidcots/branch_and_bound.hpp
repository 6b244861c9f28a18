#pragma once

#include <cstdint>

#include "aidcots/simplex.hpp"

namespace aidcots {

struct BnBOptions {
    double time_limit = 1800.0;  // seconds
    double rel_gap = 1e-6;
    enum class NodeSelection : std::uint8_t { BestBound, DepthFirst };
    enum class Branching : std::uint8_t { MostFractional, PseudoCost };
    NodeSelection node_selection = NodeSelection::BestBound;
    Branching branching = Branching::MostFractional;
    std::uint64_t seed = 0;  // pseudo-cost initialization jitter
};

/// Single-threaded best-bound branch and bound over the model binaries.
/// Deterministic for fixed options. Hitting the time limit returns the best
/// incumbent with TimeLimit status rather than an error.
RawSolverResult branch_and_bound(const ModelDescription& model, const BnBOptions& opts = {});

/// Solves the LP for every assignment of the listed binary variables (at
/// most 20), all other binaries fixed closed. Ties are broken by fewest
/// opened lines, then the lexicographically smallest opened index set.
RawSolverResult enumerate_oracle(const ModelDescription& model,
                                 const std::vector<int>& binary_vars);

/// branch_and_bound followed by tie resolution matching enumerate_oracle:
/// among cost-optimal assignments, picks the fewest opened lines and then the
/// lexicographically smallest opened set.
RawSolverResult solve_canonical(const ModelDescription& model, const BnBOptions& opts = {});

}  // namespace aidcots
