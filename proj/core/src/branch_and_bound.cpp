#include "aidcots/branch_and_bound.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <random>

namespace aidcots {

namespace {

constexpr double kIntTol = 1e-6;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> binary_vars_of(const ModelDescription& model) {
    std::vector<int> out;
    for (std::size_t j = 0; j < model.vars.size(); ++j) {
        if (model.vars[j].is_binary) out.push_back(static_cast<int>(j));
    }
    return out;
}

struct BoundSet {
    std::vector<double> lb, ub;  // aligned with the binary list
};

struct Node {
    long id = 0;
    int depth = 0;
    double bound = -std::numeric_limits<double>::infinity();
    BoundSet bounds;
    Basis basis;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // min-bound first
        if (a.depth != b.depth) return a.depth < b.depth;  // deeper first on ties
        return a.id > b.id;
    }
};

// Opened set of a point: entities of binaries at zero, ascending.
std::vector<int> opened_entities(const ModelDescription& model, const std::vector<int>& bins,
                                 const std::vector<double>& point) {
    std::vector<int> out;
    for (int j : bins) {
        if (point[static_cast<std::size_t>(j)] < 0.5) {
            out.push_back(model.vars[static_cast<std::size_t>(j)].entity);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

// fewest opened, then lexicographically smallest opened index set
bool tie_better(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

class Search {
public:
    Search(const ModelDescription& model, const BnBOptions& opts)
        : model_(model), opts_(opts), bins_(binary_vars_of(model)), solver_(LinearProgram(model)),
          rng_(opts.seed) {
        pseudo_up_.assign(bins_.size(), 0.0);
        pseudo_dn_.assign(bins_.size(), 0.0);
        pseudo_up_n_.assign(bins_.size(), 0);
        pseudo_dn_n_.assign(bins_.size(), 0);
        jitter_.resize(bins_.size());
        std::uniform_real_distribution<double> u(0.0, 1e-9);
        for (double& v : jitter_) v = u(rng_);
    }

    RawSolverResult run();

private:
    const ModelDescription& model_;
    BnBOptions opts_;
    std::vector<int> bins_;
    SimplexSolver solver_;
    std::mt19937_64 rng_;
    std::vector<double> pseudo_up_, pseudo_dn_, jitter_;
    std::vector<int> pseudo_up_n_, pseudo_dn_n_;

    double incumbent_obj_ = std::numeric_limits<double>::infinity();
    std::vector<double> incumbent_point_;
    long nodes_ = 0;
    long next_id_ = 1;

    void apply_bounds(const BoundSet& b) {
        for (std::size_t k = 0; k < bins_.size(); ++k) {
            solver_.program().set_bounds(bins_[k], b.lb[k], b.ub[k]);
        }
    }

    BoundSet current_bounds() const {
        BoundSet b;
        b.lb.reserve(bins_.size());
        b.ub.reserve(bins_.size());
        for (int j : bins_) {
            b.lb.push_back(model_.vars[static_cast<std::size_t>(j)].lb);
            b.ub.push_back(model_.vars[static_cast<std::size_t>(j)].ub);
        }
        return b;
    }

    int fractional_binary(const Eigen::VectorXd& x, double* frac_out) const {
        int worst = -1;
        double best = kIntTol;
        for (std::size_t k = 0; k < bins_.size(); ++k) {
            const double v = x[bins_[k]];
            const double f = std::min(v - std::floor(v), std::ceil(v) - v);
            if (f > best) {
                best = f;
                worst = static_cast<int>(k);
                if (frac_out) *frac_out = v;
            }
        }
        return worst;
    }

    int pick_branch(const Eigen::VectorXd& x) const {
        if (opts_.branching == BnBOptions::Branching::MostFractional) {
            return fractional_binary(x, nullptr);
        }
        int pick = -1;
        double best = -1.0;
        for (std::size_t k = 0; k < bins_.size(); ++k) {
            const double v = x[bins_[k]];
            const double f = std::min(v - std::floor(v), std::ceil(v) - v);
            if (f <= kIntTol) continue;
            const double up = pseudo_up_n_[k] > 0
                                  ? pseudo_up_[k] / pseudo_up_n_[k]
                                  : std::abs(model_.obj.linear[static_cast<std::size_t>(bins_[k])]) +
                                        jitter_[k];
            const double dn = pseudo_dn_n_[k] > 0 ? pseudo_dn_[k] / pseudo_dn_n_[k] : up;
            const double score = std::max(up * (std::ceil(v) - v), 1e-12) *
                                 std::max(dn * (v - std::floor(v)), 1e-12);
            if (score > best) {
                best = score;
                pick = static_cast<int>(k);
            }
        }
        return pick;
    }

    bool try_incumbent(const LPResult& lp, double node_bound) {
        if (lp.objective >= incumbent_obj_ - 1e-12 * (1.0 + std::abs(incumbent_obj_))) return false;
        // bound sanity: a node may only produce incumbents above its own bound
        assert(node_bound <= lp.objective + 1e-6 * (1.0 + std::abs(lp.objective)));
        (void)node_bound;
        incumbent_obj_ = lp.objective;
        incumbent_point_.assign(lp.x.data(), lp.x.data() + lp.x.size());
        // snap binaries
        for (int j : bins_) {
            incumbent_point_[static_cast<std::size_t>(j)] =
                incumbent_point_[static_cast<std::size_t>(j)] > 0.5 ? 1.0 : 0.0;
        }
        return true;
    }

    void rounding_heuristic(const LPResult& root, const BoundSet& base);
};

void Search::rounding_heuristic(const LPResult& root, const BoundSet& base) {
    // fix every binary to its rounded LP value and solve; all-closed is the
    // natural fallback for switching models
    for (int attempt = 0; attempt < 2; ++attempt) {
        BoundSet b = base;
        for (std::size_t k = 0; k < bins_.size(); ++k) {
            double v = attempt == 0 && root.status == LPStatus::Optimal
                           ? (root.x[bins_[k]] > 0.5 ? 1.0 : 0.0)
                           : 1.0;
            v = std::clamp(v, b.lb[k], b.ub[k]);
            b.lb[k] = b.ub[k] = v;
        }
        apply_bounds(b);
        const LPResult lp = solver_.solve(root.status == LPStatus::Optimal ? &root.basis : nullptr);
        if (lp.status == LPStatus::Optimal) try_incumbent(lp, -std::numeric_limits<double>::infinity());
        if (attempt == 0 && root.status == LPStatus::Optimal) {
            bool all_ones = true;
            for (std::size_t k = 0; k < bins_.size(); ++k) {
                if (root.x[bins_[k]] <= 0.5 && b.ub[k] > 0.5) all_ones = false;
            }
            if (all_ones) break;  // second attempt would repeat the first
        }
    }
}

RawSolverResult Search::run() {
    const auto t0 = Clock::now();
    RawSolverResult out;

    const BoundSet base = current_bounds();
    apply_bounds(base);
    LPResult root = solver_.solve();
    if (root.status == LPStatus::Infeasible) {
        out.status = RawSolverResult::Status::Infeasible;
        out.wall_seconds = seconds_since(t0);
        return out;
    }
    if (root.status == LPStatus::Unbounded) {
        throw NumericalFailureError("relaxation is unbounded");
    }

    double global_bound = root.objective;
    if (fractional_binary(root.x, nullptr) < 0) {
        // integral root, no branching needed
        try_incumbent(root, root.objective);
        out.status = RawSolverResult::Status::Optimal;
        out.point = incumbent_point_;
        out.objective = incumbent_obj_;
        out.bound = global_bound;
        out.gap = 0.0;
        out.nodes = 0;
        out.wall_seconds = seconds_since(t0);
        return out;
    }

    rounding_heuristic(root, base);

    std::multiset<Node, NodeOrder> open;
    {
        Node n;
        n.id = 0;
        n.depth = 0;
        n.bound = root.objective;
        n.bounds = base;
        n.basis = root.basis;
        open.insert(std::move(n));
    }

    bool hit_time_limit = false;
    while (!open.empty()) {
        if (seconds_since(t0) > opts_.time_limit) {
            hit_time_limit = true;
            break;
        }
        // node selection: the set is ordered best-bound first; depth-first
        // picks the most recently created node instead
        auto it = open.begin();
        if (opts_.node_selection == BnBOptions::NodeSelection::DepthFirst) {
            it = std::max_element(open.begin(), open.end(),
                                  [](const Node& a, const Node& b) { return a.id < b.id; });
        }
        Node node = *it;
        open.erase(it);

        const double prune_eps = 1e-9 * (1.0 + std::abs(incumbent_obj_));
        const double gap_eps =
            opts_.rel_gap * std::max(1.0, std::abs(incumbent_obj_));
        if (node.bound >= incumbent_obj_ - std::max(prune_eps, gap_eps)) continue;

        apply_bounds(node.bounds);
        LPResult lp = solver_.solve(node.basis.valid() ? &node.basis : nullptr);
        ++nodes_;
        if (lp.status == LPStatus::Infeasible) continue;
        if (lp.status == LPStatus::Unbounded) throw NumericalFailureError("node relaxation unbounded");
        node.bound = lp.objective;
        if (node.bound >= incumbent_obj_ - std::max(prune_eps, gap_eps)) continue;

        const int k = pick_branch(lp.x);
        if (k < 0) {
            try_incumbent(lp, node.bound);
            continue;
        }
        const double v = lp.x[bins_[static_cast<std::size_t>(k)]];
        // pseudo-cost bookkeeping uses the parent bound once children solve;
        // a light variant: charge the fractionality now
        pseudo_dn_[static_cast<std::size_t>(k)] += v - std::floor(v);
        pseudo_dn_n_[static_cast<std::size_t>(k)] += 1;
        pseudo_up_[static_cast<std::size_t>(k)] += std::ceil(v) - v;
        pseudo_up_n_[static_cast<std::size_t>(k)] += 1;

        for (int branch_up = 1; branch_up >= 0; --branch_up) {
            Node child;
            child.id = next_id_++;
            child.depth = node.depth + 1;
            child.bound = node.bound;
            child.bounds = node.bounds;
            child.basis = lp.basis;
            if (branch_up) {
                child.bounds.lb[static_cast<std::size_t>(k)] = 1.0;
                child.bounds.ub[static_cast<std::size_t>(k)] = 1.0;
            } else {
                child.bounds.lb[static_cast<std::size_t>(k)] = 0.0;
                child.bounds.ub[static_cast<std::size_t>(k)] = 0.0;
            }
            open.insert(std::move(child));
        }
    }

    // proven bound: best incumbent against the smallest open bound
    global_bound = incumbent_obj_;
    for (const Node& n : open) global_bound = std::min(global_bound, n.bound);

    if (!std::isfinite(incumbent_obj_)) {
        out.status = hit_time_limit ? RawSolverResult::Status::TimeLimit
                                    : RawSolverResult::Status::Infeasible;
        out.wall_seconds = seconds_since(t0);
        out.nodes = nodes_;
        return out;
    }
    out.status =
        hit_time_limit ? RawSolverResult::Status::TimeLimit : RawSolverResult::Status::Optimal;
    out.point = incumbent_point_;
    out.objective = incumbent_obj_;
    out.bound = global_bound;
    out.gap = std::abs(incumbent_obj_ - global_bound) / std::max(1.0, std::abs(incumbent_obj_));
    out.nodes = nodes_;
    out.wall_seconds = seconds_since(t0);
    return out;
}

}  // namespace

RawSolverResult branch_and_bound(const ModelDescription& model, const BnBOptions& opts) {
    if (model.has_quadratic_parts()) {
        throw Error("solver expects quadratic parts reduced away (milp_reduction)");
    }
    Search s(model, opts);
    return s.run();
}

RawSolverResult enumerate_oracle(const ModelDescription& model,
                                 const std::vector<int>& binary_vars) {
    if (model.has_quadratic_parts()) {
        throw Error("solver expects quadratic parts reduced away (milp_reduction)");
    }
    if (binary_vars.size() > 20) throw TooManyBinariesError(binary_vars.size());
    for (int j : binary_vars) {
        if (!model.vars.at(static_cast<std::size_t>(j)).is_binary) {
            throw Error("enumeration subset must contain binary variables");
        }
    }
    const auto t0 = Clock::now();
    const std::vector<int> all_bins = binary_vars_of(model);

    SimplexSolver solver{LinearProgram(model)};
    // binaries outside the subset stay closed
    for (int j : all_bins) {
        if (std::find(binary_vars.begin(), binary_vars.end(), j) == binary_vars.end()) {
            const double lo = std::max(1.0, model.vars[static_cast<std::size_t>(j)].lb);
            solver.program().set_bounds(j, lo, 1.0);
        }
    }

    RawSolverResult out;
    std::vector<int> best_opened;
    Basis last_basis;
    const std::uint64_t count = 1ULL << binary_vars.size();
    for (std::uint64_t a = 0; a < count; ++a) {
        bool valid = true;
        for (std::size_t k = 0; k < binary_vars.size(); ++k) {
            const double v = (a >> k) & 1ULL ? 1.0 : 0.0;
            const Variable& var = model.vars[static_cast<std::size_t>(binary_vars[k])];
            if (v < var.lb || v > var.ub) {
                valid = false;
                break;
            }
            solver.program().set_bounds(binary_vars[k], v, v);
        }
        if (!valid) continue;
        const LPResult lp = solver.solve(last_basis.valid() ? &last_basis : nullptr);
        if (lp.status != LPStatus::Optimal) continue;
        last_basis = lp.basis;
        std::vector<double> point(lp.x.data(), lp.x.data() + lp.x.size());
        for (int j : all_bins) {
            point[static_cast<std::size_t>(j)] = point[static_cast<std::size_t>(j)] > 0.5 ? 1.0 : 0.0;
        }
        std::vector<int> opened = opened_entities(model, all_bins, point);
        const double tol = 1e-9 * std::max(1.0, std::abs(out.objective));
        const bool have = out.status == RawSolverResult::Status::Optimal;
        bool better = !have || lp.objective < out.objective - tol;
        if (!better && have && std::abs(lp.objective - out.objective) <= tol) {
            better = tie_better(opened, best_opened);
        }
        if (better) {
            out.status = RawSolverResult::Status::Optimal;
            out.objective = lp.objective;
            out.bound = lp.objective;
            out.point = std::move(point);
            best_opened = std::move(opened);
        }
    }
    out.wall_seconds = seconds_since(t0);
    out.nodes = static_cast<long>(count);
    return out;
}

RawSolverResult solve_canonical(const ModelDescription& model, const BnBOptions& opts) {
    const auto t0 = Clock::now();
    RawSolverResult first = branch_and_bound(model, opts);
    if (first.status != RawSolverResult::Status::Optimal) return first;

    const std::vector<int> bins = binary_vars_of(model);
    if (bins.empty()) return first;

    // restrict to the optimal face and minimize the number of opened lines
    ModelDescription work = model;
    LinearConstraint cap;
    cap.name = "obj_cap";
    cap.sense = Sense::LE;
    cap.rhs = first.objective - work.obj.constant +
              1e-9 * std::max(1.0, std::abs(first.objective));
    for (std::size_t j = 0; j < work.vars.size(); ++j) {
        if (work.obj.linear[j] != 0.0) cap.terms.emplace_back(static_cast<int>(j), work.obj.linear[j]);
    }
    work.rows.push_back(std::move(cap));
    std::fill(work.obj.linear.begin(), work.obj.linear.end(), 0.0);
    work.obj.constant = 0.0;
    for (int j : bins) work.obj.linear[static_cast<std::size_t>(j)] = -1.0;  // maximize closures

    BnBOptions stage_opts = opts;
    stage_opts.rel_gap = 1e-12;
    RawSolverResult card = branch_and_bound(work, stage_opts);
    if (card.status != RawSolverResult::Status::Optimal) {
        first.wall_seconds = seconds_since(t0);
        return first;  // tie resolution timed out; the stage-1 answer stands
    }
    long closed = std::lround(-card.objective);
    const long opened_count = static_cast<long>(bins.size()) - closed;

    LinearConstraint count_row;
    count_row.name = "open_count";
    count_row.sense = Sense::EQ;
    count_row.rhs = static_cast<double>(closed);
    for (int j : bins) count_row.terms.emplace_back(j, 1.0);
    work.rows.push_back(std::move(count_row));
    std::fill(work.obj.linear.begin(), work.obj.linear.end(), 0.0);

    // lexicographic pass: open the smallest-indexed lines that still admit a
    // completion on the optimal face
    std::vector<int> order(bins.begin(), bins.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return model.vars[static_cast<std::size_t>(a)].entity <
               model.vars[static_cast<std::size_t>(b)].entity;
    });
    long opened_so_far = 0;
    long nodes = first.nodes + card.nodes;
    RawSolverResult last = card;
    for (int j : order) {
        if (opened_so_far >= opened_count) break;
        const Variable& var = work.vars[static_cast<std::size_t>(j)];
        if (var.lb > 0.5) continue;  // forced closed
        const double old_lb = var.lb, old_ub = var.ub;
        work.vars[static_cast<std::size_t>(j)].ub = 0.0;
        RawSolverResult probe = branch_and_bound(work, stage_opts);
        nodes += probe.nodes;
        if (probe.status == RawSolverResult::Status::Optimal) {
            ++opened_so_far;
            last = probe;
            work.vars[static_cast<std::size_t>(j)].lb = 0.0;
        } else {
            work.vars[static_cast<std::size_t>(j)].lb = 1.0;
            work.vars[static_cast<std::size_t>(j)].ub = old_ub;
            (void)old_lb;
        }
    }

    RawSolverResult out;
    out.status = RawSolverResult::Status::Optimal;
    out.point = last.point;
    // report the objective of the original model, not the staged one
    double obj = model.obj.constant;
    for (std::size_t j = 0; j < model.vars.size(); ++j) obj += model.obj.linear[j] * out.point[j];
    out.objective = obj;
    out.bound = first.bound;
    out.gap = std::abs(obj - first.bound) / std::max(1.0, std::abs(obj));
    out.nodes = nodes;
    out.wall_seconds = seconds_since(t0);
    return out;
}

}  // namespace aidcots
