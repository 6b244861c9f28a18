#include "aidcots/simplex.hpp"

#include <cmath>
#include <limits>

namespace aidcots {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-10;
constexpr int kRefactorEvery = 60;
constexpr int kStallLimit = 200;  // non-improving pivots before Bland's rule
}  // namespace

LinearProgram::LinearProgram(const ModelDescription& model) {
    if (model.has_quadratic_parts()) {
        throw Error("LP layer requires a model without quadratic parts");
    }
    n_ = static_cast<int>(model.vars.size());
    m_ = static_cast<int>(model.rows.size());
    cols_.resize(static_cast<std::size_t>(n_ + m_));
    c_.setZero(n_);
    c0_ = model.obj.constant;
    b_.setZero(m_);
    lb_.resize(n_ + m_);
    ub_.resize(n_ + m_);

    for (int j = 0; j < n_; ++j) {
        c_[j] = model.obj.linear[static_cast<std::size_t>(j)];
        lb_[j] = model.vars[static_cast<std::size_t>(j)].lb;
        ub_[j] = model.vars[static_cast<std::size_t>(j)].ub;
    }
    for (int i = 0; i < m_; ++i) {
        const LinearConstraint& row = model.rows[static_cast<std::size_t>(i)];
        b_[i] = row.rhs;
        for (const auto& [var, coef] : row.terms) {
            if (coef != 0.0) cols_[static_cast<std::size_t>(var)].emplace_back(i, coef);
        }
        const int slack = n_ + i;
        cols_[static_cast<std::size_t>(slack)].emplace_back(i, 1.0);
        switch (row.sense) {
            case Sense::LE: lb_[slack] = 0.0;    ub_[slack] = kInf; break;
            case Sense::GE: lb_[slack] = -kInf;  ub_[slack] = 0.0;  break;
            case Sense::EQ: lb_[slack] = 0.0;    ub_[slack] = 0.0;  break;
        }
    }
}

void LinearProgram::set_bounds(int var, double lb, double ub) {
    lb_[var] = lb;
    ub_[var] = ub;
}

namespace {

// Working state of one solve. Bound data lives in the LinearProgram, the
// factorization is a dense LU of the basis columns refreshed periodically
// with eta updates in between.
class Worker {
public:
    Worker(const LinearProgram& lp) : lp_(lp), m_(lp.row_count()), total_(lp.column_count()) {}

    LPResult run(const Basis* warm);

private:
    struct Eta {
        int r;
        Eigen::VectorXd w;
    };

    const LinearProgram& lp_;
    int m_, total_;
    std::vector<int> basic_;
    std::vector<VarStatus> status_;
    Eigen::VectorXd x_;  // all columns
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    std::vector<Eta> etas_;
    bool bland_ = false;
    int iterations_ = 0;

    double lb(int j) const { return lp_.lower(j); }
    double ub(int j) const { return lp_.upper(j); }

    void start_cold();
    bool adopt(const Basis& warm);
    void refactor();
    void compute_basics();
    Eigen::VectorXd ftran(Eigen::VectorXd v) const;
    Eigen::VectorXd btran(Eigen::VectorXd c) const;
    Eigen::VectorXd column_dense(int j) const;

    double infeasibility() const;
    bool price_and_pivot(bool phase1, bool& failed);
};

void Worker::start_cold() {
    basic_.resize(static_cast<std::size_t>(m_));
    status_.assign(static_cast<std::size_t>(total_), VarStatus::AtLower);
    const int n = lp_.structural_count();
    for (int i = 0; i < m_; ++i) {
        basic_[static_cast<std::size_t>(i)] = n + i;
        status_[static_cast<std::size_t>(n + i)] = VarStatus::Basic;
    }
    for (int j = 0; j < n; ++j) {
        if (std::isfinite(lb(j))) {
            status_[static_cast<std::size_t>(j)] = VarStatus::AtLower;
        } else if (std::isfinite(ub(j))) {
            status_[static_cast<std::size_t>(j)] = VarStatus::AtUpper;
        } else {
            status_[static_cast<std::size_t>(j)] = VarStatus::AtZero;
        }
    }
}

bool Worker::adopt(const Basis& warm) {
    if (static_cast<int>(warm.basic.size()) != m_ ||
        static_cast<int>(warm.status.size()) != total_) {
        return false;
    }
    basic_ = warm.basic;
    status_ = warm.status;
    // nonbasic placements must sit on a finite bound under the current box
    for (int j = 0; j < total_; ++j) {
        switch (status_[static_cast<std::size_t>(j)]) {
            case VarStatus::Basic: break;
            case VarStatus::AtLower:
                if (!std::isfinite(lb(j))) status_[static_cast<std::size_t>(j)] =
                    std::isfinite(ub(j)) ? VarStatus::AtUpper : VarStatus::AtZero;
                break;
            case VarStatus::AtUpper:
                if (!std::isfinite(ub(j))) status_[static_cast<std::size_t>(j)] =
                    std::isfinite(lb(j)) ? VarStatus::AtLower : VarStatus::AtZero;
                break;
            case VarStatus::AtZero: break;
        }
    }
    return true;
}

void Worker::refactor() {
    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) {
        for (const auto& [row, coef] : lp_.column(basic_[static_cast<std::size_t>(i)])) {
            bmat(row, i) = coef;
        }
    }
    lu_.compute(bmat);
    etas_.clear();
}

Eigen::VectorXd Worker::ftran(Eigen::VectorXd v) const {
    Eigen::VectorXd u = lu_.solve(v);
    for (const Eta& e : etas_) {
        const double t = u[e.r] / e.w[e.r];
        u -= t * e.w;
        u[e.r] = t;
    }
    return u;
}

Eigen::VectorXd Worker::btran(Eigen::VectorXd c) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
        double t = c[it->r];
        for (int i = 0; i < m_; ++i) {
            if (i != it->r) t -= it->w[i] * c[i];
        }
        c[it->r] = t / it->w[it->r];
    }
    return lu_.transpose().solve(c);
}

Eigen::VectorXd Worker::column_dense(int j) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
    for (const auto& [row, coef] : lp_.column(j)) v[row] = coef;
    return v;
}

void Worker::compute_basics() {
    Eigen::VectorXd rhs = lp_.rhs();
    for (int j = 0; j < total_; ++j) {
        double val = 0.0;
        switch (status_[static_cast<std::size_t>(j)]) {
            case VarStatus::Basic: continue;
            case VarStatus::AtLower: val = lb(j); break;
            case VarStatus::AtUpper: val = ub(j); break;
            case VarStatus::AtZero: val = 0.0; break;
        }
        x_[j] = val;
        if (val != 0.0) {
            for (const auto& [row, coef] : lp_.column(j)) rhs[row] -= coef * val;
        }
    }
    const Eigen::VectorXd xb = ftran(rhs);
    for (int i = 0; i < m_; ++i) x_[basic_[static_cast<std::size_t>(i)]] = xb[i];
}

double Worker::infeasibility() const {
    double sum = 0.0;
    for (int i = 0; i < m_; ++i) {
        const int j = basic_[static_cast<std::size_t>(i)];
        sum += std::max(0.0, lb(j) - x_[j]) + std::max(0.0, x_[j] - ub(j));
    }
    return sum;
}

// One pricing pass plus pivot. Returns false when no eligible entering
// column remains (phase optimum reached).
bool Worker::price_and_pivot(bool phase1, bool& failed) {
    failed = false;
    // phase cost over basic variables
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) {
        const int j = basic_[static_cast<std::size_t>(i)];
        if (phase1) {
            cb[i] = x_[j] < lb(j) - kFeasTol ? -1.0 : (x_[j] > ub(j) + kFeasTol ? 1.0 : 0.0);
        } else {
            cb[i] = lp_.cost(j);
        }
    }
    const Eigen::VectorXd y = btran(cb);

    const double dual_tol = phase1 ? 1e-9 : 1e-9 * std::max(1.0, cb.cwiseAbs().maxCoeff());
    int enter = -1;
    double best_score = dual_tol;
    int enter_dir = 0;
    for (int j = 0; j < total_; ++j) {
        const VarStatus st = status_[static_cast<std::size_t>(j)];
        if (st == VarStatus::Basic) continue;
        if (ub(j) - lb(j) < kFeasTol && st != VarStatus::AtZero) continue;  // fixed
        double zj = phase1 ? 0.0 : lp_.cost(j);
        for (const auto& [row, coef] : lp_.column(j)) zj -= y[row] * coef;
        int dir = 0;
        double score = 0.0;
        if (st == VarStatus::AtLower && zj < -dual_tol) {
            dir = 1;
            score = -zj;
        } else if (st == VarStatus::AtUpper && zj > dual_tol) {
            dir = -1;
            score = zj;
        } else if (st == VarStatus::AtZero && std::abs(zj) > dual_tol) {
            dir = zj < 0.0 ? 1 : -1;
            score = std::abs(zj);
        }
        if (dir == 0) continue;
        if (bland_) {
            enter = j;
            enter_dir = dir;
            break;
        }
        if (score > best_score) {
            best_score = score;
            enter = j;
            enter_dir = dir;
        }
    }
    if (enter < 0) return false;

    const Eigen::VectorXd w = ftran(column_dense(enter));

    // ratio test: entering moves by t*dir, basic i moves by -t*dir*w_i
    double t_max = kInf;
    int leave_pos = -1;
    bool leave_at_upper = false;
    double best_pivot = 0.0;
    const double own_range = ub(enter) - lb(enter);
    if (std::isfinite(own_range)) t_max = own_range;

    for (int i = 0; i < m_; ++i) {
        if (std::abs(w[i]) < kPivotTol) continue;
        const int j = basic_[static_cast<std::size_t>(i)];
        const double rate = -enter_dir * w[i];  // dx_j/dt
        double ti = kInf;
        bool hits_upper = false;
        const bool below = x_[j] < lb(j) - kFeasTol;
        const bool above = x_[j] > ub(j) + kFeasTol;
        if (phase1 && below) {
            if (rate > 0.0) {
                ti = (lb(j) - x_[j]) / rate;  // stops at the kink
                hits_upper = false;
            }
        } else if (phase1 && above) {
            if (rate < 0.0) {
                ti = (x_[j] - ub(j)) / (-rate);
                hits_upper = true;
            }
        } else {
            if (rate > 0.0 && std::isfinite(ub(j))) {
                ti = (ub(j) - x_[j]) / rate;
                hits_upper = true;
            } else if (rate < 0.0 && std::isfinite(lb(j))) {
                ti = (x_[j] - lb(j)) / (-rate);
                hits_upper = false;
            }
        }
        if (ti == kInf) continue;
        ti = std::max(ti, 0.0);
        // prefer the strictly smallest ratio; among near ties keep the
        // largest pivot magnitude, Bland's rule takes the smallest index
        const double tie_eps = 1e-10 * (1.0 + ti);
        if (ti >= t_max + tie_eps) continue;
        const bool strictly_better = ti < t_max - tie_eps;
        bool take = strictly_better || leave_pos < 0;
        if (!take) {
            take = bland_ ? j < basic_[static_cast<std::size_t>(leave_pos)]
                          : std::abs(w[i]) > best_pivot;
        }
        if (take) {
            t_max = ti;
            leave_pos = i;
            leave_at_upper = hits_upper;
            best_pivot = std::abs(w[i]);
        }
    }

    if (t_max == kInf) {
        failed = true;  // unbounded direction
        return false;
    }

    ++iterations_;

    if (leave_pos < 0) {
        // bound flip of the entering variable
        x_[enter] = enter_dir > 0 ? ub(enter) : lb(enter);
        for (int i = 0; i < m_; ++i) {
            x_[basic_[static_cast<std::size_t>(i)]] -= t_max * enter_dir * w[i];
        }
        status_[static_cast<std::size_t>(enter)] =
            enter_dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        return true;
    }

    const int leave_var = basic_[static_cast<std::size_t>(leave_pos)];
    const double enter_start =
        status_[static_cast<std::size_t>(enter)] == VarStatus::AtLower
            ? lb(enter)
            : (status_[static_cast<std::size_t>(enter)] == VarStatus::AtUpper ? ub(enter) : 0.0);
    for (int i = 0; i < m_; ++i) {
        x_[basic_[static_cast<std::size_t>(i)]] -= t_max * enter_dir * w[i];
    }
    x_[enter] = enter_start + enter_dir * t_max;
    x_[leave_var] = leave_at_upper ? ub(leave_var) : lb(leave_var);

    basic_[static_cast<std::size_t>(leave_pos)] = enter;
    status_[static_cast<std::size_t>(enter)] = VarStatus::Basic;
    status_[static_cast<std::size_t>(leave_var)] =
        leave_at_upper ? VarStatus::AtUpper : VarStatus::AtLower;

    etas_.push_back({leave_pos, w});
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) {
        refactor();
        compute_basics();
    }
    return true;
}

LPResult Worker::run(const Basis* warm) {
    x_.setZero(total_);
    bool adopted = warm && warm->valid() && adopt(*warm);
    if (!adopted) start_cold();
    refactor();
    if (lu_.matrixLU().diagonal().cwiseAbs().minCoeff() < 1e-12) {
        // singular warm basis, rebuild from scratch
        start_cold();
        refactor();
    }
    compute_basics();

    LPResult out;
    const long iter_cap = 2000L + 200L * static_cast<long>(total_);
    int stall = 0;
    double last_measure = kInf;
    bool phase1 = infeasibility() > kFeasTol * (1.0 + lp_.rhs().cwiseAbs().sum());

    while (true) {
        if (iterations_ > iter_cap) throw NumericalFailureError("simplex iteration cap reached");
        if (phase1 && infeasibility() <= kFeasTol * (1.0 + lp_.rhs().cwiseAbs().sum())) {
            phase1 = false;
            bland_ = false;
            stall = 0;
            last_measure = kInf;
        }
        bool failed = false;
        const bool moved = price_and_pivot(phase1, failed);
        if (failed) {
            if (phase1) throw NumericalFailureError("phase-1 unbounded direction");
            out.status = LPStatus::Unbounded;
            break;
        }
        if (!moved) {
            if (phase1) {
                out.status = LPStatus::Infeasible;
                break;
            }
            out.status = LPStatus::Optimal;
            break;
        }
        // anti-cycling bookkeeping
        double measure;
        if (phase1) {
            measure = infeasibility();
        } else {
            measure = 0.0;
            for (int i = 0; i < m_; ++i) {
                const int j = basic_[static_cast<std::size_t>(i)];
                measure += lp_.cost(j) * x_[j];
            }
            for (int j2 = 0; j2 < total_; ++j2) {
                if (status_[static_cast<std::size_t>(j2)] != VarStatus::Basic) {
                    measure += lp_.cost(j2) * x_[j2];
                }
            }
        }
        if (measure < last_measure - 1e-12 * (1.0 + std::abs(last_measure))) {
            last_measure = measure;
            stall = 0;
            bland_ = false;
        } else if (++stall > kStallLimit) {
            bland_ = true;
        }
    }

    // polish the point with a fresh factorization before reporting
    refactor();
    compute_basics();

    out.iterations = iterations_;
    out.basis.basic = basic_;
    out.basis.status = status_;
    const int n = lp_.structural_count();
    out.x.resize(n);
    for (int j = 0; j < n; ++j) out.x[j] = x_[j];
    if (out.status == LPStatus::Optimal) {
        double obj = lp_.constant();
        for (int j = 0; j < n; ++j) obj += lp_.cost(j) * x_[j];
        out.objective = obj;
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) cb[i] = lp_.cost(basic_[static_cast<std::size_t>(i)]);
        out.duals = btran(cb);
        // a phase-2 optimum must be primal feasible
        if (infeasibility() > 1e-6) throw NumericalFailureError("optimal basis lost feasibility");
    }
    return out;
}

}  // namespace

LPResult SimplexSolver::solve(const Basis* warm) {
    Worker w(lp_);
    return w.run(warm);
}

LPResult solve_lp(const ModelDescription& model) {
    SimplexSolver solver{LinearProgram(model)};
    return solver.solve();
}

}  // namespace aidcots
