#include "support/oracles.hpp"

#include <cmath>
#include <random>

namespace aidcots::testing {

Eigen::MatrixXcd dense_admittance(const Network& net, const SwitchMask& mask) {
    const int n = static_cast<int>(net.bus_count());
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t l = 0; l < net.branch_count(); ++l) {
        const Branch& br = net.branches()[l];
        if (!br.in_service || mask[l] == 0) continue;
        const std::complex<double> ys = 1.0 / std::complex<double>(br.r, br.x);
        const std::complex<double> half_charge(0.0, br.b_charge / 2.0);
        const std::complex<double> tap = std::polar(br.tap, br.shift);
        const int f = net.from_index(static_cast<int>(l));
        const int t = net.to_index(static_cast<int>(l));
        y(f, f) += (ys + half_charge) / (br.tap * br.tap);
        y(f, t) += -ys / std::conj(tap);
        y(t, f) += -ys / tap;
        y(t, t) += ys + half_charge;
    }
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses()[static_cast<std::size_t>(i)];
        y(i, i) += std::complex<double>(b.g_shunt, b.b_shunt);
    }
    return y;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;

// Standard-form problem: min c'x, A x = b, x >= 0.
struct StandardForm {
    Eigen::MatrixXd a;
    Eigen::VectorXd b, c;
    double c0 = 0.0;
    int original_vars = 0;
    // mapping back: x_orig[j] = shift[j] + sign[j] * x_std[col[j]] (+ x_std[col2[j]] for free)
    std::vector<double> shift;
    std::vector<double> sign;
    std::vector<int> col, col2;
};

StandardForm to_standard(const ModelDescription& model) {
    const int n = static_cast<int>(model.vars.size());
    StandardForm sf;
    sf.original_vars = n;
    sf.shift.assign(n, 0.0);
    sf.sign.assign(n, 1.0);
    sf.col.assign(n, -1);
    sf.col2.assign(n, -1);

    int cols = 0;
    std::vector<std::pair<int, double>> upper_rows;  // (std col, range)
    for (int j = 0; j < n; ++j) {
        const double lo = model.vars[static_cast<std::size_t>(j)].lb;
        const double hi = model.vars[static_cast<std::size_t>(j)].ub;
        if (lo == hi) {
            sf.shift[j] = lo;  // constant, no column
            continue;
        }
        if (std::isfinite(lo)) {
            sf.shift[j] = lo;
            sf.col[j] = cols++;
            if (std::isfinite(hi)) upper_rows.emplace_back(sf.col[j], hi - lo);
        } else if (std::isfinite(hi)) {
            sf.shift[j] = hi;
            sf.sign[j] = -1.0;
            sf.col[j] = cols++;
        } else {
            sf.col[j] = cols++;
            sf.col2[j] = cols++;
        }
    }

    const int m0 = static_cast<int>(model.rows.size());
    const int m = m0 + static_cast<int>(upper_rows.size());
    // columns: structurals + one slack/surplus per inequality row
    int slack_count = 0;
    for (const LinearConstraint& row : model.rows) {
        if (row.sense != Sense::EQ) ++slack_count;
    }
    slack_count += static_cast<int>(upper_rows.size());
    sf.a = Eigen::MatrixXd::Zero(m, cols + slack_count);
    sf.b.setZero(m);
    sf.c.setZero(cols + slack_count);
    sf.c0 = model.obj.constant;

    for (int j = 0; j < n; ++j) {
        const double cj = model.obj.linear[static_cast<std::size_t>(j)];
        sf.c0 += cj * sf.shift[j];
        if (sf.col[j] >= 0) sf.c[sf.col[j]] += cj * sf.sign[j];
        if (sf.col2[j] >= 0) sf.c[sf.col2[j]] -= cj;
    }

    int slack = cols;
    for (int i = 0; i < m0; ++i) {
        const LinearConstraint& row = model.rows[static_cast<std::size_t>(i)];
        double rhs = row.rhs;
        for (const auto& [var, coef] : row.terms) {
            rhs -= coef * sf.shift[static_cast<std::size_t>(var)];
            if (sf.col[var] >= 0) sf.a(i, sf.col[var]) += coef * sf.sign[static_cast<std::size_t>(var)];
            if (sf.col2[var] >= 0) sf.a(i, sf.col2[var]) -= coef;
        }
        sf.b[i] = rhs;
        if (row.sense == Sense::LE) sf.a(i, slack++) = 1.0;
        if (row.sense == Sense::GE) sf.a(i, slack++) = -1.0;
    }
    for (std::size_t k = 0; k < upper_rows.size(); ++k) {
        const int i = m0 + static_cast<int>(k);
        sf.a(i, upper_rows[k].first) = 1.0;
        sf.a(i, slack++) = 1.0;
        sf.b[i] = upper_rows[k].second;
    }
    // normalize rows to nonnegative rhs so artificials start feasible
    for (int i = 0; i < m; ++i) {
        if (sf.b[i] < 0.0) {
            sf.a.row(i) *= -1.0;
            sf.b[i] *= -1.0;
        }
    }
    return sf;
}

// Bland-rule dense tableau simplex on min c'x, Ax=b, x>=0 with artificials.
struct Tableau {
    Eigen::MatrixXd t;  // m x (n+1), last column rhs
    std::vector<int> basis;
    int m, n;

    bool pivot_until_optimal(const Eigen::VectorXd& cost, double* obj_out) {
        const int limit = 50000;
        for (int iter = 0; iter < limit; ++iter) {
            // reduced costs via basis cost row
            Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
            for (int i = 0; i < m; ++i) y[i] = cost[basis[static_cast<std::size_t>(i)]];
            int enter = -1;
            for (int j = 0; j < n; ++j) {
                double rc = cost[j];
                for (int i = 0; i < m; ++i) rc -= y[i] * t(i, j);
                if (rc < -kTol) {
                    enter = j;
                    break;  // Bland: first improving index
                }
            }
            if (enter < 0) {
                double obj = 0.0;
                for (int i = 0; i < m; ++i) obj += cost[basis[static_cast<std::size_t>(i)]] * t(i, n);
                *obj_out = obj;
                return true;
            }
            int leave = -1;
            double best = kInf;
            for (int i = 0; i < m; ++i) {
                if (t(i, enter) > kTol) {
                    const double ratio = t(i, n) / t(i, enter);
                    if (ratio < best - kTol ||
                        (ratio < best + kTol &&
                         (leave < 0 || basis[static_cast<std::size_t>(i)] <
                                           basis[static_cast<std::size_t>(leave)]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            const double p = t(leave, enter);
            t.row(leave) /= p;
            for (int i = 0; i < m; ++i) {
                if (i != leave && std::abs(t(i, enter)) > 1e-14) {
                    t.row(i) -= t(i, enter) * t.row(leave);
                }
            }
            basis[static_cast<std::size_t>(leave)] = enter;
        }
        return false;
    }
};

}  // namespace

OracleLP tableau_lp(const ModelDescription& model) {
    const StandardForm sf = to_standard(model);
    const int m = static_cast<int>(sf.a.rows());
    const int n0 = static_cast<int>(sf.a.cols());

    Tableau tab;
    tab.m = m;
    tab.n = n0 + m;  // artificials appended
    tab.t = Eigen::MatrixXd::Zero(m, tab.n + 1);
    tab.t.block(0, 0, m, n0) = sf.a;
    for (int i = 0; i < m; ++i) {
        tab.t(i, n0 + i) = 1.0;
        tab.t(i, tab.n) = sf.b[i];
        tab.basis.push_back(n0 + i);
    }

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.n);
    for (int i = 0; i < m; ++i) phase1[n0 + i] = 1.0;
    OracleLP out;
    double obj = 0.0;
    if (!tab.pivot_until_optimal(phase1, &obj)) return out;  // numerical dead end
    if (obj > 1e-7) {
        out.status = OracleStatus::Infeasible;
        return out;
    }
    // drive leftover artificials out where possible; zero rows are redundant
    for (int i = 0; i < m; ++i) {
        if (tab.basis[static_cast<std::size_t>(i)] < n0) continue;
        int replacement = -1;
        for (int j = 0; j < n0; ++j) {
            if (std::abs(tab.t(i, j)) > 1e-8) {
                replacement = j;
                break;
            }
        }
        if (replacement < 0) continue;
        const double p = tab.t(i, replacement);
        tab.t.row(i) /= p;
        for (int r = 0; r < m; ++r) {
            if (r != i && std::abs(tab.t(r, replacement)) > 1e-14) {
                tab.t.row(r) -= tab.t(r, replacement) * tab.t.row(i);
            }
        }
        tab.basis[static_cast<std::size_t>(i)] = replacement;
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tab.n);
    for (int j = 0; j < n0; ++j) phase2[j] = sf.c[j];
    for (int i = 0; i < m; ++i) phase2[n0 + i] = 1e9;  // keep artificials parked
    if (!tab.pivot_until_optimal(phase2, &obj)) {
        out.status = OracleStatus::Unbounded;
        return out;
    }

    std::vector<double> xstd(static_cast<std::size_t>(n0), 0.0);
    for (int i = 0; i < m; ++i) {
        if (tab.basis[static_cast<std::size_t>(i)] < n0) {
            xstd[static_cast<std::size_t>(tab.basis[static_cast<std::size_t>(i)])] = tab.t(i, tab.n);
        }
    }
    out.status = OracleStatus::Optimal;
    out.x.assign(static_cast<std::size_t>(sf.original_vars), 0.0);
    out.objective = sf.c0;
    for (int j = 0; j < sf.original_vars; ++j) {
        double v = sf.shift[static_cast<std::size_t>(j)];
        if (sf.col[static_cast<std::size_t>(j)] >= 0) {
            v += sf.sign[static_cast<std::size_t>(j)] *
                 xstd[static_cast<std::size_t>(sf.col[static_cast<std::size_t>(j)])];
        }
        if (sf.col2[static_cast<std::size_t>(j)] >= 0) {
            v -= xstd[static_cast<std::size_t>(sf.col2[static_cast<std::size_t>(j)])];
        }
        out.x[static_cast<std::size_t>(j)] = v;
        out.objective += model.obj.linear[static_cast<std::size_t>(j)] * v;
    }
    return out;
}

ModelDescription random_knapsack(std::uint64_t seed, int binaries) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(1.0, 10.0);
    std::uniform_real_distribution<double> value(1.0, 20.0);

    ModelDescription m;
    LinearConstraint capacity;
    capacity.name = "capacity";
    capacity.sense = Sense::LE;
    double total = 0.0;
    for (int k = 0; k < binaries; ++k) {
        Variable z;
        z.name = "z_" + std::to_string(k + 1);
        z.kind = VarKind::Switch;
        z.entity = k;
        z.lb = 0.0;
        z.ub = 1.0;
        z.is_binary = true;
        const int var = m.add_var(z);
        const double w = weight(rng);
        total += w;
        capacity.terms.emplace_back(var, w);
        // minimization: selecting an item pays off
        m.obj.linear[static_cast<std::size_t>(var)] = -value(rng);
    }
    capacity.rhs = 0.45 * total;
    m.rows.push_back(std::move(capacity));

    // a continuous coupling variable keeps the LP relaxations non-trivial
    Variable y;
    y.name = "y";
    y.kind = VarKind::Dispatch;
    y.entity = -1;
    y.lb = 0.0;
    y.ub = 5.0;
    const int yv = m.add_var(y);
    m.obj.linear[static_cast<std::size_t>(yv)] = 0.5;
    LinearConstraint couple;
    couple.name = "couple";
    couple.sense = Sense::GE;
    couple.rhs = 1.0;
    couple.terms.emplace_back(yv, 1.0);
    couple.terms.emplace_back(0, 0.75);
    couple.terms.emplace_back(1, 0.5);
    m.rows.push_back(std::move(couple));
    return m;
}

}  // namespace aidcots::testing
