// SPDX-License-Identifier: Apache-2.0
//
// Small dense two-phase simplex for
//
//     minimize    c^T x
//     subject to  A_eq x  = b_eq
//                 A_le x <= b_le
//                 0 <= x <= u        (u_j may be +inf)
//
// Bland's rule throughout, so it terminates on degenerate problems. Rows are
// equilibrated internally; the returned solution is in the caller's units.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace decoyattack::lp {

struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> eq_rows;
    std::vector<double> eq_rhs;
    std::vector<std::vector<double>> le_rows;
    std::vector<double> le_rhs;
    std::vector<double> upper;  ///< empty means all +inf

    std::size_t num_vars() const { return objective.size(); }

    void validate() const {
        const std::size_t n = num_vars();
        if (n == 0) throw std::invalid_argument("LinearProgram: no variables");
        if (eq_rows.size() != eq_rhs.size() || le_rows.size() != le_rhs.size())
            throw std::invalid_argument("LinearProgram: row/rhs count mismatch");
        for (const auto& r : eq_rows)
            if (r.size() != n) throw std::invalid_argument("LinearProgram: equality row width mismatch");
        for (const auto& r : le_rows)
            if (r.size() != n) throw std::invalid_argument("LinearProgram: inequality row width mismatch");
        if (!upper.empty() && upper.size() != n)
            throw std::invalid_argument("LinearProgram: upper bound count mismatch");
        for (double u : upper)
            if (!(u >= 0.0)) throw std::invalid_argument("LinearProgram: upper bounds must be >= 0");
    }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;      ///< clamped into [0, u]
    std::vector<double> x_raw;  ///< basic values as computed, before clamping
    double objective = std::numeric_limits<double>::quiet_NaN();
    std::size_t pivots = 0;
};

struct SimplexOptions {
    double pivot_tol = 1e-9;        ///< smallest admissible pivot element (scaled units)
    double optimality_tol = 1e-9;   ///< reduced-cost threshold (scaled units)
    double feasibility_tol = 1e-9;  ///< phase-1 residual accepted as feasible (scaled units)
    std::size_t max_pivots = 100000;
};

namespace detail {

class Tableau {
  public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_((rows + 1) * (cols + 1), 0.0), basis_(rows, 0) {}

    double& at(std::size_t r, std::size_t c) { return data_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    double rhs(std::size_t r) const { return at(r, cols_); }
    /// Objective row lives at index rows_; its rhs holds -(objective value).
    double& cost(std::size_t c) { return at(rows_, c); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const double inv = 1.0 / at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) *= inv;
        at(pr, pc) = 1.0;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
        basis_[pr] = pc;
    }

    /// Price out the basic columns from the objective row.
    void canonicalize_objective() {
        for (std::size_t r = 0; r < rows_; ++r) {
            const double f = at(rows_, basis_[r]);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(rows_, c) -= f * at(r, c);
        }
    }

    /// Runs Bland-rule iterations over columns [0, allowed_cols). Returns status.
    LpStatus iterate(std::size_t allowed_cols, const SimplexOptions& opt, std::size_t& pivots) {
        while (true) {
            std::size_t enter = allowed_cols;
            for (std::size_t c = 0; c < allowed_cols; ++c) {
                if (at(rows_, c) < -opt.optimality_tol) {
                    enter = c;
                    break;
                }
            }
            if (enter == allowed_cols) return LpStatus::optimal;

            std::size_t leave = rows_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                const double a = at(r, enter);
                if (a <= opt.pivot_tol) continue;
                const double ratio = std::max(rhs(r), 0.0) / a;
                if (ratio < best - 1e-12) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + 1e-12 && basis_[r] < basis_[leave]) {
                    leave = r;
                }
            }
            if (leave == rows_) return LpStatus::unbounded;
            if (++pivots > opt.max_pivots) return LpStatus::iteration_limit;
            pivot(leave, enter);
        }
    }

  private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
};

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

inline LpSolution solve(const LinearProgram& lp, const SimplexOptions& opt = {}) {
    lp.validate();
    const std::size_t n = lp.num_vars();

    // Assemble every constraint as (row, rhs, slack sign); slack sign 0 for equalities.
    struct Row {
        std::vector<double> a;
        double b;
        int slack;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < lp.eq_rows.size(); ++i) rows.push_back({lp.eq_rows[i], lp.eq_rhs[i], 0});
    for (std::size_t i = 0; i < lp.le_rows.size(); ++i) rows.push_back({lp.le_rows[i], lp.le_rhs[i], 1});
    for (std::size_t j = 0; j < lp.upper.size(); ++j) {
        if (!std::isfinite(lp.upper[j])) continue;
        std::vector<double> a(n, 0.0);
        a[j] = 1.0;
        rows.push_back({std::move(a), lp.upper[j], 1});
    }

    // Equilibrate and make every rhs non-negative.
    for (auto& r : rows) {
        double s = detail::max_abs(r.a);
        if (s == 0.0) s = 1.0;
        for (double& x : r.a) x /= s;
        r.b /= s;
        if (r.b < 0.0) {
            for (double& x : r.a) x = -x;
            r.b = -r.b;
            r.slack = -r.slack;
        }
    }

    const std::size_t m = rows.size();
    std::size_t num_slack = 0;
    for (const auto& r : rows)
        if (r.slack != 0) ++num_slack;
    std::size_t num_art = 0;
    for (const auto& r : rows)
        if (r.slack != 1) ++num_art;

    const std::size_t art_begin = n + num_slack;
    detail::Tableau t(m, art_begin + num_art);
    {
        std::size_t next_slack = n;
        std::size_t next_art = art_begin;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) t.at(i, j) = rows[i].a[j];
            t.rhs(i) = rows[i].b;
            if (rows[i].slack != 0) {
                t.at(i, next_slack) = static_cast<double>(rows[i].slack);
                if (rows[i].slack == 1) t.basis()[i] = next_slack;
                ++next_slack;
            }
            if (rows[i].slack != 1) {
                t.at(i, next_art) = 1.0;
                t.basis()[i] = next_art;
                ++next_art;
            }
        }
    }

    LpSolution sol;
    sol.x.assign(n, 0.0);

    // Phase 1: minimize the sum of artificials.
    if (num_art > 0) {
        for (std::size_t c = art_begin; c < t.cols(); ++c) t.cost(c) = 1.0;
        t.canonicalize_objective();
        const LpStatus st = t.iterate(t.cols(), opt, sol.pivots);
        if (st == LpStatus::iteration_limit) {
            sol.status = st;
            return sol;
        }
        if (-t.rhs(m) > opt.feasibility_tol) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        // Drive remaining (zero-level) artificials out of the basis where possible.
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis()[r] < art_begin) continue;
            std::size_t best = art_begin;
            double best_abs = opt.pivot_tol;
            for (std::size_t c = 0; c < art_begin; ++c) {
                if (std::abs(t.at(r, c)) > best_abs) {
                    best_abs = std::abs(t.at(r, c));
                    best = c;
                }
            }
            if (best < art_begin) t.pivot(r, best);
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
        for (std::size_t c = 0; c < t.cols(); ++c) t.cost(c) = 0.0;
        t.rhs(m) = 0.0;
    }

    // Phase 2 on the scaled objective; artificials may not re-enter.
    const double cscale = detail::max_abs(lp.objective);
    for (std::size_t j = 0; j < n; ++j) t.cost(j) = cscale > 0.0 ? lp.objective[j] / cscale : 0.0;
    t.canonicalize_objective();
    const LpStatus st = t.iterate(art_begin, opt, sol.pivots);
    if (st != LpStatus::optimal) {
        sol.status = st;
        return sol;
    }

    sol.x_raw.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t b = t.basis()[r];
        if (b < n) sol.x_raw[b] = t.rhs(r);
    }
    for (std::size_t j = 0; j < n; ++j) {
        sol.x[j] = std::max(sol.x_raw[j], 0.0);
        if (j < lp.upper.size()) sol.x[j] = std::min(sol.x[j], lp.upper[j]);
    }
    sol.objective = std::inner_product(lp.objective.begin(), lp.objective.end(), sol.x.begin(), 0.0);
    sol.status = LpStatus::optimal;
    return sol;
}

}  // namespace decoyattack::lp
