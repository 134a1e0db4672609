#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hdcox {

/// Linear program in the form  min c'x  s.t.  A x <= b,  x >= 0.
struct LpProblem {
    Eigen::VectorXd costs;
    Eigen::MatrixXd constraint_matrix;
    Eigen::VectorXd bounds;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

struct LpResult {
    LpStatus status = LpStatus::optimal;
    Eigen::VectorXd solution;
    double optimum = 0.0;
    int iterations = 0;
};

/// Dense two-phase tableau simplex, pivot tolerance 1e-9.  Pricing is by
/// steepest reduced cost; after a stretch of degenerate pivots the solver
/// falls back to Bland's rule (lowest-index entering variable, lowest-index
/// leaving variable on ratio ties), which guarantees termination.
class SimplexSolver {
public:
    explicit SimplexSolver(const LpProblem& lp, int max_iterations = 0)
        : lp_(lp),
          m_(static_cast<int>(lp.constraint_matrix.rows())),
          n_(static_cast<int>(lp.constraint_matrix.cols())),
          max_iter_(max_iterations > 0 ? max_iterations : 100 * (m_ + n_) + 1000) {
        if (lp.costs.size() != n_ || lp.bounds.size() != m_)
            throw std::invalid_argument("SimplexSolver: inconsistent problem dimensions");
        if (!lp.costs.allFinite() || !lp.constraint_matrix.allFinite() || !lp.bounds.allFinite())
            throw std::invalid_argument("SimplexSolver: non-finite coefficients");
    }

    LpResult solve() {
        build_tableau();
        LpResult res;

        if (num_artificials_ > 0) {
            run_phase(true, res);
            if (res.status == LpStatus::iteration_limit) return res;
            if (objective_value() > 1e-7) {
                res.status = LpStatus::infeasible;
                return res;
            }
            pivot_out_artificials();
        }

        setup_objective_row(false);
        run_phase(false, res);
        if (res.status == LpStatus::iteration_limit || res.status == LpStatus::unbounded)
            return res;

        res.status = LpStatus::optimal;
        res.solution = Eigen::VectorXd::Zero(n_);
        for (int r = 0; r < m_; ++r)
            if (basis_[r] < n_) res.solution[basis_[r]] = rhs_[r];
        res.optimum = lp_.costs.dot(res.solution);
        return res;
    }

private:
    static constexpr double kPivotTol = 1e-9;

    const LpProblem& lp_;
    int m_, n_, max_iter_;
    int num_artificials_ = 0;
    int art_begin_ = 0; // first artificial column
    int stalled_ = 0;   // consecutive pivots without objective progress
    // Row-major storage: every pivot touches whole rows.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tab_;
    Eigen::VectorXd rhs_;
    Eigen::RowVectorXd obj_;
    double obj_rhs_ = 0.0;
    std::vector<int> basis_;
    int iterations_ = 0;

    double objective_value() const { return -obj_rhs_; }

    void build_tableau() {
        num_artificials_ = 0;
        for (int i = 0; i < m_; ++i)
            if (lp_.bounds[i] < 0.0) ++num_artificials_;

        art_begin_ = n_ + m_;
        const int cols = n_ + m_ + num_artificials_;
        tab_ = Eigen::MatrixXd::Zero(m_, cols);
        rhs_.resize(m_);
        basis_.assign(m_, -1);

        int art = art_begin_;
        for (int i = 0; i < m_; ++i) {
            const double sgn = lp_.bounds[i] < 0.0 ? -1.0 : 1.0;
            tab_.row(i).head(n_) = sgn * lp_.constraint_matrix.row(i);
            tab_(i, n_ + i) = sgn; // slack
            rhs_[i] = sgn * lp_.bounds[i];
            if (sgn < 0.0) {
                tab_(i, art) = 1.0;
                basis_[i] = art++;
            } else {
                basis_[i] = n_ + i;
            }
        }
        setup_objective_row(true);
    }

    // Reduced-cost row d_j = c_j - c_B' B^{-1} A_j from the current tableau.
    void setup_objective_row(bool phase1) {
        const int cols = static_cast<int>(tab_.cols());
        obj_.setZero(cols);
        obj_rhs_ = 0.0;
        if (phase1) {
            for (int j = art_begin_; j < cols; ++j) obj_[j] = 1.0;
        } else {
            obj_.head(n_) = lp_.costs.transpose();
        }
        for (int r = 0; r < m_; ++r) {
            const double cb = phase1 ? (basis_[r] >= art_begin_ ? 1.0 : 0.0)
                                     : (basis_[r] < n_ ? lp_.costs[basis_[r]] : 0.0);
            if (cb != 0.0) {
                obj_ -= cb * tab_.row(r);
                obj_rhs_ -= cb * rhs_[r];
            }
        }
    }

    void pivot(int row, int col) {
        const double piv = tab_(row, col);
        tab_.row(row) /= piv;
        rhs_[row] /= piv;
        const Eigen::RowVectorXd prow = tab_.row(row);
        const double prhs = rhs_[row];
        for (int r = 0; r < m_; ++r) {
            if (r == row) continue;
            const double f = tab_(r, col);
            if (f != 0.0) {
                tab_.row(r) -= f * prow;
                tab_(r, col) = 0.0;
                rhs_[r] -= f * prhs;
                if (rhs_[r] < 0.0 && rhs_[r] > -1e-11) rhs_[r] = 0.0;
            }
        }
        const double fo = obj_[col];
        if (fo != 0.0) {
            obj_ -= fo * prow;
            obj_[col] = 0.0;
            obj_rhs_ -= fo * prhs;
        }
        basis_[row] = col;
    }

    // Steepest reduced cost by default; Bland's lowest-index rule while the
    // iteration is stalled (anti-cycling).
    int entering_column(bool phase1) const {
        const int limit = phase1 ? static_cast<int>(tab_.cols()) : art_begin_;
        if (stalled_ > m_ + n_) {
            for (int j = 0; j < limit; ++j)
                if (obj_[j] < -kPivotTol) return j;
            return -1;
        }
        int best = -1;
        double most = -kPivotTol;
        for (int j = 0; j < limit; ++j) {
            if (obj_[j] < most) {
                most = obj_[j];
                best = j;
            }
        }
        return best;
    }

    // Ratio test; ties resolved toward the row whose basic variable has the
    // lowest index.
    int leaving_row(int col) const {
        int best = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < m_; ++r) {
            const double a = tab_(r, col);
            if (a > kPivotTol) {
                const double ratio = rhs_[r] / a;
                if (best < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && basis_[r] < basis_[best])) {
                    best = r;
                    best_ratio = ratio;
                }
            }
        }
        return best;
    }

    void run_phase(bool phase1, LpResult& res) {
        stalled_ = 0;
        while (true) {
            if (iterations_ >= max_iter_) {
                res.status = LpStatus::iteration_limit;
                res.iterations = iterations_;
                return;
            }
            const int col = entering_column(phase1);
            if (col < 0) break;
            const int row = leaving_row(col);
            if (row < 0) {
                res.status = phase1 ? LpStatus::infeasible : LpStatus::unbounded;
                res.iterations = iterations_;
                return;
            }
            const double before = obj_rhs_;
            pivot(row, col);
            ++iterations_;
            if (std::fabs(obj_rhs_ - before) > 1e-12)
                stalled_ = 0;
            else
                ++stalled_;
        }
        res.iterations = iterations_;
        res.status = LpStatus::optimal;
    }

    // Basic artificials at zero level are swapped for any structural or slack
    // column with a usable pivot; fully zero rows are redundant and kept with
    // the artificial pinned at zero (it cannot re-enter in phase 2).
    void pivot_out_artificials() {
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < art_begin_) continue;
            int col = -1;
            for (int j = 0; j < art_begin_; ++j) {
                if (std::fabs(tab_(r, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) pivot(r, col);
        }
    }
};

inline LpResult solve_lp(const LpProblem& lp, int max_iterations = 0) {
    return SimplexSolver(lp, max_iterations).solve();
}

} // namespace hdcox
