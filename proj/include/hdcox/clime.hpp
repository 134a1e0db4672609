#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdcox/cv.hpp"
#include "hdcox/dataset.hpp"
#include "hdcox/partial_likelihood.hpp"
#include "hdcox/simplex.hpp"

namespace hdcox {

enum class ClimeColumnStatus { optimal, infeasible, iteration_limit };
enum class ThetaVariant { hat, tilde };

/// Row-wise l1-minimal precision matrix estimate: row j solves
/// min ||b||_1 subject to ||V b - e_j||_inf <= lambda_n.  No symmetrization.
struct PrecisionEstimate {
    Eigen::MatrixXd theta;
    double lambda_n = 0.0;
    ThetaVariant variant = ThetaVariant::hat;
    std::vector<ClimeColumnStatus> column_status;
    Eigen::VectorXd l1_norms;

    bool all_optimal() const {
        for (auto s : column_status)
            if (s != ClimeColumnStatus::optimal) return false;
        return true;
    }
};

namespace detail {

inline LpProblem clime_lp(const Eigen::MatrixXd& v, int j, double lambda_n) {
    const int p = static_cast<int>(v.rows());
    LpProblem lp;
    lp.costs = Eigen::VectorXd::Ones(2 * p);
    lp.constraint_matrix.resize(2 * p, 2 * p);
    lp.constraint_matrix.topLeftCorner(p, p) = v;
    lp.constraint_matrix.topRightCorner(p, p) = -v;
    lp.constraint_matrix.bottomLeftCorner(p, p) = -v;
    lp.constraint_matrix.bottomRightCorner(p, p) = v;
    lp.bounds.resize(2 * p);
    lp.bounds.head(p).setConstant(lambda_n);
    lp.bounds.tail(p).setConstant(lambda_n);
    lp.bounds[j] += 1.0;
    lp.bounds[p + j] -= 1.0;
    return lp;
}

} // namespace detail

/// Solves the j-th column problem exactly via the simplex solver, with the
/// split b = b+ - b-, b+, b- >= 0.
inline Eigen::VectorXd clime_column(const Eigen::MatrixXd& v, int j, double lambda_n,
                                    ClimeColumnStatus* status = nullptr) {
    const int p = static_cast<int>(v.rows());
    if (v.cols() != p) throw std::invalid_argument("clime_column: V must be square");
    if (j < 0 || j >= p) throw std::invalid_argument("clime_column: column index out of range");
    if (!(lambda_n >= 0.0)) throw std::invalid_argument("clime_column: lambda_n must be >= 0");
    if (!v.isApprox(v.transpose(), 1e-8))
        throw std::invalid_argument("clime_column: V must be symmetric");

    const LpResult res = solve_lp(detail::clime_lp(v, j, lambda_n), 50 * p + 200);
    ClimeColumnStatus st = ClimeColumnStatus::optimal;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
    if (res.status == LpStatus::optimal) {
        b = res.solution.head(p) - res.solution.tail(p);
    } else if (res.status == LpStatus::infeasible) {
        st = ClimeColumnStatus::infeasible;
    } else {
        st = ClimeColumnStatus::iteration_limit;
    }
    if (status) *status = st;
    if (!status && st != ClimeColumnStatus::optimal)
        throw std::runtime_error("clime_column: column " + std::to_string(j) + " not solved");
    return b;
}

inline PrecisionEstimate clime(const Eigen::MatrixXd& v, double lambda_n) {
    const int p = static_cast<int>(v.rows());
    PrecisionEstimate est;
    est.theta.resize(p, p);
    est.lambda_n = lambda_n;
    est.variant = ThetaVariant::hat;
    est.column_status.resize(p);
    est.l1_norms.resize(p);
    for (int j = 0; j < p; ++j) {
        const Eigen::VectorXd b = clime_column(v, j, lambda_n, &est.column_status[j]);
        est.theta.row(j) = b.transpose();
        est.l1_norms[j] = b.lpNorm<1>();
    }
    return est;
}

/// Diagonal widening: theta_jj <- max(1 / V_jj, theta_jj), off-diagonals kept.
inline PrecisionEstimate theta_tilde(const PrecisionEstimate& theta_hat,
                                     const Eigen::MatrixXd& v) {
    const int p = static_cast<int>(v.rows());
    if (theta_hat.theta.rows() != p)
        throw std::invalid_argument("theta_tilde: dimension mismatch");
    PrecisionEstimate est = theta_hat;
    est.variant = ThetaVariant::tilde;
    for (int j = 0; j < p; ++j) {
        if (!(v(j, j) > 0.0))
            throw std::invalid_argument("theta_tilde: V diagonal entries must be positive");
        est.theta(j, j) = std::max(1.0 / v(j, j), theta_hat.theta(j, j));
    }
    return est;
}

/// Default tuning grid: 20 points, log-spaced from 0.8 * max|V| down to
/// 1e-3 * max|V|.
inline std::vector<double> clime_lambda_grid(const Eigen::MatrixXd& v, int n_points = 20) {
    const double vmax = v.cwiseAbs().maxCoeff();
    if (!(vmax > 0.0)) throw std::invalid_argument("clime_lambda_grid: V is zero");
    const double hi = 0.8 * vmax;
    const double lo = 1e-3 * vmax;
    std::vector<double> grid(n_points);
    if (n_points == 1) {
        grid[0] = hi;
        return grid;
    }
    const double step = std::log(lo / hi) / (n_points - 1);
    for (int k = 0; k < n_points; ++k) grid[k] = hi * std::exp(step * k);
    return grid;
}

struct ClimeCvResult {
    double lambda_n = 0.0;
    std::vector<double> cv_curve; // fold-summed criterion per grid point
};

/// Cross-validation for the precision tuning parameter.  Per fold, theta is
/// fit on V computed from the training subjects and scored against the V of
/// the held-out subjects.  The criterion is the squared Frobenius norm of
/// V_test * Theta_train' - I by default; `trace_square` switches to
/// tr(diag(M^2)) for M = V_test * Theta_train' - I.
inline ClimeCvResult cv_clime(const SurvivalDataset& data, const Eigen::VectorXd& beta_hat,
                              const std::vector<double>& grid, int folds, std::uint64_t seed,
                              bool trace_square = false) {
    if (grid.empty()) throw std::invalid_argument("cv_clime: empty grid");
    const int p = data.p();
    const std::vector<int> fold = assign_folds(data, folds, seed);

    ClimeCvResult res;
    res.cv_curve.assign(grid.size(), 0.0);
    for (int k = 0; k < folds; ++k) {
        const SurvivalDataset train = subset_dataset(data, fold_members(fold, k, true));
        const SurvivalDataset test = subset_dataset(data, fold_members(fold, k, false));
        const Eigen::MatrixXd v_train = vhat(train, beta_hat);
        const Eigen::MatrixXd v_test = vhat(test, beta_hat);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const PrecisionEstimate est = clime(v_train, grid[g]);
            // Row j of theta solves the j-th column problem, so the matrix
            // acting on V from the right is theta'.
            const Eigen::MatrixXd m =
                v_test * est.theta.transpose() - Eigen::MatrixXd::Identity(p, p);
            if (trace_square)
                res.cv_curve[g] += (m * m).trace();
            else
                res.cv_curve[g] += m.squaredNorm();
        }
    }

    // Minimize; ties toward the larger lambda (grids are stored decreasing,
    // but resolve by value to be safe).
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (res.cv_curve[g] < res.cv_curve[best] - 1e-12 ||
            (std::fabs(res.cv_curve[g] - res.cv_curve[best]) <= 1e-12 &&
             grid[g] > grid[best]))
            best = g;
    }
    res.lambda_n = grid[best];
    return res;
}

} // namespace hdcox
