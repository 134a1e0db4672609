#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hdcox/cv.hpp"
#include "hdcox/dataset.hpp"
#include "hdcox/partial_likelihood.hpp"

namespace hdcox {

/// A single penalized fit: minimizer of -loglik(beta) + lambda * ||beta||_1.
struct CoxFit {
    Eigen::VectorXd beta;
    double lambda = 0.0;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<int> active_set;

    /// Worst KKT residual at this fit: |score_j| - lambda off the active set,
    /// |score_j - lambda * sgn(beta_j)| on it.
    double kkt_residual(const SurvivalDataset& data) const {
        const Eigen::VectorXd g = score(data, beta);
        double worst = 0.0;
        for (int j = 0; j < beta.size(); ++j) {
            const double r = (beta[j] != 0.0)
                                 ? std::fabs(g[j] - lambda * (beta[j] > 0.0 ? 1.0 : -1.0))
                                 : std::max(0.0, std::fabs(g[j]) - lambda);
            worst = std::max(worst, r);
        }
        return worst;
    }
};

struct LassoPath {
    std::vector<double> lambdas;
    std::vector<CoxFit> fits;
    double lambda_max = 0.0;
};

/// Log-equally-spaced penalty grid from lambda_max = ||score(0)||_inf down to
/// ratio * lambda_max (ratio 0.01 when p >= n, 1e-4 otherwise).
inline std::vector<double> lambda_grid(const SurvivalDataset& data, int n_lambda = 100) {
    require_events(data);
    if (n_lambda < 1) throw std::invalid_argument("lambda_grid: n_lambda must be >= 1");
    const double lmax = score(data, Eigen::VectorXd::Zero(data.p())).lpNorm<Eigen::Infinity>();
    if (!(lmax > 0.0))
        throw std::invalid_argument("lambda_grid: degenerate data, score at zero vanishes");
    std::vector<double> grid(n_lambda);
    if (n_lambda == 1) {
        grid[0] = lmax;
        return grid;
    }
    const double ratio = (data.p() >= data.n()) ? 1e-2 : 1e-4;
    const double step = std::log(ratio) / (n_lambda - 1);
    for (int k = 0; k < n_lambda; ++k) grid[k] = lmax * std::exp(step * k);
    return grid;
}

/// Proximal-Newton solver: quadratic model from the exact score and a
/// working-set restricted Hessian, inner cyclic coordinate descent with
/// soft-thresholding, step-halving on the true objective.
inline CoxFit fit_lasso(const SurvivalDataset& data, double lambda,
                        std::optional<Eigen::VectorXd> warm_start = std::nullopt) {
    require_events(data);
    if (!(lambda >= 0.0)) throw std::invalid_argument("fit_lasso: lambda must be >= 0");
    const int p = data.p();

    constexpr int max_outer = 100;
    constexpr int max_halvings = 30;
    constexpr double inner_tol = 1e-8;
    constexpr double outer_tol = 1e-7;
    constexpr double kkt_tol = 1e-6;

    Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    if (beta.size() != p) throw std::invalid_argument("fit_lasso: warm start dimension mismatch");

    auto objective = [&](const Eigen::VectorXd& b) {
        return -partial_loglik(data, b) + lambda * b.lpNorm<1>();
    };

    CoxFit fit;
    fit.lambda = lambda;
    double obj = objective(beta);
    bool small_obj_change = false;

    int outer = 0;
    for (; outer < max_outer; ++outer) {
        const Eigen::VectorXd g = -score(data, beta); // gradient of -loglik

        // Working set: current support plus KKT violators.
        std::vector<int> ws;
        double kkt = 0.0;
        for (int j = 0; j < p; ++j) {
            const bool active = beta[j] != 0.0;
            const double r = active ? std::fabs(-g[j] - lambda * (beta[j] > 0.0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::fabs(g[j]) - lambda);
            kkt = std::max(kkt, r);
            if (active || std::fabs(g[j]) > lambda) ws.push_back(j);
        }
        if (kkt <= 0.5 * kkt_tol && (small_obj_change || ws.empty())) {
            fit.converged = true;
            break;
        }
        if (ws.empty()) {
            // beta = 0 satisfies the subgradient conditions exactly.
            fit.converged = true;
            break;
        }

        Eigen::MatrixXd h = neg_hessian_sub(data, beta, ws);
        const int q = static_cast<int>(ws.size());
        for (int c = 0; c < q; ++c) h(c, c) = std::max(h(c, c), 1e-12);

        // Coordinate descent on the quadratic model over the working set.
        Eigen::VectorXd bw0(q), bw(q), gw(q);
        for (int c = 0; c < q; ++c) {
            bw0[c] = beta[ws[c]];
            gw[c] = g[ws[c]];
        }
        bw = bw0;
        Eigen::VectorXd u = Eigen::VectorXd::Zero(q); // H * (bw - bw0)
        for (int sweep = 0; sweep < 1000; ++sweep) {
            double max_change = 0.0;
            for (int c = 0; c < q; ++c) {
                const double grad_c = gw[c] + u[c];
                const double z = bw[c] - grad_c / h(c, c);
                const double thr = lambda / h(c, c);
                const double nv = (z > thr) ? z - thr : (z < -thr ? z + thr : 0.0);
                const double d = nv - bw[c];
                if (d != 0.0) {
                    u += h.col(c) * d;
                    bw[c] = nv;
                    max_change = std::max(max_change, std::fabs(d));
                }
            }
            if (max_change < inner_tol) break;
        }

        // Step-halving on the true objective along the proximal-Newton step.
        const Eigen::VectorXd dir = bw - bw0;
        double step = 1.0;
        double obj_new = obj;
        Eigen::VectorXd beta_new = beta;
        for (int half = 0; half <= max_halvings; ++half) {
            for (int c = 0; c < q; ++c) beta_new[ws[c]] = bw0[c] + step * dir[c];
            obj_new = objective(beta_new);
            if (obj_new <= obj + 1e-12) break;
            step *= 0.5;
            if (half == max_halvings) {
                beta_new = beta; // no acceptable step; keep the iterate
                obj_new = obj;
            }
        }
        small_obj_change = std::fabs(obj - obj_new) < outer_tol;
        beta = beta_new;
        obj = obj_new;
    }

    fit.beta = beta;
    fit.objective = obj;
    fit.iterations = outer;
    for (int j = 0; j < p; ++j)
        if (beta[j] != 0.0) fit.active_set.push_back(j);
    return fit;
}

/// Warm-started fits along a decreasing penalty sequence.
inline LassoPath fit_path(const SurvivalDataset& data, const std::vector<double>& lambdas) {
    for (std::size_t k = 1; k < lambdas.size(); ++k)
        if (!(lambdas[k] < lambdas[k - 1]))
            throw std::invalid_argument("fit_path: lambdas must be decreasing");
    LassoPath path;
    path.lambdas = lambdas;
    path.lambda_max = lambdas.empty() ? 0.0 : lambdas.front();
    std::optional<Eigen::VectorXd> warm;
    for (double lam : lambdas) {
        path.fits.push_back(fit_lasso(data, lam, warm));
        warm = path.fits.back().beta;
    }
    return path;
}

struct LassoCvResult {
    double lambda_cv = 0.0;
    std::vector<double> cv_curve; // cross-validated partial likelihood per grid point
    std::vector<double> lambdas;
};

/// Verweij and Van Houwelingen cross-validated partial likelihood: per fold,
/// n_full * loglik(all subjects) - n_train * loglik(training subjects), both
/// at the training fit.  The maximizing grid member is selected, ties toward
/// the larger penalty.
inline LassoCvResult cv_lasso(const SurvivalDataset& data, int folds = 10,
                              std::uint64_t seed = 0, int n_lambda = 100) {
    const std::vector<double> grid = lambda_grid(data, n_lambda);
    const std::vector<int> fold = assign_folds(data, folds, seed);

    LassoCvResult res;
    res.lambdas = grid;
    res.cv_curve.assign(grid.size(), 0.0);
    for (int k = 0; k < folds; ++k) {
        const SurvivalDataset train = subset_dataset(data, fold_members(fold, k, true));
        const LassoPath path = fit_path(train, grid);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const Eigen::VectorXd& b = path.fits[g].beta;
            res.cv_curve[g] += data.n() * partial_loglik(data, b) -
                               train.n() * partial_loglik(train, b);
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
        if (res.cv_curve[g] > res.cv_curve[best] + 1e-12) best = g;
        // ties keep the earlier (larger) lambda
    }
    res.lambda_cv = grid[best];
    return res;
}

} // namespace hdcox
