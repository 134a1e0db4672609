#pragma once

#include <Eigen/Core>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdcox/clime.hpp"
#include "hdcox/dataset.hpp"
#include "hdcox/normal.hpp"
#include "hdcox/partial_likelihood.hpp"

namespace hdcox {

/// One-step correction: b = beta_hat + Theta * score(beta_hat).
inline Eigen::VectorXd debias(const Eigen::VectorXd& beta_hat, const PrecisionEstimate& theta,
                              const Eigen::VectorXd& score_at_beta_hat) {
    if (theta.theta.rows() != beta_hat.size() || score_at_beta_hat.size() != beta_hat.size())
        throw std::invalid_argument("debias: dimension mismatch");
    return beta_hat + theta.theta * score_at_beta_hat;
}

struct DebiasedInference {
    Eigen::VectorXd b_hat;
    PrecisionEstimate theta_used;
    double level = 0.95; // 1 - q
    Eigen::VectorXd ci_lower, ci_upper;
    Eigen::VectorXd p_values;
    Eigen::VectorXd se;
    std::vector<std::string> warnings; // per coordinate, empty when clean
};

/// Two-sided p-value for H0: beta_j = 0 from the studentized statistic.
inline double p_value(double b_j, double theta_jj, int n) {
    if (!(theta_jj > 0.0)) throw std::invalid_argument("p_value: theta_jj must be positive");
    if (n < 1) throw std::invalid_argument("p_value: n must be >= 1");
    const double stat = std::sqrt(static_cast<double>(n)) * std::fabs(b_j) / std::sqrt(theta_jj);
    return 2.0 * (1.0 - normal_cdf(stat));
}

/// Per-coordinate intervals b_j +- z_{q/2} sqrt(theta_jj / n).  Nonpositive
/// diagonal entries are replaced by 1/V_jj when V is supplied (flagged per
/// coordinate), and rejected otherwise.
inline DebiasedInference confidence_intervals(const Eigen::VectorXd& b_hat,
                                              const PrecisionEstimate& theta, int n, double q,
                                              const Eigen::MatrixXd* v_for_guard = nullptr) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("confidence_intervals: q must lie in (0,1)");
    if (n < 1) throw std::invalid_argument("confidence_intervals: n must be >= 1");
    const int p = static_cast<int>(b_hat.size());
    if (theta.theta.rows() != p)
        throw std::invalid_argument("confidence_intervals: dimension mismatch");

    DebiasedInference inf;
    inf.b_hat = b_hat;
    inf.theta_used = theta;
    inf.level = 1.0 - q;
    inf.ci_lower.resize(p);
    inf.ci_upper.resize(p);
    inf.p_values.resize(p);
    inf.se.resize(p);
    inf.warnings.assign(p, "");

    const double z = normal_quantile(1.0 - q / 2.0);
    for (int j = 0; j < p; ++j) {
        double theta_jj = theta.theta(j, j);
        if (!(theta_jj > 0.0)) {
            if (v_for_guard && (*v_for_guard)(j, j) > 0.0) {
                theta_jj = 1.0 / (*v_for_guard)(j, j);
                inf.warnings[j] = "nonpositive precision diagonal; substituted 1/V_jj";
            } else {
                throw std::runtime_error("confidence_intervals: nonpositive diagonal at " +
                                         std::to_string(j) + " and no guard available");
            }
        }
        inf.se[j] = std::sqrt(theta_jj / n);
        inf.ci_lower[j] = b_hat[j] - z * inf.se[j];
        inf.ci_upper[j] = b_hat[j] + z * inf.se[j];
        inf.p_values[j] = p_value(b_hat[j], theta_jj, n);
    }
    return inf;
}

struct LinearComboResult {
    double estimate = 0.0;
    double ci_lower = 0.0, ci_upper = 0.0;
    double p = 1.0;
};

/// Inference for c'beta with ||c||_1 = 1.
inline LinearComboResult linear_combo_inference(const Eigen::VectorXd& c,
                                                const Eigen::VectorXd& b_hat,
                                                const PrecisionEstimate& theta, int n, double q) {
    if (std::fabs(c.lpNorm<1>() - 1.0) > 1e-10)
        throw std::invalid_argument("linear_combo_inference: c must have unit l1 norm");
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("linear_combo_inference: q must lie in (0,1)");
    const double quad = c.dot(theta.theta * c);
    if (!(quad > 0.0))
        throw std::runtime_error("linear_combo_inference: nonpositive quadratic form c'Theta c");
    LinearComboResult r;
    r.estimate = c.dot(b_hat);
    const double z = normal_quantile(1.0 - q / 2.0);
    const double half = z * std::sqrt(quad / n);
    r.ci_lower = r.estimate - half;
    r.ci_upper = r.estimate + half;
    r.p = 2.0 * (1.0 - normal_cdf(std::sqrt(static_cast<double>(n)) * std::fabs(r.estimate) /
                                  std::sqrt(quad)));
    return r;
}

struct MpleFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance; // (n * neg_hessian(beta))^{-1}
    Eigen::VectorXd se;
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton-Raphson maximum partial likelihood estimator.
inline MpleFit fit_mple(const SurvivalDataset& data, int max_iter = 100) {
    require_events(data);
    const int n = data.n();
    const int p = data.p();
    if (p >= n) throw std::invalid_argument("fit_mple: requires p < n");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double ll = partial_loglik(data, beta);
    MpleFit fit;

    int it = 0;
    for (; it < max_iter; ++it) {
        const Eigen::VectorXd g = score(data, beta);
        if (g.lpNorm<Eigen::Infinity>() < 1e-8) {
            fit.converged = true;
            break;
        }
        const Eigen::MatrixXd h = neg_hessian(data, beta);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
        if (!lu.isInvertible())
            throw std::runtime_error("fit_mple: singular negative Hessian");
        const Eigen::VectorXd dir = lu.solve(g);

        double step = 1.0;
        bool accepted = false;
        for (int half = 0; half < 30; ++half) {
            const Eigen::VectorXd cand = beta + step * dir;
            const double ll_new = partial_loglik(data, cand);
            if (ll_new >= ll - 1e-14) {
                beta = cand;
                ll = ll_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        if (beta.norm() > 1e3)
            throw std::runtime_error("fit_mple: separation (coefficients diverge)");
    }

    fit.beta = beta;
    fit.iterations = it;
    if (!fit.converged && score(data, beta).lpNorm<Eigen::Infinity>() < 1e-8)
        fit.converged = true;
    const Eigen::MatrixXd h = neg_hessian(data, beta);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(static_cast<double>(n) * h);
    if (!lu.isInvertible()) throw std::runtime_error("fit_mple: singular information matrix");
    fit.covariance = lu.inverse();
    fit.se = fit.covariance.diagonal().cwiseSqrt();
    return fit;
}

/// Classical Wald intervals and p-values for the MPLE, reusing the debiased
/// formulas with Theta = n * covariance.
inline DebiasedInference mple_inference(const MpleFit& fit, int n, double q) {
    PrecisionEstimate theta;
    theta.theta = static_cast<double>(n) * fit.covariance;
    theta.variant = ThetaVariant::hat;
    theta.column_status.assign(fit.beta.size(), ClimeColumnStatus::optimal);
    theta.l1_norms = theta.theta.cwiseAbs().rowwise().sum();
    return confidence_intervals(fit.beta, theta, n, q);
}

} // namespace hdcox
