#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdcox/dataset.hpp"

namespace hdcox {

/// Risk-set weights at a fixed evaluation time.  The normalized weights use
/// the 0/0 := 0 convention when nobody is at risk.
struct RiskWeights {
    Eigen::VectorXd beta;
    Eigen::VectorXd unnormalized; // Y_i(t) * exp(beta' Z_i)
    Eigen::VectorXd normalized;
    double at_time = 0.0;
};

inline RiskWeights risk_weights(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                                double t) {
    require_finite(beta);
    if (!(t >= 0.0)) throw std::invalid_argument("risk_weights: t must be >= 0");
    RiskWeights w;
    w.beta = beta;
    w.at_time = t;
    const int n = data.n();
    w.unnormalized.resize(n);
    const Eigen::VectorXd eta = data.covariates * beta;
    double etamax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        if (data.times[i] >= t && eta[i] > etamax) etamax = eta[i];
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        w.unnormalized[i] = (data.times[i] >= t) ? std::exp(eta[i]) : 0.0;
        total += (data.times[i] >= t) ? std::exp(eta[i] - etamax) : 0.0;
    }
    w.normalized.resize(n);
    if (total > 0.0) {
        for (int i = 0; i < n; ++i)
            w.normalized[i] = (data.times[i] >= t) ? std::exp(eta[i] - etamax) / total : 0.0;
    } else {
        w.normalized.setZero();
    }
    return w;
}

/// Weighted average of covariate rows over the risk set at time t; the zero
/// vector when the risk set is empty.
inline Eigen::VectorXd weighted_mean(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                                     double t) {
    const RiskWeights w = risk_weights(data, beta, t);
    return data.covariates.transpose() * w.normalized;
}

namespace detail {

// Shared reverse cumulative pass over times sorted descending.  For each
// event, hands the callback the subject index together with the risk-set
// aggregates S0 = sum exp(eta - shift), S1 = sum exp(eta - shift) Z (when
// requested).  Ties share the same risk set (Breslow convention): all
// subjects with T_j = t enter the aggregates before any event at t is
// processed.
template <class EventFn>
inline void reverse_risk_pass(const SurvivalDataset& data, const Eigen::VectorXd& eta,
                              double shift, bool want_s1, EventFn&& on_event) {
    const int n = data.n();
    const int p = data.p();
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(want_s1 ? p : 0);

    int k = n - 1;
    std::vector<int> tied;
    while (k >= 0) {
        const double t = data.times[data.sort_index[k]];
        tied.clear();
        while (k >= 0 && data.times[data.sort_index[k]] == t) {
            tied.push_back(data.sort_index[k]);
            --k;
        }
        for (int i : tied) {
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            if (want_s1) s1 += w * data.covariates.row(i).transpose();
        }
        for (int i : tied) {
            if (data.events[i]) on_event(i, s0, s1);
        }
    }
}

} // namespace detail

/// Log-partial likelihood divided by n.
inline double partial_loglik(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
    require_events(data);
    require_finite(beta);
    if (beta.size() != data.p()) throw std::invalid_argument("partial_loglik: dimension mismatch");
    const Eigen::VectorXd eta = data.covariates * beta;
    const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;
    double ll = 0.0;
    detail::reverse_risk_pass(data, eta, shift, false,
                              [&](int i, double s0, const Eigen::VectorXd&) {
                                  ll += eta[i] - (std::log(s0) + shift);
                              });
    return ll / data.n();
}

/// Gradient of the log-partial likelihood.
inline Eigen::VectorXd score(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
    require_events(data);
    require_finite(beta);
    if (beta.size() != data.p()) throw std::invalid_argument("score: dimension mismatch");
    const Eigen::VectorXd eta = data.covariates * beta;
    const double shift = eta.maxCoeff();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(data.p());
    detail::reverse_risk_pass(data, eta, shift, true,
                              [&](int i, double s0, const Eigen::VectorXd& s1) {
                                  g += data.covariates.row(i).transpose() - s1 / s0;
                              });
    return g / data.n();
}

/// Negative Hessian of the log-partial likelihood, optionally restricted to a
/// subset of coordinates (used by the penalized solver's working sets).
inline Eigen::MatrixXd neg_hessian_sub(const SurvivalDataset& data, const Eigen::VectorXd& beta,
                                       const std::vector<int>& coords) {
    require_events(data);
    require_finite(beta);
    if (beta.size() != data.p()) throw std::invalid_argument("neg_hessian: dimension mismatch");
    const int n = data.n();
    const int q = static_cast<int>(coords.size());
    Eigen::MatrixXd zs(n, q);
    for (int c = 0; c < q; ++c) zs.col(c) = data.covariates.col(coords[c]);

    const Eigen::VectorXd eta = data.covariates * beta;
    const double shift = eta.maxCoeff();

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(q, q);
    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(q, q);

    int k = n - 1;
    std::vector<int> tied;
    while (k >= 0) {
        const double t = data.times[data.sort_index[k]];
        tied.clear();
        while (k >= 0 && data.times[data.sort_index[k]] == t) {
            tied.push_back(data.sort_index[k]);
            --k;
        }
        for (int i : tied) {
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            s1 += w * zs.row(i).transpose();
            s2.selfadjointView<Eigen::Lower>().rankUpdate(zs.row(i).transpose(), w);
        }
        for (int i : tied) {
            if (!data.events[i]) continue;
            const Eigen::VectorXd zbar = s1 / s0;
            h += s2 / s0;
            h.selfadjointView<Eigen::Lower>().rankUpdate(zbar, -1.0);
        }
    }
    h = h.selfadjointView<Eigen::Lower>();
    return h / n;
}

inline Eigen::MatrixXd neg_hessian(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
    std::vector<int> all(data.p());
    std::iota(all.begin(), all.end(), 0);
    return neg_hessian_sub(data, beta, all);
}

/// V-hat: one rank-one term per event, centered at the risk-set weighted mean.
inline Eigen::MatrixXd vhat(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
    require_events(data);
    require_finite(beta);
    const int p = data.p();
    const Eigen::VectorXd eta = data.covariates * beta;
    const double shift = eta.maxCoeff();
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(p, p);
    detail::reverse_risk_pass(data, eta, shift, true,
                              [&](int i, double s0, const Eigen::VectorXd& s1) {
                                  const Eigen::VectorXd d =
                                      data.covariates.row(i).transpose() - s1 / s0;
                                  v.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
                              });
    v = v.selfadjointView<Eigen::Lower>();
    return v / data.n();
}

/// Nondecreasing step function with jumps at event times.
struct StepFunction {
    std::vector<double> knots;  // distinct event times, ascending
    std::vector<double> values; // cumulative value at each knot

    double operator()(double t) const {
        double v = 0.0;
        for (std::size_t k = 0; k < knots.size(); ++k) {
            if (knots[k] <= t) v = values[k];
            else break;
        }
        return v;
    }
};

/// Breslow estimator of the cumulative baseline hazard.
inline StepFunction breslow(const SurvivalDataset& data, const Eigen::VectorXd& beta) {
    require_events(data);
    require_finite(beta);
    const Eigen::VectorXd eta = data.covariates * beta;
    const double shift = eta.maxCoeff();

    // Collect per distinct event time: number of events d and risk-set sum.
    StepFunction f;
    std::vector<double> jump_times;
    std::vector<double> jumps;
    detail::reverse_risk_pass(data, eta, shift, false,
                              [&](int i, double s0, const Eigen::VectorXd&) {
                                  jump_times.push_back(data.times[i]);
                                  jumps.push_back(1.0 / (s0 * std::exp(shift)));
                              });
    // The pass runs descending in time; accumulate ascending, merging ties.
    double cum = 0.0;
    for (std::size_t k = jump_times.size(); k-- > 0;) {
        cum += jumps[k];
        if (!f.knots.empty() && f.knots.back() == jump_times[k]) {
            f.values.back() = cum;
        } else {
            f.knots.push_back(jump_times[k]);
            f.values.push_back(cum);
        }
    }
    return f;
}

struct MatrixNorms {
    double entrywise_max;
    double op_1;   // max column l1 sum
    double op_inf; // max row l1 sum
};

inline MatrixNorms matrix_norms(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("matrix_norms: matrix must be square");
    MatrixNorms r{};
    r.entrywise_max = a.cwiseAbs().maxCoeff();
    r.op_1 = a.cwiseAbs().colwise().sum().maxCoeff();
    r.op_inf = a.cwiseAbs().rowwise().sum().maxCoeff();
    return r;
}

} // namespace hdcox
