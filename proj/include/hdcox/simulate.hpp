#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdcox/dataset.hpp"
#include "hdcox/rng.hpp"

namespace hdcox {

enum class SigmaKind { identity, structured };

struct CovarianceSpec {
    SigmaKind kind = SigmaKind::identity;
    std::vector<int> signal_set; // indices with nonzero true coefficient
};

/// Fully parameterized generator configuration: Gaussian covariates, unit
/// baseline hazard, fixed administrative censoring at censor_time.
struct SimSetting {
    int id = 0;
    int n = 0;
    int p = 0;
    Eigen::VectorXd beta0;
    SigmaKind sigma_kind = SigmaKind::identity;
    double censor_time = 0.0;
    double expected_censor_rate = 0.0;

    std::vector<int> signal_set() const {
        std::vector<int> s;
        for (int j = 0; j < beta0.size(); ++j)
            if (beta0[j] != 0.0) s.push_back(j);
        return s;
    }
};

/// The sixteen stock settings, each materialized in full.
inline SimSetting sim_setting(int id) {
    auto beta_const = [](int p, std::initializer_list<double> head) {
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        int j = 0;
        for (double v : head) b[j++] = v;
        return b;
    };
    SimSetting s;
    s.id = id;
    s.n = 1000;
    switch (id) {
        case 1: s.p = 10; s.beta0 = beta_const(10, {1, 1, 1}); s.sigma_kind = SigmaKind::identity; s.censor_time = 5.0; s.expected_censor_rate = 0.15; break;
        case 2: s.p = 10; s.beta0 = beta_const(10, {1, 1, 1}); s.sigma_kind = SigmaKind::identity; s.censor_time = 2.0; s.expected_censor_rate = 0.30; break;
        case 3: s.p = 10; s.beta0 = beta_const(10, {1.2, 1, 0.8}); s.sigma_kind = SigmaKind::identity; s.censor_time = 5.0; s.expected_censor_rate = 0.15; break;
        case 4: s.p = 10; s.beta0 = beta_const(10, {1.2, 1, 0.8}); s.sigma_kind = SigmaKind::identity; s.censor_time = 2.0; s.expected_censor_rate = 0.30; break;
        case 5: s.p = 10; s.beta0 = beta_const(10, {1, 1, 1}); s.sigma_kind = SigmaKind::structured; s.censor_time = 10.0; s.expected_censor_rate = 0.15; break;
        case 6: s.p = 10; s.beta0 = beta_const(10, {1, 1, 1}); s.sigma_kind = SigmaKind::structured; s.censor_time = 2.5; s.expected_censor_rate = 0.30; break;
        case 7: s.p = 10; s.beta0 = beta_const(10, {1.2, 1, 0.8}); s.sigma_kind = SigmaKind::structured; s.censor_time = 10.0; s.expected_censor_rate = 0.15; break;
        case 8: s.p = 10; s.beta0 = beta_const(10, {1.2, 1, 0.8}); s.sigma_kind = SigmaKind::structured; s.censor_time = 2.5; s.expected_censor_rate = 0.30; break;
        case 9: s.p = 300; s.beta0 = beta_const(300, {1, 1, 1, 1, 1, 1}); s.sigma_kind = SigmaKind::identity; s.censor_time = 9.0; s.expected_censor_rate = 0.15; break;
        case 10: s.p = 300; s.beta0 = beta_const(300, {1, 1, 1, 1, 1, 1}); s.sigma_kind = SigmaKind::identity; s.censor_time = 2.5; s.expected_censor_rate = 0.30; break;
        case 11: s.p = 300; s.beta0 = beta_const(300, {0.5, 0.7, 0.9, 1.1, 1.3, 1.5}); s.sigma_kind = SigmaKind::identity; s.censor_time = 10.0; s.expected_censor_rate = 0.15; break;
        case 12: s.p = 300; s.beta0 = beta_const(300, {0.5, 0.7, 0.9, 1.1, 1.3, 1.5}); s.sigma_kind = SigmaKind::identity; s.censor_time = 3.0; s.expected_censor_rate = 0.30; break;
        case 13: s.p = 300; s.beta0 = beta_const(300, {1, 1, 1, 1, 1, 1}); s.sigma_kind = SigmaKind::structured; s.censor_time = 100.0; s.expected_censor_rate = 0.15; break;
        case 14: s.p = 300; s.beta0 = beta_const(300, {1, 1, 1, 1, 1, 1}); s.sigma_kind = SigmaKind::structured; s.censor_time = 7.0; s.expected_censor_rate = 0.30; break;
        case 15: s.p = 300; s.beta0 = beta_const(300, {0.5, 0.7, 0.9, 1.1, 1.3, 1.5}); s.sigma_kind = SigmaKind::structured; s.censor_time = 100.0; s.expected_censor_rate = 0.15; break;
        case 16: s.p = 300; s.beta0 = beta_const(300, {0.5, 0.7, 0.9, 1.1, 1.3, 1.5}); s.sigma_kind = SigmaKind::structured; s.censor_time = 7.0; s.expected_censor_rate = 0.30; break;
        default: throw std::invalid_argument("sim_setting: id must be in 1..16");
    }
    return s;
}

/// Covariate covariance: identity, or the structured case with unit diagonal,
/// 0.5 between two signal coordinates, 0 between a signal and a noise
/// coordinate, and 0.5^|i-j| between two noise coordinates.
inline Eigen::MatrixXd build_sigma_z(const CovarianceSpec& spec, int p) {
    std::vector<bool> is_signal(p, false);
    for (int j : spec.signal_set) {
        if (j < 0 || j >= p) throw std::invalid_argument("build_sigma_z: signal index out of range");
        is_signal[j] = true;
    }
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(p, p);
    if (spec.kind == SigmaKind::identity) return sigma;
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            if (i == j) continue;
            if (is_signal[i] && is_signal[j]) sigma(i, j) = 0.5;
            else if (!is_signal[i] && !is_signal[j]) sigma(i, j) = std::pow(0.5, std::abs(i - j));
            else sigma(i, j) = 0.0;
        }
    }
    return sigma;
}

/// Rows are i.i.d. Gaussian draws via the Cholesky factor applied to
/// inverse-CDF standard normals, so the stream consumption is exactly n*p.
inline Eigen::MatrixXd sample_covariates(const Eigen::MatrixXd& sigma_z, int n, CounterRng& rng) {
    const int p = static_cast<int>(sigma_z.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_z);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("sample_covariates: covariance not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::MatrixXd z(n, p);
    Eigen::VectorXd g(p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) g[j] = rng.next_normal();
        z.row(i) = (chol * g).transpose();
    }
    return z;
}

/// Failure times under the proportional hazards model with unit baseline
/// hazard: exponential with rate exp(beta0' z_i), by inverse CDF.
inline Eigen::VectorXd sample_survival(const Eigen::MatrixXd& z, const Eigen::VectorXd& beta0,
                                       CounterRng& rng) {
    if (z.cols() != beta0.size()) throw std::invalid_argument("sample_survival: dimension mismatch");
    const Eigen::VectorXd eta = z * beta0;
    Eigen::VectorXd t(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        const double u = rng.next_uniform();
        t[i] = -std::log1p(-u) / std::exp(eta[i]);
    }
    return t;
}

/// Administrative censoring at a fixed time.
inline std::pair<Eigen::VectorXd, std::vector<bool>> apply_censoring(
    const Eigen::VectorXd& failure_times, double censor_time) {
    if (!(censor_time >= 0.0))
        throw std::invalid_argument("apply_censoring: censor time must be >= 0");
    Eigen::VectorXd t(failure_times.size());
    std::vector<bool> ev(failure_times.size());
    for (Eigen::Index i = 0; i < failure_times.size(); ++i) {
        ev[i] = failure_times[i] <= censor_time;
        t[i] = ev[i] ? failure_times[i] : censor_time;
    }
    return {t, ev};
}

/// Full replication dataset, a pure function of (master_seed, setting id,
/// replication index).
inline SurvivalDataset generate(const SimSetting& setting, int replication,
                                std::uint64_t master_seed) {
    CounterRng rng(CounterRng::stream_key(master_seed, static_cast<std::uint64_t>(setting.id),
                                          static_cast<std::uint64_t>(replication)));
    CovarianceSpec spec{setting.sigma_kind, setting.signal_set()};
    const Eigen::MatrixXd sigma = build_sigma_z(spec, setting.p);
    const Eigen::MatrixXd z = sample_covariates(sigma, setting.n, rng);
    const Eigen::VectorXd failure = sample_survival(z, setting.beta0, rng);
    auto [times, events] = apply_censoring(failure, setting.censor_time);
    return make_dataset(std::move(times), std::move(events), z);
}

} // namespace hdcox
