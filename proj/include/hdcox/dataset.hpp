#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace hdcox {

/// Right-censored survival data with time-independent covariates.
///
/// Holds the observed triples (time, event indicator, covariate row) together
/// with a precomputed permutation sorting times ascending.  Ties in time are
/// broken by original subject index so that every downstream computation is
/// deterministic.
struct SurvivalDataset {
    Eigen::VectorXd times;       // observed times, length n
    std::vector<bool> events;    // true = failure observed
    Eigen::MatrixXd covariates;  // n x p
    std::vector<int> sort_index; // permutation ordering times ascending

    int n() const { return static_cast<int>(times.size()); }
    int p() const { return static_cast<int>(covariates.cols()); }

    int num_events() const {
        return static_cast<int>(std::count(events.begin(), events.end(), true));
    }
};

inline SurvivalDataset make_dataset(Eigen::VectorXd times,
                                    std::vector<bool> events,
                                    Eigen::MatrixXd covariates) {
    const auto n = times.size();
    if (static_cast<Eigen::Index>(events.size()) != n || covariates.rows() != n)
        throw std::invalid_argument("make_dataset: times, events and covariates disagree on n");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw std::invalid_argument("make_dataset: times must be finite and >= 0");
    }
    if (!covariates.allFinite())
        throw std::invalid_argument("make_dataset: covariates must be finite");

    SurvivalDataset data;
    data.times = std::move(times);
    data.events = std::move(events);
    data.covariates = std::move(covariates);
    data.sort_index.resize(static_cast<std::size_t>(n));
    std::iota(data.sort_index.begin(), data.sort_index.end(), 0);
    std::stable_sort(data.sort_index.begin(), data.sort_index.end(),
                     [&](int a, int b) { return data.times[a] < data.times[b]; });
    return data;
}

/// Subset of subjects (rows), preserving relative order.
inline SurvivalDataset subset_dataset(const SurvivalDataset& data, const std::vector<int>& rows) {
    Eigen::VectorXd t(rows.size());
    std::vector<bool> ev(rows.size());
    Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), data.p());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const int i = rows[k];
        if (i < 0 || i >= data.n()) throw std::invalid_argument("subset_dataset: row out of range");
        t[static_cast<Eigen::Index>(k)] = data.times[i];
        ev[k] = data.events[i];
        z.row(static_cast<Eigen::Index>(k)) = data.covariates.row(i);
    }
    return make_dataset(std::move(t), std::move(ev), std::move(z));
}

inline void require_events(const SurvivalDataset& data) {
    if (data.num_events() == 0)
        throw std::invalid_argument("dataset has no observed events");
}

inline void require_finite(const Eigen::VectorXd& beta) {
    if (!beta.allFinite())
        throw std::invalid_argument("beta must be finite");
}

} // namespace hdcox
