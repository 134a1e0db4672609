#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hdcox/clime.hpp"
#include "hdcox/dataset.hpp"
#include "hdcox/inference.hpp"
#include "hdcox/lasso.hpp"
#include "hdcox/partial_likelihood.hpp"
#include "hdcox/simulate.hpp"

namespace hdcox {

struct PipelineOptions {
    int lasso_folds = 10;
    int n_lambda = 100;
    int clime_folds = 10;
    int clime_grid = 20;
    double fixed_lambda = -1.0;   // >= 0 skips lasso cross-validation
    double fixed_lambda_n = -1.0; // >= 0 skips clime cross-validation
    double level_q = 0.05;
    bool clime_trace_square = false; // alternative CV criterion reading
};

/// Full inference pipeline on one dataset: penalized fit, V-hat, precision
/// estimate (both hat and tilde variants), debiased estimator, intervals.
struct InferenceRun {
    double lambda = 0.0;
    double lambda_n = 0.0;
    CoxFit fit;
    Eigen::MatrixXd v;
    PrecisionEstimate theta_hat;
    PrecisionEstimate theta_tilde_est;
    DebiasedInference hat;
    DebiasedInference tilde;
};

inline InferenceRun run_inference_pipeline(const SurvivalDataset& data,
                                           const PipelineOptions& opts, std::uint64_t seed) {
    InferenceRun run;
    run.lambda = opts.fixed_lambda >= 0.0
                     ? opts.fixed_lambda
                     : cv_lasso(data, opts.lasso_folds, seed ^ 0x1a550ull, opts.n_lambda).lambda_cv;
    run.fit = fit_lasso(data, run.lambda);
    run.v = vhat(data, run.fit.beta);
    run.lambda_n = opts.fixed_lambda_n >= 0.0
                       ? opts.fixed_lambda_n
                       : cv_clime(data, run.fit.beta, clime_lambda_grid(run.v, opts.clime_grid),
                                  opts.clime_folds, seed ^ 0xc11aeull, opts.clime_trace_square)
                             .lambda_n;
    run.theta_hat = clime(run.v, run.lambda_n);
    run.theta_tilde_est = theta_tilde(run.theta_hat, run.v);
    const Eigen::VectorXd s = score(data, run.fit.beta);
    const Eigen::VectorXd b_hat = debias(run.fit.beta, run.theta_hat, s);
    const Eigen::VectorXd b_tilde = debias(run.fit.beta, run.theta_tilde_est, s);
    run.hat = confidence_intervals(b_hat, run.theta_hat, data.n(), opts.level_q, &run.v);
    run.tilde = confidence_intervals(b_tilde, run.theta_tilde_est, data.n(), opts.level_q, &run.v);
    return run;
}

struct ReplicationRecord {
    int replication = -1;
    bool ok = false;
    std::string error;
    double lambda = 0.0;
    double lambda_n = 0.0;
    Eigen::VectorXd beta_hat;
    DebiasedInference hat;
    DebiasedInference tilde;
};

/// Aggregated signal/noise statistics over replications, one row per
/// (setting, group, theta variant).
struct ReplicationSummary {
    int setting_id = 0;
    std::string group;   // "signal" or "noise"
    std::string variant; // "hat" or "tilde"
    int replication_count = 0;
    double mean_bias_lasso = 0.0, se_bias_lasso = 0.0;
    double mean_bias_debiased = 0.0, se_bias_debiased = 0.0;
    double empirical_coverage = 0.0, se_coverage = 0.0;
    double mean_width = 0.0, se_width = 0.0;
    double mean_p_value = 0.0, se_p_value = 0.0;
};

struct TuningRecord {
    double mean_lambda = 0.0, median_lambda = 0.0;
    double mean_lambda_n = 0.0, median_lambda_n = 0.0;
};

struct SettingResult {
    SimSetting setting;
    std::vector<ReplicationRecord> records; // indexed by replication
    std::vector<ReplicationSummary> summaries;
    TuningRecord tuning;
    int failures = 0;
};

namespace detail {

inline double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v) {
    const std::size_t r = v.size();
    if (r < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(r - 1) / static_cast<double>(r));
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t r = v.size();
    return (r % 2 == 1) ? v[r / 2] : 0.5 * (v[r / 2 - 1] + v[r / 2]);
}

inline ReplicationSummary summarize_group(const SimSetting& setting,
                                          const std::vector<const ReplicationRecord*>& recs,
                                          const std::vector<int>& coords, const char* group,
                                          const char* variant) {
    ReplicationSummary s;
    s.setting_id = setting.id;
    s.group = group;
    s.variant = variant;
    s.replication_count = static_cast<int>(recs.size());
    if (recs.empty() || coords.empty()) return s;

    const bool use_tilde = std::string(variant) == "tilde";
    std::vector<double> bias_l, bias_d, width, pval, cover;
    std::vector<long> cover_count(coords.size(), 0); // integer per-coordinate counts
    for (const ReplicationRecord* r : recs) {
        const DebiasedInference& inf = use_tilde ? r->tilde : r->hat;
        double bl = 0.0, bd = 0.0, w = 0.0, pv = 0.0, cv = 0.0;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            const int j = coords[k];
            bl += r->beta_hat[j] - setting.beta0[j];
            bd += inf.b_hat[j] - setting.beta0[j];
            w += inf.ci_upper[j] - inf.ci_lower[j];
            pv += inf.p_values[j];
            const bool in = inf.ci_lower[j] <= setting.beta0[j] &&
                            setting.beta0[j] <= inf.ci_upper[j];
            if (in) {
                cv += 1.0;
                ++cover_count[k];
            }
        }
        const double m = static_cast<double>(coords.size());
        bias_l.push_back(bl / m);
        bias_d.push_back(bd / m);
        width.push_back(w / m);
        pval.push_back(pv / m);
        cover.push_back(cv / m);
    }
    s.mean_bias_lasso = mean_of(bias_l);
    s.se_bias_lasso = se_of(bias_l);
    s.mean_bias_debiased = mean_of(bias_d);
    s.se_bias_debiased = se_of(bias_d);
    s.mean_width = mean_of(width);
    s.se_width = se_of(width);
    s.mean_p_value = mean_of(pval);
    s.se_p_value = se_of(pval);
    // Coverage from the integer per-coordinate counts, averaged across the group.
    double ec = 0.0;
    for (long c : cover_count)
        ec += static_cast<double>(c) / static_cast<double>(recs.size());
    s.empirical_coverage = ec / static_cast<double>(coords.size());
    s.se_coverage = se_of(cover);
    return s;
}

} // namespace detail

/// Runs all replications of one setting.  Replications execute on a worker
/// pool but every record is keyed by its replication index and reduced in
/// index order, so results do not depend on the worker count.
inline SettingResult simulate_setting(const SimSetting& setting, int replications,
                                      std::uint64_t master_seed, const PipelineOptions& opts,
                                      int workers = 1) {
    if (replications < 1) throw std::invalid_argument("simulate_setting: replications >= 1");
    SettingResult result;
    result.setting = setting;
    result.records.resize(replications);

    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= replications) return;
            ReplicationRecord& rec = result.records[r];
            rec.replication = r;
            try {
                const SurvivalDataset data = generate(setting, r, master_seed);
                const std::uint64_t seed =
                    CounterRng::stream_key(master_seed, static_cast<std::uint64_t>(setting.id),
                                           0x700000000ull + static_cast<std::uint64_t>(r));
                const InferenceRun run = run_inference_pipeline(data, opts, seed);
                rec.lambda = run.lambda;
                rec.lambda_n = run.lambda_n;
                rec.beta_hat = run.fit.beta;
                rec.hat = run.hat;
                rec.tilde = run.tilde;
                rec.ok = true;
            } catch (const std::exception& e) {
                rec.ok = false;
                rec.error = e.what();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<const ReplicationRecord*> ok;
    std::vector<double> lambdas, lambda_ns;
    for (const auto& rec : result.records) {
        if (rec.ok) {
            ok.push_back(&rec);
            lambdas.push_back(rec.lambda);
            lambda_ns.push_back(rec.lambda_n);
        } else {
            ++result.failures;
        }
    }
    if (result.failures * 20 > replications)
        throw std::runtime_error("simulate_setting: more than 5% of replications failed (" +
                                 std::to_string(result.failures) + "/" +
                                 std::to_string(replications) + "), first error: " +
                                 [&] {
                                     for (const auto& rec : result.records)
                                         if (!rec.ok) return rec.error;
                                     return std::string();
                                 }());

    const std::vector<int> signal = setting.signal_set();
    std::vector<int> noise;
    for (int j = 0; j < setting.p; ++j)
        if (setting.beta0[j] == 0.0) noise.push_back(j);

    for (const char* variant : {"hat", "tilde"}) {
        result.summaries.push_back(
            detail::summarize_group(setting, ok, signal, "signal", variant));
        result.summaries.push_back(detail::summarize_group(setting, ok, noise, "noise", variant));
    }
    result.tuning.mean_lambda = detail::mean_of(lambdas);
    result.tuning.median_lambda = detail::median_of(lambdas);
    result.tuning.mean_lambda_n = detail::mean_of(lambda_ns);
    result.tuning.median_lambda_n = detail::median_of(lambda_ns);
    return result;
}

struct LifespanVariable {
    int index = 0;
    double active_fraction = 0.0; // share of path positions with nonzero coefficient
    bool active_early = false;    // active within the first 25 path positions
    bool significant = false;     // debiased p-value below the level
    double p_value = 1.0;
};

struct LifespanReport {
    std::vector<LifespanVariable> variables;
    double median_significant = 0.0;
    double median_insignificant = 0.0;
    double lambda = 0.0;
    double lambda_n = 0.0;
};

inline LifespanReport lifespan_report(const SurvivalDataset& data, const PipelineOptions& opts,
                                      std::uint64_t seed, int n_lambda = 100,
                                      double significance = 0.05) {
    const std::vector<double> grid = lambda_grid(data, n_lambda);
    const LassoPath path = fit_path(data, grid);
    const InferenceRun run = run_inference_pipeline(data, opts, seed);

    LifespanReport rep;
    rep.lambda = run.lambda;
    rep.lambda_n = run.lambda_n;
    const int early = std::min<int>(25, n_lambda);
    std::vector<double> sig_frac, insig_frac;
    for (int j = 0; j < data.p(); ++j) {
        LifespanVariable v;
        v.index = j;
        int active = 0;
        for (std::size_t k = 0; k < path.fits.size(); ++k) {
            if (path.fits[k].beta[j] != 0.0) {
                ++active;
                if (static_cast<int>(k) < early) v.active_early = true;
            }
        }
        v.active_fraction = static_cast<double>(active) / static_cast<double>(path.fits.size());
        v.p_value = run.hat.p_values[j];
        v.significant = v.p_value < significance;
        (v.significant ? sig_frac : insig_frac).push_back(v.active_fraction);
        rep.variables.push_back(v);
    }
    rep.median_significant = detail::median_of(sig_frac);
    rep.median_insignificant = detail::median_of(insig_frac);
    return rep;
}

} // namespace hdcox
