#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdcox/harness.hpp"

namespace hdcox {

namespace detail {
inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}
inline std::string fmtg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}
} // namespace detail

inline void write_summary_tsv(const std::string& path,
                              const std::vector<ReplicationSummary>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "setting\tgroup\tvariant\treplications\tbias_lasso\tse_bias_lasso"
           "\tbias_debiased\tse_bias_debiased\tcoverage\tse_coverage"
           "\twidth\tse_width\tp_value\tse_p_value\n";
    for (const auto& s : rows) {
        out << s.setting_id << '\t' << s.group << '\t' << s.variant << '\t'
            << s.replication_count << '\t' << detail::fmt6(s.mean_bias_lasso) << '\t'
            << detail::fmt6(s.se_bias_lasso) << '\t' << detail::fmt6(s.mean_bias_debiased) << '\t'
            << detail::fmt6(s.se_bias_debiased) << '\t' << detail::fmt6(s.empirical_coverage)
            << '\t' << detail::fmt6(s.se_coverage) << '\t' << detail::fmt6(s.mean_width) << '\t'
            << detail::fmt6(s.se_width) << '\t' << detail::fmt6(s.mean_p_value) << '\t'
            << detail::fmt6(s.se_p_value) << '\n';
    }
}

inline void write_tuning_tsv(const std::string& path, int setting_id, const TuningRecord& t) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "setting\tmean_lambda\tmedian_lambda\tmean_lambda_n\tmedian_lambda_n\n";
    out << setting_id << '\t' << detail::fmtg(t.mean_lambda) << '\t'
        << detail::fmtg(t.median_lambda) << '\t' << detail::fmtg(t.mean_lambda_n) << '\t'
        << detail::fmtg(t.median_lambda_n) << '\n';
}

inline void write_inference_tsv(const std::string& path, const SurvivalDataset& data,
                                const InferenceRun& run, bool use_tilde) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const DebiasedInference& inf = use_tilde ? run.tilde : run.hat;
    out << "variable\tbeta_hat\tb_hat\tse\tci_lower\tci_upper\tp_value\twarnings\n";
    for (int j = 0; j < data.p(); ++j) {
        out << "z" << (j + 1) << '\t' << detail::fmtg(run.fit.beta[j]) << '\t'
            << detail::fmtg(inf.b_hat[j]) << '\t' << detail::fmtg(inf.se[j]) << '\t'
            << detail::fmtg(inf.ci_lower[j]) << '\t' << detail::fmtg(inf.ci_upper[j]) << '\t'
            << detail::fmtg(inf.p_values[j]) << '\t' << inf.warnings[j] << '\n';
    }
}

inline void write_fit_tsv(const std::string& path, const SurvivalDataset& data,
                          const std::vector<CoxFit>& fits) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "lambda\tobjective\tactive_set_size\tkkt_residual\tconverged\tactive_set\n";
    for (const auto& f : fits) {
        out << detail::fmtg(f.lambda) << '\t' << detail::fmtg(f.objective) << '\t'
            << f.active_set.size() << '\t' << detail::fmtg(f.kkt_residual(data)) << '\t'
            << (f.converged ? 1 : 0) << '\t';
        for (std::size_t k = 0; k < f.active_set.size(); ++k) {
            if (k) out << ',';
            out << "z" << (f.active_set[k] + 1);
        }
        out << '\n';
    }
}

inline void write_lifespan_tsv(const std::string& path, const LifespanReport& rep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "variable\tactive_fraction\tactive_in_first_25\tp_value\tsignificant\n";
    for (const auto& v : rep.variables) {
        out << "z" << (v.index + 1) << '\t' << detail::fmt6(v.active_fraction) << '\t'
            << (v.active_early ? 1 : 0) << '\t' << detail::fmtg(v.p_value) << '\t'
            << (v.significant ? 1 : 0) << '\n';
    }
    out << "# median_active_fraction_significant\t" << detail::fmt6(rep.median_significant)
        << "\n";
    out << "# median_active_fraction_insignificant\t" << detail::fmt6(rep.median_insignificant)
        << "\n";
}

/// Structured run manifest for reproducibility.  No timestamps: repeated runs
/// with identical arguments must produce byte-identical files.
inline void write_manifest(const std::string& path, const std::string& command,
                           const nlohmann::json& args) {
    nlohmann::json j;
    j["tool"] = "hdcox";
    j["version"] = "0.1.0";
    j["command"] = command;
    j["arguments"] = args;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace hdcox
