// Command-line front end: simulation studies, penalized fitting, debiased
// inference and solution-path life-spans for Cox models on CSV data.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "hdcox/csv.hpp"
#include "hdcox/harness.hpp"
#include "hdcox/report.hpp"

namespace {

struct CommonOpts {
    std::string out = ".";
    std::uint64_t seed = 1;
    double level = 0.95;
    std::string theta_variant = "hat";
    std::string lambda = "cv";
    int nlambda = 100;
    int workers = 1;
    int lasso_folds = 10;
    int clime_folds = 10;
    int clime_grid = 20;
    double clime_lambda = -1.0;
};

hdcox::PipelineOptions pipeline_options(const CommonOpts& c) {
    hdcox::PipelineOptions opts;
    opts.level_q = 1.0 - c.level;
    opts.n_lambda = c.nlambda;
    opts.lasso_folds = c.lasso_folds;
    opts.clime_folds = c.clime_folds;
    opts.clime_grid = c.clime_grid;
    opts.fixed_lambda_n = c.clime_lambda;
    if (c.lambda != "cv") opts.fixed_lambda = std::stod(c.lambda);
    return opts;
}

void add_common(CLI::App* cmd, CommonOpts& c, bool with_setting_flags) {
    cmd->add_option("--out", c.out, "Output directory or file prefix");
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--level", c.level, "Confidence level (default 0.95)");
    cmd->add_option("--theta-variant", c.theta_variant, "hat, tilde or both")
        ->check(CLI::IsMember({"hat", "tilde", "both"}));
    cmd->add_option("--lambda", c.lambda, "Penalty: 'cv' or a numeric value");
    cmd->add_option("--nlambda", c.nlambda, "Number of penalty grid points");
    cmd->add_option("--lasso-folds", c.lasso_folds, "Folds for the penalty CV");
    cmd->add_option("--clime-folds", c.clime_folds, "Folds for the precision CV");
    cmd->add_option("--clime-grid", c.clime_grid, "Grid size for the precision CV");
    cmd->add_option("--clime-lambda", c.clime_lambda,
                    "Fixed precision tuning value (skips its CV)");
    if (with_setting_flags) cmd->add_option("--workers", c.workers, "Worker threads");
}

nlohmann::json manifest_args(const CommonOpts& c) {
    nlohmann::json j;
    j["seed"] = c.seed;
    j["level"] = c.level;
    j["theta_variant"] = c.theta_variant;
    j["lambda"] = c.lambda;
    j["nlambda"] = c.nlambda;
    j["lasso_folds"] = c.lasso_folds;
    j["clime_folds"] = c.clime_folds;
    j["clime_grid"] = c.clime_grid;
    j["clime_lambda"] = c.clime_lambda;
    // Worker count deliberately left out: it cannot change the results, and
    // outputs are required to be byte-identical across worker counts.
    return j;
}

std::vector<hdcox::ReplicationSummary> select_variant(
    const std::vector<hdcox::ReplicationSummary>& all, const std::string& variant) {
    if (variant == "both") return all;
    std::vector<hdcox::ReplicationSummary> out;
    for (const auto& s : all)
        if (s.variant == variant) out.push_back(s);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-dimensional Cox model inference toolkit"};
    app.require_subcommand(1);

    CommonOpts c;
    std::vector<int> settings;
    int reps = 100;
    std::string csv_path;

    auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo coverage study");
    sim->add_option("--setting", settings, "Setting ids (1..16)")->required();
    sim->add_option("--reps", reps, "Replications per setting");
    add_common(sim, c, true);

    auto* fit = app.add_subcommand("fit", "Penalized fit or full path on CSV data");
    fit->add_option("csv", csv_path, "Input CSV (time,status,z1,...)")->required();
    add_common(fit, c, false);

    auto* infer = app.add_subcommand("infer", "Debiased inference on CSV data");
    infer->add_option("csv", csv_path, "Input CSV (time,status,z1,...)")->required();
    add_common(infer, c, false);

    auto* lifespan = app.add_subcommand("lifespan", "Solution-path life-span report");
    lifespan->add_option("csv", csv_path, "Input CSV (time,status,z1,...)")->required();
    add_common(lifespan, c, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const hdcox::PipelineOptions opts = pipeline_options(c);

        if (sim->parsed()) {
            for (int id : settings) {
                const hdcox::SimSetting setting = hdcox::sim_setting(id);
                const hdcox::SettingResult res =
                    hdcox::simulate_setting(setting, reps, c.seed, opts, c.workers);
                const std::string prefix = c.out + "/setting_" + std::to_string(id);
                hdcox::write_summary_tsv(prefix + "_summary.tsv",
                                         select_variant(res.summaries, c.theta_variant));
                hdcox::write_tuning_tsv(prefix + "_tuning.tsv", id, res.tuning);
            }
            nlohmann::json args = manifest_args(c);
            args["settings"] = settings;
            args["reps"] = reps;
            hdcox::write_manifest(c.out + "/manifest.json", "simulate", args);
            return 0;
        }

        const hdcox::SurvivalDataset data = hdcox::read_survival_csv(csv_path);
        for (int j = 0; j < data.p(); ++j) {
            const double lo = data.covariates.col(j).minCoeff();
            const double hi = data.covariates.col(j).maxCoeff();
            if (lo == hi)
                throw std::invalid_argument("column z" + std::to_string(j + 1) + " is constant");
        }
        nlohmann::json args = manifest_args(c);
        args["csv"] = csv_path;

        if (fit->parsed()) {
            std::vector<hdcox::CoxFit> fits;
            double lam;
            if (c.lambda == "cv") {
                lam = hdcox::cv_lasso(data, c.lasso_folds, c.seed, c.nlambda).lambda_cv;
            } else {
                lam = std::stod(c.lambda);
            }
            fits.push_back(hdcox::fit_lasso(data, lam));
            hdcox::write_fit_tsv(c.out, data, fits);
            return 0;
        }
        if (infer->parsed()) {
            const hdcox::InferenceRun run = hdcox::run_inference_pipeline(data, opts, c.seed);
            hdcox::write_inference_tsv(c.out, data, run, c.theta_variant == "tilde");
            return 0;
        }
        if (lifespan->parsed()) {
            const hdcox::LifespanReport rep =
                hdcox::lifespan_report(data, opts, c.seed, c.nlambda, 1.0 - c.level);
            hdcox::write_lifespan_tsv(c.out, rep);
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
