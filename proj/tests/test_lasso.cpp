#include <catch2/catch_amalgamated.hpp>

#include "hdcox/inference.hpp"
#include "hdcox/lasso.hpp"
#include "hdcox/rng.hpp"

using namespace hdcox;

namespace {
SurvivalDataset toy_data(int n, int p, std::uint64_t key) {
    CounterRng rng(CounterRng::stream_key(777, key));
    Eigen::VectorXd times(n);
    std::vector<bool> events(n);
    Eigen::MatrixXd z(n, p);
    Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(p);
    beta0[0] = 1.0;
    if (p > 1) beta0[1] = -0.5;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) z(i, j) = rng.next_normal();
        const double t = -std::log1p(-rng.next_uniform()) / std::exp(z.row(i).dot(beta0));
        times[i] = std::min(t, 3.0);
        events[i] = t <= 3.0;
    }
    return make_dataset(times, events, z);
}
} // namespace

TEST_CASE("penalty at or above lambda_max yields the zero fit") {
    const auto data = toy_data(100, 4, 1);
    const double lmax = score(data, Eigen::VectorXd::Zero(4)).lpNorm<Eigen::Infinity>();
    const auto fit = fit_lasso(data, lmax * 1.0001);
    CHECK(fit.converged);
    CHECK(fit.beta.lpNorm<1>() == 0.0);
    CHECK(fit.active_set.empty());
}

TEST_CASE("unpenalized lasso fit agrees with the Newton MPLE") {
    const auto data = toy_data(150, 3, 2);
    const auto mple = fit_mple(data);
    REQUIRE(mple.converged);
    const auto fit = fit_lasso(data, 0.0);
    CHECK(fit.converged);
    CHECK((fit.beta - mple.beta).lpNorm<Eigen::Infinity>() < 1e-5);
}

TEST_CASE("lasso fits satisfy the KKT conditions along a path") {
    const auto data = toy_data(120, 5, 3);
    const auto grid = lambda_grid(data, 12);
    const auto path = fit_path(data, grid);
    REQUIRE(path.fits.size() == grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto& fit = path.fits[k];
        CHECK(fit.converged);
        CHECK(fit.kkt_residual(data) <= 1e-6);
        // Objective never exceeds the zero-vector objective.
        CHECK(fit.objective <= -partial_loglik(data, Eigen::VectorXd::Zero(5)) + 1e-12);
        for (int j : fit.active_set) CHECK(fit.beta[j] != 0.0);
    }
    // Support grows (weakly) as a rule of thumb at the two endpoints.
    CHECK(path.fits.front().active_set.size() <= path.fits.back().active_set.size());
}

TEST_CASE("lambda grid shape and endpoints") {
    const auto data = toy_data(80, 4, 4);
    const double lmax = score(data, Eigen::VectorXd::Zero(4)).lpNorm<Eigen::Infinity>();
    const auto grid = lambda_grid(data, 100);
    REQUIRE(grid.size() == 100);
    CHECK(grid.front() == Catch::Approx(lmax));
    CHECK(grid.back() == Catch::Approx(lmax * 1e-4)); // p < n ratio
    for (std::size_t k = 1; k < grid.size(); ++k) {
        CHECK(grid[k] < grid[k - 1]);
        // log-equal spacing
        CHECK(std::log(grid[k - 1] / grid[k]) ==
              Catch::Approx(std::log(grid[0] / grid[1])).epsilon(1e-10));
    }
    CHECK_THROWS_AS(lambda_grid(data, 0), std::invalid_argument);
}

TEST_CASE("warm and cold starts reach the same optimum") {
    const auto data = toy_data(100, 5, 5);
    const auto grid = lambda_grid(data, 8);
    const double lam = grid[5];
    const auto cold = fit_lasso(data, lam);
    const auto warm = fit_lasso(data, lam, fit_lasso(data, grid[4]).beta);
    CHECK((cold.beta - warm.beta).lpNorm<Eigen::Infinity>() < 1e-5);
    CHECK(cold.objective == Catch::Approx(warm.objective).margin(1e-8));
}

TEST_CASE("fit_path rejects non-decreasing grids") {
    const auto data = toy_data(60, 3, 6);
    CHECK_THROWS_AS(fit_path(data, {0.1, 0.1}), std::invalid_argument);
    CHECK_THROWS_AS(fit_path(data, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("cross-validation selects a grid member deterministically") {
    const auto data = toy_data(120, 4, 7);
    const auto res = cv_lasso(data, 5, 42, 15);
    REQUIRE(res.cv_curve.size() == 15);
    REQUIRE(res.lambdas.size() == 15);
    bool in_grid = false;
    for (double l : res.lambdas)
        if (l == res.lambda_cv) in_grid = true;
    CHECK(in_grid);
    for (double c : res.cv_curve) CHECK(std::isfinite(c));

    const auto res2 = cv_lasso(data, 5, 42, 15);
    CHECK(res2.lambda_cv == res.lambda_cv);
    CHECK(res2.cv_curve == res.cv_curve);

    // The selected penalty maximizes the curve.
    double best = -std::numeric_limits<double>::infinity();
    for (double c : res.cv_curve) best = std::max(best, c);
    std::size_t sel = 0;
    for (std::size_t g = 0; g < res.lambdas.size(); ++g)
        if (res.lambdas[g] == res.lambda_cv) sel = g;
    CHECK(res.cv_curve[sel] == Catch::Approx(best));
}

TEST_CASE("lasso input validation") {
    const auto data = toy_data(50, 3, 8);
    CHECK_THROWS_AS(fit_lasso(data, -0.5), std::invalid_argument);
    CHECK_THROWS_AS(fit_lasso(data, 0.1, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}
