#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "hdcox/partial_likelihood.hpp"
#include "hdcox/rng.hpp"

using namespace hdcox;

namespace {

SurvivalDataset two_subject_scalar() {
    Eigen::VectorXd t(2);
    t << 1.0, 2.0;
    Eigen::MatrixXd z(2, 1);
    z << 1.0, 0.0;
    return make_dataset(t, {true, true}, z);
}

SurvivalDataset random_dataset(int n, int p, std::uint64_t key, double censor_frac = 0.3) {
    CounterRng rng(key);
    Eigen::VectorXd t(n);
    std::vector<bool> ev(n);
    Eigen::MatrixXd z(n, p);
    for (int i = 0; i < n; ++i) {
        t[i] = -std::log(rng.next_uniform());
        ev[i] = rng.next_uniform() > censor_frac;
        for (int j = 0; j < p; ++j) z(i, j) = rng.next_normal();
    }
    if (std::none_of(ev.begin(), ev.end(), [](bool b) { return b; })) ev[0] = true;
    return make_dataset(t, ev, z);
}

} // namespace

TEST_CASE("partial_loglik hand-expanded values") {
    // Single subject is its own full risk set.
    Eigen::VectorXd t1(1);
    t1 << 2.5;
    Eigen::MatrixXd z1(1, 1);
    z1 << 3.0;
    auto d1 = make_dataset(t1, {true}, z1);
    Eigen::VectorXd b(1);
    b << 0.7;
    CHECK(partial_loglik(d1, b) == Catch::Approx(0.0).margin(1e-15));

    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    CHECK(partial_loglik(d2, b0) == Catch::Approx(-std::log(2.0) / 2.0).epsilon(1e-12));
    Eigen::VectorXd b1(1);
    b1 << 1.0;
    CHECK(partial_loglik(d2, b1) ==
          Catch::Approx(0.5 * (1.0 - std::log(1.0 + std::exp(1.0)))).epsilon(1e-12));
}

TEST_CASE("partial_loglik input validation") {
    auto d = two_subject_scalar();
    Eigen::VectorXd bad(1);
    bad << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(partial_loglik(d, bad), std::invalid_argument);

    Eigen::VectorXd t(2);
    t << 1.0, 2.0;
    Eigen::MatrixXd z(2, 1);
    z << 1.0, 0.0;
    auto no_events = make_dataset(t, {false, false}, z);
    Eigen::VectorXd b(1);
    b << 0.0;
    CHECK_THROWS_AS(partial_loglik(no_events, b), std::invalid_argument);
}

TEST_CASE("partial_loglik invariant to subject permutation") {
    auto d = random_dataset(23, 3, 42);
    Eigen::VectorXd beta(3);
    beta << 0.4, -0.2, 0.1;
    const double ref = partial_loglik(d, beta);

    std::vector<int> perm(d.n());
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(7);
    for (int i = d.n() - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.next_below(i + 1)]);
    auto shuffled = subset_dataset(d, perm);
    CHECK(partial_loglik(shuffled, beta) == Catch::Approx(ref).epsilon(1e-12));
}

TEST_CASE("weighted_mean basics") {
    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    CHECK(weighted_mean(d2, b0, 1.0)(0) == Catch::Approx(0.5).epsilon(1e-14));
    // Empty risk set: zero vector by convention.
    CHECK(weighted_mean(d2, b0, 5.0)(0) == 0.0);

    // All rows identical: the mean is that row regardless of beta and t.
    Eigen::VectorXd t(4);
    t << 1, 2, 3, 4;
    Eigen::MatrixXd z(4, 2);
    for (int i = 0; i < 4; ++i) z.row(i) << 1.5, -2.0;
    auto dd = make_dataset(t, {true, true, true, true}, z);
    Eigen::VectorXd beta(2);
    beta << 0.3, 0.9;
    const Eigen::VectorXd m = weighted_mean(dd, beta, 2.0);
    CHECK(m(0) == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(m(1) == Catch::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("weighted_mean lies in the at-risk convex hull") {
    auto d = random_dataset(30, 2, 99);
    Eigen::VectorXd beta(2);
    beta << 0.5, -0.3;
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        const Eigen::VectorXd m = weighted_mean(d, beta, t);
        for (int j = 0; j < 2; ++j) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (int i = 0; i < d.n(); ++i) {
                if (d.times[i] >= t) {
                    lo = std::min(lo, d.covariates(i, j));
                    hi = std::max(hi, d.covariates(i, j));
                }
            }
            if (lo <= hi) {
                CHECK(m(j) >= lo - 1e-12);
                CHECK(m(j) <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("score hand values and symmetry") {
    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    CHECK(score(d2, b0)(0) == Catch::Approx(0.25).epsilon(1e-14));

    Eigen::VectorXd t(5);
    t << 1, 2, 3, 4, 5;
    Eigen::MatrixXd z(5, 2);
    for (int i = 0; i < 5; ++i) z.row(i) << 2.0, -1.0;
    auto dd = make_dataset(t, {true, false, true, true, false}, z);
    Eigen::VectorXd beta(2);
    beta << 0.7, 0.1;
    CHECK(score(dd, beta).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("score matches finite differences of partial_loglik") {
    for (std::uint64_t key : {11ull, 12ull, 13ull}) {
        auto d = random_dataset(40, 5, key);
        CounterRng rng(key + 100);
        Eigen::VectorXd beta(5);
        for (int j = 0; j < 5; ++j) beta[j] = 0.5 * rng.next_normal();
        const Eigen::VectorXd g = score(d, beta);
        for (int j = 0; j < 5; ++j) {
            const double h = 1e-5 * (1.0 + std::fabs(beta[j]));
            Eigen::VectorXd bp = beta, bm = beta;
            bp[j] += h;
            bm[j] -= h;
            const double fd = (partial_loglik(d, bp) - partial_loglik(d, bm)) / (2.0 * h);
            CHECK(g[j] == Catch::Approx(fd).epsilon(1e-6).margin(1e-10));
        }
    }
}

TEST_CASE("neg_hessian hand value and finite differences of score") {
    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    CHECK(neg_hessian(d2, b0)(0, 0) == Catch::Approx(0.125).epsilon(1e-14));

    // Constant covariate: zero curvature.
    Eigen::VectorXd t(3);
    t << 1, 2, 3;
    Eigen::MatrixXd zc(3, 1);
    zc << 2, 2, 2;
    auto dc = make_dataset(t, {true, true, false}, zc);
    CHECK(neg_hessian(dc, b0)(0, 0) == Catch::Approx(0.0).margin(1e-14));

    auto d = random_dataset(35, 4, 77);
    CounterRng rng(500);
    Eigen::VectorXd beta(4);
    for (int j = 0; j < 4; ++j) beta[j] = 0.4 * rng.next_normal();
    const Eigen::MatrixXd h = neg_hessian(d, beta);
    CHECK(h.isApprox(h.transpose(), 1e-12));
    for (int j = 0; j < 4; ++j) {
        const double step = 1e-5 * (1.0 + std::fabs(beta[j]));
        Eigen::VectorXd bp = beta, bm = beta;
        bp[j] += step;
        bm[j] -= step;
        const Eigen::VectorXd fd = (score(d, bp) - score(d, bm)) / (2.0 * step);
        for (int l = 0; l < 4; ++l)
            CHECK(h(l, j) == Catch::Approx(-fd[l]).margin(1e-5));
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("vhat hand value and brute-force oracle") {
    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    CHECK(vhat(d2, b0)(0, 0) == Catch::Approx(0.125).epsilon(1e-14));

    auto d = random_dataset(25, 2, 123);
    Eigen::VectorXd beta(2);
    beta << 0.3, -0.6;
    const Eigen::MatrixXd v = vhat(d, beta);

    // Independent double loop straight from the defining sum.
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < d.n(); ++i) {
        if (!d.events[i]) continue;
        const Eigen::VectorXd diff =
            d.covariates.row(i).transpose() - weighted_mean(d, beta, d.times[i]);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) ref(a, b) += diff[a] * diff[b];
    }
    ref /= d.n();
    CHECK(v.isApprox(ref, 1e-10));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (v + v.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("breslow estimator") {
    Eigen::VectorXd t1(1);
    t1 << 0.7;
    Eigen::MatrixXd z1 = Eigen::MatrixXd::Zero(1, 1);
    auto d1 = make_dataset(t1, {true}, z1);
    Eigen::VectorXd b(1);
    b << 1.3;
    auto f1 = breslow(d1, b);
    REQUIRE(f1.knots.size() == 1);
    CHECK(f1.knots[0] == 0.7);
    CHECK(f1.values[0] == Catch::Approx(1.0).epsilon(1e-12));

    auto d2 = two_subject_scalar();
    Eigen::VectorXd b0(1);
    b0 << 0.0;
    auto f2 = breslow(d2, b0);
    REQUIRE(f2.knots.size() == 2);
    CHECK(f2.values[0] == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(f2.values[1] == Catch::Approx(1.5).epsilon(1e-12));
    CHECK(f2(0.5) == 0.0);
    CHECK(f2(1.5) == Catch::Approx(0.5));
    CHECK(f2(10.0) == Catch::Approx(1.5));

    // Monotone, one jump per distinct event time.
    auto d = random_dataset(40, 2, 321);
    Eigen::VectorXd beta(2);
    beta << 0.2, 0.1;
    auto f = breslow(d, beta);
    std::vector<double> distinct_event_times;
    for (int i = 0; i < d.n(); ++i)
        if (d.events[i]) distinct_event_times.push_back(d.times[i]);
    std::sort(distinct_event_times.begin(), distinct_event_times.end());
    distinct_event_times.erase(
        std::unique(distinct_event_times.begin(), distinct_event_times.end()),
        distinct_event_times.end());
    CHECK(f.knots.size() == distinct_event_times.size());
    for (std::size_t k = 1; k < f.values.size(); ++k) {
        CHECK(f.knots[k] > f.knots[k - 1]);
        CHECK(f.values[k] > f.values[k - 1]);
    }
}

TEST_CASE("matrix_norms") {
    const auto id = matrix_norms(Eigen::MatrixXd::Identity(4, 4));
    CHECK(id.entrywise_max == 1.0);
    CHECK(id.op_1 == 1.0);
    CHECK(id.op_inf == 1.0);

    Eigen::MatrixXd a(2, 2);
    a << 1, -2, 3, 4;
    const auto n = matrix_norms(a);
    CHECK(n.entrywise_max == 4.0);
    CHECK(n.op_1 == 6.0);
    CHECK(n.op_inf == 7.0);

    CounterRng rng(9);
    Eigen::MatrixXd r(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r(i, j) = rng.next_normal();
    CHECK(matrix_norms(r).op_1 == matrix_norms(r.transpose().eval()).op_inf);
}
