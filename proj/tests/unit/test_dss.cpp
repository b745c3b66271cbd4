#include "rbce/dss.hpp"
#include "rbce/simbench.hpp"

#include "fixtures.hpp"
#include "oracle.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace {

using namespace rbce;
using test_support::code_of;

PosteriorSummary with_inclusion(std::initializer_list<double> e, double q = 0.2) {
    PosteriorSummary s;
    s.inclusion = Eigen::VectorXd(static_cast<Eigen::Index>(e.size()));
    Eigen::Index j = 0;
    for (double v : e) s.inclusion[j++] = v;
    s.q = Eigen::VectorXd::Constant(s.inclusion.size(), q);
    s.beta_mean = Eigen::VectorXd::Zero(s.inclusion.size());
    s.gamma_mean = Eigen::VectorXd::Zero(s.inclusion.size());
    return s;
}

TEST(ActiveSet, ThresholdSemantics) {
    EXPECT_EQ(active_set(with_inclusion({0.9, 0.5, 0.49})), (IndexSet{0, 1}));
    EXPECT_TRUE(active_set(with_inclusion({0.1, 0.2, 0.49})).empty());
    EXPECT_EQ(active_set(with_inclusion({1.0, 1.0, 1.0})), (IndexSet{0, 1, 2}));
}

TEST(ActiveSets, IntersectionAndUnion) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PosteriorSummary> per_q;
        const int g = 1 + trial % 6;
        for (int k = 0; k < g; ++k) {
            PosteriorSummary s = with_inclusion({0, 0, 0, 0, 0, 0, 0}, 0.1 * (k + 1));
            for (Eigen::Index j = 0; j < 7; ++j) s.inclusion[j] = rng.uniform();
            per_q.push_back(s);
        }
        const auto sets = active_sets(per_q);
        std::set<Eigen::Index> inter, uni;
        for (Eigen::Index j = 0; j < 7; ++j) inter.insert(j);
        for (const auto& s : per_q) {
            std::set<Eigen::Index> here;
            for (Eigen::Index j = 0; j < 7; ++j) {
                if (s.inclusion[j] >= 0.5) here.insert(j);
            }
            std::set<Eigen::Index> next;
            std::set_intersection(inter.begin(), inter.end(), here.begin(), here.end(), std::inserter(next, next.end()));
            inter = next;
            uni.insert(here.begin(), here.end());
        }
        EXPECT_EQ(sets.s_lower, IndexSet(inter.begin(), inter.end()));
        EXPECT_EQ(sets.s_star, IndexSet(uni.begin(), uni.end()));
        for (const auto& sq : sets.per_q) {
            EXPECT_TRUE(std::includes(sq.begin(), sq.end(), sets.s_lower.begin(), sets.s_lower.end()));
            EXPECT_TRUE(std::includes(sets.s_star.begin(), sets.s_star.end(), sq.begin(), sq.end()));
        }
    }
}

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd target;
    Eigen::VectorXd weights;
};

Problem random_problem(Rng& rng, Eigen::Index n, Eigen::Index k) {
    Problem pr;
    pr.x.resize(n, k);
    for (Eigen::Index i = 0; i < pr.x.size(); ++i) pr.x.data()[i] = rng.normal();
    // mild collinearity
    if (k > 1) pr.x.col(1) += 0.6 * pr.x.col(0);
    Eigen::VectorXd b(k);
    for (Eigen::Index j = 0; j < k; ++j) b[j] = rng.uniform() < 0.5 ? 0.0 : 2.0 * rng.normal();
    pr.target = pr.x * b;
    for (Eigen::Index i = 0; i < n; ++i) pr.target[i] += 0.3 * rng.normal();
    pr.weights.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) pr.weights[j] = 0.2 + 3.0 * rng.uniform();
    return pr;
}

TEST(AdaptiveLasso, KktCertificateOnRandomProblems) {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 5 + trial % 36;
        const Eigen::Index k = 1 + trial % 12;
        const Problem pr = random_problem(rng, n, k);
        const double lambda = lambda_max(pr.x, pr.target, pr.weights) * std::pow(10.0, -3.0 * rng.uniform());
        const auto fit = adaptive_lasso_fit(pr.x, pr.target, pr.weights, lambda);
        EXPECT_LE(kkt_residual(pr.x, pr.target, pr.weights, lambda, fit.coef), 1e-8) << "trial " << trial;
        EXPECT_NEAR(fit.objective, lasso_objective(pr.x, pr.target, pr.weights, lambda, fit.coef), 1e-14);
    }
}

TEST(AdaptiveLasso, MatchesSignPatternBruteForce) {
    Rng rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const Eigen::Index k = 1 + trial % 3;
        const Eigen::Index n = 4 + trial % 7;
        const Problem pr = random_problem(rng, n, k);
        const double lambda = lambda_max(pr.x, pr.target, pr.weights) * (0.02 + 0.9 * rng.uniform());
        const auto fit = adaptive_lasso_fit(pr.x, pr.target, pr.weights, lambda);
        const Eigen::VectorXd ref = oracle::brute_force_lasso(pr.x, pr.target, pr.weights, lambda);
        EXPECT_LT((fit.coef - ref).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
    }
}

TEST(AdaptiveLasso, ZeroPenaltyIsLeastSquares) {
    Rng rng(4);
    const Problem pr = random_problem(rng, 30, 5);
    const auto fit = adaptive_lasso_fit(pr.x, pr.target, pr.weights, 0.0);
    EXPECT_LE((pr.x.transpose() * (pr.target - pr.x * fit.coef)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(AdaptiveLasso, AboveLambdaMaxEverythingIsZero) {
    Rng rng(5);
    const Problem pr = random_problem(rng, 20, 6);
    const double top = lambda_max(pr.x, pr.target, pr.weights);
    EXPECT_TRUE(adaptive_lasso_fit(pr.x, pr.target, pr.weights, top).coef.isZero(0.0));
    EXPECT_TRUE(adaptive_lasso_fit(pr.x, pr.target, pr.weights, 3.0 * top).coef.isZero(0.0));
    EXPECT_FALSE(adaptive_lasso_fit(pr.x, pr.target, pr.weights, 0.9 * top).coef.isZero(0.0));
}

TEST(AdaptiveLasso, UnivariateSoftThreshold) {
    Rng rng(6);
    Eigen::MatrixXd x(25, 1);
    for (Eigen::Index i = 0; i < 25; ++i) x(i, 0) = rng.normal();
    x.col(0) = (x.col(0).array() - x.col(0).mean()).matrix();
    x.col(0) /= std::sqrt(x.col(0).squaredNorm() / 24.0);
    const double xtx = x.col(0).squaredNorm();
    for (double b : {-2.0, -0.3, 0.05, 1.7}) {
        const Eigen::VectorXd target = x.col(0) * b;
        const Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 1.0 / std::abs(b));
        for (double lambda : {0.0, 0.01, 0.5, 3.0}) {
            const double expected =
                (b > 0 ? 1.0 : -1.0) * std::max(std::abs(b) - 25.0 * lambda / (2.0 * xtx) * w[0], 0.0);
            EXPECT_NEAR(adaptive_lasso_fit(x, target, w, lambda).coef[0], expected, 1e-10);
        }
    }
}

TEST(AdaptiveLasso, InputErrors) {
    Rng rng(7);
    const Problem pr = random_problem(rng, 10, 3);
    EXPECT_EQ(code_of([&] { adaptive_lasso_fit(pr.x, pr.target, pr.weights, -1.0); }), ErrorCode::BadConfig);
    Eigen::VectorXd bad = pr.weights;
    bad[1] = 0.0;
    EXPECT_EQ(code_of([&] { adaptive_lasso_fit(pr.x, pr.target, bad, 0.1); }), ErrorCode::BadConfig);
    EXPECT_EQ(code_of([&] { adaptive_lasso_fit(pr.x, pr.target, Eigen::VectorXd::Ones(2), 0.1); }),
              ErrorCode::BadConfig);

    // Nearly collinear columns need many sweeps; one is never enough.
    Eigen::MatrixXd x(20, 2);
    for (Eigen::Index i = 0; i < 20; ++i) {
        x(i, 0) = rng.normal();
        x(i, 1) = x(i, 0) + 1e-3 * rng.normal();
    }
    const Eigen::VectorXd t = x.col(0) - x.col(1) * 0.5;
    LassoOptions one;
    one.max_sweeps = 1;
    EXPECT_EQ(code_of([&] { adaptive_lasso_fit(x, t, Eigen::VectorXd::Ones(2), 1e-6, nullptr, one); }),
              ErrorCode::NonConvergence);
}

TEST(LassoPath, ShapeWarmStartsAndContinuity) {
    Rng rng(8);
    const Problem pr = random_problem(rng, 40, 6);
    const auto path = lasso_path(pr.x, pr.target, pr.weights, 400, 1e-4);
    ASSERT_EQ(path.lambdas.size(), 400u);
    EXPECT_DOUBLE_EQ(path.lambdas.front(), lambda_max(pr.x, pr.target, pr.weights));
    EXPECT_NEAR(path.lambdas.back(), 1e-4 * path.lambdas.front(), 1e-12 * path.lambdas.front());
    EXPECT_TRUE(path.coefs.front().isZero(0.0));
    double scale = 0.0;
    for (const auto& c : path.coefs) scale = std::max(scale, c.cwiseAbs().maxCoeff());
    for (std::size_t i = 1; i < path.lambdas.size(); ++i) {
        EXPECT_LT(path.lambdas[i], path.lambdas[i - 1]);
        EXPECT_LT((path.coefs[i] - path.coefs[i - 1]).cwiseAbs().maxCoeff(), 0.05 * scale);
        EXPECT_LE(kkt_residual(pr.x, pr.target, pr.weights, path.lambdas[i], path.coefs[i]), 1e-8);
    }
}

TEST(SelectLambda, VacuousAndStrictCriteria) {
    Rng rng(9);
    const Problem pr = random_problem(rng, 30, 4);
    const auto path = lasso_path(pr.x, pr.target, pr.weights);
    EXPECT_EQ(select_lambda(path, pr.target, 1.0), path.lambdas.front());
    EXPECT_EQ(select_lambda(path, pr.target, 0.0), path.lambdas.back());
    EXPECT_EQ(code_of([&] { select_lambda(LassoPath{}, pr.target, 0.01); }), ErrorCode::EmptyPath);
}

TEST(SelectLambda, OrthonormalDesignKeepsLargeCoefficientOnly) {
    // Columns orthogonal with x'x = n, so each coordinate soft-thresholds
    // independently: b_j = sign * max(|beta_j| - lambda * w_j / 2, 0).
    const Eigen::Index n = 8;
    Eigen::MatrixXd x(n, 2);
    x << 1, 1, 1, -1, 1, 1, 1, -1, -1, 1, -1, -1, -1, 1, -1, -1;
    const Eigen::Vector2d beta(3.0, 0.01);
    const Eigen::VectorXd target = x * beta;
    const Eigen::Vector2d w(1.0 / 3.0, 1.0 / 0.01);
    const auto path = lasso_path(x, target, w);
    const double lambda = select_lambda(path, target, 0.01);

    // Closed form: fraction lost at lambda is ((lambda w1/2)^2 + 0.01^2) / (9 + 0.01^2) while
    // the second coefficient is dead (lambda >= 2 * 0.01 / w2).
    const double top = 2.0 * 3.0 / w[0];
    double expected = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double l = top * std::pow(1e-4, i / 99.0);
        const double b1 = std::max(3.0 - l * w[0] / 2.0, 0.0);
        const double b2 = std::max(0.01 - l * w[1] / 2.0, 0.0);
        const double lost = ((3.0 - b1) * (3.0 - b1) + (0.01 - b2) * (0.01 - b2)) / (9.0 + 1e-4);
        if (lost <= 0.01) {
            expected = l;
            break;
        }
    }
    EXPECT_NEAR(lambda, expected, 1e-12 * expected);
    const std::size_t i = select_lambda_index(path, 0.01);
    EXPECT_GT(path.coefs[i][0], 2.5);
    EXPECT_EQ(path.coefs[i][1], 0.0);
}

TEST(DssSummarize, EmptyActiveSetGivesEmptyFits) {
    const auto truth = truth_magnitudes(StudyCase::Case1a, 6, 1);
    const auto data = standardize(simulate_dataset(20, truth, 3));
    SensitivityResult sens;
    sens.per_q.push_back(with_inclusion({0.1, 0.2, 0.3, 0.4, 0.45, 0.49}, 0.3));
    const auto r = dss_summarize(sens, data);
    ASSERT_EQ(r.per_q.size(), 1u);
    EXPECT_TRUE(r.per_q[0].active.empty());
    EXPECT_TRUE(r.per_q[0].outcome.coef.isZero(0.0));
    EXPECT_TRUE(r.per_q[0].treatment.coef.isZero(0.0));
    std::ostringstream csv;
    write_dss_csv(r, csv);
    EXPECT_EQ(csv.str(), "q,side,predictor,coef,selected\n");
}

// Predictors 11-15 enter only the outcome equation. Their outcome-side DSS
// coefficients survive; on the treatment side the probit likelihood at n=75 is
// too weak to pin their gamma means at zero, so the check is that they are
// shrunk well below the genuine treatment effects rather than exactly zero.
TEST(DssSummarize, OutcomeOnlyPredictorsKeepBeta) {
    const auto truth = truth_magnitudes(StudyCase::Case1b, 50, 1);
    const auto data = standardize(simulate_dataset(75, truth, 11));
    const auto e = elicit_prior_set(data.inner.x, data.inner.y, {0.15, 0.35}, 3);
    SamplerConfig cfg;
    cfg.seed = 12;
    const auto sens = sensitivity_fit(data, HierarchicalPrior{}, e.prior_set, cfg);
    const auto r = dss_summarize(sens, data);
    for (const auto& fit : r.per_q) {
        double both = 0.0, outcome_only = 0.0;
        for (Eigen::Index j = 0; j < 15; ++j) {
            ASSERT_NE(std::find(fit.active.begin(), fit.active.end(), j), fit.active.end()) << "predictor " << j;
            EXPECT_NE(fit.outcome.coef[j], 0.0) << "q " << fit.q << " predictor " << j;
            (j < 10 ? both : outcome_only) += std::abs(fit.treatment.coef[j]);
        }
        EXPECT_LT(outcome_only / 5.0, 0.6 * both / 10.0) << "q " << fit.q;
        for (Eigen::Index j = 15; j < 50; ++j) {
            EXPECT_EQ(fit.outcome.coef[j], 0.0);
            EXPECT_EQ(fit.treatment.coef[j], 0.0);
        }
    }
    std::ostringstream csv;
    write_dss_csv(r, csv);
    EXPECT_EQ(csv.str().rfind("q,side,predictor,coef,selected\n", 0), 0u);
}

TEST(DssSummarize, CaseOneSetsAtSeventyFiveObservations) {
    const auto truth = truth_magnitudes(StudyCase::Case1a, 50, 1);
    const auto data = standardize(simulate_dataset(75, truth, 13));
    const auto e = elicit_prior_set(data.inner.x, data.inner.y, {0.15, 0.35}, 11);
    SamplerConfig cfg;
    cfg.seed = 14;
    const auto r = dss_summarize(sensitivity_fit(data, HierarchicalPrior{}, e.prior_set, cfg), data);
    const IndexSet truth_set{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    EXPECT_EQ(r.sets.s_lower, truth_set);
    EXPECT_EQ(r.sets.s_star, truth_set);
}

}  // namespace
