#include "rbce/simbench.hpp"

#include "fixtures.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace {

using namespace rbce;
using test_support::code_of;

double corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd ca = a.array() - a.mean();
    const Eigen::ArrayXd cb = b.array() - b.mean();
    return (ca * cb).sum() / std::sqrt(ca.square().sum() * cb.square().sum());
}

TEST(StudyCase, ParseAndPrint) {
    for (auto c : {StudyCase::Case1a, StudyCase::Case1b, StudyCase::Case2a, StudyCase::Case2b}) {
        EXPECT_EQ(parse_study_case(to_string(c)), c);
    }
    EXPECT_TRUE(varies_n(StudyCase::Case1b));
    EXPECT_FALSE(varies_n(StudyCase::Case2a));
    EXPECT_EQ(code_of([] { parse_study_case("3c"); }), ErrorCode::BadConfig);
    EXPECT_EQ(StudyConfig::default_grid(), (std::vector<int>{25, 30, 35, 40, 45, 50, 55, 60, 65, 70, 75}));
}

TEST(TruthMagnitudes, SupportPatterns) {
    const auto small = truth_magnitudes(StudyCase::Case1a, 4, 9);
    EXPECT_EQ(small.beta, Eigen::Vector4d(1, -1, 1, -1));
    EXPECT_EQ(small.gamma, Eigen::Vector4d(1, -1, 1, -1));
    EXPECT_EQ(small.beta_t, 4.0);
    EXPECT_EQ(small.noise_sd, 0.1);
    EXPECT_EQ(small.ar_rho, 0.3);

    const auto b = truth_magnitudes(StudyCase::Case2b, 30, 9);
    for (Eigen::Index j = 0; j < 30; ++j) {
        EXPECT_EQ(b.beta[j] != 0.0, j < 15) << j;
        EXPECT_EQ(b.gamma[j] != 0.0, j < 10) << j;
    }

    const auto none = truth_magnitudes(SupportPattern{0, 0}, 6, 9);
    EXPECT_TRUE(none.beta.isZero(0.0));
    EXPECT_TRUE(none.gamma.isZero(0.0));

    const auto u1 = truth_magnitudes(StudyCase::Case1a, 20, 5, MagnitudeMode::Uniform);
    const auto u2 = truth_magnitudes(StudyCase::Case1a, 20, 5, MagnitudeMode::Uniform);
    EXPECT_EQ(u1.beta, u2.beta);
    for (Eigen::Index j = 0; j < 10; ++j) {
        EXPECT_GE(std::abs(u1.beta[j]), 0.5);
        EXPECT_LE(std::abs(u1.beta[j]), 1.5);
    }
}

TEST(GenDesign, Ar1Correlation) {
    const Eigen::MatrixXd x = gen_design(5000, 5, 0.3, 17);
    EXPECT_NEAR(corr(x.col(0), x.col(1)), 0.30, 0.03);
    EXPECT_NEAR(corr(x.col(0), x.col(2)), 0.09, 0.03);
    EXPECT_NEAR(corr(x.col(1), x.col(4)), 0.027, 0.03);
    for (Eigen::Index j = 0; j < 5; ++j) {
        EXPECT_NEAR((x.col(j).array() - x.col(j).mean()).square().mean(), 1.0, 0.06);
    }
}

TEST(GenDesign, IndependentColumnsAtZeroCorrelation) {
    double worst = 0.0;
    const int trials = 50;
    const Eigen::Index n = 200;
    for (int s = 0; s < trials; ++s) {
        const Eigen::MatrixXd x = gen_design(n, 4, 0.0, static_cast<std::uint64_t>(s));
        double here = 0.0;
        for (Eigen::Index a = 0; a < 4; ++a) {
            for (Eigen::Index b = a + 1; b < 4; ++b) here = std::max(here, std::abs(corr(x.col(a), x.col(b))));
        }
        worst += here / trials;
    }
    EXPECT_LE(worst, 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GenDesign, RejectsBadArguments) {
    EXPECT_EQ(code_of([] { gen_design(0, 3, 0.3, 1); }), ErrorCode::BadConfig);
    EXPECT_EQ(code_of([] { gen_design(3, 3, 1.0, 1); }), ErrorCode::BadConfig);
}

TEST(GenResponse, BalancedTreatmentWithoutConfounding) {
    TruthSpec truth = truth_magnitudes(SupportPattern{10, 0}, 12, 1);
    const Eigen::Index n = 20000;
    Rng rng(3);
    const Eigen::MatrixXd x = gen_design(n, 12, 0.3, rng);
    const auto [t, y] = gen_response(x, truth, rng);
    EXPECT_NEAR(t.mean(), 0.5, 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(GenResponse, NoiselessOutcomeSplitsByTreatment) {
    TruthSpec truth = truth_magnitudes(SupportPattern{0, 5}, 5, 1);
    truth.noise_sd = 0.0;
    const Dataset d = simulate_dataset(300, truth, 4);
    for (Eigen::Index i = 0; i < 300; ++i) EXPECT_EQ(d.y[i], d.t[i] == 1.0 ? 4.0 : 0.0);
}

TEST(GenResponse, LeastSquaresRecoversBeta) {
    const TruthSpec truth = truth_magnitudes(StudyCase::Case1b, 20, 1);
    const Dataset d = simulate_dataset(10000, truth, 5);
    const Eigen::VectorXd resid = d.y - 4.0 * d.t;
    const Eigen::VectorXd b = d.x.colPivHouseholderQr().solve(resid);
    EXPECT_LT((b - truth.beta).cwiseAbs().maxCoeff(), 0.01);
}

TEST(GenResponse, DimensionMismatch) {
    Rng rng(1);
    const Eigen::MatrixXd x = gen_design(10, 3, 0.3, rng);
    EXPECT_EQ(code_of([&] { gen_response(x, truth_magnitudes(StudyCase::Case1a, 4, 1), rng); }),
              ErrorCode::BadConfig);
}

ReplicateOutcome outcome(int rep, double lo, double hi, bool covers, int fp, int fn, int id) {
    ReplicateOutcome r;
    r.grid_value = 30;
    r.replicate = rep;
    r.beta_t_mean = {lo, hi};
    r.beta_t_median = {lo + 0.01, hi + 0.01};
    r.beta_t_ci = {lo - 0.5, hi + 0.5};
    r.covers = covers;
    r.fp = fp;
    r.fn = fn;
    r.id = id;
    r.true_active = 10;
    r.true_inactive = 40;
    r.correct = 50 - fp - fn - id;
    r.prior_set = PriorSet::make(0.1, 0.3, 3);
    return r;
}

TEST(AggregateCell, HandComputedRow) {
    const std::vector<ReplicateOutcome> reps{outcome(0, 3.0, 3.5, true, 1, 0, 4), outcome(1, 3.4, 3.9, false, 0, 2, 2)};
    const MetricsRow row = aggregate_cell(30, reps, 4.0, {});
    EXPECT_DOUBLE_EQ(row.mean_lo, 3.2);
    EXPECT_DOUBLE_EQ(row.mean_hi, 3.7);
    EXPECT_NEAR(row.sd_lo, std::sqrt(0.08), 1e-12);
    EXPECT_NEAR(row.mse_lo, (1.0 + 0.36) / 2.0, 1e-12);
    EXPECT_NEAR(row.mse_hi, (0.25 + 0.01) / 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(row.ci_pct, 50.0);
    EXPECT_DOUBLE_EQ(row.fp, 0.5);
    EXPECT_DOUBLE_EQ(row.fn, 1.0);
    EXPECT_DOUBLE_EQ(row.id, 3.0);
    EXPECT_DOUBLE_EQ(row.loss, misspecification_loss(0.5, 1.0, 3.0, 40.0, 10.0, 50.0));
    EXPECT_EQ(code_of([] { aggregate_cell(30, {}, 4.0, {}); }), ErrorCode::EmptyInput);
}

TEST(ReplicateCsv, RoundTrip) {
    const std::vector<ReplicateOutcome> reps{outcome(0, 3.0, 3.5, true, 1, 0, 4), outcome(1, 3.4, 3.9, false, 0, 2, 2)};
    std::stringstream buf;
    write_replicates_csv(reps, buf);
    const auto back = read_replicates_csv(buf);
    ASSERT_EQ(back.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(back[i].beta_t_mean.lo, reps[i].beta_t_mean.lo);
        EXPECT_EQ(back[i].beta_t_ci.hi, reps[i].beta_t_ci.hi);
        EXPECT_EQ(back[i].covers, reps[i].covers);
        EXPECT_EQ(back[i].id, reps[i].id);
        EXPECT_EQ(back[i].prior_set.q_high, reps[i].prior_set.q_high);
    }
    std::stringstream bad("grid_value,replicate\n1,2\n");
    EXPECT_EQ(code_of([&] { read_replicates_csv(bad); }), ErrorCode::BadData);
    std::stringstream empty;
    EXPECT_EQ(code_of([&] { read_replicates_csv(empty); }), ErrorCode::BadData);

    std::ostringstream long_form;
    write_long_csv(reps, long_form);
    const std::string s = long_form.str();
    EXPECT_EQ(s.rfind("grid_value,replicate,quantity,value\n", 0), 0u);
    EXPECT_NE(s.find("30,1,fn,2\n"), std::string::npos);
}

StudyConfig small_study() {
    StudyConfig cfg;
    cfg.study = StudyCase::Case1a;
    cfg.grid = {30, 40};
    cfg.replicates = 2;
    cfg.prior_grid = 3;
    cfg.sampler.burn_in = 50;
    cfg.sampler.samples = 200;
    return cfg;
}

TEST(RunStudy, MetricIdentitiesAndTables) {
    const StudyResult r = run_study(small_study());
    ASSERT_EQ(r.rows.size(), 2u);
    ASSERT_EQ(r.replicates.size(), 4u);
    for (const auto& o : r.replicates) {
        EXPECT_EQ(o.fp + o.fn + o.id + o.correct, 50);
        EXPECT_EQ(o.true_active, 10);
        EXPECT_GE(o.fp, 0);
        EXPECT_GE(o.id, 0);
    }
    for (const auto& row : r.rows) {
        EXPECT_GE(row.ci_pct, 0.0);
        EXPECT_LE(row.ci_pct, 100.0);
        EXPECT_LE(row.mean_lo, row.mean_hi);
    }
    std::ostringstream acc, disp, sel;
    write_accuracy_csv(r, acc);
    write_dispersion_csv(r, disp);
    write_selection_csv(r, sel);
    EXPECT_EQ(acc.str().substr(0, acc.str().find('\n')), "n,mean_lo,mean_hi,median_lo,median_hi");
    EXPECT_EQ(disp.str().substr(0, disp.str().find('\n')), "n,sd_lo,sd_hi,mse_lo,mse_hi,ci_pct");
    EXPECT_EQ(sel.str().substr(0, sel.str().find('\n')), "n,fp,fn,id,loss");
}

TEST(RunStudy, ThreadCountDoesNotChangeResults) {
    StudyConfig cfg = small_study();
    cfg.grid = {30};
    const StudyResult a = run_study(cfg);
    cfg.threads = 2;
    const StudyResult b = run_study(cfg);
    std::ostringstream sa, sb;
    write_replicates_csv(a.replicates, sa);
    write_replicates_csv(b.replicates, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(RunStudy, ConfigValidation) {
    StudyConfig cfg = small_study();
    cfg.grid.clear();
    EXPECT_EQ(code_of([&] { run_study(cfg); }), ErrorCode::BadConfig);
    cfg = small_study();
    cfg.replicates = 0;
    EXPECT_EQ(code_of([&] { run_study(cfg); }), ErrorCode::BadConfig);
    cfg = small_study();
    cfg.study = StudyCase::Case2b;
    cfg.grid = {12};
    EXPECT_EQ(code_of([&] { run_study(cfg); }), ErrorCode::BadConfig);
}

}  // namespace
