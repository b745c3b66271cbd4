#include "rbce/random.hpp"

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace {

using rbce::Rng;

struct Moments {
    double mean = 0.0;
    double var = 0.0;
    double se = 0.0;
};

template <class Draw>
Moments moments(int n, Draw draw) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (auto& x : v) {
        x = draw();
        sum += x;
    }
    Moments m;
    m.mean = sum / n;
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= (n - 1);
    m.se = std::sqrt(m.var / n);
    return m;
}

// Mean of N(mu, 1) truncated to (0, inf) via the inverse Mills ratio.
double truncated_mean_above_zero(double mu) {
    const boost::math::normal_distribution<double> n01;
    return mu + boost::math::pdf(n01, -mu) / boost::math::cdf(boost::math::complement(n01, -mu));
}

TEST(DeriveSeed, DeterministicAndStreamSensitive) {
    EXPECT_EQ(rbce::derive_seed(7, {1, 2}), rbce::derive_seed(7, {1, 2}));
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 20; ++a) {
        for (std::uint64_t b = 0; b < 20; ++b) seen.insert(rbce::derive_seed(42, {a, b}));
    }
    EXPECT_EQ(seen.size(), 400u);
    EXPECT_NE(rbce::derive_seed(1, {0}), rbce::derive_seed(2, {0}));
    EXPECT_NE(rbce::derive_seed(1, {0, 1}), rbce::derive_seed(1, {1, 0}));
}

TEST(Rng, SameSeedSameStream) {
    Rng a(99), b(99);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.normal(), b.normal());
        EXPECT_EQ(a.gamma(2.5, 1.5), b.gamma(2.5, 1.5));
    }
}

TEST(Rng, UniformIsOpen) {
    Rng rng(1);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, GammaMoments) {
    Rng rng(3);
    const auto m = moments(100000, [&] { return rng.gamma(3.0, 2.0); });
    EXPECT_NEAR(m.mean, 1.5, 4 * m.se);
    EXPECT_NEAR(m.var, 0.75, 0.03);
}

TEST(Rng, BetaConjugateExamples) {
    Rng rng(4);
    // s=2, q=0.5, z=1 -> Beta(2, 1); z=0 -> Beta(1, 2)
    auto m = moments(100000, [&] { return rng.beta(2.0, 1.0); });
    EXPECT_NEAR(m.mean, 2.0 / 3.0, 3 * m.se);
    m = moments(100000, [&] { return rng.beta(1.0, 2.0); });
    EXPECT_NEAR(m.mean, 1.0 / 3.0, 3 * m.se);
    // s=10, q=0.1, z=1 -> Beta(2, 9)
    m = moments(100000, [&] { return rng.beta(2.0, 9.0); });
    EXPECT_NEAR(m.mean, 2.0 / 11.0, 3 * m.se);
    EXPECT_NEAR(m.var, 2.0 * 9.0 / (11.0 * 11.0 * 12.0), 2e-4);
}

TEST(Rng, BetaTinyShapesStayInsideUnitInterval) {
    Rng rng(5);
    const auto m = moments(200000, [&] {
        const double x = rng.beta(1e-3, 1.0 - 1e-3);
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
        return x;
    });
    EXPECT_NEAR(m.mean, 1e-3, 4 * m.se);
}

TEST(TruncatedNormal, SignMatchesDecision) {
    Rng rng(6);
    for (double mean : {-30.0, -6.5, -1.0, 0.0, 2.0, 7.0, 40.0}) {
        for (int i = 0; i < 2000; ++i) {
            ASSERT_GT(rbce::truncated_normal_unit(rng, mean, true), 0.0);
            ASSERT_LE(rbce::truncated_normal_unit(rng, mean, false), 0.0);
        }
    }
}

TEST(TruncatedNormal, NegligibleTruncation) {
    Rng rng(7);
    const auto m = moments(10000, [&] { return rbce::truncated_normal_unit(rng, -10.0, false); });
    EXPECT_NEAR(m.mean, -10.0, 0.1);
}

TEST(TruncatedNormal, DeepTailMean) {
    Rng rng(8);
    for (double mu : {-6.0, -9.0, -2.0, 0.0, 3.0}) {
        const auto m = moments(100000, [&] { return rbce::truncated_normal_unit(rng, mu, true); });
        EXPECT_NEAR(m.mean, truncated_mean_above_zero(mu), 2 * m.se) << "mean " << mu;
    }
}

TEST(TruncatedNormal, LowerBranchMirrorsUpper) {
    Rng rng(9);
    const auto m = moments(100000, [&] { return rbce::truncated_normal_unit(rng, 6.0, false); });
    EXPECT_NEAR(m.mean, -truncated_mean_above_zero(-6.0), 2 * m.se);
}

TEST(TruncatedNormal, StandardAboveFarTail) {
    Rng rng(10);
    const boost::math::normal_distribution<double> n01;
    const double lower = 12.0;
    const double expected = boost::math::pdf(n01, lower) / boost::math::cdf(boost::math::complement(n01, lower));
    const auto m = moments(50000, [&] {
        const double x = rbce::standard_normal_above(rng, lower);
        EXPECT_GT(x, lower);
        return x;
    });
    EXPECT_NEAR(m.mean, expected, 3 * m.se);
}

}  // namespace
