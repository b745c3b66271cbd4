#include "checks.hpp"

#include <gtest/gtest.h>

namespace {

using namespace rbce;

void expect_clean(const checks::Report& r) {
    for (const auto& f : r.failures) ADD_FAILURE() << f;
}

TEST(Invariants, DecisionsFollowBounds) { expect_clean(checks::decision_bounds_consistency()); }

TEST(Invariants, SetAlgebra) { expect_clean(checks::set_algebra()); }

TEST(Invariants, EnvelopeContainsEveryPrior) { expect_clean(checks::envelope_property()); }

TEST(Invariants, SingletonSetCollapses) { expect_clean(checks::singleton_collapse()); }

TEST(Invariants, RefiningTheGridOnlyWidensBounds) { expect_clean(checks::grid_refinement()); }

TEST(Invariants, ByteIdenticalReruns) { expect_clean(checks::determinism()); }

}  // namespace
