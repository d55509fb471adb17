#include <gtest/gtest.h>

#include "zrp/rate_function.hpp"

using zrp::RateFunction;

TEST(RateFunction, FamiliesEvaluate) {
    auto lin = RateFunction::linear();
    auto con = RateFunction::constant();
    auto cap = RateFunction::capped(3.0);

    EXPECT_EQ(lin(0), 0.0);
    EXPECT_EQ(con(0), 0.0);
    EXPECT_EQ(cap(0), 0.0);

    EXPECT_EQ(lin(5), 5.0);
    EXPECT_EQ(con(1), 1.0);
    EXPECT_EQ(con(17), 1.0);
    EXPECT_EQ(cap(2), 2.0);
    EXPECT_EQ(cap(3), 3.0);
    EXPECT_EQ(cap(90), 3.0);
}

TEST(RateFunction, Certificates) {
    EXPECT_EQ(RateFunction::linear().g_star(), 1.0);
    EXPECT_EQ(RateFunction::constant().g_star(), 1.0);
    EXPECT_EQ(RateFunction::capped(3.0).g_star(), 1.0);
    EXPECT_TRUE(RateFunction::linear().non_decreasing());
    EXPECT_TRUE(RateFunction::capped(3.0).non_decreasing());

    auto bumpy = RateFunction::table({2.0, 1.0, 3.0}, RateFunction::TailRule::Constant, 0.0, 4.0);
    EXPECT_FALSE(bumpy.non_decreasing());
    EXPECT_EQ(bumpy.g_star(), 2.0);  // the jump g(0)=0 -> g(1)=2
}

TEST(RateFunction, PhiStarEstimation) {
    EXPECT_EQ(RateFunction::constant().phi_star(), 1.0);
    EXPECT_EQ(RateFunction::capped(3.0).phi_star(), 3.0);
    EXPECT_EQ(RateFunction::linear(128).phi_star(), 128.0);

    // non-monotone table without an override is rejected
    EXPECT_THROW(RateFunction::table({2.0, 1.0, 3.0}), zrp::ConfigError);
    auto t = RateFunction::table({2.0, 1.0, 3.0}, RateFunction::TailRule::Constant, 0.0, 2.5);
    EXPECT_EQ(t.phi_star(), 2.5);
}

TEST(RateFunction, TableTails) {
    auto tc = RateFunction::table({1.0, 2.0});
    EXPECT_EQ(tc(2), 2.0);
    EXPECT_EQ(tc(10), 2.0);

    auto tl = RateFunction::table({1.0, 2.0}, RateFunction::TailRule::Linear, 0.5);
    EXPECT_EQ(tl(3), 2.5);
    EXPECT_EQ(tl(6), 4.0);
    EXPECT_TRUE(tl.non_decreasing());
    EXPECT_EQ(tl.tail_inf(4), tl(5));
}

TEST(RateFunction, GFactorial) {
    auto lin = RateFunction::linear();
    EXPECT_DOUBLE_EQ(lin.factorial(0), 1.0);  // g(0)! = 1
    EXPECT_NEAR(lin.factorial(4), 24.0, 1e-12);

    auto con = RateFunction::constant();
    EXPECT_DOUBLE_EQ(con.factorial(7), 1.0);

    auto cap = RateFunction::capped(3.0);
    EXPECT_NEAR(cap.factorial(5), 1.0 * 2 * 3 * 3 * 3, 1e-10);
}

TEST(RateFunction, ZeroRateInsideFactorial) {
    auto dead = RateFunction::table({1.0, 0.0, 2.0}, RateFunction::TailRule::Constant, 0.0, 1.0);
    EXPECT_NO_THROW(dead.factorial(1));
    EXPECT_THROW(dead.factorial(2), zrp::ZeroRateInFactorial);
    EXPECT_THROW(dead.factorial(3), zrp::ZeroRateInFactorial);
}

TEST(RateFunction, FromName) {
    EXPECT_EQ(RateFunction::from_name("linear")(3), 3.0);
    EXPECT_EQ(RateFunction::from_name("constant")(3), 1.0);
    EXPECT_EQ(RateFunction::from_name("capped(2.5)")(4), 2.5);
    EXPECT_THROW(RateFunction::from_name("cubic"), zrp::ConfigError);
}
