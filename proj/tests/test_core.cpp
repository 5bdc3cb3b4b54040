#include <seqpred/core.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace seqpred;

namespace {

// l(k) straight from the closed form, and J by scanning j upward.
std::size_t log_l(std::size_t k, double e)
{
    const double v = std::max(1.0, std::floor(e * std::log2(static_cast<double>(k))));
    return v >= static_cast<double>(k) ? k : static_cast<std::size_t>(v);
}

EstimatorParams with(double beta, double gamma)
{
    EstimatorParams p;
    p.beta = beta;
    p.gamma = gamma;
    return p;
}

std::size_t scan_J(const Schedule &s, std::size_t n)
{
    std::size_t j = 1;
    while ( s(j + 1) <= n )
        ++j;
    return j;
}

}  // namespace

TEST(Params, AcceptsDefaults)
{
    EXPECT_NO_THROW(validate_params(with(0.3, 0.3)));
}

TEST(Params, RejectsBrokenInequality)
{
    try
    {
        validate_params(with(0.5, 0.5));
        FAIL();
    } catch ( const ValidationError &e )
    {
        EXPECT_STREQ(e.what(), "2*beta+gamma<1 violated");
    }
}

TEST(Params, RejectsZeroBeta)
{
    try
    {
        validate_params(with(0.0, 0.3));
        FAIL();
    } catch ( const ValidationError &e )
    {
        EXPECT_STREQ(e.what(), "beta must be positive");
    }
}

TEST(Params, GammaRangeAndTarget)
{
    EXPECT_THROW(validate_params(with(0.1, 0.0)), ValidationError);
    EXPECT_THROW(validate_params(with(0.1, 1.0)), ValidationError);
    EstimatorParams p;
    p.target = TargetFunction{[]( Symbol s ) { return double(s); }, 1.0};
    EXPECT_NO_THROW(validate_params(p));
    EXPECT_THROW((*p.target)(2), ValidationError);
    p.target->bound = INFINITY;
    EXPECT_THROW(validate_params(p), ValidationError);
}

TEST(Schedule, IdentityJ)
{
    const auto s = Schedule::identity();
    EXPECT_EQ(schedule_J(s, 5), 5u);
    EXPECT_EQ(schedule_J(s, 0), 1u);
    for ( std::size_t n = 1; n < 200; ++n )
        EXPECT_EQ(s.J(n), n);
}

TEST(Schedule, LogarithmicValues)
{
    const auto s = Schedule::logarithmic();
    EXPECT_DOUBLE_EQ(s.exponent(), 12.0);
    for ( std::size_t k = 1; k < 5000; ++k )
        ASSERT_EQ(s(k), log_l(k, 12.0)) << k;
    EXPECT_EQ(s.describe(), "log:delta=1,eps1=0.5,eps2=0.25");
}

TEST(Schedule, LogarithmicJByScan)
{
    const auto s = Schedule::logarithmic();
    // l(k) = k up to the point where 12 log2 k drops below k; J(10) is therefore 10.
    EXPECT_EQ(s.J(10), scan_J(s, 10));
    EXPECT_EQ(s.J(10), 10u);
    for ( std::size_t n = 0; n < 200; ++n )
        ASSERT_EQ(s.J(n), scan_J(s, n)) << n;
}

TEST(Schedule, JBrackets)
{
    const Schedule schedules[] = {Schedule::identity(), Schedule::logarithmic(), Schedule::logarithmic(0.5, 0.9, 0.1),
                                  Schedule::table({1, 1, 2, 2, 2, 3, 4, 4, 5, 9, 9, 12})};
    for ( const auto &s : schedules )
    {
        std::size_t prev = 1;
        for ( std::size_t n = 0; n < 9; ++n )
        {
            const auto j = s.J(n);
            EXPECT_GT(s(j + 1), n);
            if ( j >= 2 )
            {
                EXPECT_LE(s(j), n);
            }
            EXPECT_GE(j, prev);
            prev = j;
        }
    }
}

TEST(Schedule, TableValidation)
{
    EXPECT_THROW(Schedule::table({}), ValidationError);
    EXPECT_THROW(Schedule::table({2}), ValidationError);
    EXPECT_THROW(Schedule::table({1, 3}), ValidationError);
    EXPECT_THROW(Schedule::table({1, 2, 1}), ValidationError);
    const auto t = Schedule::table({1, 2, 2});
    EXPECT_THROW(t(4), std::out_of_range);
    EXPECT_THROW(t.J(2), std::out_of_range);
    EXPECT_EQ(t.J(1), 1u);
    EXPECT_EQ(t.describe(), "table:1,2,2");
    EXPECT_THROW(Schedule::logarithmic(0.0), ValidationError);
    EXPECT_THROW(Schedule::logarithmic(1.0, 0.2, 0.3), ValidationError);
}

TEST(Path, Access)
{
    Path p({0, 1, 2});
    EXPECT_EQ(p.at(2), 2u);
    EXPECT_THROW(p.at(3), std::out_of_range);
    const auto b = p.block(1, 2);
    EXPECT_EQ(Pattern(b.begin(), b.end()), (Pattern{1, 2}));
}

TEST(PastDistance, WeightsHalveWithAge)
{
    EXPECT_EQ(past_distance(Pattern{0, 1, 1}, Pattern{0, 1, 1}), 0.0);
    EXPECT_EQ(past_distance(Pattern{1}, Pattern{0}), 0.5);
    EXPECT_EQ(past_distance(Pattern{0, 1, 0}, Pattern{1, 1, 1}), 0.5 + 0.125);
    // Only the common length counts.
    EXPECT_EQ(past_distance(Pattern{0, 1}, Pattern{0, 0, 1, 1}), 0.25);
    // Symmetric, and at most 1 whatever the length (1 - 2^-80 rounds to 1).
    Pattern a(80, 0), b(80, 1);
    EXPECT_EQ(past_distance(a, b), past_distance(b, a));
    EXPECT_LE(past_distance(a, b), 1.0);
    EXPECT_NEAR(past_distance(a, b), 1.0, 1e-15);
}
