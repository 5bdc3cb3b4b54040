#include <seqpred/processes.hpp>
#include <seqpred/reference.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace seqpred;
namespace ref = seqpred::reference;

namespace {

EstimatorParams identity_params()
{
    return EstimatorParams{};
}

}  // namespace

TEST(NaiveRun, AllZeros)
{
    const auto r = ref::naive_full_run(Path(std::vector<Symbol>(50, 0)), identity_params());
    ASSERT_EQ(r.zetas.size(), 50u);
    ASSERT_EQ(r.lambdas.size(), 50u);
    for ( std::size_t i = 0; i < 50; ++i )
    {
        EXPECT_EQ(r.zetas[i], i);
        EXPECT_EQ(r.lambdas[i], i);
    }
    for ( const auto &c : r.estimate_counts )
        EXPECT_EQ(c, std::vector<std::uint64_t>{c.front()});
    EXPECT_EQ(r.estimate_counts.back().front(), 49u);
}

TEST(NaiveRun, Deterministic)
{
    const auto path = generate(ProcessSpec{IidSpec{{0.3, 0.7}}, 4}, 300);
    const auto a = ref::naive_full_run(path, identity_params());
    const auto b = ref::naive_full_run(path, identity_params());
    EXPECT_EQ(a.lambdas, b.lambdas);
    EXPECT_EQ(a.chis, b.chis);
    EXPECT_EQ(a.delta_hat, b.delta_hat);
}

TEST(NaiveRun, Cap)
{
    EXPECT_THROW(ref::naive_full_run(Path(std::vector<Symbol>(2001, 0)), identity_params()), std::length_error);
    EXPECT_NO_THROW(ref::naive_full_run(Path(std::vector<Symbol>(20, 0)), identity_params(), 20));
}

TEST(NaiveZeta, HandExamples)
{
    const std::vector<Symbol> alt{0, 1, 0, 1, 0, 1};
    EXPECT_EQ(ref::zetas(alt, Schedule::identity())[1], 2u);
    EXPECT_EQ(ref::tilde(alt, ref::zetas(alt, Schedule::identity()), Schedule::identity(), 1, 5), Symbol{1});
    const std::vector<Symbol> three{0, 1, 1, 0, 1, 1, 0, 1, 1};
    const auto z = ref::zetas(three, Schedule::identity());
    ASSERT_GE(z.size(), 3u);
    EXPECT_EQ(z[1], 3u);
    EXPECT_EQ(z[2], 6u);
}

TEST(HatZeta, AllZerosHistory)
{
    const std::vector<Symbol> history(40, 0);
    for ( std::size_t k = 0; k < 30; ++k )
        EXPECT_EQ(ref::hat_zeta(history, k, Schedule::identity()), -static_cast<long>(k));
    EXPECT_EQ(ref::hat_zeta(history, 0, Schedule::logarithmic()), 0L);
}

TEST(HatZeta, PendingOnShortHistory)
{
    const std::vector<Symbol> history{0, 1, 2, 3};
    EXPECT_EQ(ref::hat_zeta(history, 1, Schedule::identity()), std::nullopt);
}

// If zeta_k(x) = l then running the backward recursion from position l (X reversed from l down to 0)
// lands exactly at -l.
TEST(HatZeta, ShiftIdentity)
{
    std::mt19937_64 rng(8);
    int checked = 0;
    for ( int trial = 0; trial < 100; ++trial )
    {
        const Symbol a = 2 + rng() % 2;
        std::vector<Symbol> xs(200 + rng() % 300);
        for ( auto &x : xs )
            x = static_cast<Symbol>(rng() % a);
        for ( const auto &s : {Schedule::identity(), Schedule::logarithmic(0.5, 0.9, 0.1)} )
        {
            const auto z = ref::zetas(xs, s);
            for ( std::size_t k = 1; k < z.size(); ++k )
            {
                std::vector<Symbol> history(xs.rend() - static_cast<long>(z[k]) - 1, xs.rend());
                ASSERT_EQ(ref::hat_zeta(history, k, s), -static_cast<long>(z[k])) << trial << " " << k;
                ++checked;
            }
        }
    }
    EXPECT_GT(checked, 200);
}

TEST(TildeLaw, PointMassGivesZero)
{
    const auto g = ref::tilde_distribution_check(ProcessSpec{IidSpec{{1.0}}, 1}, 3, 200);
    EXPECT_EQ(g.statistic, 0.0);
    EXPECT_TRUE(g.pass);
}

TEST(TildeLaw, FairCoinPairs)
{
    const auto g = ref::tilde_distribution_check(ProcessSpec{IidSpec{{0.5, 0.5}}, 2}, 2, 10000);
    EXPECT_EQ(g.degrees_of_freedom, 3u);
    EXPECT_NEAR(g.critical_value, 16.266, 1e-3);
    EXPECT_TRUE(g.pass) << g.statistic;
}

TEST(TildeLaw, OrderOnePairs)
{
    const auto g = ref::tilde_distribution_check(ProcessSpec{MarkovSpec{1, 2, {{0.9, 0.1}, {0.2, 0.8}}}, 3}, 2, 10000);
    EXPECT_TRUE(g.pass) << g.statistic;
}

TEST(TildeLaw, NonReversibleTriples)
{
    // A rotating three-state chain: time-reversed blocks have a different law, so reading X~ in the
    // wrong direction would be rejected here.
    const Matrix rotate = {{0.2, 0.8, 0.0}, {0.0, 0.2, 0.8}, {0.8, 0.0, 0.2}};
    const auto g = ref::tilde_distribution_check(ProcessSpec{MarkovSpec{1, 3, rotate}, 4}, 3, 10000);
    EXPECT_TRUE(g.pass) << g.statistic;
    EXPECT_GT(g.degrees_of_freedom, 0u);
}
