#include <seqpred/predictor.hpp>
#include <seqpred/processes.hpp>
#include <seqpred/reference.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace seqpred;
namespace ref = seqpred::reference;

namespace {

EstimatorParams defaults(Schedule s = Schedule::identity())
{
    EstimatorParams p;
    p.schedule = std::move(s);
    return p;
}

Path cycle(std::initializer_list<Symbol> period, std::size_t length)
{
    std::vector<Symbol> v(period);
    std::vector<Symbol> xs;
    for ( std::size_t t = 0; t < length; ++t )
        xs.push_back(v[t % v.size()]);
    return Path(xs);
}

Path markov_path(std::uint64_t seed, std::size_t length)
{
    return generate(ProcessSpec{MarkovSpec{1, 2, {{0.9, 0.1}, {0.2, 0.8}}}, seed}, length);
}

void expect_matches_reference(const Trace &trace, const ref::NaiveResult &naive, const std::string &what)
{
    ASSERT_EQ(trace.zetas, naive.zetas) << what;
    ASSERT_EQ(trace.chis, naive.chis) << what;
    ASSERT_EQ(trace.lambdas, naive.lambdas) << what;
    ASSERT_EQ(trace.kappas, naive.kappas) << what;
    ASSERT_EQ(trace.estimates.size(), naive.estimate_counts.size()) << what;
    for ( std::size_t r = 0; r < trace.estimates.size(); ++r )
    {
        ASSERT_EQ(trace.estimates[r].steps, r + 1) << what;
        ASSERT_EQ(trace.estimates[r].counts, naive.estimate_counts[r]) << what;
        ASSERT_EQ(trace.estimates[r].target, naive.estimate_targets[r]) << what;
    }
}

// Interleaving, chi bound, suffix match and normalization on a finished predictor.
void expect_invariants(const Predictor &p)
{
    const auto &z = p.zetas();
    const auto &l = p.lambdas();
    ASSERT_TRUE(std::is_sorted(z.begin(), z.end(), std::less_equal<>{}) || z.size() < 2);
    ASSERT_TRUE(std::adjacent_find(z.begin(), z.end(), std::greater_equal<>{}) == z.end());
    ASSERT_TRUE(std::adjacent_find(l.begin(), l.end(), std::greater_equal<>{}) == l.end());
    for ( std::size_t r = 1; r < l.size(); ++r )
    {
        std::size_t j = 0;
        while ( j + 1 < z.size() && z[j + 1] <= l[r - 1] )
            ++j;
        ASSERT_LE(z[j], l[r - 1]);
        if ( j + 1 < z.size())
        {
            ASSERT_LE(l[r], z[j + 1]);
        }
        const std::size_t kappa = p.kappas()[r];
        ASSERT_EQ(kappa, p.chis()[l[r]]);
        ASSERT_LE(kappa, l[r]);
        for ( std::size_t i = 0; i < kappa; ++i )
        {
            const auto tilde = p.tilde(i);
            ASSERT_TRUE(tilde.has_value());
            ASSERT_EQ(p.path()[l[r] - i], *tilde);
        }
    }
    for ( std::size_t t = 1; t < p.chis().size(); ++t )
    {
        const Position last_first_half = (t + 1) / 2 - 1;
        std::size_t j = 0;
        while ( j + 1 < z.size() && z[j + 1] <= last_first_half )
            ++j;
        ASSERT_LE(p.chis()[t], p.params().schedule(j + 1)) << "t = " << t;
    }
    const auto &e = p.estimate();
    std::uint64_t total = 0;
    for ( auto c : e.counts )
        total += c;
    ASSERT_EQ(total, e.steps);
}

}  // namespace

TEST(Zeta, AllZeros)
{
    const auto trace = run(Path(std::vector<Symbol>(30, 0)), defaults());
    for ( std::size_t m = 0; m < trace.zetas.size(); ++m )
        EXPECT_EQ(trace.zetas[m], m);
    EXPECT_EQ(trace.zetas.size(), 30u);
    for ( std::size_t r = 0; r < trace.lambdas.size(); ++r )
        EXPECT_EQ(trace.lambdas[r], r);
    EXPECT_EQ(trace.lambdas.size(), 30u);
    for ( const auto &f : trace.estimates )
        EXPECT_EQ(f.probability(0), 1.0);
}

TEST(Zeta, Alternating)
{
    Predictor p(defaults());
    const auto xs = cycle({0, 1}, 8);
    for ( Symbol x : xs.symbols())
        p.step(x);
    ASSERT_GE(p.zetas().size(), 2u);
    EXPECT_EQ(p.zetas()[1], 2u);
    EXPECT_EQ(p.tilde(0), Symbol{0});
    EXPECT_EQ(p.tilde(1), Symbol{1});
}

TEST(Zeta, PeriodThree)
{
    const auto xs = cycle({0, 1, 1}, 12);
    const auto trace = run(xs, defaults());
    ASSERT_GE(trace.zetas.size(), 3u);
    EXPECT_EQ(trace.zetas[1], 3u);
    EXPECT_EQ(trace.zetas[2], 6u);
    EXPECT_EQ(ref::zetas(xs.view(), Schedule::identity()), trace.zetas);
}

TEST(Zeta, PendingBeforeRecurrence)
{
    Predictor p(defaults());
    EXPECT_TRUE(p.step(0).empty());
    EXPECT_EQ(p.tilde(0), std::nullopt);
    // chi_1 = 0 matches vacuously, so lambda_1 = 1 even before zeta_1.
    const auto second = p.step(1);
    ASSERT_EQ(second.size(), 1u);
    EXPECT_EQ(std::get<LambdaEvent>(second.front()).position, 1u);
    const auto events = p.step(0);
    ASSERT_FALSE(events.empty());
    EXPECT_EQ(std::get<ZetaEvent>(events.front()), (ZetaEvent{1, 2}));
}

TEST(Chi, FirstStepIsZero)
{
    Predictor p(defaults());
    p.step(0);
    p.step(1);
    EXPECT_EQ(p.chis()[1], 0u);
    EXPECT_EQ(p.chi_now(), 0u);
}

TEST(DeltaHat, CutoffAnnihilates)
{
    Predictor p(defaults());
    for ( Symbol x : {0u, 1u, 2u, 3u, 4u, 5u} )
        p.step(x);
    for ( std::size_t k = 0; k < 5; ++k )
        EXPECT_EQ(p.delta_hat(k), 0.0);
    EXPECT_THROW(p.delta_hat(5), std::invalid_argument);
}

TEST(DeltaHat, FortySymbolPathAgainstBruteForce)
{
    std::mt19937_64 rng(40);
    std::vector<Symbol> xs(41);
    for ( auto &x : xs )
        x = static_cast<Symbol>(rng() & 1);
    EstimatorParams params = defaults();
    Predictor p(params);
    for ( Symbol x : xs )
        p.step(x);
    const auto z = ref::zetas(xs, params.schedule);
    for ( std::size_t k = 0; k < 8; ++k )
        EXPECT_EQ(p.delta_hat(k), ref::delta_hat(xs, z, params, 40, k)) << k;
}

TEST(DeltaHat, RandomHorizonsAgainstBruteForce)
{
    std::mt19937_64 rng(4040);
    for ( int trial = 0; trial < 60; ++trial )
    {
        std::vector<Symbol> xs(20 + rng() % 200);
        const Symbol a = 2 + rng() % 2;
        for ( auto &x : xs )
            x = static_cast<Symbol>(rng() % 5 == 0 ? rng() % a : xs.empty() ? 0 : (&x == xs.data() ? 0 : *(&x - 1)));
        EstimatorParams params = defaults(trial % 2 ? Schedule::identity() : Schedule::logarithmic(0.5, 0.9, 0.1));
        params.gamma = 0.15;
        params.beta = 0.2;
        Predictor p(params);
        for ( Symbol x : xs )
            p.step(x);
        const auto z = ref::zetas(xs, params.schedule);
        const std::size_t n = xs.size() - 1;
        for ( std::size_t k = 0; k < 6; ++k )
            ASSERT_EQ(p.delta_hat(k), ref::delta_hat(xs, z, params, n, k)) << trial << " " << k;
    }
}

TEST(Lambda, SixtySymbolMarkovSample)
{
    const auto xs = markov_path(60, 61);
    const auto params = defaults();
    expect_matches_reference(run(xs, params), ref::naive_full_run(xs, params), "markov-60");
}

TEST(Lambda, ZeroChiGivesUnitSteps)
{
    const auto trace = run(Path(std::vector<Symbol>(40, 3)), defaults());
    for ( std::size_t t = 0; t < trace.chis.size(); ++t )
        EXPECT_EQ(trace.chis[t], 0u);
    for ( std::size_t r = 1; r < trace.lambdas.size(); ++r )
        EXPECT_EQ(trace.lambdas[r], trace.lambdas[r - 1] + 1);
    for ( auto kappa : trace.kappas )
        EXPECT_EQ(kappa, 0u);
}

TEST(Predictor, MatchesReferenceOnRandomPaths)
{
    std::mt19937_64 rng(123);
    for ( int trial = 0; trial < 150; ++trial )
    {
        const std::size_t a = 2 + rng() % 3;
        const std::size_t length = 1 + rng() % 400;
        std::vector<Symbol> xs;
        const double stay = static_cast<double>(rng() % 100) / 100.0;
        for ( std::size_t t = 0; t < length; ++t )
        {
            const bool repeat = t > 0 && static_cast<double>(rng() % 1000) / 1000.0 < stay;
            xs.push_back(repeat ? xs.back() : static_cast<Symbol>(rng() % a));
        }
        EstimatorParams params;
        params.beta = 0.05 + 0.4 * static_cast<double>(rng() % 100) / 100.0;
        params.gamma = (1.0 - 2.0 * params.beta) * (0.1 + 0.8 * static_cast<double>(rng() % 100) / 100.0);
        switch ( trial % 3 )
        {
            case 0: params.schedule = Schedule::identity(); break;
            case 1: params.schedule = Schedule::logarithmic(); break;
            default: params.schedule = Schedule::logarithmic(0.5, 0.9, 0.1); break;
        }
        if ( trial % 4 == 0 )
            params.target = TargetFunction{[]( Symbol s ) { return 0.25 * s - 0.3; }, 1.0};
        const Path path(xs);
        const auto trace = run(path, params);
        expect_matches_reference(trace, ref::naive_full_run(path, params), "trial " + std::to_string(trial));
    }
}

TEST(Predictor, OnlineEqualsBatch)
{
    const auto xs = markov_path(5, 3000);
    const auto params = defaults();
    const auto batch = run(xs, params);
    Predictor p(params);
    std::vector<Event> events;
    for ( Symbol x : xs.symbols())
    {
        const auto fresh = p.step(x);
        events.insert(events.end(), fresh.begin(), fresh.end());
    }
    EXPECT_EQ(events, batch.events);
    EXPECT_EQ(p.lambdas(), batch.lambdas);
    EXPECT_EQ(p.chis(), batch.chis);
    EXPECT_EQ(run(xs, params).events, batch.events);
}

TEST(Predictor, EventsAreCausal)
{
    const auto trace = run(markov_path(6, 2000), defaults());
    Position last = 0;
    std::size_t zeta_seen = 1, lambda_seen = 1;
    for ( const auto &e : trace.events )
    {
        const Position at = std::visit([]( const auto &v ) { return v.position; }, e);
        EXPECT_GE(at, last);
        last = at;
        if ( const auto *zv = std::get_if<ZetaEvent>(&e))
            EXPECT_EQ(zv->index, zeta_seen++);
        else
            EXPECT_EQ(std::get<LambdaEvent>(e).index, lambda_seen++);
    }
}

TEST(Predictor, InvariantsOnSimulatedRuns)
{
    const ProcessSpec specs[] = {
            {MarkovSpec{1, 2, {{0.9, 0.1}, {0.2, 0.8}}}, 1},
            {MarkovSpec{2, 2, {{0.9, 0.1}, {0.3, 0.7}, {0.6, 0.4}, {0.1, 0.9}}}, 2},
            {IidSpec{{0.5, 0.5}}, 3},
            {IidSpec{{0.2, 0.3, 0.5}}, 4},
            {HiddenMarkovSpec{{{0.8, 0.2}, {0.3, 0.7}}, {{0.95, 0.05}, {0.05, 0.95}}}, 5},
            {CountableIidSpec{0.4}, 6},
    };
    for ( const auto &spec : specs )
        for ( const auto &schedule : {Schedule::identity(), Schedule::logarithmic()} )
        {
            Predictor p(defaults(schedule));
            const auto xs = generate(spec, 5000);
            for ( Symbol x : xs.symbols())
                p.step(x);
            expect_invariants(p);
        }
}

TEST(Estimate, IndicatorsSumToOne)
{
    const auto trace = run(generate(ProcessSpec{IidSpec{{0.2, 0.3, 0.5}}, 8}, 2000), defaults());
    ASSERT_FALSE(trace.estimates.empty());
    for ( const auto &f : trace.estimates )
    {
        double total = 0.0;
        for ( Symbol z = 0; z < 3; ++z )
        {
            EXPECT_GE(f.probability(z), 0.0);
            EXPECT_LE(f.probability(z), 1.0);
            total += f.probability(z);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(Estimate, StaysNormalizedBetweenPredictionTimes)
{
    const Path path = markov_path(12, 3000);
    Predictor p(defaults());
    for ( Symbol x : path.symbols())
    {
        p.step(x);
        std::uint64_t total = 0;
        for ( auto c : p.estimate().counts )
            total += c;
        ASSERT_EQ(total, p.estimate().steps) << "n = " << p.horizon();
    }
}

TEST(Estimate, FairCoinAfterTenThousandSteps)
{
    int close = 0;
    for ( std::uint64_t seed = 0; seed < 100; ++seed )
    {
        const Oracle oracle(ProcessSpec{IidSpec{{0.5, 0.5}}, 1000 + seed});
        Sampler sampler(oracle);
        Predictor p(defaults());
        while ( p.lambdas().size() <= 10000 )
            p.step(sampler.next());
        // Two extra symbols can never add more than one prediction time past the 10^4th.
        const auto &f = p.estimate();
        const double share = f.steps == 10000 ? f.probability(1) : 0.0;
        ASSERT_EQ(f.steps, 10000u);
        close += std::abs(share - 0.5) < 0.05;
    }
    EXPECT_GE(close, 95);
}

TEST(Predictor, CountsUndeterminedSelections)
{
    Predictor p(defaults());
    const auto xs = markov_path(9, 500);
    for ( Symbol x : xs.symbols())
        p.step(x);
    // Early horizons always hit the cutoff at some k > 0 once zeta_1 exists.
    EXPECT_LE(p.undetermined_context_selections(), p.chis().size());
}

TEST(Predictor, RejectsInvalidParams)
{
    EstimatorParams p;
    p.beta = 0.5;
    p.gamma = 0.5;
    EXPECT_THROW(Predictor{p}, ValidationError);
}
