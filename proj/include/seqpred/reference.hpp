#pragma once

// Naive, literal re-evaluations of every predictor quantity. Nothing here touches the block index or
// the predictor; every count is a fresh scan of the path.

#include "core.hpp"
#include "processes.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace seqpred::reference {

inline constexpr std::size_t kDefaultCap = 2000;

/// #{ t : first <= start(t), t <= last, X_{t-len+1}^t = p } where start(t) = t - len + 1, i.e. the
/// occurrences of p lying entirely inside X_first^last.
/// X_s^{s+|p|-1} == p; s must be a valid start inside x.
inline bool matches_at(PatternView x, PatternView p, long s)
{
    return std::equal(p.begin(), p.end(), x.begin() + s);
}

inline std::size_t count_within(PatternView x, PatternView p, long first, long last)
{
    const long len = static_cast<long>(p.size());
    std::size_t c = 0;
    for ( long s = std::max(first, 0L); s + len - 1 <= last; ++s )
        c += matches_at(x, p, s);
    return c;
}

/// #{ t in [a, b] : t - len + 1 >= floor, X_{t-len+1}^t = p }, by scanning end positions.
inline std::size_t count_ends(PatternView x, PatternView p, long a, long b, long floor = 0)
{
    const long len = static_cast<long>(p.size());
    std::size_t c = 0;
    for ( long t = a; t <= b; ++t )
    {
        if ( t - len + 1 < floor || t - len + 1 < 0 || t >= static_cast<long>(x.size()))
            continue;
        c += matches_at(x, p, t - len + 1);
    }
    return c;
}

/// i-th smallest end position (i >= 1) in [a, b] with t - len + 1 >= floor.
inline std::optional<long> occurrence_ends(PatternView x, PatternView p, long a, long b, std::size_t i,
                                           long floor = 0)
{
    const long len = static_cast<long>(p.size());
    for ( long t = a; t <= b; ++t )
    {
        if ( t - len + 1 < floor || t - len + 1 < 0 || t >= static_cast<long>(x.size()))
            continue;
        if ( matches_at(x, p, t - len + 1) && --i == 0 )
            return t;
    }
    return std::nullopt;
}

inline std::size_t ceil_half(std::size_t n) { return (n + 1) / 2; }

/// Membership in the first-half set: p occurs somewhere in X_0^{ceil(n/2)-1}.
inline bool in_first_half(PatternView x, PatternView p, std::size_t n)
{
    const long last = static_cast<long>(ceil_half(n)) - 1;
    for ( long s = 0; s + static_cast<long>(p.size()) - 1 <= last; ++s )
        if ( matches_at(x, p, s))
            return true;
    return false;
}

/// Membership in the second-half set: p occurs more than n^{1-gamma} times in X_{ceil(n/2)}^n.
inline bool frequent_in_second_half(PatternView x, PatternView p, std::size_t n, double gamma)
{
    const double c = static_cast<double>(count_within(x, p, static_cast<long>(ceil_half(n)), static_cast<long>(n)));
    return c > std::pow(static_cast<double>(n), 1.0 - gamma);
}

/// #{h+k <= t <= n : X_{t-k}^t = (c, x)} / #{h+k-1 <= t <= n-1 : X_{t-k+1}^t = c}, k = |c|.
inline std::optional<double> empirical_conditional(PatternView xs, PatternView c, Symbol x, std::size_t n)
{
    const long k = static_cast<long>(c.size());
    const long h = static_cast<long>(ceil_half(n));
    Pattern cx(c.begin(), c.end());
    cx.push_back(x);
    const std::size_t den = count_ends(xs, c, h + k - 1, static_cast<long>(n) - 1);
    if ( den == 0 )
        return std::nullopt;
    const std::size_t num = count_ends(xs, cx, h + k, static_cast<long>(n));
    return static_cast<double>(num) / static_cast<double>(den);
}

/// zeta_0 = 0, zeta_m = zeta_{m-1} + min{t > 0 : block of length l(m) ending at zeta_{m-1} + t equals
/// the one ending at zeta_{m-1}}, for every recurrence completed inside the path.
inline std::vector<std::size_t> zetas(PatternView x, const Schedule &schedule)
{
    std::vector<std::size_t> z{0};
    while ( true )
    {
        const std::size_t m = z.size();
        const std::size_t l = schedule(m);
        const std::size_t prev = z.back();
        std::optional<std::size_t> found;
        for ( std::size_t t = 1; prev + t < x.size() && !found; ++t )
        {
            bool eq = true;
            for ( std::size_t d = 0; d < l && eq; ++d )
                eq = x[prev - (l - 1) + t + d] == x[prev - (l - 1) + d];
            if ( eq )
                found = prev + t;
        }
        if ( !found )
            return z;
        z.push_back(*found);
    }
}

/// X~_{-i} = X_{zeta_{J(i)} - i} using only recurrence times not exceeding `known_up_to`.
inline std::optional<Symbol> tilde(PatternView x, const std::vector<std::size_t> &z, const Schedule &schedule,
                                   std::size_t i, std::size_t known_up_to)
{
    std::size_t j = 1;
    while ( schedule(j + 1) <= i )
        ++j;
    if ( j >= z.size() || z[j] > known_up_to )
        return std::nullopt;
    return x[z[j] - i];
}

/// The split-sample deviation statistic at horizon n for context length k, straight from its
/// definition. Candidate tuples of length k+i+1 are grown one symbol to the left from those of length
/// k+i: a tuple can only occur (in either half) if its right suffix does.
inline double delta_hat(PatternView xfull, const std::vector<std::size_t> &z, const EstimatorParams &params,
                        std::size_t n, std::size_t k)
{
    const PatternView x = xfull.first(n + 1);
    std::size_t jk = 1;
    while ( params.schedule(jk + 1) <= k )
        ++jk;
    const std::size_t h = ceil_half(n);
    if ( jk >= z.size() || z[jk] > n || !(z[jk] + 1 <= h))
        return 0.0;

    Pattern c;
    for ( std::size_t i = k; i-- > 0; )
        c.push_back(*tilde(x, z, params.schedule, i, n));

    std::set<Symbol> alphabet(x.begin(), x.end());
    const long lo = static_cast<long>(h);
    const long hi = static_cast<long>(n);
    const double frequency = std::pow(static_cast<double>(n), 1.0 - params.gamma);

    double best = 0.0;
    for ( Symbol last : alphabet )
    {
        Pattern cx = c;
        cx.push_back(last);
        if ( !(in_first_half(x, cx, n) && frequent_in_second_half(x, cx, n, params.gamma)))
            continue;
        const double a = static_cast<double>(count_ends(x, cx, lo + static_cast<long>(k), hi));
        const double b = static_cast<double>(count_ends(x, c, lo + static_cast<long>(k) - 1, hi - 1));
        const double base = a / b;

        std::vector<Pattern> level{cx};
        for ( std::size_t i = 1; i <= n && !level.empty(); ++i )
        {
            std::vector<Pattern> next;
            for ( const auto &suffix : level )
                for ( Symbol s : alphabet )
                {
                    Pattern cand;
                    cand.push_back(s);
                    cand.insert(cand.end(), suffix.begin(), suffix.end());
                    if ( !in_first_half(x, cand, n))
                        continue;
                    // Occurrences inside the second half are exactly the numerator's end positions.
                    const long len = static_cast<long>(cand.size());  // k + i + 1
                    const double num = static_cast<double>(count_ends(x, cand, lo + len - 1, hi));
                    if ( !(num > frequency))
                        continue;
                    const PatternView zc = PatternView(cand).first(cand.size() - 1);
                    const double den = static_cast<double>(count_ends(x, zc, lo + len - 2, hi - 1));
                    best = std::max(best, std::fabs(base - num / den));
                    next.push_back(std::move(cand));
                }
            level = std::move(next);
        }
    }
    return best;
}

struct NaiveResult {
    std::vector<std::size_t> zetas;
    std::vector<std::size_t> lambdas;       // lambda_0 = 0, ...
    std::vector<std::size_t> kappas;        // kappas[r] = chi_{lambda_r}
    std::vector<std::size_t> chis;          // chis[t], chis[0] = 0
    std::vector<std::vector<std::uint64_t>> estimate_counts;  // [r-1][z]
    std::vector<std::optional<double>> estimate_targets;      // [r-1]
    std::map<std::pair<std::size_t, std::size_t>, double> delta_hat;  // (n, k) -> value, k <= chi_n
};

/// Every quantity evaluated by fresh full scans at every time step.
inline NaiveResult naive_full_run(const Path &path, const EstimatorParams &params, std::size_t cap = kDefaultCap)
{
    validate_params(params);
    if ( path.size() > cap )
        throw std::length_error("naive reference capped at " + std::to_string(cap) + " symbols");
    const PatternView x = path.view();
    NaiveResult out;
    out.zetas = zetas(x, params.schedule);
    if ( path.empty())
        return out;

    out.chis.push_back(0);
    for ( std::size_t n = 1; n < path.size(); ++n )
    {
        const double threshold = std::pow(static_cast<double>(n), -params.beta);
        std::size_t chosen = n;
        for ( std::size_t k = 0; k < n; ++k )
        {
            const double d = delta_hat(x, out.zetas, params, n, k);
            out.delta_hat[{n, k}] = d;
            if ( d <= threshold )
            {
                chosen = k;
                break;
            }
        }
        if ( chosen == n )
            throw std::logic_error("no admissible memory estimate below n");
        out.chis.push_back(chosen);
    }

    out.lambdas.push_back(0);
    out.kappas.push_back(0);
    while ( true )
    {
        const std::size_t prev = out.lambdas.back();
        std::size_t j = 0;
        while ( j + 1 < out.zetas.size() && out.zetas[j + 1] <= prev )
            ++j;
        std::optional<std::size_t> found;
        for ( std::size_t t = prev + 1; t < path.size() && !found; ++t )
        {
            const std::size_t chi = out.chis[t];
            bool eq = true;
            for ( std::size_t d = 0; d < chi && eq; ++d )
                eq = x[t - chi + 1 + d] == x[out.zetas[j] - chi + 1 + d];
            if ( eq )
                found = t;
        }
        if ( !found )
            break;
        out.lambdas.push_back(*found);
        out.kappas.push_back(out.chis[*found]);
    }

    for ( std::size_t r = 1; r < out.lambdas.size(); ++r )
    {
        std::vector<std::uint64_t> counts;
        double sum = 0.0;
        for ( std::size_t j = 0; j < r; ++j )
        {
            const Symbol s = x[out.lambdas[j] + 1];
            if ( s >= counts.size())
                counts.resize(s + 1, 0);
            ++counts[s];
            if ( params.target )
                sum += (*params.target)(s);
        }
        out.estimate_counts.push_back(std::move(counts));
        out.estimate_targets.push_back(params.target ? std::optional<double>(sum / static_cast<double>(r))
                                                     : std::nullopt);
    }
    return out;
}

/// Backward recurrence times on a history given newest-first: history[j] = X_{-j}.
/// zeta^_0 = 0 and zeta^_i = zeta^_{i-1} - min{t > 0 : the block of length l(k-i+1) ending at
/// zeta^_{i-1} reappears ending t steps earlier}. Returns zeta^_k, or nullopt if the history runs out.
inline std::optional<long> hat_zeta(PatternView history, std::size_t k, const Schedule &schedule)
{
    const auto at = [&]( long pos ) { return history[static_cast<std::size_t>(-pos)]; };
    const long depth = static_cast<long>(history.size());
    long cur = 0;
    for ( std::size_t i = 1; i <= k; ++i )
    {
        const long l = static_cast<long>(schedule(k - i + 1));
        if ( -(cur - (l - 1)) >= depth )
            return std::nullopt;
        std::optional<long> step;
        for ( long t = 1; !step; ++t )
        {
            if ( -(cur - (l - 1) - t) >= depth )
                return std::nullopt;
            bool eq = true;
            for ( long d = 0; d < l && eq; ++d )
                eq = at(cur - (l - 1) - t + d) == at(cur - (l - 1) + d);
            if ( eq )
                step = t;
        }
        cur -= *step;
    }
    return cur;
}

struct GoodnessOfFit {
    double statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double critical_value = 0.0;  // 0.999 quantile of the chi-square null law
    std::size_t runs = 0;
    bool pass = false;
};

/// Pearson chi-square comparison of the empirical law of (X~_{-m+1}, ..., X~_0) over independent runs
/// with the stationary law of (X_{-m+1}, ..., X_0).
inline GoodnessOfFit tilde_distribution_check(const ProcessSpec &spec, std::size_t m, std::size_t runs,
                                              const Schedule &schedule = Schedule::identity())
{
    if ( m < 1 || m > 4 )
        throw std::invalid_argument("tilde_distribution_check supports 1 <= m <= 4");
    const Oracle base(spec);
    const auto alphabet = base.alphabet_size();
    if ( !alphabet )
        throw UnsupportedSpec("tilde_distribution_check needs a finite alphabet");

    std::size_t j_needed = 1;
    while ( schedule(j_needed + 1) <= m - 1 )
        ++j_needed;

    std::map<Pattern, std::size_t> observed;
    for ( std::size_t r = 0; r < runs; ++r )
    {
        ProcessSpec rs = spec;
        rs.seed = spec.seed * 0x9E3779B97F4A7C15ULL + r + 1;
        const Oracle oracle(rs);
        Sampler sampler(oracle);
        std::vector<Symbol> xs;
        std::vector<std::size_t> z;
        std::size_t target = 16;
        while ( true )
        {
            while ( xs.size() < target )
                xs.push_back(sampler.next());
            z = zetas(xs, schedule);
            if ( z.size() > j_needed )
                break;
            target *= 2;
            if ( target > (std::size_t{1} << 26))
                throw std::runtime_error("recurrence not found within 2^26 symbols");
        }
        Pattern block;
        for ( std::size_t i = m; i-- > 0; )
            block.push_back(*tilde(xs, z, schedule, i, xs.size()));
        ++observed[block];
    }

    GoodnessOfFit g;
    g.runs = runs;
    const std::size_t a = *alphabet;
    const std::size_t cells = detail::ipow(a, m);
    std::size_t positive = 0;
    Pattern cell(m);
    for ( std::size_t code = 0; code < cells; ++code )
    {
        for ( std::size_t j = m, rem = code; j-- > 0; rem /= a )
            cell[j] = static_cast<Symbol>(rem % a);
        const double p = base.marginal_block_probability(cell);
        const auto it = observed.find(cell);
        const double o = it == observed.end() ? 0.0 : static_cast<double>(it->second);
        if ( p <= 0.0 )
        {
            if ( o > 0.0 )
                g.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        ++positive;
        const double e = static_cast<double>(runs) * p;
        g.statistic += (o - e) * (o - e) / e;
    }
    g.degrees_of_freedom = positive > 0 ? positive - 1 : 0;
    if ( g.degrees_of_freedom > 0 )
    {
        boost::math::chi_squared_distribution<double> null_law(static_cast<double>(g.degrees_of_freedom));
        g.critical_value = boost::math::quantile(null_law, 0.999);
    }
    g.pass = g.statistic <= g.critical_value;
    return g;
}

}  // namespace seqpred::reference
