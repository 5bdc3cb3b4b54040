#pragma once

#include "core.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace seqpred {

using Row = std::vector<double>;
using Matrix = std::vector<Row>;

struct IidSpec {
    Row probabilities;
};

/// Order-m chain. Row index of a context (s_1, ..., s_m), oldest first, is sum_i s_i * A^(m-i).
struct MarkovSpec {
    std::size_t order = 1;
    std::size_t alphabet = 2;
    Matrix kernel;
};

struct HiddenMarkovSpec {
    Matrix transition;  // hidden x hidden
    Matrix emission;    // hidden x observed alphabet
};

/// P(X = x) = p (1 - p)^x on the nonnegative integers.
struct CountableIidSpec {
    double p = 0.5;
};

struct ProcessSpec {
    std::variant<IidSpec, MarkovSpec, HiddenMarkovSpec, CountableIidSpec> kind;
    std::uint64_t seed = 0;
};

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kStationaryTolerance = 1e-10;

namespace detail {

inline void check_row(const Row &row, std::size_t width, const std::string &what, std::size_t index)
{
    const std::string name = what + " row " + std::to_string(index);
    if ( row.size() != width )
        throw ValidationError(name + " has " + std::to_string(row.size()) + " entries, expected " +
                              std::to_string(width));
    double sum = 0.0;
    for ( double v : row )
    {
        if ( !(v >= 0.0) || !std::isfinite(v))
            throw ValidationError(name + " has an invalid probability");
        sum += v;
    }
    if ( std::abs(sum - 1.0) > kRowSumTolerance )
        throw ValidationError(name + " sums to " + std::to_string(sum) + ", expected 1");
}

inline std::size_t ipow(std::size_t base, std::size_t exp)
{
    std::size_t r = 1;
    while ( exp-- )
        r *= base;
    return r;
}

/// Unique stationary law of a row-stochastic matrix; throws if the chain is not irreducible.
inline Row stationary_law(const Matrix &p, const std::string &what)
{
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd a(n + 1, n);
    for ( Eigen::Index i = 0; i < n; ++i )
        for ( Eigen::Index j = 0; j < n; ++j )
            a(j, i) = p[i][j] - (i == j ? 1.0 : 0.0);
    a.row(n).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    b(n) = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a.topRows(n));
    if ( n > 1 && lu.rank() < n - 1 )
        throw ValidationError(what + " is not irreducible: stationary law is not unique");
    Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);

    Row out(static_cast<std::size_t>(n));
    for ( Eigen::Index i = 0; i < n; ++i )
        out[i] = std::max(0.0, pi(i));
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for ( auto &v : out )
        v /= total;
    for ( Eigen::Index j = 0; j < n; ++j )
    {
        double s = 0.0;
        for ( Eigen::Index i = 0; i < n; ++i )
            s += out[i] * p[i][j];
        if ( std::abs(s - out[j]) > kStationaryTolerance )
            throw ValidationError(what + " stationary law failed the piP = pi check");
    }
    return out;
}

inline double entropy_bits(const Row &row)
{
    double h = 0.0;
    for ( double v : row )
        if ( v > 0.0 )
            h -= v * std::log2(v);
    return h;
}

}  // namespace detail

inline void validate(const ProcessSpec &spec)
{
    std::visit([]( const auto &k ) {
        using K = std::decay_t<decltype(k)>;
        if constexpr ( std::is_same_v<K, IidSpec> )
        {
            if ( k.probabilities.empty())
                throw ValidationError("iid probabilities are empty");
            detail::check_row(k.probabilities, k.probabilities.size(), "iid", 0);
        }
        else if constexpr ( std::is_same_v<K, MarkovSpec> )
        {
            if ( k.order < 1 )
                throw ValidationError("markov order must be at least 1");
            if ( k.alphabet < 1 )
                throw ValidationError("markov alphabet must be non-empty");
            const std::size_t rows = detail::ipow(k.alphabet, k.order);
            if ( k.kernel.size() != rows )
                throw ValidationError("markov kernel has " + std::to_string(k.kernel.size()) +
                                      " rows, expected " + std::to_string(rows));
            for ( std::size_t i = 0; i < rows; ++i )
                detail::check_row(k.kernel[i], k.alphabet, "kernel", i);
        }
        else if constexpr ( std::is_same_v<K, HiddenMarkovSpec> )
        {
            if ( k.transition.empty())
                throw ValidationError("hidden transition kernel is empty");
            if ( k.emission.size() != k.transition.size())
                throw ValidationError("emission kernel needs one row per hidden state");
            for ( std::size_t i = 0; i < k.transition.size(); ++i )
                detail::check_row(k.transition[i], k.transition.size(), "hidden kernel", i);
            const std::size_t width = k.emission.front().size();
            if ( width == 0 )
                throw ValidationError("emission alphabet is empty");
            for ( std::size_t i = 0; i < k.emission.size(); ++i )
                detail::check_row(k.emission[i], width, "emission", i);
        }
        else
        {
            if ( !(k.p > 0.0 && k.p < 1.0))
                throw ValidationError("geometric parameter must lie in (0,1)");
        }
    }, spec.kind);
}

/// Exact stationary quantities of a process spec. Immutable once built.
class Oracle {
public:
    explicit Oracle(ProcessSpec spec) : spec_(std::move(spec))
    {
        validate(spec_);
        if ( const auto *m = std::get_if<MarkovSpec>(&spec_.kind))
        {
            const std::size_t states = m->kernel.size();
            const std::size_t shift = states / m->alphabet;
            Matrix lifted(states, Row(states, 0.0));
            for ( std::size_t s = 0; s < states; ++s )
                for ( std::size_t y = 0; y < m->alphabet; ++y )
                    lifted[s][(s % shift) * m->alphabet + y] += m->kernel[s][y];
            stationary_ = detail::stationary_law(lifted, "markov kernel");
        }
        else if ( const auto *h = std::get_if<HiddenMarkovSpec>(&spec_.kind))
        {
            stationary_ = detail::stationary_law(h->transition, "hidden kernel");
        }
    }

    const ProcessSpec &spec() const noexcept { return spec_; }

    /// Stationary law of the lifted state (markov: length-m blocks; hidden: hidden states).
    const Row &stationary() const noexcept { return stationary_; }

    /// Observed alphabet size, or nullopt for the countable alphabet.
    std::optional<std::size_t> alphabet_size() const
    {
        return std::visit([]( const auto &k ) -> std::optional<std::size_t> {
            using K = std::decay_t<decltype(k)>;
            if constexpr ( std::is_same_v<K, IidSpec> )
                return k.probabilities.size();
            else if constexpr ( std::is_same_v<K, MarkovSpec> )
                return k.alphabet;
            else if constexpr ( std::is_same_v<K, HiddenMarkovSpec> )
                return k.emission.front().size();
            else
                return std::nullopt;
        }, spec_.kind);
    }

    /// Exact stationary probability P(X_0^{L-1} = p).
    double marginal_block_probability(PatternView p) const
    {
        if ( p.empty())
            return 1.0;
        return std::visit([&]( const auto &k ) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr ( std::is_same_v<K, IidSpec> )
            {
                double r = 1.0;
                for ( Symbol x : p )
                    r *= x < k.probabilities.size() ? k.probabilities[x] : 0.0;
                return r;
            }
            else if constexpr ( std::is_same_v<K, CountableIidSpec> )
            {
                double r = 1.0;
                for ( Symbol x : p )
                    r *= k.p * std::pow(1.0 - k.p, static_cast<double>(x));
                return r;
            }
            else if constexpr ( std::is_same_v<K, MarkovSpec> )
            {
                const std::size_t a = k.alphabet;
                for ( Symbol x : p )
                    if ( x >= a )
                        return 0.0;
                const std::size_t m = k.order;
                if ( p.size() <= m )
                {
                    // Sum the stationary law over length-m blocks starting with p.
                    std::size_t prefix = 0;
                    for ( Symbol x : p )
                        prefix = prefix * a + x;
                    const std::size_t tail = detail::ipow(a, m - p.size());
                    double r = 0.0;
                    for ( std::size_t s = prefix * tail; s < (prefix + 1) * tail; ++s )
                        r += stationary_[s];
                    return r;
                }
                std::size_t state = 0;
                for ( std::size_t i = 0; i < m; ++i )
                    state = state * a + p[i];
                double r = stationary_[state];
                const std::size_t shift = detail::ipow(a, m - 1);
                for ( std::size_t i = m; i < p.size() && r > 0.0; ++i )
                {
                    r *= k.kernel[state][p[i]];
                    state = (state % shift) * a + p[i];
                }
                return r;
            }
            else
            {
                const std::size_t hs = k.transition.size();
                Row alpha = stationary_;
                for ( std::size_t i = 0; i < p.size(); ++i )
                {
                    if ( i > 0 )
                    {
                        Row next(hs, 0.0);
                        for ( std::size_t s = 0; s < hs; ++s )
                            for ( std::size_t u = 0; u < hs; ++u )
                                next[u] += alpha[s] * k.transition[s][u];
                        alpha = std::move(next);
                    }
                    for ( std::size_t s = 0; s < hs; ++s )
                        alpha[s] *= p[i] < k.emission[s].size() ? k.emission[s][p[i]] : 0.0;
                }
                return std::accumulate(alpha.begin(), alpha.end(), 0.0);
            }
        }, spec_.kind);
    }

    /// P(next = y | observed), the observed block being the whole past.
    double true_conditional(PatternView observed, Symbol y) const;

    /// Smallest K such that no positive-probability extension of the last K symbols changes the
    /// conditional law; nullopt means infinite.
    std::optional<std::size_t> true_memory_length(PatternView observed) const;

    /// Shannon entropy rate in bits per symbol.
    double entropy_rate() const
    {
        return std::visit([&]( const auto &k ) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr ( std::is_same_v<K, IidSpec> )
                return detail::entropy_bits(k.probabilities);
            else if constexpr ( std::is_same_v<K, CountableIidSpec> )
            {
                const double q = 1.0 - k.p;
                return (-q * std::log2(q) - k.p * std::log2(k.p)) / k.p;
            }
            else if constexpr ( std::is_same_v<K, MarkovSpec> )
            {
                double h = 0.0;
                for ( std::size_t s = 0; s < k.kernel.size(); ++s )
                    h += stationary_[s] * detail::entropy_bits(k.kernel[s]);
                return h;
            }
            else
                throw UnsupportedSpec("entropy rate is not available for hidden_markov specs");
        }, spec_.kind);
    }

    /// sup over extensions z (|z| >= 1) and symbols x with P(z, c, x) > 0 of |P(x | c) - P(x | z, c)|,
    /// where c is the last k symbols of context.
    double true_delta_k(PatternView context, std::size_t k) const
    {
        if ( context.size() < k )
            throw std::invalid_argument("context shorter than k");
        const PatternView c = context.subspan(context.size() - k);
        if ( std::holds_alternative<IidSpec>(spec_.kind) || std::holds_alternative<CountableIidSpec>(spec_.kind))
        {
            if ( marginal_block_probability(c) <= 0.0 )
                throw ZeroProbabilityContext("context has zero probability");
            return 0.0;
        }
        const auto *m = std::get_if<MarkovSpec>(&spec_.kind);
        if ( !m )
            throw UnsupportedSpec("true_delta_k needs an iid or markov spec");
        const double pc = marginal_block_probability(c);
        if ( pc <= 0.0 )
            throw ZeroProbabilityContext("context has zero probability");
        if ( k >= m->order )
            return 0.0;
        // Beyond depth m every conditional equals one of the depth-m rows, so i <= m - k suffices.
        double best = 0.0;
        const std::size_t a = m->alphabet;
        Pattern buf;
        for ( std::size_t i = 1; i <= m->order - k; ++i )
        {
            const std::size_t combos = detail::ipow(a, i);
            for ( std::size_t code = 0; code < combos; ++code )
            {
                buf.assign(i, 0);
                for ( std::size_t j = i, rem = code; j-- > 0; rem /= a )
                    buf[j] = static_cast<Symbol>(rem % a);
                buf.insert(buf.end(), c.begin(), c.end());
                const double pzc = marginal_block_probability(buf);
                if ( pzc <= 0.0 )
                    continue;
                for ( Symbol x = 0; x < a; ++x )
                {
                    buf.push_back(x);
                    const double pzcx = marginal_block_probability(buf);
                    buf.pop_back();
                    if ( pzcx <= 0.0 )
                        continue;
                    Pattern cx(c.begin(), c.end());
                    cx.push_back(x);
                    const double base = marginal_block_probability(cx) / pc;
                    best = std::max(best, std::abs(base - pzcx / pzc));
                }
            }
        }
        return best;
    }

private:
    ProcessSpec spec_;
    Row stationary_;
};

/// Streaming P(next = y | X_0^t) for the process an Oracle describes; exact for every supported kind.
/// For hidden_markov specs this is the normalised forward filter.
class ConditionalFilter {
public:
    explicit ConditionalFilter(const Oracle &oracle) : oracle_(&oracle)
    {
        if ( const auto *h = std::get_if<HiddenMarkovSpec>(&oracle.spec().kind))
        {
            hmm_ = h;
            predictive_ = oracle.stationary();
        }
        else if ( const auto *m = std::get_if<MarkovSpec>(&oracle.spec().kind))
        {
            markov_ = m;
            shift_ = detail::ipow(m->alphabet, m->order - 1);
        }
    }

    std::size_t observed() const noexcept { return observed_; }

    void observe(Symbol x)
    {
        ++observed_;
        if ( hmm_ )
        {
            const std::size_t hs = hmm_->transition.size();
            Row post(hs);
            double z = 0.0;
            for ( std::size_t s = 0; s < hs; ++s )
            {
                post[s] = predictive_[s] * (x < hmm_->emission[s].size() ? hmm_->emission[s][x] : 0.0);
                z += post[s];
            }
            if ( !(z > 0.0))
                throw ZeroProbabilityContext("observed block has zero probability");
            Row next(hs, 0.0);
            for ( std::size_t s = 0; s < hs; ++s )
                for ( std::size_t u = 0; u < hs; ++u )
                    next[u] += post[s] / z * hmm_->transition[s][u];
            predictive_ = std::move(next);
        }
        else if ( markov_ )
        {
            if ( x >= markov_->alphabet )
                throw ZeroProbabilityContext("symbol outside the markov alphabet");
            if ( observed_ <= markov_->order )
            {
                prefix_.push_back(x);
                if ( oracle_->marginal_block_probability(prefix_) <= 0.0 )
                    throw ZeroProbabilityContext("observed block has zero probability");
            }
            else if ( markov_->kernel[state_][x] <= 0.0 )
                throw ZeroProbabilityContext("observed block has zero probability");
            state_ = (state_ % shift_) * markov_->alphabet + x;
        }
        else if ( oracle_->marginal_block_probability(PatternView(&x, 1)) <= 0.0 )
            throw ZeroProbabilityContext("observed symbol has zero probability");
    }

    double predict(Symbol y) const
    {
        if ( hmm_ )
        {
            double r = 0.0;
            for ( std::size_t s = 0; s < predictive_.size(); ++s )
                r += predictive_[s] * (y < hmm_->emission[s].size() ? hmm_->emission[s][y] : 0.0);
            return r;
        }
        if ( markov_ )
        {
            if ( y >= markov_->alphabet )
                return 0.0;
            if ( observed_ >= markov_->order )
                return markov_->kernel[state_][y];
            Pattern ext = prefix_;
            const double den = oracle_->marginal_block_probability(ext);
            ext.push_back(y);
            return oracle_->marginal_block_probability(ext) / den;
        }
        return oracle_->marginal_block_probability(PatternView(&y, 1));
    }

private:
    const Oracle *oracle_;
    const HiddenMarkovSpec *hmm_ = nullptr;
    const MarkovSpec *markov_ = nullptr;
    Row predictive_;
    Pattern prefix_;
    std::size_t shift_ = 1;
    std::size_t state_ = 0;
    std::size_t observed_ = 0;
};

inline double Oracle::true_conditional(PatternView observed, Symbol y) const
{
    ConditionalFilter filter(*this);
    for ( Symbol x : observed )
        filter.observe(x);
    return filter.predict(y);
}

inline std::optional<std::size_t> Oracle::true_memory_length(PatternView observed) const
{
    {
        ConditionalFilter filter(*this);  // throws on a zero-probability block without underflow
        for ( Symbol x : observed )
            filter.observe(x);
    }
    if ( std::holds_alternative<IidSpec>(spec_.kind) || std::holds_alternative<CountableIidSpec>(spec_.kind))
        return 0;

    if ( const auto *h = std::get_if<HiddenMarkovSpec>(&spec_.kind))
    {
        // Identical emission rows make the output iid; an injective deterministic emission makes it a
        // relabelled first-order chain. Anything else has infinite memory on almost every path.
        bool identical = true;
        for ( const auto &row : h->emission )
            identical = identical && row == h->emission.front();
        if ( identical )
            return 0;
        const std::size_t hs = h->transition.size();
        const std::size_t a = h->emission.front().size();
        std::vector<std::size_t> state_of(a, hs);
        for ( std::size_t s = 0; s < hs; ++s )
        {
            std::size_t nonzero = 0;
            std::size_t which = 0;
            for ( std::size_t x = 0; x < a; ++x )
                if ( h->emission[s][x] > 0.0 )
                {
                    ++nonzero;
                    which = x;
                }
            if ( nonzero != 1 || state_of[which] != hs )
                return std::nullopt;
            state_of[which] = s;
        }
        MarkovSpec chain{1, a, Matrix(a, Row(a, 0.0))};
        for ( std::size_t x = 0; x < a; ++x )
        {
            if ( state_of[x] == hs )
            {
                chain.kernel[x][x] = 1.0;  // never emitted; row is irrelevant
                continue;
            }
            for ( std::size_t y = 0; y < a; ++y )
                if ( state_of[y] != hs )
                    chain.kernel[x][y] = h->transition[state_of[x]][state_of[y]];
        }
        try
        {
            return Oracle(ProcessSpec{chain, spec_.seed}).true_memory_length(observed);
        }
        catch ( const ValidationError & )
        {
            return std::nullopt;
        }
    }

    const auto &m = std::get<MarkovSpec>(spec_.kind);
    const std::size_t a = m.alphabet;
    constexpr double tol = 1e-12;
    const std::size_t max_k = std::min(m.order, observed.size());
    Pattern buf;
    for ( std::size_t k = 0; k <= max_k; ++k )
    {
        if ( k == m.order )
            return k;
        const PatternView c = observed.subspan(observed.size() - k);
        const double pc = marginal_block_probability(c);
        Row base(a);
        for ( Symbol y = 0; y < a; ++y )
        {
            Pattern cy(c.begin(), c.end());
            cy.push_back(y);
            base[y] = marginal_block_probability(cy) / pc;
        }
        bool invariant = true;
        for ( std::size_t i = 1; invariant && i <= m.order - k; ++i )
        {
            const std::size_t combos = detail::ipow(a, i);
            for ( std::size_t code = 0; invariant && code < combos; ++code )
            {
                buf.assign(i, 0);
                for ( std::size_t j = i, rem = code; j-- > 0; rem /= a )
                    buf[j] = static_cast<Symbol>(rem % a);
                buf.insert(buf.end(), c.begin(), c.end());
                const double pzc = marginal_block_probability(buf);
                if ( pzc <= 0.0 )
                    continue;
                for ( Symbol y = 0; y < a && invariant; ++y )
                {
                    buf.push_back(y);
                    const double pzcy = marginal_block_probability(buf);
                    buf.pop_back();
                    if ( pzcy > 0.0 && std::abs(pzcy / pzc - base[y]) > tol )
                        invariant = false;
                }
            }
        }
        if ( invariant )
            return k;
    }
    throw std::invalid_argument("observed block shorter than the memory length; need at least " +
                                std::to_string(m.order) + " symbols");
}

/// Seeded sequential sampler of the stationary process. Successive calls extend one sample path,
/// so a shorter run is always a prefix of a longer one with the same seed.
class Sampler {
public:
    explicit Sampler(const Oracle &oracle) : oracle_(&oracle), rng_(oracle.spec().seed) {}

    Symbol next()
    {
        const auto &kind = oracle_->spec().kind;
        if ( const auto *iid = std::get_if<IidSpec>(&kind))
            return draw(iid->probabilities);
        if ( const auto *geo = std::get_if<CountableIidSpec>(&kind))
        {
            const double u = 1.0 - uniform();  // (0, 1]
            return static_cast<Symbol>(std::floor(std::log(u) / std::log1p(-geo->p)));
        }
        if ( const auto *m = std::get_if<MarkovSpec>(&kind))
        {
            if ( t_ == 0 )
            {
                state_ = draw(oracle_->stationary());
                // Unpack the initial length-m block, oldest symbol first.
                pending_.assign(m->order, 0);
                for ( std::size_t j = m->order, rem = state_; j-- > 0; rem /= m->alphabet )
                    pending_[j] = static_cast<Symbol>(rem % m->alphabet);
            }
            ++t_;
            if ( t_ <= m->order )
                return pending_[t_ - 1];
            const Symbol x = draw(m->kernel[state_]);
            state_ = (state_ % detail::ipow(m->alphabet, m->order - 1)) * m->alphabet + x;
            return x;
        }
        const auto &h = std::get<HiddenMarkovSpec>(kind);
        state_ = t_ == 0 ? draw(oracle_->stationary()) : draw(h.transition[state_]);
        ++t_;
        return draw(h.emission[state_]);
    }

private:
    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    Symbol draw(const Row &probabilities)
    {
        const double u = uniform();
        double acc = 0.0;
        std::size_t last = 0;
        for ( std::size_t i = 0; i < probabilities.size(); ++i )
        {
            if ( probabilities[i] <= 0.0 )
                continue;
            last = i;
            acc += probabilities[i];
            if ( u < acc )
                return static_cast<Symbol>(i);
        }
        return static_cast<Symbol>(last);
    }

    const Oracle *oracle_;
    std::mt19937_64 rng_;
    std::size_t state_ = 0;
    std::size_t t_ = 0;
    Pattern pending_;
};

inline Path generate(const ProcessSpec &spec, std::size_t length)
{
    if ( length < 1 )
        throw ValidationError("path length must be at least 1");
    const Oracle oracle(spec);
    Sampler sampler(oracle);
    std::vector<Symbol> xs(length);
    for ( auto &x : xs )
        x = sampler.next();
    return Path(std::move(xs));
}

}  // namespace seqpred
