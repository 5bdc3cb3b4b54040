#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace seqpred {

/// Alphabet symbol: a dense nonnegative index. Countably infinite alphabets use unbounded indices.
using Symbol = std::uint32_t;
/// Time index into the observed path X_0, X_1, ...
using Position = std::size_t;
/// A finite block of symbols, oldest first. May be empty.
using Pattern = std::vector<Symbol>;
using PatternView = std::span<const Symbol>;

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PatternTooLong : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct ZeroProbabilityContext : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedSpec : std::logic_error {
    using std::logic_error::logic_error;
};

/// Growable observed sample path. Indices are never negative.
class Path {
public:
    Path() = default;
    explicit Path(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

    void push_back(Symbol x) { symbols_.push_back(x); }

    std::size_t size() const noexcept { return symbols_.size(); }
    bool empty() const noexcept { return symbols_.empty(); }

    Symbol operator[](Position t) const noexcept { return symbols_[t]; }

    Symbol at(Position t) const
    {
        if ( t >= symbols_.size())
            throw std::out_of_range("path index " + std::to_string(t) + " not yet observed");
        return symbols_[t];
    }

    /// X_{first}^{last}, inclusive on both ends.
    PatternView block(Position first, Position last) const
    {
        return PatternView(symbols_).subspan(first, last + 1 - first);
    }

    PatternView view() const noexcept { return symbols_; }
    const std::vector<Symbol> &symbols() const noexcept { return symbols_; }

    friend bool operator==(const Path &, const Path &) = default;

private:
    std::vector<Symbol> symbols_;
};

/// Nondecreasing unbounded sequence 1 = l(1) <= l(2) <= ..., l(k) <= k, controlling recurrence block lengths.
class Schedule {
public:
    enum class Kind { identity, logarithmic, table };

    static Schedule identity() { return Schedule(Kind::identity); }

    /// l(n) = min(n, max(1, floor((2+delta)/(eps1-eps2) * log2 n))).
    static Schedule logarithmic(double delta = 1.0, double eps1 = 0.5, double eps2 = 0.25)
    {
        if ( !(delta > 0.0))
            throw ValidationError("logarithmic schedule requires delta > 0");
        if ( !(eps2 > 0.0 && eps1 > eps2))
            throw ValidationError("logarithmic schedule requires 0 < eps2 < eps1");
        Schedule s(Kind::logarithmic);
        s.delta_ = delta;
        s.eps1_ = eps1;
        s.eps2_ = eps2;
        s.exponent_ = (2.0 + delta) / (eps1 - eps2);
        return s;
    }

    /// Explicit table: values[k-1] = l(k) for 1 <= k <= values.size(). Queries past the table throw.
    static Schedule table(std::vector<std::size_t> values)
    {
        if ( values.empty())
            throw ValidationError("schedule table must be non-empty");
        if ( values.front() != 1 )
            throw ValidationError("schedule table must start with l(1) = 1");
        for ( std::size_t k = 1; k <= values.size(); ++k )
        {
            const auto v = values[k - 1];
            if ( v < 1 || v > k )
                throw ValidationError("schedule table needs 1 <= l(k) <= k, violated at k = " + std::to_string(k));
            if ( k > 1 && v < values[k - 2] )
                throw ValidationError("schedule table must be nondecreasing, violated at k = " + std::to_string(k));
        }
        Schedule s(Kind::table);
        s.table_ = std::move(values);
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    double delta() const noexcept { return delta_; }
    double eps1() const noexcept { return eps1_; }
    double eps2() const noexcept { return eps2_; }
    double exponent() const noexcept { return exponent_; }

    /// Largest k for which l(k) is defined.
    std::size_t horizon() const noexcept
    {
        return kind_ == Kind::table ? table_.size() : std::numeric_limits<std::size_t>::max();
    }

    std::size_t operator()(std::size_t k) const
    {
        if ( k == 0 )
            throw std::out_of_range("schedule is indexed from k = 1");
        switch ( kind_ )
        {
            case Kind::identity:
                return k;
            case Kind::logarithmic:
            {
                const double raw = std::floor(exponent_ * std::log2(static_cast<double>(k)));
                const double clipped = std::max(1.0, raw);
                return clipped >= static_cast<double>(k) ? k : static_cast<std::size_t>(clipped);
            }
            case Kind::table:
                if ( k > table_.size())
                    throw std::out_of_range("schedule table horizon " + std::to_string(table_.size()) +
                                            " exceeded at k = " + std::to_string(k));
                return table_[k - 1];
        }
        return k;
    }

    /// J(n) = min{ j >= 1 : l(j+1) > n }.
    std::size_t J(std::size_t n) const
    {
        if ( kind_ == Kind::identity )
            return std::max<std::size_t>(n, 1);
        if ( kind_ == Kind::table )
        {
            for ( std::size_t j = 1; j < table_.size(); ++j )
                if ( table_[j] > n )  // table_[j] = l(j+1)
                    return j;
            throw std::out_of_range("schedule table horizon too short for J(" + std::to_string(n) + ")");
        }
        if ((*this)(2) > n )
            return 1;
        // Gallop to a j with l(j+1) > n, then bisect; l is nondecreasing so the predicate is monotone.
        std::size_t lo = 1;  // l(lo+1) <= n
        std::size_t hi = 2;
        constexpr std::size_t limit = std::size_t{1} << 62;
        while ((*this)(hi + 1) <= n )
        {
            lo = hi;
            if ( hi >= limit )
                throw std::overflow_error("schedule J(n) exceeds representable range");
            hi *= 2;
        }
        while ( hi - lo > 1 )
        {
            const std::size_t mid = lo + (hi - lo) / 2;
            if ((*this)(mid + 1) > n )
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    std::string describe() const
    {
        switch ( kind_ )
        {
            case Kind::identity:
                return "identity";
            case Kind::logarithmic:
            {
                std::ostringstream os;
                os.precision(17);
                os << "log:delta=" << delta_ << ",eps1=" << eps1_ << ",eps2=" << eps2_;
                return os.str();
            }
            case Kind::table:
            {
                std::string out = "table:";
                for ( std::size_t i = 0; i < table_.size(); ++i )
                    out += (i ? "," : "") + std::to_string(table_[i]);
                return out;
            }
        }
        return {};
    }

    friend bool operator==(const Schedule &, const Schedule &) = default;

private:
    explicit Schedule(Kind kind) : kind_(kind) {}

    Kind kind_;
    double delta_ = 0.0;
    double eps1_ = 0.0;
    double eps2_ = 0.0;
    double exponent_ = 0.0;
    std::vector<std::size_t> table_;
};

inline std::size_t schedule_J(const Schedule &s, std::size_t n) { return s.J(n); }

/// Distance between two pasts given newest-first (a[i] = x_{-i}): sum over i of 2^{-i-1} [a[i] != b[i]].
/// Only the common length is compared; the unseen tail adds at most 2^{-min(|a|, |b|)}.
inline double past_distance(PatternView a, PatternView b)
{
    const std::size_t len = std::min(a.size(), b.size());
    double d = 0.0;
    double weight = 0.5;
    for ( std::size_t i = 0; i < len; ++i, weight *= 0.5 )
        if ( a[i] != b[i] )
            d += weight;
    return d;
}

/// Bounded real function of the next symbol, estimated along the stopping times.
struct TargetFunction {
    std::function<double(Symbol)> fn;
    double bound = 1.0;

    double operator()(Symbol x) const
    {
        const double v = fn(x);
        if ( !(std::abs(v) <= bound))
            throw ValidationError("target function value " + std::to_string(v) + " at symbol " +
                                  std::to_string(x) + " exceeds declared bound " + std::to_string(bound));
        return v;
    }
};

struct EstimatorParams {
    double beta = 0.3;
    double gamma = 0.3;
    Schedule schedule = Schedule::identity();
    /// Empty means the indicator family 1{x = z}, which is always tracked.
    std::optional<TargetFunction> target;
};

inline void validate_params(const EstimatorParams &p)
{
    if ( !(p.beta > 0.0))
        throw ValidationError("beta must be positive");
    if ( !(p.beta < 1.0))
        throw ValidationError("beta must be below 1");
    if ( !(p.gamma > 0.0 && p.gamma < 1.0))
        throw ValidationError("gamma must lie in (0,1)");
    if ( !(2.0 * p.beta + p.gamma < 1.0))
        throw ValidationError("2*beta+gamma<1 violated");
    if ( p.target )
    {
        if ( !p.target->fn )
            throw ValidationError("target function is empty");
        if ( !(std::isfinite(p.target->bound) && p.target->bound >= 0.0))
            throw ValidationError("target function needs a finite declared bound");
    }
}

}  // namespace seqpred
