#pragma once

#include "block_index.hpp"
#include "core.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace seqpred {

/// Running average of f over the successors X_{lambda_j + 1}, j < steps.
struct Estimate {
    std::uint64_t steps = 0;
    /// counts[z] = number of averaged successors equal to z; the indicator family is counts / steps.
    std::vector<std::uint64_t> counts;
    /// Average of the caller's target function, when one is configured.
    std::optional<double> target;

    double probability(Symbol z) const noexcept
    {
        if ( steps == 0 || z >= counts.size())
            return 0.0;
        return static_cast<double>(counts[z]) / static_cast<double>(steps);
    }

    friend bool operator==(const Estimate &, const Estimate &) = default;
};

struct ZetaEvent {
    std::size_t index;  // m, with zeta_m = position
    Position position;

    friend bool operator==(const ZetaEvent &, const ZetaEvent &) = default;
};

struct LambdaEvent {
    std::size_t index;  // r, with lambda_r = position
    Position position;
    std::size_t kappa;
    Estimate estimate;  // f_r, the estimate of E(f(X_{lambda_r + 1}) | X_0^{lambda_r})

    friend bool operator==(const LambdaEvent &, const LambdaEvent &) = default;
};

using Event = std::variant<ZetaEvent, LambdaEvent>;

/// Online predictor: consumes X_0, X_1, ... one symbol at a time and emits the recurrence times zeta_m
/// and the prediction times lambda_r together with the memory estimate kappa_r and the running
/// estimate of the next-symbol law. Emitted values never change afterwards.
class Predictor {
public:
    explicit Predictor(EstimatorParams params)
            : params_(std::move(params)), index_(checked(params_).gamma)
    {
        zetas_.push_back(0);
        lambdas_.push_back(0);
        kappas_.push_back(0);
    }

    const EstimatorParams &params() const noexcept { return params_; }
    const Path &path() const noexcept { return index_.path(); }
    const SplitIndex &index() const noexcept { return index_; }

    /// Current horizon n; requires at least one observed symbol.
    Position horizon() const noexcept { return index_.horizon(); }

    /// zeta_0 = 0 followed by every recurrence time found so far.
    const std::vector<Position> &zetas() const noexcept { return zetas_; }
    /// lambda_0 = 0 followed by every prediction time found so far.
    const std::vector<Position> &lambdas() const noexcept { return lambdas_; }
    /// kappas()[r] = chi evaluated at lambda_r, with kappas()[0] = chi_0 = 0.
    const std::vector<std::size_t> &kappas() const noexcept { return kappas_; }
    /// chis()[t] for every t observed so far, chis()[0] = 0.
    const std::vector<std::size_t> &chis() const noexcept { return chis_; }
    /// Latest emitted estimate f_r (steps = 0 before the first prediction time).
    const Estimate &estimate() const noexcept { return estimate_; }

    /// Number of chi_t selections of a k > 0 whose context was not yet determined by the first half.
    std::size_t undetermined_context_selections() const noexcept { return undetermined_selections_; }

    /// X~_{-i} = X_{zeta_{J(i)} - i}, or nullopt while zeta_{J(i)} is still pending.
    std::optional<Symbol> tilde(std::size_t i) const
    {
        const std::size_t j = params_.schedule.J(i);
        if ( j >= zetas_.size())
            return std::nullopt;
        return path()[zetas_[j] - i];
    }

    std::vector<Event> step(Symbol x)
    {
        std::vector<Event> events;
        step(x, events);
        return events;
    }

    /// Append X_n and push any completed recurrence / prediction times onto events.
    void step(Symbol x, std::vector<Event> &events)
    {
        index_.push(x);
        const Position n = horizon();
        if ( n == 0 )
        {
            chis_.push_back(0);
            return;
        }
        if ( n == lambdas_.back() + 1 )
            add_successor(x);

        advance_zeta(n, events);

        const std::size_t chi = compute_chi(n);
        chis_.push_back(chi);
        const Position anchor = zetas_[scan_zeta_];
        if ( blocks_equal(n, anchor, chi))
        {
            lambdas_.push_back(n);
            kappas_.push_back(chi);
            estimate_.steps = lambdas_.size() - 1;
            estimate_.counts = successor_counts_;
            if ( params_.target )
                estimate_.target = target_sum_ / static_cast<double>(estimate_.steps);
            events.emplace_back(LambdaEvent{lambdas_.size() - 1, n, chi, estimate_});
            scan_zeta_ = zetas_.size() - 1;
        }
        else if ( scan_zeta_ + 1 < zetas_.size() && zetas_[scan_zeta_ + 1] <= n )
        {
            throw std::logic_error("prediction time passed the next recurrence time at n = " + std::to_string(n));
        }
    }

    /// Exact value of the split-sample deviation statistic at the current horizon for context length k.
    double delta_hat(std::size_t k)
    {
        const Position n = horizon();
        if ( k >= n )
            throw std::invalid_argument("delta_hat needs k < n");
        const auto anchor = context_anchor(n, k);
        if ( !anchor )
            return 0.0;
        return max_deviation(k, *anchor, std::numeric_limits<double>::infinity());
    }

    /// chi at the current horizon, recomputed from scratch (does not touch the recorded history).
    std::size_t chi_now()
    {
        const std::size_t before = undetermined_selections_;
        const std::size_t chi = horizon() == 0 ? 0 : compute_chi(horizon());
        undetermined_selections_ = before;
        return chi;
    }

private:
    static const EstimatorParams &checked(const EstimatorParams &p)
    {
        validate_params(p);
        return p;
    }

    void add_successor(Symbol x)
    {
        if ( x >= successor_counts_.size())
            successor_counts_.resize(static_cast<std::size_t>(x) + 1, 0);
        ++successor_counts_[x];
        if ( params_.target )
            target_sum_ += (*params_.target)(x);
    }

    void advance_zeta(Position n, std::vector<Event> &events)
    {
        const std::size_t m = zetas_.size();
        const std::size_t len = params_.schedule(m);
        const Position prev = zetas_.back();
        if ( blocks_equal(n, prev, len))
        {
            zetas_.push_back(n);
            events.emplace_back(ZetaEvent{m, n});
        }
    }

    /// X_{a-len+1}^a == X_{b-len+1}^b, compared from the most recent symbol backwards.
    bool blocks_equal(Position a, Position b, std::size_t len) const
    {
        const Path &x = path();
        for ( std::size_t d = 0; d < len; ++d )
            if ( x[a - d] != x[b - d] )
                return false;
        return true;
    }

    /// zeta_{J(k)} when it does not exceed ceil(n/2) - 1, else nullopt (the cutoff annihilates the
    /// statistic). The context X~_{-k+1}^0 is then the block of length k ending there.
    std::optional<Position> context_anchor(Position n, std::size_t k) const
    {
        const Position last_first_half = SplitIndex::split_for(n) - 1;
        // m = max{m : zeta_m <= ceil(n/2) - 1}; zeta_{J(k)} <= that bound iff m >= 1 and l(m+1) > k.
        const auto it = std::upper_bound(zetas_.begin(), zetas_.end(), last_first_half);
        const std::size_t m = static_cast<std::size_t>(it - zetas_.begin()) - 1;
        if ( m == 0 || params_.schedule(m + 1) <= k )
            return std::nullopt;
        return zetas_[m];
    }

    std::size_t compute_chi(Position n)
    {
        const double threshold = std::pow(static_cast<double>(n), -params_.beta);
        for ( std::size_t k = 0; k < n; ++k )
        {
            const auto anchor = context_anchor(n, k);
            if ( !anchor )
            {
                if ( k > 0 )
                    ++undetermined_selections_;
                return k;
            }
            if ( max_deviation(k, *anchor, threshold) <= threshold )
                return k;
        }
        throw std::logic_error("no admissible memory estimate below n");
    }

    /// Max over admissible extensions (z, c, x) of |P^(x | c) - P^(x | z, c)| with c the length-k block
    /// ending at anchor. Returns early with the first value above stop_above.
    double max_deviation(std::size_t k, Position anchor, double stop_above)
    {
        const Path &x = path();
        const BlockTrie &trie = index_.trie();
        const WindowCounts &second = index_.second_half();

        symbols_.clear();
        trie.for_each_child(BlockTrie::root(), [&]( NodeId, Symbol s ) { symbols_.push_back(s); });

        double best = 0.0;
        NodeId context = kNoNode;
        double context_den = 0.0;
        for ( const Symbol next : symbols_ )
        {
            // Walk (c, x) from its last symbol back; every suffix must itself be admissible.
            NodeId v = trie.child(BlockTrie::root(), next);
            bool ok = index_.admissible(v);
            for ( std::size_t d = 0; ok && d < k; ++d )
            {
                index_.ensure_depth(d + 2);
                v = trie.child(v, x[anchor - d]);
                ok = index_.admissible(v);
            }
            if ( !ok )
                continue;
            if ( context == kNoNode )
            {
                context = k == 0 ? BlockTrie::root() : trie.block_node(anchor, k);
                context_den = static_cast<double>(index_.second_half_count_before_last(context, k));
            }
            const double base = static_cast<double>(second.count(v)) / context_den;

            stack_.clear();
            stack_.push_back(Frame{v, context, k + 1});
            while ( !stack_.empty())
            {
                const Frame f = stack_.back();
                stack_.pop_back();
                index_.ensure_depth(f.length + 1);
                children_.clear();
                trie.for_each_child(f.full, [&]( NodeId c, Symbol ) { children_.push_back(c); });
                for ( const NodeId g : children_ )
                {
                    if ( !index_.admissible(g))
                        continue;
                    const NodeId q = trie.child(f.prefix, trie.symbol(g));
                    assert(q != kNoNode);
                    const double num = static_cast<double>(second.count(g));
                    const double den = static_cast<double>(index_.second_half_count_before_last(q, f.length));
                    const double dev = std::fabs(base - num / den);
                    if ( dev > best )
                    {
                        best = dev;
                        if ( best > stop_above )
                            return best;
                    }
                    stack_.push_back(Frame{g, q, f.length + 1});
                }
            }
        }
        return best;
    }

    struct Frame {
        NodeId full;    // (z, c, x)
        NodeId prefix;  // (z, c)
        std::size_t length;
    };

    EstimatorParams params_;
    SplitIndex index_;
    std::vector<Position> zetas_;
    std::vector<Position> lambdas_;
    std::vector<std::size_t> kappas_;
    std::vector<std::size_t> chis_;
    Estimate estimate_;
    std::vector<std::uint64_t> successor_counts_;  // includes X_{lambda_r + 1} before lambda_{r+1} is emitted
    double target_sum_ = 0.0;
    std::size_t scan_zeta_ = 0;
    std::size_t undetermined_selections_ = 0;

    std::vector<Symbol> symbols_;
    std::vector<Frame> stack_;
    std::vector<NodeId> children_;
};

/// Whole-path trace of a predictor run.
struct Trace {
    std::vector<Position> zetas;
    std::vector<Position> lambdas;
    std::vector<std::size_t> kappas;
    std::vector<std::size_t> chis;
    std::vector<Estimate> estimates;  // estimates[r - 1] = f_r
    std::vector<Event> events;
};

inline Trace run(const Path &path, const EstimatorParams &params)
{
    Predictor p(params);
    Trace trace;
    for ( Symbol x : path.symbols())
        p.step(x, trace.events);
    trace.zetas = p.zetas();
    trace.lambdas = p.lambdas();
    trace.kappas = p.kappas();
    trace.chis = p.chis();
    for ( const auto &e : trace.events )
        if ( const auto *l = std::get_if<LambdaEvent>(&e))
            trace.estimates.push_back(l->estimate);
    return trace;
}

}  // namespace seqpred
