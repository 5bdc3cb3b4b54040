#pragma once

#include "core.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <memory>
#include <optional>

namespace seqpred {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

/// Trie over every block of the path up to a maximum length.
///
/// The node of a pattern (p_1, ..., p_L) is reached from the root by reading p_L, p_{L-1}, ..., p_1,
/// so the children of a node are its one-symbol left extensions. For each path position e the trie
/// keeps the chain of nodes X_{e-d+1}^e, d = 1..depth(), which makes window updates O(depth()).
class BlockTrie {
public:
    BlockTrie() { nodes_.push_back(Node{0, kNoNode, kNoNode, 0}); }

    const Path &path() const noexcept { return path_; }
    std::size_t size() const noexcept { return path_.size(); }

    /// Longest indexed pattern length.
    std::size_t depth() const noexcept { return depth_; }
    std::size_t node_count() const noexcept { return nodes_.size(); }

    static constexpr NodeId root() noexcept { return 0; }

    Symbol symbol(NodeId v) const { return nodes_[v].symbol; }
    std::size_t length(NodeId v) const { return nodes_[v].length; }

    NodeId child(NodeId v, Symbol x) const noexcept
    {
        for ( NodeId c = nodes_[v].first_child; c != kNoNode; c = nodes_[c].next_sibling )
            if ( nodes_[c].symbol == x )
                return c;
        return kNoNode;
    }

    template < typename Fn >
    void for_each_child(NodeId v, Fn &&fn) const
    {
        for ( NodeId c = nodes_[v].first_child; c != kNoNode; c = nodes_[c].next_sibling )
            fn(c, nodes_[c].symbol);
    }

    /// Node of X_{end-len+1}^{end}; root for len == 0.
    NodeId block_node(Position end, std::size_t len) const
    {
        assert(len <= depth_ && len <= end + 1);
        return len == 0 ? root() : chains_[end][len - 1];
    }

    /// Node of an arbitrary pattern, or kNoNode if it never occurred (or is longer than depth()).
    NodeId find(PatternView p) const noexcept
    {
        if ( p.size() > depth_ )
            return kNoNode;
        NodeId v = root();
        for ( auto it = p.rbegin(); it != p.rend() && v != kNoNode; ++it )
            v = child(v, *it);
        return v;
    }

    void append(Symbol x)
    {
        const Position e = path_.size();
        path_.push_back(x);
        auto &chain = chains_.emplace_back();
        const std::size_t len = std::min(depth_, e + 1);
        chain.reserve(len);
        NodeId v = root();
        for ( std::size_t d = 1; d <= len; ++d )
        {
            v = child_or_create(v, path_[e + 1 - d]);
            chain.push_back(v);
        }
    }

    /// Index patterns one symbol longer than before.
    void deepen()
    {
        ++depth_;
        for ( Position e = depth_ - 1; e < path_.size(); ++e )
        {
            auto &chain = chains_[e];
            const NodeId parent = chain.empty() ? root() : chain.back();
            chain.push_back(child_or_create(parent, path_[e + 1 - depth_]));
        }
    }

private:
    struct Node {
        Symbol symbol;
        NodeId first_child;
        NodeId next_sibling;
        std::uint32_t length;
    };

    NodeId child_or_create(NodeId v, Symbol x)
    {
        if ( const NodeId c = child(v, x); c != kNoNode )
            return c;
        const auto id = static_cast<NodeId>(nodes_.size());
        nodes_.push_back(Node{x, kNoNode, nodes_[v].first_child, nodes_[v].length + 1});
        nodes_[v].first_child = id;
        return id;
    }

    Path path_;
    std::vector<Node> nodes_;
    std::vector<std::vector<NodeId>> chains_;
    std::size_t depth_ = 1;
};

/// Occurrence counts of every pattern of length <= trie depth over a window of end positions.
///
/// count(p) = #{ t in [begin, end) : t - len(p) + 1 >= floor and X_{t-len(p)+1}^t = p }.
/// With floor = 0 this is the plain end-position window; with floor = begin it counts only
/// occurrences lying entirely inside X_begin^{end-1}.
class WindowCounts {
public:
    WindowCounts(const BlockTrie &trie, Position begin = 0, Position floor = 0)
            : trie_(&trie), begin_(begin), end_(begin), floor_(floor) {}

    Position begin() const noexcept { return begin_; }
    Position end() const noexcept { return end_; }
    Position floor() const noexcept { return floor_; }
    std::size_t max_length() const noexcept { return trie_->depth(); }

    /// Number of end positions t in the window with t + 1 >= floor, i.e. the count of the empty pattern.
    std::uint64_t positions() const noexcept
    {
        const Position lo = std::max(begin_, floor_ == 0 ? Position{0} : floor_ - 1);
        return end_ > lo ? end_ - lo : 0;
    }

    std::uint64_t count(NodeId v) const noexcept
    {
        if ( v == BlockTrie::root())
            return positions();
        return v < counts_.size() ? counts_[v] : 0;
    }

    std::uint64_t count(PatternView p) const
    {
        if ( p.size() > trie_->depth())
            throw PatternTooLong("pattern of length " + std::to_string(p.size()) +
                                 " exceeds indexed length " + std::to_string(trie_->depth()));
        if ( p.empty())
            return positions();
        return count(trie_->find(p));
    }

    /// i-th smallest end position (i >= 1) of p in the window.
    std::optional<Position> occurrence(PatternView p, std::size_t i) const
    {
        if ( i == 0 )
            throw std::invalid_argument("occurrence index starts at 1");
        const std::size_t len = p.size();
        const bool indexed = len <= trie_->depth();
        const NodeId v = indexed ? trie_->find(p) : kNoNode;
        if ( indexed && len > 0 && v == kNoNode )
            return std::nullopt;
        const Path &x = trie_->path();
        for ( Position t = begin_; t < end_; ++t )
        {
            if ( t + 1 < floor_ + len )
                continue;
            const bool hit = len == 0 ? true
                                      : indexed ? trie_->block_node(t, len) == v
                                                : std::equal(p.begin(), p.end(), x.view().begin() + (t + 1 - len));
            if ( hit && --i == 0 )
                return t;
        }
        return std::nullopt;
    }

    /// Extend the window by the next end position.
    void push_end()
    {
        assert(end_ < trie_->size());
        add_end(end_, +1);
        ++end_;
    }

    /// Drop the first end position.
    void pop_begin()
    {
        assert(begin_ < end_);
        add_end(begin_, -1);
        ++begin_;
    }

    /// Forget occurrences starting at the current floor, then raise it by one.
    void raise_floor()
    {
        const Position s = floor_;
        const std::size_t depth = trie_->depth();
        for ( Position e = std::max(begin_, s); e < end_ && e - s + 1 <= depth; ++e )
            bump(trie_->block_node(e, e - s + 1), -1);
        ++floor_;
    }

    /// Pick up patterns of the newly indexed length after BlockTrie::deepen().
    void on_deepen()
    {
        const std::size_t d = trie_->depth();
        for ( Position e = begin_; e < end_; ++e )
            if ( e + 1 >= floor_ + d )
                bump(trie_->block_node(e, d), +1);
    }

private:
    void add_end(Position e, int sign)
    {
        if ( e + 1 <= floor_ )
            return;
        const std::size_t len = std::min(trie_->depth(), e + 1 - floor_);
        for ( std::size_t d = 1; d <= len; ++d )
            bump(trie_->block_node(e, d), sign);
    }

    void bump(NodeId v, int sign)
    {
        if ( v >= counts_.size())
            counts_.resize(std::max<std::size_t>(v + 1, counts_.size() * 2), 0);
        assert(sign > 0 || counts_[v] > 0);
        counts_[v] += static_cast<std::uint32_t>(sign);
    }

    const BlockTrie *trie_;
    Position begin_;
    Position end_;
    Position floor_;
    std::vector<std::uint32_t> counts_;
};

/// The path X_0^n split into X_0^{h-1} and X_h^n with h = ceil(n/2), with occurrence counts kept
/// for both halves as n grows. Patterns that occur in the first half and occur more than n^{1-gamma}
/// times in the second half are called admissible; the empirical conditionals are read off the
/// second half.
class SplitIndex {
public:
    explicit SplitIndex(double gamma)
            : gamma_(gamma), trie_(std::make_unique<BlockTrie>()),
              first_(*trie_, 0, 0), second_(*trie_, 0, 0)
    {
        if ( !(gamma > 0.0 && gamma < 1.0))
            throw ValidationError("gamma must lie in (0,1)");
    }

    double gamma() const noexcept { return gamma_; }
    const Path &path() const noexcept { return trie_->path(); }
    const BlockTrie &trie() const noexcept { return *trie_; }
    const WindowCounts &first_half() const noexcept { return first_; }
    const WindowCounts &second_half() const noexcept { return second_; }

    bool empty() const noexcept { return trie_->size() == 0; }
    /// Current horizon n: the index covers X_0^n.
    Position horizon() const noexcept { return trie_->size() - 1; }
    /// h = ceil(n/2), the first position of the second half.
    Position split() const noexcept { return split_for(horizon()); }
    static constexpr Position split_for(Position n) noexcept { return (n + 1) / 2; }

    /// n^{1-gamma}; second-half counts must strictly exceed it.
    double frequency_threshold() const noexcept { return threshold_; }

    void push(Symbol x)
    {
        const bool first_symbol = empty();
        const Position old_split = first_symbol ? 0 : split();
        trie_->append(x);
        second_.push_end();
        if ( !first_symbol && split() > old_split )
        {
            first_.push_end();
            second_.pop_begin();
            second_.raise_floor();
        }
        threshold_ = std::pow(static_cast<double>(horizon()), 1.0 - gamma_);
    }

    void ensure_depth(std::size_t len)
    {
        while ( trie_->depth() < len )
        {
            trie_->deepen();
            first_.on_deepen();
            second_.on_deepen();
        }
    }

    bool in_first_half(NodeId v) const noexcept { return v != kNoNode && first_.count(v) >= 1; }

    bool frequent_in_second_half(NodeId v) const noexcept
    {
        return v != kNoNode && static_cast<double>(second_.count(v)) > frequency_threshold();
    }

    bool admissible(NodeId v) const noexcept { return in_first_half(v) && frequent_in_second_half(v); }

    bool in_first_half(PatternView p)
    {
        if ( p.empty())
            return first_.positions() > 0;
        return in_first_half(locate(p));
    }

    bool frequent_in_second_half(PatternView p)
    {
        if ( p.empty())
            return static_cast<double>(second_.positions()) > frequency_threshold();
        return frequent_in_second_half(locate(p));
    }

    bool admissible(PatternView p) { return in_first_half(p) && frequent_in_second_half(p); }

    /// Second-half count of the pattern at node v (length len) over end positions up to n-1 only.
    std::uint64_t second_half_count_before_last(NodeId v, std::size_t len) const
    {
        if ( len == 0 )
            return second_.positions();
        std::uint64_t c = second_.count(v);
        const Position n = horizon();
        if ( c > 0 && n + 1 >= split() + len && trie_->block_node(n, len) == v )
            --c;
        return c;
    }

    /// #{(context, x) ending in [h+k, n]} / #{context ending in [h+k-1, n-1]} with k = len(context),
    /// or nullopt when the denominator vanishes.
    std::optional<double> empirical_conditional(PatternView context, Symbol x)
    {
        Pattern extended(context.begin(), context.end());
        extended.push_back(x);
        const NodeId vc = context.empty() ? BlockTrie::root() : locate(context);
        const NodeId vx = locate(extended);
        const std::uint64_t den = vc == kNoNode ? 0 : second_half_count_before_last(vc, context.size());
        if ( den == 0 )
            return std::nullopt;
        const std::uint64_t num = vx == kNoNode ? 0 : second_.count(vx);
        return static_cast<double>(num) / static_cast<double>(den);
    }

private:
    NodeId locate(PatternView p)
    {
        ensure_depth(p.size());
        return trie_->find(p);
    }

    double gamma_;
    double threshold_ = 0.0;
    std::unique_ptr<BlockTrie> trie_;
    WindowCounts first_;
    WindowCounts second_;
};

}  // namespace seqpred
