#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "kac/errors.hpp"
#include "kac/rational.hpp"

namespace kac {

inline constexpr int kMaxClassifierOrder = 12;
inline constexpr int kMaxSetPartitionGround = 10;

// Multi-index over particle slots; components are multiplicities, not sorted.
using MultiIndex = std::vector<int>;

// Sequence of particle labels, repetitions allowed.  Length = cumulant order.
using LabelSequence = std::vector<int>;

/// Integer partition of its order, stored with parts strictly positive and
/// non-increasing.  Trailing zeros of any input are stripped so that two
/// classifiers with the same nonzero parts compare equal.
class Classifier {
public:
    Classifier() = default;

    explicit Classifier(std::vector<int> parts) : parts_(std::move(parts)) {
        for (int p : parts_)
            if (p < 0) throw domain_error("Classifier: negative part");
        std::sort(parts_.begin(), parts_.end(), std::greater<int>());
        while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
        order_ = std::accumulate(parts_.begin(), parts_.end(), 0);
    }

    static Classifier of(const MultiIndex& m) { return Classifier(m); }

    static Classifier of_labels(const LabelSequence& labels) {
        std::map<int, int> mult;
        for (int l : labels) ++mult[l];
        std::vector<int> parts;
        parts.reserve(mult.size());
        for (auto& [l, c] : mult) parts.push_back(c);
        return Classifier(std::move(parts));
    }

    static Classifier ones(int n) { return Classifier(std::vector<int>(n, 1)); }

    const std::vector<int>& parts() const { return parts_; }
    int order() const { return order_; }
    // number of nonzero components
    int length() const { return static_cast<int>(parts_.size()); }
    // 0-based component access; indices beyond length() read as the dropped zeros
    int part(int i) const {
        return (i >= 0 && i < length()) ? parts_[i] : 0;
    }
    bool is_nonrepeated() const { return length() == order_; }

    bool operator==(const Classifier&) const = default;
    auto operator<=>(const Classifier&) const = default;

    std::string to_string() const { // JSON array, e.g. [3,1,1]
        std::string s = "[";
        for (size_t i = 0; i < parts_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(parts_[i]);
        }
        return s + "]";
    }

private:
    std::vector<int> parts_;
    int order_ = 0;
};

inline int classifier_len(const Classifier& r) { return r.length(); }

/// All integer partitions of n in lexicographically decreasing order,
/// starting from (n) and ending with 1_n.
std::vector<Classifier> enumerate_classifiers(int n, int max_order = kMaxClassifierOrder);

/// Partition count by dynamic programming; used as an independent check.
long partition_count(int n);

/// Layers C_{n,1},...,C_{n,n}: layer k holds the classifiers with exactly
/// n-(k-1) nonzero components, so layer 1 is {1_n} and layer n is {(n)}.
std::vector<std::vector<Classifier>> layer_sets(int n, int max_order = kMaxClassifierOrder);

/// Label sequence I_r induced by a multi-index through its increment sequence:
/// label j occupies the positions (Delta_j, Delta_{j+1}].
LabelSequence canonical_label_sequence(const MultiIndex& r);

/// Classifiers reachable by splitting part `pos` (0-based) of r into two
/// nonzero parts.  A part of size < 2 yields the empty set.
std::vector<Classifier> break_set(const Classifier& r, int pos);
std::vector<Classifier> break_set(const Classifier& r);

/// r - (count x pos) and r + (count x pos), 0-based position.
MultiIndex remove_index(const MultiIndex& r, int count, int pos);
MultiIndex add_index(const MultiIndex& r, int count, int pos);

/// Set partition of an arbitrary integer ground set.  Blocks are sorted
/// internally and by their smallest element.
struct SetPartition {
    std::vector<std::vector<int>> blocks;
    int size() const { return static_cast<int>(blocks.size()); }
};

/// All set partitions of the ground set, in restricted-growth-string order.
std::vector<SetPartition> enumerate_set_partitions(const std::vector<int>& ground,
                                                   int max_ground = kMaxSetPartitionGround);

/// Visit every partition of {0,...,n-1} as a restricted growth string
/// (rgs[i] = block id of element i), without materializing blocks.
void for_each_set_partition(int n, const std::function<void(std::span<const int>)>& visit);

long bell_number(int n);

// ---------------------------------------------------------------------------
// Moment / cumulant / Wick algebra.
//
// Values are fetched through a lookup keyed by the sorted label sequence of a
// block, so the same machinery serves double- and rational-valued tables.
// ---------------------------------------------------------------------------

template <class V>
using BlockLookup = std::function<V(const LabelSequence& sorted_labels)>;

namespace detail {

template <class V>
V signed_partition_sum(const LabelSequence& target, const BlockLookup<V>& block_value,
                       bool signed_moebius) {
    const int n = static_cast<int>(target.size());
    if (n == 0) throw domain_error("partition sum over empty sequence");
    V total = 0;
    for_each_set_partition(n, [&](std::span<const int> rgs) {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        V term = 1;
        if (signed_moebius) {
            // (-1)^{k-1} (k-1)!
            for (int b = 1; b < nblocks; ++b) term *= -b;
        }
        for (int b = 0; b < nblocks; ++b) {
            LabelSequence labels;
            for (int i = 0; i < n; ++i)
                if (rgs[i] == b) labels.push_back(target[i]);
            std::sort(labels.begin(), labels.end());
            term *= block_value(labels);
        }
        total += term;
    });
    return total;
}

} // namespace detail

/// Joint cumulant of the target sequence from joint moments:
/// kappa = sum over set partitions of (-1)^{|pi|-1}(|pi|-1)! prod of block moments.
template <class V>
V moments_to_cumulants(const BlockLookup<V>& moment, const LabelSequence& target) {
    return detail::signed_partition_sum<V>(target, moment, true);
}

/// Joint moment of the target sequence from joint cumulants (inverse map).
template <class V>
V cumulants_to_moments(const BlockLookup<V>& cumulant, const LabelSequence& target) {
    return detail::signed_partition_sum<V>(target, cumulant, false);
}

/// E[:Y_J: Y^I]: partition sum over J u I with every block meeting I; a block
/// disjoint from I (Wick-internal) kills the partition.
template <class V>
V truncated_moment(const LabelSequence& wick, const LabelSequence& plain,
                   const BlockLookup<V>& cumulant) {
    if (plain.empty())  // no Wick-internal block possible: ordinary moment
        return wick.empty() ? V(1) : cumulants_to_moments<V>(cumulant, wick);
    LabelSequence all = wick;
    all.insert(all.end(), plain.begin(), plain.end());
    const int n = static_cast<int>(all.size());
    const int wick_count = static_cast<int>(wick.size());
    V total = 0;
    for_each_set_partition(n, [&](std::span<const int> rgs) {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        for (int b = 0; b < nblocks; ++b) {
            bool meets_plain = false;
            for (int i = wick_count; i < n; ++i)
                if (rgs[i] == b) { meets_plain = true; break; }
            if (!meets_plain) return;  // Wick-internal block
        }
        V term = 1;
        for (int b = 0; b < nblocks; ++b) {
            LabelSequence labels;
            for (int i = 0; i < n; ++i)
                if (rgs[i] == b) labels.push_back(all[i]);
            std::sort(labels.begin(), labels.end());
            term *= cumulant(labels);
        }
        total += term;
    });
    return total;
}

/// Map-backed lookups; a missing key is an incomplete input.
template <class V>
BlockLookup<V> lookup_in(const std::map<LabelSequence, V>& table) {
    return [&table](const LabelSequence& key) -> V {
        auto it = table.find(key);
        if (it == table.end())
            throw incomplete_input_error("missing table entry for a label block");
        return it->second;
    };
}

/// Exchangeable cumulant table: one value per classifier, any compatible
/// label sequence resolves through classifier_of.
struct CumulantTable {
    std::map<Classifier, double> entries;

    double at(const Classifier& r) const {
        auto it = entries.find(r);
        if (it == entries.end())
            throw incomplete_input_error("missing cumulant for classifier " + r.to_string());
        return it->second;
    }

    BlockLookup<double> lookup() const {
        return [this](const LabelSequence& labels) { return at(Classifier::of_labels(labels)); };
    }

    // For a Kac-model state the order-1 entry is the conserved mean energy 1.
    bool kac_state_consistent(double tol = 0.0) const {
        auto it = entries.find(Classifier({1}));
        return it != entries.end() && std::abs(it->second - 1.0) <= tol;
    }
};

inline double truncated_moment(const LabelSequence& wick, const LabelSequence& plain,
                               const CumulantTable& cumulants) {
    return truncated_moment<double>(wick, plain, cumulants.lookup());
}

inline double moments_to_cumulants(const std::map<LabelSequence, double>& moments,
                                   const LabelSequence& target) {
    return moments_to_cumulants<double>(lookup_in(moments), target);
}

inline double cumulants_to_moments(const std::map<LabelSequence, double>& cumulants,
                                   const LabelSequence& target) {
    return cumulants_to_moments<double>(lookup_in(cumulants), target);
}

/// Checks sum_l |c(A_l)| >= |c(R\J)| + k - m for a partition pi of the ground
/// set whose blocks all meet J, where m = |c(J) n c(R\J)|.  Used as a
/// structural property of the nonlinear-term generator.
bool coloring_bound_holds(const std::vector<int>& ground,
                          const std::map<int, int>& coloring,
                          const std::vector<int>& wick_free_part,
                          const SetPartition& pi);

} // namespace kac
