#include "kac/partitions.hpp"

#include <set>

namespace kac {

std::vector<Classifier> enumerate_classifiers(int n, int max_order) {
    if (n < 1) throw domain_error("enumerate_classifiers: order must be positive");
    if (n > max_order)
        throw size_error("enumerate_classifiers: order " + std::to_string(n) +
                         " exceeds maximum " + std::to_string(max_order));
    // Descending enumeration produces lexicographically decreasing partitions.
    std::vector<Classifier> out;
    std::vector<int> parts;
    auto rec = [&](auto&& self, int remaining, int cap) -> void {
        if (remaining == 0) {
            out.emplace_back(parts);
            return;
        }
        for (int p = std::min(cap, remaining); p >= 1; --p) {
            parts.push_back(p);
            self(self, remaining - p, p);
            parts.pop_back();
        }
    };
    rec(rec, n, n);
    return out;
}

long partition_count(int n) {
    // p(k) via the bounded-part recurrence table.
    std::vector<std::vector<long>> t(n + 1, std::vector<long>(n + 1, 0));
    for (int cap = 0; cap <= n; ++cap) t[0][cap] = 1;
    for (int k = 1; k <= n; ++k)
        for (int cap = 1; cap <= n; ++cap)
            t[k][cap] = t[k][cap - 1] + (k >= cap ? t[k - cap][cap] : 0);
    return t[n][n];
}

std::vector<std::vector<Classifier>> layer_sets(int n, int max_order) {
    auto all = enumerate_classifiers(n, max_order);
    std::vector<std::vector<Classifier>> layers(n);
    for (const auto& r : all) {
        int k = n - (r.length() - 1);  // layer index, 1-based
        layers[k - 1].push_back(r);
    }
    return layers;
}

LabelSequence canonical_label_sequence(const MultiIndex& r) {
    long total = 0;
    for (int c : r) {
        if (c < 0) throw domain_error("canonical_label_sequence: negative component");
        total += c;
    }
    if (total == 0) throw domain_error("canonical_label_sequence: all-zero multi-index");
    LabelSequence seq;
    seq.reserve(total);
    for (size_t j = 0; j < r.size(); ++j)
        for (int k = 0; k < r[j]; ++k) seq.push_back(static_cast<int>(j) + 1);
    return seq;
}

std::vector<Classifier> break_set(const Classifier& r, int pos) {
    if (pos < 0 || pos >= r.order())
        throw index_error("break_set: component index out of range");
    std::set<Classifier> out;
    int value = r.part(pos);
    for (int q1 = 1; q1 < value; ++q1) {
        int q2 = value - q1;
        std::vector<int> parts = r.parts();
        parts[pos] = q1;
        parts.push_back(q2);
        out.insert(Classifier(std::move(parts)));
    }
    return {out.rbegin(), out.rend()};
}

std::vector<Classifier> break_set(const Classifier& r) {
    std::set<Classifier> out;
    for (int pos = 0; pos < r.length(); ++pos)
        for (auto& q : break_set(r, pos)) out.insert(q);
    return {out.rbegin(), out.rend()};
}

MultiIndex remove_index(const MultiIndex& r, int count, int pos) {
    if (pos < 0 || pos >= static_cast<int>(r.size()))
        throw index_error("remove_index: position out of range");
    if (count < 0 || r[pos] < count)
        throw domain_error("remove_index: component smaller than removed count");
    MultiIndex out = r;
    out[pos] -= count;
    return out;
}

MultiIndex add_index(const MultiIndex& r, int count, int pos) {
    if (pos < 0 || pos >= static_cast<int>(r.size()))
        throw index_error("add_index: position out of range");
    if (count < 0) throw domain_error("add_index: negative count");
    MultiIndex out = r;
    out[pos] += count;
    return out;
}

void for_each_set_partition(int n, const std::function<void(std::span<const int>)>& visit) {
    if (n < 1) throw domain_error("for_each_set_partition: empty ground set");
    // Restricted growth strings: rgs[0] = 0, rgs[i] <= max(rgs[0..i-1]) + 1.
    std::vector<int> rgs(n, 0);
    std::vector<int> maxv(n, 0);  // maxv[i] = max of rgs[0..i]
    while (true) {
        visit(std::span<const int>(rgs));
        int i = n - 1;
        while (i > 0 && rgs[i] == maxv[i - 1] + 1) --i;
        if (i == 0) return;
        ++rgs[i];
        maxv[i] = std::max(maxv[i - 1], rgs[i]);
        for (int j = i + 1; j < n; ++j) {
            rgs[j] = 0;
            maxv[j] = maxv[i];
        }
    }
}

std::vector<SetPartition> enumerate_set_partitions(const std::vector<int>& ground, int max_ground) {
    const int n = static_cast<int>(ground.size());
    if (n < 1) throw domain_error("enumerate_set_partitions: empty ground set");
    if (n > max_ground)
        throw size_error("enumerate_set_partitions: ground set size " + std::to_string(n) +
                         " exceeds maximum " + std::to_string(max_ground));
    std::vector<SetPartition> out;
    for_each_set_partition(n, [&](std::span<const int> rgs) {
        int nblocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        SetPartition p;
        p.blocks.resize(nblocks);
        for (int i = 0; i < n; ++i) p.blocks[rgs[i]].push_back(ground[i]);
        for (auto& b : p.blocks) std::sort(b.begin(), b.end());
        out.push_back(std::move(p));
    });
    return out;
}

long bell_number(int n) {
    // Bell triangle
    std::vector<long> row{1};
    for (int i = 1; i <= n; ++i) {
        std::vector<long> next{row.back()};
        for (long v : row) next.push_back(next.back() + v);
        row = std::move(next);
    }
    return row.front();
}

bool coloring_bound_holds(const std::vector<int>& ground,
                          const std::map<int, int>& coloring,
                          const std::vector<int>& wick_free_part,
                          const SetPartition& pi) {
    auto color_of = [&](int elem) {
        auto it = coloring.find(elem);
        if (it == coloring.end()) throw domain_error("coloring_bound_holds: uncolored element");
        return it->second;
    };
    std::set<int> j_set(wick_free_part.begin(), wick_free_part.end());
    if (j_set.empty()) throw domain_error("coloring_bound_holds: J must be nonempty");

    std::set<int> colors_J, colors_I;
    for (int e : ground) {
        if (j_set.count(e))
            colors_J.insert(color_of(e));
        else
            colors_I.insert(color_of(e));
    }
    int m = 0;
    for (int c : colors_J)
        if (colors_I.count(c)) ++m;

    long lhs = 0;
    for (const auto& block : pi.blocks) {
        bool meets_J = false;
        std::set<int> colors;
        for (int e : block) {
            colors.insert(color_of(e));
            if (j_set.count(e)) meets_J = true;
        }
        if (!meets_J)
            throw domain_error("coloring_bound_holds: block internal to R\\J");
        lhs += static_cast<long>(colors.size());
    }
    long rhs = static_cast<long>(colors_I.size()) + pi.size() - m;
    return lhs >= rhs;
}

} // namespace kac
