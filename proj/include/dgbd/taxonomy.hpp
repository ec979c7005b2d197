#pragma once

// Datasets as points in the (b, a) plane: distances to the reference
// distributions and complete-linkage clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dgbd/error.hpp"

namespace dgbd {

struct ParamPoint {
    std::string label;
    double b = 0.0;
    double a = 0.0;
};

enum class Reference { Zipf, Uniform, Delta, Lavalette };

inline const char* to_string(Reference r) noexcept {
    switch (r) {
        case Reference::Zipf: return "Zipf";
        case Reference::Uniform: return "Uniform";
        case Reference::Delta: return "Delta";
        case Reference::Lavalette: return "Lavalette";
    }
    return "?";
}

inline constexpr Reference kReferences[] = {Reference::Zipf, Reference::Uniform, Reference::Delta,
                                            Reference::Lavalette};

// (b, a) location of each point reference. Lavalette is the line b = a.
inline constexpr std::pair<double, double> reference_location(Reference r) noexcept {
    switch (r) {
        case Reference::Zipf: return {0.0, 1.0};
        case Reference::Uniform: return {1.0, 0.0};
        case Reference::Delta:
        case Reference::Lavalette: return {0.0, 0.0};
    }
    return {0.0, 0.0};
}

inline double distance(const ParamPoint& p, const ParamPoint& q) noexcept {
    return std::hypot(p.b - q.b, p.a - q.a);
}

// Euclidean distance to a reference point, or perpendicular distance to the
// line b = a.
inline double distance_to(const ParamPoint& p, Reference ref) noexcept {
    if (ref == Reference::Lavalette) return std::abs(p.b - p.a) / std::numbers::sqrt2;
    const auto [b, a] = reference_location(ref);
    return std::hypot(p.b - b, p.a - a);
}

struct Merge {
    std::size_t left = 0;   // cluster ids: leaves are 0..n-1, merge i creates n+i
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;   // leaves under the new cluster
};

class ClusterTree {
public:
    ClusterTree(std::vector<std::string> leaves, std::vector<Merge> merges)
        : leaves_(std::move(leaves)), merges_(std::move(merges)) {}

    const std::vector<std::string>& leaves() const noexcept { return leaves_; }
    const std::vector<Merge>& merges() const noexcept { return merges_; }
    double max_height() const noexcept { return merges_.empty() ? 0.0 : merges_.back().height; }

private:
    std::vector<std::string> leaves_;
    std::vector<Merge> merges_;
};

// Clusters as sorted label lists, ordered by their first label.
using Partition = std::vector<std::vector<std::string>>;

// Agglomerative clustering with maximum linkage. Among equally distant pairs
// the one whose (smaller, larger) min-label pair is lexicographically least
// merges first, which makes the tree independent of input order.
inline ClusterTree complete_linkage(const std::vector<ParamPoint>& points) {
    const std::size_t n = points.size();
    if (n < 2) throw DomainError("clustering needs at least 2 points");
    {
        std::set<std::string> seen;
        for (const auto& p : points)
            if (!seen.insert(p.label).second) throw DomainError("duplicate point label: " + p.label);
    }

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = distance(points[i], points[j]);

    std::vector<bool> active(n, true);
    std::vector<std::size_t> id(n);          // current cluster id held in slot i
    std::vector<std::string> key(n);         // smallest label in slot i
    std::vector<std::size_t> members(n, 1);
    std::vector<std::string> leaves(n);
    for (std::size_t i = 0; i < n; ++i) {
        id[i] = i;
        key[i] = leaves[i] = points[i].label;
    }

    auto pair_key = [&](std::size_t i, std::size_t j) {
        return key[i] < key[j] ? std::pair(key[i], key[j]) : std::pair(key[j], key[i]);
    };

    std::vector<Merge> merges;
    merges.reserve(n - 1);
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                if (!found || dist[i][j] < best ||
                    (dist[i][j] == best && pair_key(i, j) < pair_key(bi, bj))) {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        const std::size_t lo = std::min(id[bi], id[bj]);
        const std::size_t hi = std::max(id[bi], id[bj]);
        members[bi] += members[bj];
        merges.push_back({lo, hi, best, members[bi]});

        for (std::size_t k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            dist[bi][k] = dist[k][bi] = std::max(dist[bi][k], dist[bj][k]);
        }
        active[bj] = false;
        id[bi] = n + step;
        key[bi] = std::min(key[bi], key[bj]);
    }
    return ClusterTree(std::move(leaves), std::move(merges));
}

inline Partition normalize(Partition clusters) {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

// Clusters left after undoing every merge above `height`.
inline Partition cut_tree(const ClusterTree& tree, double height) {
    if (!(height > 0.0)) throw DomainError("cut height must be positive");
    const std::size_t n = tree.leaves().size();
    std::vector<std::size_t> parent(2 * n);
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const auto& merges = tree.merges();
    for (std::size_t i = 0; i < merges.size(); ++i) {
        if (merges[i].height > height) break;  // heights are non-decreasing
        parent[find(merges[i].left)] = n + i;
        parent[find(merges[i].right)] = n + i;
    }
    std::vector<std::vector<std::string>> by_root(2 * n);
    for (std::size_t leaf = 0; leaf < n; ++leaf) by_root[find(leaf)].push_back(tree.leaves()[leaf]);
    Partition out;
    for (auto& c : by_root)
        if (!c.empty()) out.push_back(std::move(c));
    return normalize(std::move(out));
}

// Half the maximum merge height.
inline double default_cut_height(const ClusterTree& tree) noexcept { return 0.5 * tree.max_height(); }

}  // namespace dgbd
