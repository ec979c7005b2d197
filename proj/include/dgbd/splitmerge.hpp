#pragma once

// Split-merge simulation of administrative-unit formation. Each iteration
// splits the two largest units into two random pieces each, then merges a
// fraction of random disjoint pairs drawn from the units that were not just
// split. Total mass is conserved.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dgbd/error.hpp"
#include "dgbd/ranksize.hpp"
#include "dgbd/rng.hpp"

namespace dgbd {

struct ParetoInit {
    double shape = 1.0;
    double scale = 1.0;
};

struct LognormalInit {
    double mu = 0.0;
    double sigma = 1.0;
};

struct CustomInit {
    std::vector<double> sizes;
};

using InitialDistribution = std::variant<ParetoInit, LognormalInit, CustomInit>;

struct SplitMergeConfig {
    InitialDistribution initial = ParetoInit{};
    std::size_t n0 = 10000;
    std::size_t iterations = 1000;
    double merge_fraction = 0.03;
    Seed seed = 0;
    std::size_t fit_stride = 1;  // fit every k-th iteration; 0 and the last are always fitted

    void validate() const {
        if (!(merge_fraction > 0.0 && merge_fraction < 0.5))
            throw ConfigError("merge fraction must lie in (0, 0.5)");
        if (fit_stride == 0) throw ConfigError("fit stride must be positive");
        if (const auto* p = std::get_if<ParetoInit>(&initial)) {
            if (!(p->shape > 0.0 && p->scale > 0.0))
                throw ConfigError("Pareto shape and scale must be positive");
        } else if (const auto* l = std::get_if<LognormalInit>(&initial)) {
            if (!(l->sigma > 0.0) || !std::isfinite(l->mu))
                throw ConfigError("lognormal sigma must be positive and mu finite");
        } else {
            const auto& c = std::get<CustomInit>(initial);
            for (double v : c.sizes)
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError("custom initial sizes must be finite and positive");
        }
        if (n0 < 4 && !std::holds_alternative<CustomInit>(initial))
            throw ConfigError("initial count must be at least 4");
    }
};

struct TrajectoryPoint {
    std::size_t iteration = 0;
    std::size_t n = 0;
    double b = 0.0;
    double a = 0.0;
    double r_squared = 0.0;
    double total_mass = 0.0;
};

struct SplitMergeState {
    std::vector<double> sizes;  // descending
    std::size_t iteration = 0;
    std::vector<TrajectoryPoint> trajectory;
};

// Compensated sum; the conservation checks compare masses to ~1e-12.
inline double total_mass(std::span<const double> sizes) noexcept {
    double sum = 0.0, c = 0.0;
    for (double v : sizes) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

// Replaces the two largest values x1, x2 by p1 x1, (1 - p1) x1, p2 x2,
// (1 - p2) x2. The four pieces are appended at the end, so the untouched
// units are the leading size() - 4 entries.
inline std::vector<double> split_step(std::vector<double> sizes, double p1, double p2) {
    if (sizes.size() < 2) throw StateError("split needs at least 2 units");
    if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0))
        throw DomainError("split fractions must lie in (0, 1)");
    std::partial_sort(sizes.begin(), sizes.begin() + 2, sizes.end(), std::greater<>{});
    const double x1 = sizes[0];
    const double x2 = sizes[1];
    sizes.erase(sizes.begin(), sizes.begin() + 2);
    const double piece1 = p1 * x1;
    const double piece2 = p2 * x2;
    sizes.insert(sizes.end(), {piece1, x1 - piece1, piece2, x2 - piece2});
    return sizes;
}

inline std::vector<double> split_step(std::vector<double> sizes, Rng& rng) {
    const double p1 = rng.uniform_open();
    const double p2 = rng.uniform_open();
    return split_step(std::move(sizes), p1, p2);
}

// Replaces each listed pair of indices by its sum. Indices must be distinct.
inline std::vector<double> merge_pairs(const std::vector<double>& sizes,
                                       std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    std::vector<bool> used(sizes.size(), false);
    std::vector<double> merged;
    merged.reserve(pairs.size());
    for (auto [i, j] : pairs) {
        if (i >= sizes.size() || j >= sizes.size() || i == j || used[i] || used[j])
            throw DomainError("merge pairs must reference distinct valid units");
        used[i] = used[j] = true;
        merged.push_back(sizes[i] + sizes[j]);
    }
    std::vector<double> out;
    out.reserve(sizes.size() - pairs.size());
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (!used[i]) out.push_back(sizes[i]);
    out.insert(out.end(), merged.begin(), merged.end());
    return out;
}

// Number of pairs merged from a pool of the given size.
inline std::size_t merge_count(std::size_t pool, double fraction) noexcept {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool)));
}

// Merges floor(fraction * pool) disjoint random pairs, pool being every unit
// except the trailing `exempt_tail` ones (the pieces of this iteration's split).
inline std::vector<double> merge_step(const std::vector<double>& sizes, double fraction, Rng& rng,
                                      std::size_t exempt_tail = 0) {
    if (!(fraction > 0.0 && fraction < 0.5)) throw ConfigError("merge fraction must lie in (0, 0.5)");
    if (sizes.size() < 4) throw StateError("merge needs at least 4 units");
    if (exempt_tail > sizes.size()) throw StateError("exempt tail larger than the state");
    const std::size_t pool = sizes.size() - exempt_tail;
    const std::size_t m = merge_count(pool, fraction);

    // Partial Fisher-Yates: the first 2m slots become a uniform draw without
    // replacement from the pool.
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < 2 * m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs(m);
    for (std::size_t i = 0; i < m; ++i) pairs[i] = {idx[2 * i], idx[2 * i + 1]};
    return merge_pairs(sizes, pairs);
}

inline std::vector<double> draw_initial(const SplitMergeConfig& config, Rng& rng) {
    if (const auto* c = std::get_if<CustomInit>(&config.initial)) return c->sizes;
    std::vector<double> sizes(config.n0);
    if (const auto* p = std::get_if<ParetoInit>(&config.initial)) {
        for (auto& v : sizes) v = p->scale * std::pow(rng.uniform_open(), -1.0 / p->shape);
    } else {
        const auto& l = std::get<LognormalInit>(config.initial);
        for (auto& v : sizes) v = std::exp(l.mu + l.sigma * rng.normal());
    }
    return sizes;
}

namespace detail {

inline TrajectoryPoint fit_state(std::size_t iteration, const std::vector<double>& sorted_desc) {
    const auto fit = fit_dgbd(RankSizeSample(sorted_desc));
    return {iteration, sorted_desc.size(), fit.params.b, fit.params.a, fit.r_squared,
            total_mass(sorted_desc)};
}

}  // namespace detail

inline SplitMergeState run_simulation(const SplitMergeConfig& config) {
    config.validate();
    Rng rng(config.seed);
    SplitMergeState state;
    state.sizes = draw_initial(config, rng);
    if (state.sizes.size() < 4) throw StateError("split-merge needs at least 4 initial units");
    std::sort(state.sizes.begin(), state.sizes.end(), std::greater<>{});
    state.trajectory.push_back(detail::fit_state(0, state.sizes));

    for (std::size_t t = 1; t <= config.iterations; ++t) {
        auto split = split_step(std::move(state.sizes), rng);
        state.sizes = merge_step(split, config.merge_fraction, rng, 4);
        std::sort(state.sizes.begin(), state.sizes.end(), std::greater<>{});
        state.iteration = t;
        if (t % config.fit_stride == 0 || t == config.iterations)
            state.trajectory.push_back(detail::fit_state(t, state.sizes));
    }
    return state;
}

}  // namespace dgbd
