#pragma once

// Goodness of fit for DGBD rank-size models: inverse-transform sampling in
// rank space, the Kolmogorov-Smirnov distance to a fitted model, a
// parametric-bootstrap p-value, and AIC comparison against a power law.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "dgbd/error.hpp"
#include "dgbd/ranksize.hpp"
#include "dgbd/rng.hpp"

namespace dgbd {

enum class Model { Dgbd, PowerLaw };

inline const char* to_string(Model m) noexcept { return m == Model::Dgbd ? "DGBD" : "PowerLaw"; }

inline constexpr int kDgbdParameterCount = 3;      // b, a, C
inline constexpr int kPowerLawParameterCount = 2;  // a, C

struct GofResult {
    double ks_statistic = 0.0;
    double p_value = 0.0;
    std::size_t replicates = 0;
    std::size_t exceed_count = 0;  // replicates with KS >= observed
    Seed seed = 0;
};

struct ModelComparison {
    double aic_dgbd = 0.0;
    double aic_powerlaw = 0.0;
    // ln|AIC_dgbd| - ln|AIC_powerlaw| when both AICs are finite, nonzero and
    // share a sign; otherwise the raw difference AIC_dgbd - AIC_powerlaw and
    // log_diff_defined is false.
    double log_aic_diff = 0.0;
    bool log_diff_defined = false;
    Model winner = Model::PowerLaw;
};

struct BootstrapOptions {
    std::size_t replicates = 1000;
    Seed seed = 0;
    // Refit each replicate before measuring its KS distance. When false the
    // replicate is compared against the generating parameters.
    bool refit = true;
    // 0 = hardware concurrency.
    unsigned threads = 0;
};

// AIC = 2k + n ln(RSS/n). A zero RSS is a perfect fit and maps to -inf.
inline double aic(int k, std::size_t n, double rss) {
    if (k < 1) throw DomainError("AIC parameter count must be positive");
    if (n < 1) throw DomainError("AIC sample size must be positive");
    if (std::isnan(rss) || rss < 0.0) throw DomainError("AIC requires a non-negative RSS");
    if (rss == 0.0) return -std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    return 2.0 * k + nd * std::log(rss / nd);
}

// RSS at or below this is round-off on an exact fit: every log residual is
// within 1e-12 of the largest log magnitude in the sample.
inline double perfect_fit_rss(const RankSizeSample& sample) {
    double scale = 1.0;
    for (double v : sample.values()) scale = std::max(scale, std::abs(std::log(v)));
    const double tol = 1e-12 * scale;
    return static_cast<double>(sample.size()) * tol * tol;
}

inline ModelComparison compare_models(const RankSizeSample& sample, const DgbdFit& dgbd_fit,
                                      const PowerLawFit& powerlaw_fit) {
    const double floor = perfect_fit_rss(sample);
    auto snap = [floor](double rss) { return rss <= floor ? 0.0 : rss; };

    ModelComparison cmp;
    cmp.aic_dgbd = aic(kDgbdParameterCount, sample.size(), snap(dgbd_fit.rss));
    cmp.aic_powerlaw = aic(kPowerLawParameterCount, sample.size(), snap(powerlaw_fit.rss));
    cmp.winner = cmp.aic_dgbd < cmp.aic_powerlaw ? Model::Dgbd : Model::PowerLaw;

    const bool finite = std::isfinite(cmp.aic_dgbd) && std::isfinite(cmp.aic_powerlaw);
    const bool same_sign = (cmp.aic_dgbd > 0.0 && cmp.aic_powerlaw > 0.0) ||
                           (cmp.aic_dgbd < 0.0 && cmp.aic_powerlaw < 0.0);
    if (finite && same_sign) {
        cmp.log_aic_diff = std::log(std::abs(cmp.aic_dgbd)) - std::log(std::abs(cmp.aic_powerlaw));
        cmp.log_diff_defined = true;
    } else if (cmp.aic_dgbd == cmp.aic_powerlaw) {
        cmp.log_aic_diff = 0.0;  // both -inf
    } else {
        cmp.log_aic_diff = cmp.aic_dgbd - cmp.aic_powerlaw;
    }
    return cmp;
}

inline ModelComparison compare_models(const RankSizeSample& sample) {
    return compare_models(sample, fit_dgbd(sample), fit_powerlaw(sample));
}

// Draws n continuous ranks uniformly on [r_min, r_max] and maps them through
// the DGBD. Rank is an affine image of the survival function, so a uniform
// rank is a uniform quantile.
inline RankSizeSample sample_dgbd(const DgbdParams& params, std::size_t n, Seed seed) {
    params.validate();
    if (!params.is_monotone())
        throw UnsupportedModelError("DGBD sampling requires a >= 0, b >= 0, not both zero");
    if (n < 2) throw InsufficientDataError("DGBD sample size must be at least 2");
    Rng rng(seed);
    const double lo = static_cast<double>(params.rank_min);
    const double hi = static_cast<double>(params.rank_max);
    std::vector<double> values(n);
    for (auto& v : values) v = std::exp(detail::log_dgbd(params, rng.uniform(lo, hi)));
    std::sort(values.begin(), values.end(), std::greater<>{});
    return RankSizeSample(std::move(values));
}

// Model CDF at x: 1 - (r(x) - r_min) / (r_max - r_min), clamped to [0, 1].
inline double dgbd_cdf(const DgbdParams& params, double x) {
    const double lo = static_cast<double>(params.rank_min);
    const double span = static_cast<double>(params.rank_max - params.rank_min);
    return std::clamp(1.0 - (dgbd_inverse(params, x) - lo) / span, 0.0, 1.0);
}

// sup |F_emp - F_model|, checked on both sides of every jump of F_emp.
inline double ks_statistic(const RankSizeSample& sample, const DgbdParams& params) {
    if (!params.is_monotone())
        throw UnsupportedModelError("KS test requires a monotone DGBD (a >= 0, b >= 0)");
    const auto values = sample.values();
    const std::size_t n = values.size();
    const double nd = static_cast<double>(n);
    double d = 0.0;
    // Ascending order is the descending sample read backwards.
    for (std::size_t i = 0; i < n; ++i) {
        const double f = dgbd_cdf(params, values[n - 1 - i]);
        d = std::max({d, static_cast<double>(i + 1) / nd - f, f - static_cast<double>(i) / nd});
    }
    return std::clamp(d, 0.0, 1.0);
}

// Tied replicate distances count toward the p-value.
inline double pvalue_from(double observed, std::span<const double> replicate_ks) {
    if (replicate_ks.empty()) throw DomainError("no replicate KS values");
    const auto hits = std::count_if(replicate_ks.begin(), replicate_ks.end(),
                                    [observed](double d) { return d >= observed; });
    return static_cast<double>(hits) / static_cast<double>(replicate_ks.size());
}

namespace detail {

inline double replicate_ks(const DgbdParams& params, std::size_t n, Seed stream, bool refit) {
    const auto replicate = sample_dgbd(params, n, stream);
    if (!refit) return ks_statistic(replicate, params);
    try {
        const auto refitted = fit_dgbd(replicate);
        if (refitted.is_monotone()) return ks_statistic(replicate, refitted.params);
    } catch (const SingularRegressionError&) {
    }
    // A replicate whose refit leaves the monotone family is scored against
    // the generating model instead.
    return ks_statistic(replicate, params);
}

inline unsigned resolve_threads(unsigned requested, std::size_t work) {
    unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(work, 1)));
}

}  // namespace detail

// KS distances of the simulated replicates, in replicate order. Replicate i
// uses stream derive_seed(seed, i), so the output does not depend on the
// thread count.
inline std::vector<double> replicate_ks_values(const DgbdParams& params, std::size_t n,
                                               const BootstrapOptions& opts) {
    if (!params.is_monotone())
        throw UnsupportedModelError("bootstrap requires a monotone DGBD fit (a >= 0, b >= 0)");
    std::vector<double> ks(opts.replicates);
    const unsigned threads = detail::resolve_threads(opts.threads, opts.replicates);
    auto work = [&](std::size_t first) {
        for (std::size_t i = first; i < ks.size(); i += threads)
            ks[i] = detail::replicate_ks(params, n, derive_seed(opts.seed, i), opts.refit);
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    }
    return ks;
}

inline GofResult bootstrap_pvalue(const RankSizeSample& sample, const DgbdFit& fit,
                                  const BootstrapOptions& opts) {
    if (opts.replicates < 100)
        throw ConfigError("bootstrap needs at least 100 replicates, got " +
                          std::to_string(opts.replicates));
    if (!fit.is_monotone())
        throw UnsupportedModelError("bootstrap requires a monotone DGBD fit (a >= 0, b >= 0)");

    GofResult out;
    out.ks_statistic = ks_statistic(sample, fit.params);
    out.replicates = opts.replicates;
    out.seed = opts.seed;
    const auto ks = replicate_ks_values(fit.params, sample.size(), opts);
    out.exceed_count = static_cast<std::size_t>(
        std::count_if(ks.begin(), ks.end(), [&](double d) { return d >= out.ks_statistic; }));
    out.p_value = static_cast<double>(out.exceed_count) / static_cast<double>(opts.replicates);
    return out;
}

inline GofResult bootstrap_pvalue(const RankSizeSample& sample, const DgbdFit& fit,
                                  std::size_t replicates, Seed seed) {
    BootstrapOptions opts;
    opts.replicates = replicates;
    opts.seed = seed;
    return bootstrap_pvalue(sample, fit, opts);
}

}  // namespace dgbd
