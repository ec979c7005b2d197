#pragma once

// Truncation sensitivity: refit both models on the k largest values for a
// range of k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dgbd/error.hpp"
#include "dgbd/gof.hpp"
#include "dgbd/ranksize.hpp"

namespace dgbd {

struct CutoffRow {
    std::size_t k = 0;
    double powerlaw_exponent = 0.0;
    double powerlaw_scale = 0.0;
    double r_squared_powerlaw = 0.0;
    double r_squared_dgbd = 0.0;
    double b = 0.0;
    double a = 0.0;
    double aic_dgbd = 0.0;
    double aic_powerlaw = 0.0;
    Model aic_winner = Model::PowerLaw;
    std::optional<double> p_value;  // only when bootstrap is enabled and the fit is monotone
};

struct CutoffSweep {
    std::vector<CutoffRow> rows;

    double exponent_range() const noexcept {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& r : rows) {
            lo = std::min(lo, r.powerlaw_exponent);
            hi = std::max(hi, r.powerlaw_exponent);
        }
        return rows.empty() ? 0.0 : hi - lo;
    }
};

struct CutoffOptions {
    bool bootstrap = false;  // costs O(k_max * replicates) fits
    BootstrapOptions bootstrap_options;
};

inline CutoffRow cutoff_row(const RankSizeSample& sample, std::size_t k, const CutoffOptions& opts) {
    const auto sub = sample.top(k);
    const auto dgbd = fit_dgbd(sub);
    const auto pl = fit_powerlaw(sub);
    const auto cmp = compare_models(sub, dgbd, pl);

    CutoffRow row;
    row.k = k;
    row.powerlaw_exponent = pl.exponent;
    row.powerlaw_scale = pl.scale;
    row.r_squared_powerlaw = pl.r_squared;
    row.r_squared_dgbd = dgbd.r_squared;
    row.b = dgbd.params.b;
    row.a = dgbd.params.a;
    row.aic_dgbd = cmp.aic_dgbd;
    row.aic_powerlaw = cmp.aic_powerlaw;
    row.aic_winner = cmp.winner;
    if (opts.bootstrap && dgbd.is_monotone()) {
        auto bo = opts.bootstrap_options;
        bo.seed = derive_seed(bo.seed, k);
        row.p_value = bootstrap_pvalue(sub, dgbd, bo).p_value;
    }
    return row;
}

inline CutoffSweep cutoff_sweep(const RankSizeSample& sample, std::size_t k_min, std::size_t k_max,
                                const CutoffOptions& opts = {}) {
    if (k_min < 3 || k_min > k_max || k_max > sample.size())
        throw DomainError("cutoff sweep needs 3 <= k_min <= k_max <= " + std::to_string(sample.size()));
    CutoffSweep sweep;
    sweep.rows.reserve(k_max - k_min + 1);
    for (std::size_t k = k_min; k <= k_max; ++k) sweep.rows.push_back(cutoff_row(sample, k, opts));
    return sweep;
}

}  // namespace dgbd
