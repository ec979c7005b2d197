#pragma once

// Ranked size data and the DGBD rank-size function
//
//     f(r) = C (r_max + r_min - r)^b / r^a
//
// together with its log-linear least-squares estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dgbd/error.hpp"

namespace dgbd {

using Rank = std::int64_t;

// Sizes sorted descending; rank 1 is the largest value. Immutable once built.
class RankSizeSample {
public:
    // Values must already be positive and descending.
    RankSizeSample(std::vector<double> values, std::string label = {})
        : values_(std::move(values)), label_(std::move(label)) {
        if (values_.size() < 2)
            throw InsufficientDataError("rank-size sample needs at least 2 values, got " +
                                        std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
                throw DomainError("rank-size sample value at rank " + std::to_string(i + 1) +
                                  " is not a finite positive number");
            if (i > 0 && values_[i] > values_[i - 1])
                throw DomainError("rank-size sample is not sorted descending at rank " +
                                  std::to_string(i + 1));
        }
    }

    // Sorts descending. Ties keep their input order.
    static RankSizeSample from_unsorted(std::vector<double> values, std::string label = {}) {
        std::stable_sort(values.begin(), values.end(), std::greater<>{});
        return RankSizeSample(std::move(values), std::move(label));
    }

    // The k largest values, re-ranked 1..k.
    RankSizeSample top(std::size_t k) const {
        if (k > values_.size())
            throw DomainError("cannot take top " + std::to_string(k) + " of a sample of " +
                              std::to_string(values_.size()));
        return RankSizeSample(std::vector<double>(values_.begin(), values_.begin() + k), label_);
    }

    std::span<const double> values() const noexcept { return values_; }
    const std::string& label() const noexcept { return label_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

    double max_value() const noexcept { return values_.front(); }
    double min_value() const noexcept { return values_.back(); }
    Rank min_rank() const noexcept { return 1; }
    Rank max_rank() const noexcept { return static_cast<Rank>(values_.size()); }

private:
    std::vector<double> values_;
    std::string label_;
};

// `b` is the exponent of the reversed-rank factor, `a` the exponent of the
// rank factor. Either may be negative as a regression outcome.
struct DgbdParams {
    double b = 0.0;
    double a = 0.0;
    double scale = 1.0;
    Rank rank_min = 1;
    Rank rank_max = 2;

    void validate() const {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw DomainError("DGBD scale must be positive and finite");
        if (rank_min < 1 || rank_min >= rank_max)
            throw DomainError("DGBD rank bounds must satisfy 1 <= rank_min < rank_max");
        if (!std::isfinite(a) || !std::isfinite(b))
            throw DomainError("DGBD exponents must be finite");
    }

    // Strictly decreasing on [rank_min, rank_max].
    bool is_monotone() const noexcept { return a >= 0.0 && b >= 0.0 && (a > 0.0 || b > 0.0); }

    std::size_t size() const noexcept { return static_cast<std::size_t>(rank_max - rank_min + 1); }
};

struct DgbdFit {
    DgbdParams params;
    double r_squared = 0.0;
    double rss = 0.0;
    std::size_t n = 0;

    bool is_monotone() const noexcept { return params.is_monotone(); }
};

struct PowerLawFit {
    double exponent = 0.0;
    double scale = 1.0;
    double r_squared = 0.0;
    double rss = 0.0;
    std::size_t n = 0;

    double operator()(double r) const { return scale / std::pow(r, exponent); }
};

namespace detail {

inline void require_rank_in_range(const DgbdParams& p, double r) {
    if (!(r >= static_cast<double>(p.rank_min) && r <= static_cast<double>(p.rank_max)))
        throw DomainError("rank " + std::to_string(r) + " outside [" + std::to_string(p.rank_min) +
                          ", " + std::to_string(p.rank_max) + "]");
}

// log f(r) without range checks.
inline double log_dgbd(const DgbdParams& p, double r) noexcept {
    const double reversed = static_cast<double>(p.rank_max + p.rank_min) - r;
    return std::log(p.scale) + p.b * std::log(reversed) - p.a * std::log(r);
}

struct LeastSquares {
    Eigen::VectorXd coef;
    double rss = 0.0;
    double tss = 0.0;
};

// Unweighted OLS via column-pivoted Householder QR. Column 0 must be the
// intercept; a constant response is solved exactly by the intercept alone.
inline LeastSquares least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < design.cols())
        throw SingularRegressionError("regression design matrix is rank deficient");
    LeastSquares out;
    if (response.maxCoeff() == response.minCoeff()) {
        out.coef = Eigen::VectorXd::Zero(design.cols());
        out.coef[0] = response[0];
        return out;
    }
    out.coef = qr.solve(response);
    out.rss = (response - design * out.coef).squaredNorm();
    out.tss = (response.array() - response.mean()).matrix().squaredNorm();
    return out;
}

// A constant response has no variance to explain; a perfect fit of it
// counts as R^2 = 1.
inline double r_squared(double rss, double tss) noexcept {
    if (tss <= 0.0) return rss <= 0.0 ? 1.0 : 0.0;
    return std::clamp(1.0 - rss / tss, 0.0, 1.0);
}

inline Eigen::VectorXd log_response(const RankSizeSample& sample) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(sample.size()));
    for (std::size_t i = 0; i < sample.size(); ++i) y[static_cast<Eigen::Index>(i)] = std::log(sample[i]);
    return y;
}

}  // namespace detail

inline double eval_dgbd(const DgbdParams& params, double r) {
    detail::require_rank_in_range(params, r);
    const double reversed = static_cast<double>(params.rank_max + params.rank_min) - r;
    return params.scale * std::pow(reversed, params.b) / std::pow(r, params.a);
}

// Log-linear OLS: log x_r = log C + b log(r_max + r_min - r) - a log r,
// with r_min = 1 and r_max = sample size.
inline DgbdFit fit_dgbd(const RankSizeSample& sample) {
    const std::size_t n = sample.size();
    if (n < 3)
        throw InsufficientDataError("DGBD fit needs at least 3 values, got " + std::to_string(n));
    const Rank rank_min = sample.min_rank();
    const Rank rank_max = sample.max_rank();

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = static_cast<double>(rank_min) + static_cast<double>(i);
        const auto row = static_cast<Eigen::Index>(i);
        design(row, 0) = 1.0;
        design(row, 1) = std::log(static_cast<double>(rank_max + rank_min) - r);
        design(row, 2) = -std::log(r);
    }
    const auto ls = detail::least_squares(design, detail::log_response(sample));

    DgbdFit fit;
    fit.params = DgbdParams{ls.coef[1], ls.coef[2], std::exp(ls.coef[0]), rank_min, rank_max};
    fit.rss = ls.rss;
    fit.r_squared = detail::r_squared(ls.rss, ls.tss);
    fit.n = n;
    return fit;
}

// Log-linear OLS of size on rank: log x_r = log C - a log r.
inline PowerLawFit fit_powerlaw(const RankSizeSample& sample) {
    const std::size_t n = sample.size();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        design(row, 0) = 1.0;
        design(row, 1) = -std::log(static_cast<double>(i + 1));
    }
    const auto ls = detail::least_squares(design, detail::log_response(sample));

    PowerLawFit fit;
    fit.scale = std::exp(ls.coef[0]);
    fit.exponent = ls.coef[1];
    fit.rss = ls.rss;
    fit.r_squared = detail::r_squared(ls.rss, ls.tss);
    fit.n = n;
    return fit;
}

// Rank at which a monotone DGBD takes the value y. Values above f(r_min)
// clamp to r_min and values below f(r_max) clamp to r_max; the KS CDF relies
// on this.
inline double dgbd_inverse(const DgbdParams& params, double y) {
    if (!params.is_monotone())
        throw UnsupportedModelError("rank inversion requires a >= 0, b >= 0, not both zero");
    if (std::isnan(y)) throw DomainError("cannot invert DGBD at NaN");
    double lo = static_cast<double>(params.rank_min);
    double hi = static_cast<double>(params.rank_max);
    if (y <= 0.0) return hi;
    const double target = std::log(y);
    // Absorb rounding between f and log f at the two ends.
    const double slack = 1e-13 * std::max(1.0, std::abs(target));
    if (target >= detail::log_dgbd(params, lo) - slack) return lo;
    if (target <= detail::log_dgbd(params, hi) + slack) return hi;

    // f is decreasing: f(lo) > y > f(hi) throughout.
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * lo; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (detail::log_dgbd(params, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace dgbd
