#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace tordisc {

/// Sorted sample with step-function evaluation.
class EmpiricalCDF {
public:
    EmpiricalCDF() = default;

    explicit EmpiricalCDF(std::vector<double> samples) : samples_(std::move(samples)) {
        if (samples_.empty()) throw DomainError("EmpiricalCDF: need at least one sample");
        for (double v : samples_) {
            if (std::isnan(v)) throw DomainError("EmpiricalCDF: NaN sample");
        }
        std::sort(samples_.begin(), samples_.end());
    }

    std::size_t size() const { return samples_.size(); }
    const std::vector<double>& samples() const { return samples_; }

    /// Fraction of samples <= z.
    double operator()(double z) const {
        const auto it = std::upper_bound(samples_.begin(), samples_.end(), z);
        return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
    }

    /// Order statistic interpolated at h = (n - 1) q.
    double quantile(double q) const {
        if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile: q must lie in [0, 1]");
        const double h = (static_cast<double>(samples_.size()) - 1.0) * q;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, samples_.size() - 1);
        return samples_[lo] + (h - static_cast<double>(lo)) * (samples_[hi] - samples_[lo]);
    }

    EmpiricalCDF negated() const {
        std::vector<double> v(samples_.size());
        std::transform(samples_.begin(), samples_.end(), v.begin(), [](double x) { return -x; });
        return EmpiricalCDF(std::move(v));
    }

private:
    std::vector<double> samples_;
};

inline double quantile(const EmpiricalCDF& a, double q) { return a.quantile(q); }

/// Two-sample Kolmogorov-Smirnov statistic by a merge scan over both sorted samples.
inline double ks_distance(const EmpiricalCDF& a, const EmpiricalCDF& b) {
    const auto& x = a.samples();
    const auto& y = b.samples();
    if (x.empty() || y.empty()) throw DomainError("ks_distance: empty sample");
    const double na = static_cast<double>(x.size());
    const double nb = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double best = 0.0;
    while (i < x.size() || j < y.size()) {
        double v;
        if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
            v = x[i];
        } else {
            v = y[j];
        }
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return best;
}

/// One-sample KS distance to a continuous CDF.
inline double ks_to_cdf(const EmpiricalCDF& a, const std::function<double(double)>& cdf) {
    const auto& x = a.samples();
    const double n = static_cast<double>(x.size());
    double best = 0.0;
    std::size_t i = 0;
    while (i < x.size()) {
        std::size_t j = i;
        while (j < x.size() && x[j] == x[i]) ++j;
        const double f = cdf(x[i]);
        best = std::max({best, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(j) / n - f)});
        i = j;
    }
    return best;
}

inline double cauchy_cdf(double z, double location = 0.0, double scale = 1.0) {
    return std::atan((z - location) / scale) / pi + 0.5;
}

struct CauchyFit {
    double location = 0.0;
    double scale = 0.0;
    double ks_to_fit = 1.0;
    bool degenerate = false;
};

inline constexpr std::size_t cauchy_fit_min_samples = 100;

/// Location = median, scale = half the interquartile range.
inline CauchyFit cauchy_fit(const EmpiricalCDF& a) {
    if (a.size() < cauchy_fit_min_samples) throw DomainError("cauchy_fit: need at least 100 samples");
    CauchyFit fit;
    fit.location = a.quantile(0.5);
    fit.scale = 0.5 * (a.quantile(0.75) - a.quantile(0.25));
    if (!(fit.scale > 0.0)) {
        fit.scale = 0.0;
        fit.degenerate = true;
        fit.ks_to_fit = 1.0;
        return fit;
    }
    fit.ks_to_fit = ks_to_cdf(a, [&](double z) { return cauchy_cdf(z, fit.location, fit.scale); });
    return fit;
}

struct SampleMoments {
    double mean = 0.0;
    double stddev = 0.0;
};

inline SampleMoments moments(const std::vector<double>& v) {
    SampleMoments m;
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m.mean) * (x - m.mean);
    m.stddev = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return m;
}

}  // namespace tordisc
