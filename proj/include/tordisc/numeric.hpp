#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>

namespace tordisc {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;
};

inline DoubleDouble two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return {s, err};
}

inline DoubleDouble two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

/// Dot product evaluated as if in twice the working precision (Ogita-Rump-Oishi Dot2).
inline double dot2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto [p, e] = two_prod(a[i], b[i]);
        const auto [t, q] = two_sum(s, p);
        s = t;
        c += q + e;
    }
    return s + c;
}

/// frac(x + n * alpha) in [0, 1). The product n * alpha is carried exactly so the
/// error does not grow with n.
inline double orbit_coordinate(double x, double alpha, std::int64_t n) {
    const double nd = static_cast<double>(n);
    const double p = nd * alpha;
    const double e = std::fma(nd, alpha, -p);
    const double s = p - std::floor(p);
    double t = (s + x) + e;
    t -= std::floor(t);
    return t >= 1.0 ? 0.0 : t;
}

/// sin(pi x), exactly zero at integers.
inline double sin_pi(double x) {
    double r = x - 2.0 * std::nearbyint(0.5 * x);  // r in [-1, 1]
    if (r > 0.5) {
        r = 1.0 - r;
    } else if (r < -0.5) {
        r = -1.0 - r;
    }
    return std::sin(pi * r);
}

/// cos(pi x), exactly zero at half-integers.
inline double cos_pi(double x) { return sin_pi(x + 0.5); }

/// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
    return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

/// Chebyshev polynomial T_n and its first two derivatives at c.
struct ChebyshevValue {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

inline ChebyshevValue chebyshev(int n, double c) {
    if (n == 0) return {1.0, 0.0, 0.0};
    double t0 = 1.0, t1 = c;
    double d0 = 0.0, d1 = 1.0;
    double s0 = 0.0, s1 = 0.0;
    for (int k = 1; k < n; ++k) {
        const double t2 = 2.0 * c * t1 - t0;
        const double dd2 = 2.0 * t1 + 2.0 * c * d1 - d0;
        const double ss2 = 4.0 * d1 + 2.0 * c * s1 - s0;
        t0 = t1; t1 = t2;
        d0 = d1; d1 = dd2;
        s0 = s1; s1 = ss2;
    }
    return {t1, d1, s1};
}

/// Successive values sin/cos(p * phi + phi0) for p = 1, 2, ... by complex rotation,
/// resynchronised against libm every `resync` steps.
class PhaseRotor {
public:
    PhaseRotor(double phi, double phi0, int resync = 32)
        : phi_(phi), phi0_(phi0), resync_(resync) {
        step_c_ = std::cos(phi);
        step_s_ = std::sin(phi);
        reset(1);
    }

    double sin() const { return s_; }
    double cos() const { return c_; }

    void advance() {
        ++p_;
        if ((p_ - 1) % resync_ == 0) {
            reset(p_);
            return;
        }
        const double c = c_ * step_c_ - s_ * step_s_;
        const double s = s_ * step_c_ + c_ * step_s_;
        c_ = c;
        s_ = s;
    }

private:
    void reset(long p) {
        p_ = p;
        const double a = static_cast<double>(p) * phi_ + phi0_;
        c_ = std::cos(a);
        s_ = std::sin(a);
    }

    double phi_, phi0_;
    int resync_;
    double step_c_ = 1.0, step_s_ = 0.0;
    double c_ = 1.0, s_ = 0.0;
    long p_ = 1;
};

/// Fractional part in [0, 1).
inline double frac(double x) {
    const double f = x - std::floor(x);
    return f >= 1.0 ? 0.0 : f;
}

/// Representative of x mod 1 in (-1/2, 1/2].
inline double centered_mod1(double x) {
    double f = x - std::floor(x);
    if (f > 0.5) f -= 1.0;
    return f;
}

}  // namespace tordisc
