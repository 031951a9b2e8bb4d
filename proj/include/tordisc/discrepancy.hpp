#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "convex_body.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace tordisc {

struct TranslationOrbitSpec {
    ConvexBody body;
    double r = 0.25;
    Vec alpha;
    Vec x;
    std::int64_t N = 0;
    double gamma = 0.0;

    int dimension() const { return body.dimension(); }
    /// Effective scale r N^{-gamma}.
    double scale() const { return gamma == 0.0 ? r : r * std::pow(static_cast<double>(std::max<std::int64_t>(N, 1)), -gamma); }
};

inline void validate(const TranslationOrbitSpec& s) {
    const int d = s.dimension();
    if (s.alpha.size() != d || s.x.size() != d) throw DomainError("orbit spec: alpha and x must have the body's dimension");
    if (!s.alpha.allFinite() || !s.x.allFinite()) throw DomainError("orbit spec: alpha and x must be finite");
    if (!(s.r > 0.0)) throw DomainError("orbit spec: r must be positive");
    if (s.N < 0) throw DomainError("orbit spec: N must be >= 0");
    if (!(s.gamma >= 0.0 && s.gamma < 1.0 / d)) throw DomainError("orbit spec: gamma must lie in [0, 1/d)");
    if (!s.body.fits_unit_cube(s.scale())) throw DomainError("orbit spec: scaled body does not fit in the unit cube");
}

/// Normalisation r^{(d-1)/2} N^{(d-1)(1 - gamma d)/(2d)}.
inline double translation_normalization(int d, double r, double N, double gamma) {
    return std::pow(r, 0.5 * (d - 1)) * std::pow(N, (d - 1) * (1.0 - gamma * d) / (2.0 * d));
}

namespace detail {

/// Axis midpoint of the body r * shape + center; used to pick the unique periodic image.
inline Vec body_midpoint(const ConvexBody& body, double s) {
    Vec m = body.center();
    for (int i = 0; i < body.dimension(); ++i) m[i] += 0.5 * s * (body.extent_plus(i) - body.extent_minus(i));
    return m;
}

/// Membership of the orbit point x + n alpha (mod 1) in the quadric s * shape + c,
/// redone in 50-digit arithmetic from the exact inputs.
inline bool quadric_orbit_member_extended(const ConvexBody& body, double s, const Vec& mid, const Vec& x,
                                          const Vec& alpha, std::int64_t n) {
    using F = boost::multiprecision::cpp_bin_float_50;
    const int d = body.dimension();
    std::vector<F> z(d);
    for (int i = 0; i < d; ++i) {
        F p = F(x[i]) + F(n) * F(alpha[i]) - F(mid[i]);
        p -= boost::multiprecision::floor(p + F(0.5));
        z[i] = p + F(mid[i]) - F(body.center()[i]);
    }
    F q = 0;
    const Mat& inv = body.shape_inverse();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) q += z[i] * F(inv(i, j)) * z[j];
    return q <= F(s) * F(s);
}

}  // namespace detail

/// Number of n in [0, N) with x + n alpha (mod 1) in the body at the spec's scale.
inline std::int64_t orbit_visit_count(const TranslationOrbitSpec& spec) {
    validate(spec);
    const int d = spec.dimension();
    const ConvexBody& body = spec.body;
    const double s = spec.scale();
    const Vec mid = detail::body_midpoint(body, s);
    const Vec c = body.center();
    const bool quadric = body.kind() != BodyKind::support_perturbation;
    const Mat inv = body.shape_inverse() / (s * s);
    const bool diagonal_unit = body.kind() == BodyKind::ball;
    std::vector<double> z(d);
    std::int64_t count = 0;
    for (std::int64_t n = 0; n < spec.N; ++n) {
        for (int i = 0; i < d; ++i) {
            const double p = orbit_coordinate(spec.x[i] - mid[i] + 0.5, spec.alpha[i], n) - 0.5;
            z[i] = p + mid[i] - c[i];
        }
        if (quadric) {
            double q = 0.0;
            if (diagonal_unit) {
                for (int i = 0; i < d; ++i) q += z[i] * z[i];
                q /= s * s;
            } else {
                for (int i = 0; i < d; ++i) {
                    double row = 0.0;
                    for (int j = 0; j < d; ++j) row += inv(i, j) * z[j];
                    q += z[i] * row;
                }
            }
            if (std::abs(q - 1.0) > 1e-12) {
                count += q <= 1.0 ? 1 : 0;
            } else {
                count += detail::quadric_orbit_member_extended(body, s, mid, spec.x, spec.alpha, n) ? 1 : 0;
            }
        } else {
            Vec pt(d);
            for (int i = 0; i < d; ++i) pt[i] = z[i] + c[i];
            count += body.contains(s, pt) ? 1 : 0;
        }
    }
    return count;
}

/// Visit count minus N * Vol of the scaled body.
inline double discrepancy_direct(const TranslationOrbitSpec& spec) {
    if (spec.N == 0) return 0.0;
    const double vol = spec.body.volume() * std::pow(spec.scale(), spec.dimension());
    return static_cast<double>(orbit_visit_count(spec)) - static_cast<double>(spec.N) * vol;
}

inline double normalized_discrepancy(const TranslationOrbitSpec& spec) {
    const double D = discrepancy_direct(spec);
    if (D == 0.0) return 0.0;
    return D / translation_normalization(spec.dimension(), spec.r, static_cast<double>(spec.N), spec.gamma);
}

enum class FourierMode { full_window, resonant };

namespace detail {

/// Normalised contribution of frequency k to the orbit sum, with the exact
/// Dirichlet kernel (full window) or its small-divisor linearisation (resonant).
inline double fourier_term(const TranslationOrbitSpec& spec, const IntVector& k, bool linearized) {
    const int d = spec.dimension();
    const double s = spec.scale();
    const double N = static_cast<double>(spec.N);
    const auto coef = fourier_coeff_asymptotic(spec.body, k, s);
    const std::complex<double> ck = coef.complex_coefficient();
    const double theta = small_divisor(k, spec.alpha).first;
    if (theta == 0.0) {
        // Exact resonance: the kernel tends to N.
        const Vec xs = spec.x - spec.body.center();
        const double kx = frac(dot2(Vec(k.cast<double>()), xs));
        const std::complex<double> e = std::polar(1.0, two_pi * kx);
        return std::pow(s / spec.r, 0.5 * (d - 1)) * (ck * e).real() * N /
               std::pow(N, (d - 1) * (1.0 - spec.gamma * d) / (2.0 * d));
    }
    const Vec xs = spec.x - spec.body.center();
    const Vec kd = k.cast<double>();
    const double kx = frac(dot2(kd, xs));
    const double ph = two_pi * kx + pi * (N - 1.0) * theta;
    const std::complex<double> e = std::polar(1.0, ph);
    const double num = sin_pi(N * theta);
    const double den = linearized ? pi * theta : sin_pi(theta);
    return std::pow(s / spec.r, 0.5 * (d - 1)) * (ck * e).real() * num / den /
           std::pow(N, (d - 1) * (1.0 - spec.gamma * d) / (2.0 * d));
}

}  // namespace detail

/// Fourier approximation of the normalised discrepancy: the full window
/// 0 < |k|^2 < N^{2/d}/eps with exact kernels, or the resonant set with
/// linearised small divisors. Herz asymptotic coefficients throughout.
inline double fourier_discrepancy(const TranslationOrbitSpec& spec, FourierMode mode, double eps) {
    validate(spec);
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("fourier_discrepancy: eps must lie in (0, 1)");
    if (spec.N == 0) return 0.0;
    const int d = spec.dimension();
    const double N = static_cast<double>(spec.N);
    double total = 0.0;
    if (mode == FourierMode::resonant) {
        for (const auto& h : resonant_set(N, spec.alpha, eps)) total += detail::fourier_term(spec, h.k, true);
        return total;
    }
    const double upper = std::pow(N, 2.0 / d) / eps;
    const auto kmax = static_cast<std::int64_t>(std::floor(std::sqrt(upper)));
    IntVector k = IntVector::Constant(d, -kmax);
    while (true) {
        std::int64_t k2 = 0;
        for (int i = 0; i < d; ++i) k2 += k[i] * k[i];
        if (k2 > 0 && static_cast<double>(k2) < upper) total += detail::fourier_term(spec, k, false);
        int i = d - 1;
        while (i >= 0 && k[i] == kmax) {
            k[i] = -kmax;
            --i;
        }
        if (i < 0) break;
        ++k[i];
    }
    return total;
}

/// Sum of the linearised resonant terms over an explicit frequency set U.
inline double resonant_g_sum(const TranslationOrbitSpec& spec, const std::vector<IntVector>& U) {
    validate(spec);
    double total = 0.0;
    for (const auto& k : U) total += detail::fourier_term(spec, k, true);
    return total;
}

struct QSumTerm {
    IntVector m;
    IntVector k;        // first d integer coordinates of sum m_i e_i
    double X_norm = 0.0;
    double Z = 0.0;
};

/// 2 sum_p sum_m q(m, p) over the primitive m occurring in the resonant set and
/// p <= P_max. Symmetric bodies only.
inline double resonant_q_sum(const TranslationOrbitSpec& spec, double eps, int P_max,
                             std::vector<IntVector>* primitive_out = nullptr) {
    validate(spec);
    if (!spec.body.symmetric()) throw VariantMismatch("resonant_q_sum: body must be symmetric");
    if (P_max < 1) throw DomainError("resonant_q_sum: P_max must be >= 1");
    if (spec.N == 0) return 0.0;
    const int d = spec.dimension();
    const double N = static_cast<double>(spec.N);
    const double s = spec.scale();
    const auto lat = UnimodularLattice::dani(N, spec.alpha);
    const ReducedBasis rb = reduced_basis(lat);
    std::set<std::vector<std::int64_t>> ms;
    for (const auto& h : resonant_set(N, spec.alpha, eps, &rb)) ms.insert(std::vector<std::int64_t>(h.m.data(), h.m.data() + h.m.size()));
    const Vec xs = spec.x - spec.body.center();
    const double shift = 0.125 * (d - 1);
    double total = 0.0;
    for (const auto& mv : ms) {
        IntVector m = Eigen::Map<const IntVector>(mv.data(), static_cast<Eigen::Index>(mv.size()));
        if (primitive_out != nullptr) primitive_out->push_back(m);
        const IntVector c = rb.coeffs * m;
        const IntVector k = c.head(d);
        const Vec v = lat.point(c);
        const Vec X = v.head(d);
        const double Z = v[d];
        const double R = X.norm();
        const Vec kd = k.cast<double>();
        const double kinv = 1.0 / std::sqrt(spec.body.curvature(X / R));
        const double Pk = spec.body.shape_support(kd);
        const double kx = frac(dot2(kd, xs));
        for (int p = 1; p <= P_max; ++p) {
            const double pp = static_cast<double>(p);
            const double amp = kinv * std::sin(two_pi * (frac(s * pp * Pk) - shift)) / (pi * pi);
            const double cosarg = two_pi * frac(pp * kx) + pp * pi * (N - 1.0) / N * Z;
            const double zterm = Z == 0.0 ? pi * pp : sin_pi(pp * Z) / Z;
            total += 2.0 * amp * std::cos(cosarg) * zterm / (std::pow(R, 0.5 * (d + 1)) * std::pow(pp, 0.5 * (d + 3)));
        }
    }
    return total;
}

struct TranslationSample {
    std::size_t id = 0;
    double r = 0.0;
    Vec alpha;
    Vec x;
    double raw = 0.0;
    double normalized = 0.0;
    bool short_vector_flag = false;
};

struct TranslationSamplerConfig {
    ConvexBody body = ConvexBody::ball(2);
    double a = 0.2;
    double b = 0.4;
    double gamma = 0.0;
    std::int64_t N = 100000;
    int samples = 1000;
    std::uint64_t seed = 1;
    int threads = 0;
    /// Flag samples whose lattice L(N, alpha) has a vector shorter than this.
    double short_vector_delta = 1e-3;
    bool check_short_vectors = true;
};

inline std::vector<TranslationSample> sample_translation(const TranslationSamplerConfig& cfg) {
    if (cfg.samples < 1) throw DomainError("sampler: samples must be >= 1");
    if (!(cfg.a > 0.0 && cfg.b >= cfg.a)) throw DomainError("sampler: need 0 < a <= b");
    const int d = cfg.body.dimension();
    std::vector<TranslationSample> out(static_cast<std::size_t>(cfg.samples));
    parallel_for(out.size(), [&](std::size_t i) {
        RandomStream rng(cfg.seed, StreamTag::orbit, i);
        TranslationOrbitSpec spec{cfg.body, rng.uniform(cfg.a, cfg.b), rng.uniform_torus(d), rng.uniform_torus(d), cfg.N, cfg.gamma};
        TranslationSample& s = out[i];
        s.id = i;
        s.r = spec.r;
        s.alpha = spec.alpha;
        s.x = spec.x;
        s.raw = discrepancy_direct(spec);
        s.normalized = s.raw == 0.0 ? 0.0 : s.raw / translation_normalization(d, spec.r, static_cast<double>(cfg.N), cfg.gamma);
        if (cfg.check_short_vectors && d >= 1 && cfg.N >= 2) {
            try {
                const auto lat = UnimodularLattice::dani(static_cast<double>(cfg.N), spec.alpha);
                s.short_vector_flag = reduced_basis(lat).vectors.col(0).norm() < cfg.short_vector_delta;
            } catch (const ReductionError&) {
                s.short_vector_flag = true;
            }
        }
    }, cfg.threads);
    return out;
}

inline EmpiricalCDF sample_translation_ecdf(const TranslationSamplerConfig& cfg) {
    const auto s = sample_translation(cfg);
    std::vector<double> v;
    v.reserve(s.size());
    for (const auto& x : s) v.push_back(x.normalized);
    return EmpiricalCDF(std::move(v));
}

/// #{0 <= n < N : x + n alpha mod 1 in [0, r]} - N r.
inline double kesten_discrepancy(double r, double x, double alpha, std::int64_t N) {
    if (!(r > 0.0 && r < 1.0)) throw DomainError("kesten_discrepancy: r must lie in (0, 1)");
    if (N < 0) throw DomainError("kesten_discrepancy: N must be >= 0");
    std::int64_t count = 0;
    for (std::int64_t n = 0; n < N; ++n) count += orbit_coordinate(x, alpha, n) <= r ? 1 : 0;
    return static_cast<double>(count) - static_cast<double>(N) * r;
}

struct KestenSample {
    std::size_t id = 0;
    double x = 0.0;
    double alpha = 0.0;
    double raw = 0.0;
    double normalized = 0.0;   // raw / ln N
};

inline std::vector<KestenSample> sample_kesten(double r, std::int64_t N, int samples, std::uint64_t seed, int threads = 0) {
    if (samples < 1) throw DomainError("kesten sampler: samples must be >= 1");
    if (N < 2) throw DomainError("kesten sampler: N must be >= 2");
    std::vector<KestenSample> out(static_cast<std::size_t>(samples));
    const double ln = std::log(static_cast<double>(N));
    parallel_for(out.size(), [&](std::size_t i) {
        RandomStream rng(seed, StreamTag::kesten, i);
        auto& s = out[i];
        s.id = i;
        s.x = rng.uniform();
        s.alpha = rng.uniform();
        s.raw = kesten_discrepancy(r, s.x, s.alpha, N);
        s.normalized = s.raw / ln;
    }, threads);
    return out;
}

struct FlowOrbitSpec {
    ConvexBody body;
    double r = 0.25;
    Vec v;
    Vec x;
    double T = 0.0;

    int dimension() const { return body.dimension(); }
};

namespace detail {

/// Calls f(t0, t1, z0) for consecutive pieces of [0, T] on which x + t v stays in
/// one periodic cell around mid; z0 is the cell-centred position at t0.
template <typename F>
void for_each_cell_piece(const Vec& x, const Vec& v, const Vec& mid, double T, F&& f) {
    const int d = static_cast<int>(x.size());
    Vec base(d);
    std::vector<std::int64_t> shift(d);
    std::vector<double> next(d);
    for (int i = 0; i < d; ++i) {
        base[i] = x[i] - mid[i];
        shift[i] = static_cast<std::int64_t>(std::nearbyint(base[i]));
        next[i] = std::numeric_limits<double>::infinity();
        if (v[i] > 0.0) {
            next[i] = (static_cast<double>(shift[i]) + 0.5 - base[i]) / v[i];
        } else if (v[i] < 0.0) {
            next[i] = (static_cast<double>(shift[i]) - 0.5 - base[i]) / v[i];
        }
    }
    double t = 0.0;
    Vec z(d);
    while (t < T) {
        int arg = 0;
        for (int i = 1; i < d; ++i)
            if (next[i] < next[arg]) arg = i;
        const double t1 = std::min(next[arg], T);
        for (int i = 0; i < d; ++i) z[i] = base[i] + t * v[i] - static_cast<double>(shift[i]);
        if (t1 > t) f(t, t1, static_cast<const Vec&>(z));
        if (next[arg] >= T) break;
        t = next[arg];
        shift[arg] += v[arg] > 0.0 ? 1 : -1;
        next[arg] = v[arg] > 0.0 ? (static_cast<double>(shift[arg]) + 0.5 - base[arg]) / v[arg]
                                 : (static_cast<double>(shift[arg]) - 0.5 - base[arg]) / v[arg];
    }
}

}  // namespace detail

/// Time in [0, T] spent by x + t v (mod 1) in the body r * shape + center.
inline double flow_time_in_body(const FlowOrbitSpec& spec) {
    const int d = spec.dimension();
    if (spec.v.size() != d || spec.x.size() != d) throw DomainError("flow spec: v and x must have the body's dimension");
    if (!(spec.v.norm() > 0.0)) throw DomainError("flow spec: v must be nonzero");
    if (!(spec.r > 0.0)) throw DomainError("flow spec: r must be positive");
    if (!(spec.T >= 0.0)) throw DomainError("flow spec: T must be >= 0");
    if (!spec.body.fits_unit_cube(spec.r)) throw DomainError("flow spec: scaled body does not fit in the unit cube");
    if (spec.T == 0.0) return 0.0;
    const ConvexBody& body = spec.body;
    const double s = spec.r;
    const Vec mid = detail::body_midpoint(body, s);
    const Vec cm = body.center() - mid;  // body center in cell coordinates
    double total = 0.0;
    if (body.kind() != BodyKind::support_perturbation) {
        const Mat a = body.shape_inverse();
        const Vec av = a * spec.v;
        const double qa = spec.v.dot(av);
        detail::for_each_cell_piece(spec.x, spec.v, mid, spec.T, [&](double t0, double t1, const Vec& z0) {
            const Vec w = z0 - cm;
            const double qb = w.dot(av);
            const double tc = -qb / qa;  // closest approach, relative to t0
            const Vec wc = w + tc * spec.v;
            const double h = wc.dot(a * wc);
            const double rem = s * s - h;
            if (rem <= 0.0) return;
            const double half = std::sqrt(rem / qa);
            const double lo = std::max(0.0, tc - half);
            const double hi = std::min(t1 - t0, tc + half);
            if (hi > lo) total += hi - lo;
        });
        return total;
    }
    const double step = body.inradius() * s / (2.0 * spec.v.norm());
    auto inside = [&](const Vec& z) { return body.separation((z - cm) / s) >= 0.0; };
    detail::for_each_cell_piece(spec.x, spec.v, mid, spec.T, [&](double t0, double t1, const Vec& z0) {
        const double len = t1 - t0;
        // Quick reject: the segment stays farther than the circumradius.
        const Vec w = z0 - cm;
        const double tc = std::clamp(-w.dot(spec.v) / spec.v.squaredNorm(), 0.0, len);
        if ((w + tc * spec.v).norm() > body.circumradius() * s) return;
        auto at = [&](double t) { return Vec(z0 + t * spec.v); };
        const int steps = std::max(1, static_cast<int>(std::ceil(len / step)));
        const double h = len / steps;
        int first = -1, last = -1;
        for (int i = 0; i <= steps; ++i) {
            if (inside(at(i * h))) {
                if (first < 0) first = i;
                last = i;
            }
        }
        if (first < 0) return;
        auto bisect = [&](double in, double out) {
            for (int it = 0; it < 200 && std::abs(out - in) > 1e-12; ++it) {
                const double m = 0.5 * (in + out);
                if (inside(at(m))) {
                    in = m;
                } else {
                    out = m;
                }
            }
            return 0.5 * (in + out);
        };
        const double enter = first == 0 ? 0.0 : bisect(first * h, (first - 1) * h);
        const double exit = last == steps ? len : bisect(last * h, (last + 1) * h);
        total += exit - enter;
    });
    return total;
}

inline double flow_discrepancy(const FlowOrbitSpec& spec) {
    if (spec.dimension() == 3) throw UnsupportedDimension("flow discrepancy: d = 3 is not supported");
    const double vol = spec.body.volume() * std::pow(spec.r, spec.dimension());
    return flow_time_in_body(spec) - spec.T * vol;
}

/// Flow normalisation r^{(d-1)/2} T^{(d-3)/(2(d-1))} for d >= 4; 1 for d <= 2.
inline double flow_normalization(int d, double r, double T) {
    if (d == 3) throw UnsupportedDimension("flow normalization: d = 3 is not supported");
    if (d <= 2) return 1.0;
    return std::pow(r, 0.5 * (d - 1)) * std::pow(T, (d - 3.0) / (2.0 * (d - 1.0)));
}

inline double normalized_flow_discrepancy(const FlowOrbitSpec& spec) {
    const double D = flow_discrepancy(spec);
    return D / flow_normalization(spec.dimension(), spec.r, spec.T);
}

struct CylinderResult {
    std::int64_t count = 0;
    double volume = 0.0;
    double discrepancy = 0.0;
};

/// Volume of the set of points within r of a segment of length len in R^n.
inline double capsule_volume(int n, double r, double len) {
    return unit_ball_volume(n - 1) * std::pow(r, n - 1) * len + unit_ball_volume(n) * std::pow(r, n);
}

namespace detail {

inline double segment_distance2(const Vec& z, const Vec& y, const Vec& v, double T) {
    const Vec w = z - y;
    const double t = std::clamp(w.dot(v) / v.squaredNorm(), 0.0, T);
    return (w - t * v).squaredNorm();
}

}  // namespace detail

/// Integer points of the last-coordinate slab n within distance r (closed) of
/// the segment y + t v, t in [0, T].
inline std::int64_t cylinder_slab_count(const Vec& y, const Vec& v, double r, double T, std::int64_t n) {
    const int dim = static_cast<int>(y.size());
    const int d = dim - 1;
    const double vl = v[d];
    double tlo = (static_cast<double>(n) - y[d] - r) / vl;
    double thi = (static_cast<double>(n) - y[d] + r) / vl;
    tlo = std::max(tlo, 0.0);
    thi = std::min(thi, T);
    if (tlo > thi) {
        // Only the end caps can reach this slab.
        tlo = thi = std::clamp(tlo, 0.0, T);
    }
    std::vector<std::int64_t> lo(d), hi(d);
    for (int i = 0; i < d; ++i) {
        const double a = y[i] + tlo * v[i], b = y[i] + thi * v[i];
        lo[i] = static_cast<std::int64_t>(std::ceil(std::min(a, b) - r));
        hi[i] = static_cast<std::int64_t>(std::floor(std::max(a, b) + r));
        if (lo[i] > hi[i]) return 0;
    }
    std::int64_t count = 0;
    std::vector<std::int64_t> m = lo;
    Vec z(dim);
    z[d] = static_cast<double>(n);
    const double r2 = r * r;
    while (true) {
        for (int i = 0; i < d; ++i) z[i] = static_cast<double>(m[i]);
        if (detail::segment_distance2(z, y, v, T) <= r2) ++count;
        int i = d - 1;
        while (i >= 0 && m[i] == hi[i]) {
            m[i] = lo[i];
            --i;
        }
        if (i < 0) break;
        ++m[i];
    }
    return count;
}

/// Integer points in the closed capsule around y + t v, t in [0, T], and the count
/// minus the capsule volume. Requires v's last coordinate positive.
inline CylinderResult cylinder_count(const Vec& y, const Vec& v, double r, double T) {
    if (y.size() != v.size() || y.size() < 2) throw DomainError("cylinder_count: y and v must share a dimension >= 2");
    const int d = static_cast<int>(y.size()) - 1;
    if (!(v[d] > 0.0)) throw DomainError("cylinder_count: last coordinate of v must be positive");
    if (!(r > 0.0)) throw DomainError("cylinder_count: r must be positive");
    if (!(T >= 0.0)) throw DomainError("cylinder_count: T must be >= 0");
    CylinderResult res;
    const auto n_lo = static_cast<std::int64_t>(std::ceil(y[d] - r));
    const auto n_hi = static_cast<std::int64_t>(std::floor(y[d] + T * v[d] + r));
    for (std::int64_t n = n_lo; n <= n_hi; ++n) res.count += cylinder_slab_count(y, v, r, T, n);
    res.volume = capsule_volume(d + 1, r, v.norm() * T);
    res.discrepancy = static_cast<double>(res.count) - res.volume;
    return res;
}

struct GeodesicResult {
    double time = 0.0;
    double discrepancy = 0.0;
    double normalized = 0.0;
};

/// Time the geodesic x + t v spends in the ball B(y, r) on the torus, and the
/// normalised discrepancy |v|^{(d+1)/(2(d-1))} (tau - Vol T) / (r^{(d-1)/2} T^{(d-3)/(2(d-1))})
/// for d >= 4 (unnormalised for d = 2).
inline GeodesicResult geodesic_ball_time(double r, const Vec& v, const Vec& x, const Vec& y, double T) {
    const int d = static_cast<int>(v.size());
    if (d == 3) throw UnsupportedDimension("geodesic_ball_time: d = 3 is not supported");
    if (!(r > 0.0 && r < 0.5 * std::sqrt(static_cast<double>(d)) && r <= 0.5)) {
        throw DomainError("geodesic_ball_time: need 0 < r <= 1/2 (and r < sqrt(d)/2)");
    }
    FlowOrbitSpec spec{ConvexBody::ball(d, y), r, v, x, T};
    GeodesicResult res;
    res.time = flow_time_in_body(spec);
    res.discrepancy = res.time - unit_ball_volume(d) * std::pow(r, d) * T;
    if (d <= 2 || T == 0.0) {
        res.normalized = res.discrepancy;
    } else {
        res.normalized = std::pow(v.norm(), (d + 1.0) / (2.0 * (d - 1.0))) * res.discrepancy /
                         (std::pow(r, 0.5 * (d - 1)) * std::pow(T, (d - 3.0) / (2.0 * (d - 1.0))));
    }
    return res;
}

enum class DirectionDensity { shell, box };

/// shell: uniform direction with |v| uniform in [1, 2]; box: v uniform in [0.5, 1.5]^d.
inline Vec sample_direction(DirectionDensity density, int d, RandomStream& rng) {
    if (density == DirectionDensity::box) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.uniform(0.5, 1.5);
        return v;
    }
    Vec g(d);
    for (int i = 0; i < d; ++i) g[i] = rng.normal();
    while (g.norm() == 0.0) {
        for (int i = 0; i < d; ++i) g[i] = rng.normal();
    }
    return g.normalized() * rng.uniform(1.0, 2.0);
}

struct FlowSample {
    std::size_t id = 0;
    double r = 0.0;
    Vec v;
    Vec x;
    double raw = 0.0;
    double normalized = 0.0;
};

struct FlowSamplerConfig {
    ConvexBody body = ConvexBody::ball(2);
    double a = 0.2;
    double b = 0.4;
    double T = 1000.0;
    DirectionDensity density = DirectionDensity::shell;
    int samples = 1000;
    std::uint64_t seed = 1;
    int threads = 0;
    /// Geodesic mode: ball at body's center, normalised with the |v| prefactor.
    bool geodesic = false;
};

inline std::vector<FlowSample> sample_flow(const FlowSamplerConfig& cfg) {
    if (cfg.samples < 1) throw DomainError("sampler: samples must be >= 1");
    if (!(cfg.a > 0.0 && cfg.b >= cfg.a)) throw DomainError("sampler: need 0 < a <= b");
    const int d = cfg.body.dimension();
    if (d == 3) throw UnsupportedDimension("flow sampler: d = 3 is not supported");
    std::vector<FlowSample> out(static_cast<std::size_t>(cfg.samples));
    parallel_for(out.size(), [&](std::size_t i) {
        RandomStream rng(cfg.seed, StreamTag::flow, i);
        auto& s = out[i];
        s.id = i;
        s.r = rng.uniform(cfg.a, cfg.b);
        s.x = rng.uniform_torus(d);
        s.v = sample_direction(cfg.density, d, rng);
        if (cfg.geodesic) {
            const auto g = geodesic_ball_time(s.r, s.v, s.x, cfg.body.center(), cfg.T);
            s.raw = g.discrepancy;
            s.normalized = g.normalized;
        } else {
            FlowOrbitSpec spec{cfg.body, s.r, s.v, s.x, cfg.T};
            s.raw = flow_discrepancy(spec);
            s.normalized = s.raw / flow_normalization(d, s.r, cfg.T);
        }
    }, cfg.threads);
    return out;
}

}  // namespace tordisc
