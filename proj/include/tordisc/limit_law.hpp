#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "convex_body.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace tordisc {

enum class LimitVariant { translation_sym, translation_nonsym, flow_d2, flow_dge4_sym, flow_dge4_nonsym, geodesic };

inline const char* to_string(LimitVariant v) {
    switch (v) {
        case LimitVariant::translation_sym: return "translation_sym";
        case LimitVariant::translation_nonsym: return "translation_nonsym";
        case LimitVariant::flow_d2: return "flow_d2";
        case LimitVariant::flow_dge4_sym: return "flow_dge4_sym";
        case LimitVariant::flow_dge4_nonsym: return "flow_dge4_nonsym";
        case LimitVariant::geodesic: return "geodesic";
    }
    return "unknown";
}

inline bool is_nonsymmetric(LimitVariant v) {
    return v == LimitVariant::translation_nonsym || v == LimitVariant::flow_dge4_nonsym;
}

inline bool is_flow_lattice(LimitVariant v) {
    return v == LimitVariant::flow_dge4_sym || v == LimitVariant::flow_dge4_nonsym || v == LimitVariant::geodesic;
}

struct LimitLawConfig {
    ConvexBody body = ConvexBody::ball(2);
    int d = 2;
    int M = 8;
    int P_max = 64;
    int samples = 4000;
    std::uint64_t seed = 1;
    LimitVariant variant = LimitVariant::translation_sym;
    double N_haar = default_haar_N;
    /// Flow direction for flow variants, v = rho (alpha_1..alpha_{d-1}, 1).
    Vec v;
    /// Frequency cutoff and body scale for flow_d2.
    int K_max = 128;
    double r = 0.25;
    bool exact_coefficients = true;
    /// Terms with R below this are flagged; the sample is redrawn when resample is set.
    double short_R = 1e-8;
    bool resample = true;
    int threads = 0;
};

inline void validate(const LimitLawConfig& cfg) {
    if (cfg.M < 0) throw DomainError("limit law: M must be >= 0");
    if (cfg.P_max < 1) throw DomainError("limit law: P_max must be >= 1");
    if (cfg.body.dimension() != cfg.d) throw DomainError("limit law: body dimension differs from d");
    const bool sym = cfg.body.symmetric();
    switch (cfg.variant) {
        case LimitVariant::translation_sym:
        case LimitVariant::flow_dge4_sym:
            if (!sym) throw VariantMismatch("limit law: symmetric variant needs a symmetric body");
            break;
        default: break;
    }
    if (cfg.variant == LimitVariant::flow_d2 && cfg.d != 2) throw UnsupportedDimension("flow_d2 needs d = 2");
    if (is_flow_lattice(cfg.variant)) {
        if (cfg.d < 4) throw UnsupportedDimension("flow limit law needs d >= 4");
        if (cfg.variant != LimitVariant::geodesic && (cfg.v.size() != cfg.d || !(cfg.v[cfg.d - 1] != 0.0))) {
            throw DomainError("flow limit law: v must have d entries with nonzero last entry");
        }
    }
}

/// A point of the lattice-torus space: lattice with its reduced basis, theta on
/// the torus, and phase maps b (and b' for nonsymmetric variants).
struct LimitSamplePoint {
    UnimodularLattice lattice;
    ReducedBasis rb;
    Vec theta;
    PhaseMap b;
    std::optional<PhaseMap> b_prime;
};

inline LimitSamplePoint make_sample_point(const UnimodularLattice& lat, Vec theta, PhaseMap b,
                                          std::optional<PhaseMap> b_prime = std::nullopt) {
    return {lat, reduced_basis(lat), std::move(theta), b, b_prime};
}

/// One summand family: weight(s), the effective Z, (m, theta) and the phases.
struct SeriesTerm {
    double weight_plus = 0.0;
    double weight_minus = 0.0;
    double Z = 0.0;
    double m_theta = 0.0;
    double b = 0.0;
    double b_prime = 0.0;
};

inline constexpr double removable_Z = 1e-12;

namespace detail {

/// sin(pi p Z) / Z for p = 1, 2, ... ; the Z -> 0 limit is pi p.
class ZKernel {
public:
    explicit ZKernel(double Z) : Z_(Z), small_(std::abs(Z) < removable_Z) {
        const double red = Z - 2.0 * std::nearbyint(0.5 * Z);
        rotor_.emplace(pi * red, 0.0);
    }
    double value(int p) const { return small_ ? pi * p : rotor_->sin() / Z_; }
    void advance() { rotor_->advance(); }

private:
    double Z_;
    bool small_;
    std::optional<PhaseRotor> rotor_;
};

/// Exact integers, zero included: a term with Z = 0 exactly has sin(pi p Z) = 0 and is
/// dropped, while 0 < |Z| < removable_Z uses the limit pi p.
inline bool integer_Z(double Z) { return Z == std::nearbyint(Z); }

/// p^{-e} for p = 0..P (entry 0 unused), cached per thread.
inline const std::vector<double>& power_table(int P, double e) {
    thread_local std::map<std::pair<int, double>, std::vector<double>> cache;
    auto it = cache.find({P, e});
    if (it == cache.end()) {
        std::vector<double> t(static_cast<std::size_t>(P) + 1, 0.0);
        for (int p = 1; p <= P; ++p) t[p] = std::pow(static_cast<double>(p), -e);
        it = cache.emplace(std::make_pair(P, e), std::move(t)).first;
    }
    return it->second;
}

inline const std::vector<IntVector>& cached_primitive_vectors(int n, int M) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::vector<IntVector>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find({n, M});
    if (it == cache.end()) it = cache.emplace(std::make_pair(n, M), primitive_vectors(n, M)).first;
    return it->second;
}

}  // namespace detail

/// sum_p cos(2 pi p mt) sin(2 pi (p b - shift)) [sin(pi p Z)/Z] p^{-e} for p in [p_lo, p_hi].
inline double symmetric_p_sum(const SeriesTerm& t, int p_lo, int p_hi, double exponent, double shift) {
    if (detail::integer_Z(t.Z)) return 0.0;
    PhaseRotor c(two_pi * t.m_theta, 0.0), s(two_pi * t.b, -two_pi * shift);
    detail::ZKernel z(t.Z);
    const auto& pw = detail::power_table(p_hi, exponent);
    double acc = 0.0;
    for (int p = 1; p <= p_hi; ++p) {
        if (p >= p_lo) acc += c.cos() * s.sin() * z.value(p) * pw[p];
        c.advance();
        s.advance();
        z.advance();
    }
    return acc;
}

/// sum_p [w+ sin(2 pi (p b + p mt - shift)) + w- sin(2 pi (p b' - p mt - shift))] [sin(pi p Z)/Z] p^{-e}.
inline double nonsymmetric_p_sum(const SeriesTerm& t, int p_lo, int p_hi, double exponent, double shift) {
    if (detail::integer_Z(t.Z)) return 0.0;
    PhaseRotor a(two_pi * (t.b + t.m_theta), -two_pi * shift), bm(two_pi * (t.b_prime - t.m_theta), -two_pi * shift);
    detail::ZKernel z(t.Z);
    const auto& pw = detail::power_table(p_hi, exponent);
    double acc = 0.0;
    for (int p = 1; p <= p_hi; ++p) {
        if (p >= p_lo) {
            acc += (t.weight_plus * a.sin() + t.weight_minus * bm.sin()) * z.value(p) * pw[p];
        }
        a.advance();
        bm.advance();
        z.advance();
    }
    return acc;
}

struct TermGeometry {
    IntVector m;
    Vec X;
    double Z = 0.0;
    double R = 0.0;
};

/// Lattice data of every primitive m with sup-norm at most M.
inline std::vector<TermGeometry> term_geometry(const LimitSamplePoint& pt, int M) {
    std::vector<TermGeometry> out;
    const int n = pt.rb.dim();
    const auto& prims = detail::cached_primitive_vectors(n, M);
    out.reserve(prims.size());
    for (const auto& m : prims) {
        const Vec v = pt.rb.vectors * m.cast<double>();
        TermGeometry g;
        g.m = m;
        g.X = v.head(n - 1);
        g.Z = v[n - 1];
        g.R = g.X.norm();
        out.push_back(std::move(g));
    }
    return out;
}

inline double m_dot_theta(const IntVector& m, const Vec& theta) {
    const Vec md = m.cast<double>();
    return frac(dot2(md, theta));
}

namespace detail {

inline void require_dim(const LimitSamplePoint& pt, int n, const char* op) {
    if (pt.rb.dim() != n || pt.theta.size() != n) throw DomainError(std::string(op) + ": sample point has wrong dimension");
}

}  // namespace detail

/// Translation series for symmetric bodies:
/// (2/pi^2) sum_m sum_p K^{-1/2}(X/R) cos(2 pi p (m,theta)) sin(2 pi (p b_m - (d-1)/8)) sin(pi p Z) / (R^{(d+1)/2} Z p^{(d+3)/2}).
inline double eval_translation_sym(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    if (!cfg.body.symmetric()) throw VariantMismatch("eval_translation_sym: body is not symmetric");
    const int d = cfg.d;
    detail::require_dim(pt, d + 1, "eval_translation_sym");
    const double e = 0.5 * (d + 3), shift = 0.125 * (d - 1);
    double total = 0.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        if (detail::integer_Z(g.Z) || !(g.R > 0.0)) continue;
        SeriesTerm t;
        t.Z = g.Z;
        t.m_theta = m_dot_theta(g.m, pt.theta);
        t.b = pt.b(g.m);
        const double w = 1.0 / (std::sqrt(cfg.body.curvature(g.X / g.R)) * std::pow(g.R, 0.5 * (d + 1)));
        total += w * symmetric_p_sum(t, 1, cfg.P_max, e, shift);
    }
    return 2.0 / (pi * pi) * total;
}

/// Translation series for general bodies with independent phases b, b':
/// (1/pi^2) sum_m sum_p k(p, m, theta) sin(pi p Z) / (R^{(d+1)/2} Z p^{(d+3)/2}).
inline double eval_translation_nonsym(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    if (!pt.b_prime) throw VariantMismatch("eval_translation_nonsym: second phase map b' is missing");
    const int d = cfg.d;
    detail::require_dim(pt, d + 1, "eval_translation_nonsym");
    const double e = 0.5 * (d + 3), shift = 0.125 * (d - 1);
    double total = 0.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        if (detail::integer_Z(g.Z) || !(g.R > 0.0)) continue;
        const Vec u = g.X / g.R;
        const double rr = std::pow(g.R, 0.5 * (d + 1));
        SeriesTerm t;
        t.Z = g.Z;
        t.m_theta = m_dot_theta(g.m, pt.theta);
        t.b = pt.b(g.m);
        t.b_prime = (*pt.b_prime)(g.m);
        t.weight_plus = 1.0 / (std::sqrt(cfg.body.curvature(u)) * rr);
        t.weight_minus = 1.0 / (std::sqrt(cfg.body.curvature(-u)) * rr);
        total += nonsymmetric_p_sum(t, 1, cfg.P_max, e, shift);
    }
    return total / (pi * pi);
}

/// Complex Fourier coefficients c_k of the indicator of r * shape + center, either
/// exact (balls in d = 2) or from the Herz asymptotics.
inline std::complex<double> body_coefficient(const ConvexBody& body, double r, const IntVector& k, bool exact) {
    const int d = body.dimension();
    const Vec kd = k.cast<double>();
    const Vec c = body.center();
    const double kc = frac(dot2(kd, c));
    const std::complex<double> shift = std::polar(1.0, -two_pi * kc);
    if (exact) {
        if (body.kind() != BodyKind::ball) throw NotImplementedError("exact coefficients are only available for balls");
        const double val = d == 2 ? ball_coefficient_2d(r, kd.norm()) : fourier_coeff_exact_ball(d, r, k);
        return val * shift;
    }
    return fourier_coeff_asymptotic(body, k, r).complex_coefficient() * std::pow(r, 0.5 * (d - 1)) * shift;
}

struct FlowD2Value {
    double value = 0.0;
    double imag = 0.0;
    int guarded = 0;
};

inline constexpr double flow_d2_guard = 1e-14;

/// sum_{0<|k|<=K} c_k e^{2 pi i (k, y)} sin(pi (k, theta)) / (pi (k, v)), real part.
inline FlowD2Value eval_flow_d2_full(const Vec& y, const Vec& theta, const Vec& v, const ConvexBody& body, double r,
                                     int K_max, bool exact = true) {
    if (y.size() != 2 || theta.size() != 2 || v.size() != 2) throw DomainError("eval_flow_d2: inputs must be 2-vectors");
    if (body.dimension() != 2) throw DomainError("eval_flow_d2: body must be planar");
    FlowD2Value out;
    std::complex<double> acc = 0.0;
    const auto kk = static_cast<std::int64_t>(K_max);
    for (std::int64_t i = -kk; i <= kk; ++i) {
        for (std::int64_t j = -kk; j <= kk; ++j) {
            const std::int64_t n2 = i * i + j * j;
            if (n2 == 0 || n2 > kk * kk) continue;
            IntVector k(2);
            k << i, j;
            const double kv = static_cast<double>(i) * v[0] + static_cast<double>(j) * v[1];
            if (std::abs(kv) < flow_d2_guard) {
                ++out.guarded;
                continue;
            }
            // sin(pi x) has period 2, so (k, theta) is not reduced mod 1 here.
            const double kt = static_cast<double>(i) * theta[0] + static_cast<double>(j) * theta[1];
            const double ky = frac(static_cast<double>(i) * y[0] + static_cast<double>(j) * y[1]);
            const std::complex<double> ck = body_coefficient(body, r, k, exact);
            acc += ck * std::polar(1.0, two_pi * ky) * (sin_pi(kt) / (pi * kv));
        }
    }
    out.value = acc.real();
    out.imag = acc.imag();
    return out;
}

inline double eval_flow_d2(const Vec& y, const Vec& theta, const Vec& v, const ConvexBody& body, double r, int K_max,
                           bool exact = true) {
    return eval_flow_d2_full(y, theta, v, body, r, K_max, exact).value;
}

/// Flow series for d >= 4 on a lattice of dimension d, v = rho (alpha, 1).
/// Denominators rho Q^{(d+1)/2} Z with Q^2 = R^2 + (alpha, X)^2; the curvature is
/// taken at the unit frequency direction (X, -(alpha, X)) / Q.
inline double eval_flow_dge4(const LimitSamplePoint& pt, const Vec& v, const LimitLawConfig& cfg) {
    const int d = cfg.d;
    if (d < 4) throw UnsupportedDimension("eval_flow_dge4: d must be >= 4");
    if (v.size() != d || v[d - 1] == 0.0) throw DomainError("eval_flow_dge4: v must have d entries, last nonzero");
    detail::require_dim(pt, d, "eval_flow_dge4");
    const bool nonsym = cfg.variant == LimitVariant::flow_dge4_nonsym;
    if (!nonsym && !cfg.body.symmetric()) throw VariantMismatch("eval_flow_dge4: symmetric series needs a symmetric body");
    if (nonsym && !pt.b_prime) throw VariantMismatch("eval_flow_dge4: second phase map b' is missing");
    const double rho = v[d - 1];
    const Vec alpha = v.head(d - 1) / rho;
    const double e = 0.5 * (d + 3), shift = 0.125 * (d - 1);
    double total = 0.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        if (!(g.R > 0.0)) continue;
        SeriesTerm t;
        t.Z = rho * g.Z;
        if (detail::integer_Z(t.Z)) continue;
        const double ax = alpha.dot(g.X);
        const double Q = std::sqrt(g.R * g.R + ax * ax);
        Vec dir(d);
        dir.head(d - 1) = g.X / Q;
        dir[d - 1] = -ax / Q;
        const double qq = std::pow(Q, 0.5 * (d + 1));
        t.m_theta = m_dot_theta(g.m, pt.theta);
        t.b = pt.b(g.m);
        if (nonsym) {
            t.b_prime = (*pt.b_prime)(g.m);
            t.weight_plus = 1.0 / (std::sqrt(cfg.body.curvature(dir)) * qq);
            t.weight_minus = 1.0 / (std::sqrt(cfg.body.curvature(-dir)) * qq);
            total += nonsymmetric_p_sum(t, 1, cfg.P_max, e, shift);
        } else {
            total += symmetric_p_sum(t, 1, cfg.P_max, e, shift) / (std::sqrt(cfg.body.curvature(dir)) * qq);
        }
    }
    // sin(pi p rho Z) / (rho Z) is what the kernel returns for Z' = rho Z.
    return (nonsym ? 1.0 : 2.0) / (pi * pi) * total;
}

/// v-free geodesic series: (2/pi^2) sum sum cos(2 pi p (m,theta)) sin(2 pi p b_m) sin(pi p Z) / (R^{(d+1)/2} Z p^{(d+3)/2}).
inline double eval_geodesic(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    const int d = cfg.d;
    if (d < 4) throw UnsupportedDimension("eval_geodesic: d must be >= 4");
    detail::require_dim(pt, d, "eval_geodesic");
    const double e = 0.5 * (d + 3);
    double total = 0.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        if (detail::integer_Z(g.Z) || !(g.R > 0.0)) continue;
        SeriesTerm t;
        t.Z = g.Z;
        t.m_theta = m_dot_theta(g.m, pt.theta);
        t.b = pt.b(g.m);
        total += symmetric_p_sum(t, 1, cfg.P_max, e, 0.0) / std::pow(g.R, 0.5 * (d + 1));
    }
    return 2.0 / (pi * pi) * total;
}

inline double evaluate(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    switch (cfg.variant) {
        case LimitVariant::translation_sym: return eval_translation_sym(pt, cfg);
        case LimitVariant::translation_nonsym: return eval_translation_nonsym(pt, cfg);
        case LimitVariant::flow_dge4_sym:
        case LimitVariant::flow_dge4_nonsym: return eval_flow_dge4(pt, cfg.v, cfg);
        case LimitVariant::geodesic: return eval_geodesic(pt, cfg);
        case LimitVariant::flow_d2: break;
    }
    throw VariantMismatch("evaluate: flow_d2 is not a lattice series");
}

inline int lattice_dimension(const LimitLawConfig& cfg) { return is_flow_lattice(cfg.variant) ? cfg.d : cfg.d + 1; }

/// Draws the i-th sample point (lattice, theta, phases) of a configuration.
inline LimitSamplePoint draw_sample_point(const LimitLawConfig& cfg, std::size_t index, int attempt = 0) {
    RandomStream rng(cfg.seed, StreamTag::limit, index * 1024 + static_cast<std::size_t>(attempt));
    const int n = lattice_dimension(cfg);
    const auto lat = haar_sample(n, rng, HaarMethod::horospherical, cfg.N_haar);
    Vec theta = rng.uniform_torus(n);
    const PhaseMap b(mix_key(rng.next(), static_cast<std::uint64_t>(StreamTag::phase_b)));
    std::optional<PhaseMap> bp;
    if (is_nonsymmetric(cfg.variant)) bp = PhaseMap(mix_key(rng.next(), static_cast<std::uint64_t>(StreamTag::phase_b_prime)));
    return make_sample_point(lat, std::move(theta), b, bp);
}

struct LimitSample {
    std::size_t id = 0;
    double value = 0.0;
    bool flagged = false;
    int resamples = 0;
    double min_R = 0.0;
};

inline double min_projection(const LimitSamplePoint& pt, int M) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : term_geometry(pt, M)) best = std::min(best, g.R);
    return best;
}

inline std::vector<LimitSample> sample_limit(const LimitLawConfig& cfg) {
    validate(cfg);
    if (cfg.samples < 1) throw DomainError("limit sampler: samples must be >= 1");
    std::vector<LimitSample> out(static_cast<std::size_t>(cfg.samples));
    if (cfg.variant == LimitVariant::flow_d2) {
        if (cfg.v.size() != 2) throw DomainError("flow_d2: v must be a 2-vector");
        parallel_for(out.size(), [&](std::size_t i) {
            RandomStream rng(cfg.seed, StreamTag::limit, i);
            const Vec y = rng.uniform_torus(2), theta = rng.uniform_torus(2);
            out[i].id = i;
            out[i].value = eval_flow_d2(y, theta, cfg.v, cfg.body, cfg.r, cfg.K_max, cfg.exact_coefficients);
        }, cfg.threads);
        return out;
    }
    parallel_for(out.size(), [&](std::size_t i) {
        LimitSample& s = out[i];
        s.id = i;
        for (int attempt = 0;; ++attempt) {
            const auto pt = draw_sample_point(cfg, i, attempt);
            s.min_R = min_projection(pt, cfg.M);
            const bool short_term = s.min_R < cfg.short_R;
            if (short_term) s.flagged = true;
            if (short_term && cfg.resample && attempt < 16) {
                ++s.resamples;
                continue;
            }
            s.value = evaluate(pt, cfg);
            break;
        }
    }, cfg.threads);
    return out;
}

inline EmpiricalCDF sample_limit_ecdf(const LimitLawConfig& cfg) {
    const auto s = sample_limit(cfg);
    std::vector<double> v;
    v.reserve(s.size());
    for (const auto& x : s) v.push_back(x.value);
    return EmpiricalCDF(std::move(v));
}

struct TailVarianceRow {
    IntVector m;
    double Z = 0.0;
    double R = 0.0;
    double gamma = 0.0;       // truncated sum plus tail bound
    double gamma_tail = 0.0;  // the tail bound part
    double variance = 0.0;
};

struct TailVarianceReport {
    std::vector<TailVarianceRow> rows;
    double total = 0.0;
};

namespace detail {

/// Upper bound for sum_{p > P} p^{-s}, s > 1.
inline double zeta_tail(int P, double s) { return std::pow(static_cast<double>(P), 1.0 - s) / (s - 1.0); }

inline double gamma_partial(double m_theta, double Z, int p_lo, int p_hi, double exponent) {
    if (integer_Z(Z)) return 0.0;
    PhaseRotor c(two_pi * m_theta, 0.0);
    ZKernel z(Z);
    const auto& pw = power_table(p_hi, exponent);
    double acc = 0.0;
    for (int p = 1; p <= p_hi; ++p) {
        if (p >= p_lo) {
            const double term = c.cos() * z.value(p);
            acc += term * term * pw[p];
        }
        c.advance();
        z.advance();
    }
    return acc;
}

}  // namespace detail

/// Gamma(theta, Z) = sum_p cos^2(2 pi p (m,theta)) sin^2(pi p Z) / (Z^2 p^{d+3}) and the
/// variance over b of the m-th summand family, Gamma / (2 K R^{d+1}). Symmetric translation.
inline TailVarianceReport tail_variance(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    if (!cfg.body.symmetric()) throw VariantMismatch("tail_variance: symmetric variant only");
    const int d = cfg.d;
    detail::require_dim(pt, d + 1, "tail_variance");
    TailVarianceReport rep;
    const double e = d + 3.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        TailVarianceRow row;
        row.m = g.m;
        row.Z = g.Z;
        row.R = g.R;
        if (g.R > 0.0) {
            const double mt = m_dot_theta(g.m, pt.theta);
            const double part = detail::gamma_partial(mt, g.Z, 1, cfg.P_max, e);
            // Tail: sin^2(pi p Z)/Z^2 <= min(pi^2 p^2, 1/Z^2).
            double tail = 0.0;
            if (!detail::integer_Z(g.Z)) {
                tail = std::min(pi * pi * detail::zeta_tail(cfg.P_max, e - 2.0), detail::zeta_tail(cfg.P_max, e) / (g.Z * g.Z));
            }
            row.gamma_tail = tail;
            row.gamma = part + tail;
            row.variance = row.gamma / (2.0 * cfg.body.curvature(g.X / g.R) * std::pow(g.R, d + 1));
        }
        rep.total += row.variance;
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

/// Three-standard-deviation bound (over the phases b) for the change of the
/// symmetric translation series when (M, P_max) -> (2M, 2 P_max).
inline double truncation_bound(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    if (!cfg.body.symmetric()) throw VariantMismatch("truncation_bound: symmetric variant only");
    const int d = cfg.d;
    const double e = d + 3.0;
    double var = 0.0;
    for (const auto& g : term_geometry(pt, 2 * cfg.M)) {
        if (!(g.R > 0.0)) continue;
        const bool old_m = g.m.cwiseAbs().maxCoeff() <= cfg.M;
        const double mt = m_dot_theta(g.m, pt.theta);
        const double gam = detail::gamma_partial(mt, g.Z, old_m ? cfg.P_max + 1 : 1, 2 * cfg.P_max, e);
        var += gam / (2.0 * cfg.body.curvature(g.X / g.R) * std::pow(g.R, d + 1));
    }
    return 3.0 * (2.0 / (pi * pi)) * std::sqrt(var);
}

/// Deterministic bound on dropping p > P_max from every retained m:
/// sum_m (2/pi^2) K^{-1/2} R^{-(d+1)/2} sum_{p > P} min(pi p, 1/|Z|) p^{-(d+3)/2}.
inline double p_tail_bound(const LimitSamplePoint& pt, const LimitLawConfig& cfg) {
    const int d = cfg.d;
    const double e = 0.5 * (d + 3);
    double total = 0.0;
    for (const auto& g : term_geometry(pt, cfg.M)) {
        if (!(g.R > 0.0) || detail::integer_Z(g.Z)) continue;
        const double inner = std::min(pi * detail::zeta_tail(cfg.P_max, e - 1.0),
                                      detail::zeta_tail(cfg.P_max, e) / std::abs(g.Z));
        total += inner / (std::sqrt(cfg.body.curvature(g.X / g.R)) * std::pow(g.R, 0.5 * (d + 1)));
    }
    return 2.0 / (pi * pi) * total;
}

struct TailDiagnostic {
    std::size_t id = 0;
    double value = 0.0;          // truncation (M, P_max)
    double value_doubled = 0.0;  // truncation (2M, 2 P_max)
    double bound = 0.0;          // truncation_bound
    double variance_total = 0.0; // sum_m Var(xi_m) for ||m|| <= M
};

/// Per-sample comparison of the symmetric translation series at (M, P) and
/// (2M, 2P) against the reported truncation bound.
inline std::vector<TailDiagnostic> sample_tail_diagnostics(const LimitLawConfig& cfg) {
    validate(cfg);
    if (cfg.variant != LimitVariant::translation_sym) throw VariantMismatch("tail diagnostics: translation_sym only");
    std::vector<TailDiagnostic> out(static_cast<std::size_t>(cfg.samples));
    LimitLawConfig doubled = cfg;
    doubled.M = 2 * cfg.M;
    doubled.P_max = 2 * cfg.P_max;
    parallel_for(out.size(), [&](std::size_t i) {
        const auto pt = draw_sample_point(cfg, i);
        auto& row = out[i];
        row.id = i;
        row.value = eval_translation_sym(pt, cfg);
        row.value_doubled = eval_translation_sym(pt, doubled);
        row.bound = truncation_bound(pt, cfg);
        row.variance_total = tail_variance(pt, cfg).total;
    }, cfg.threads);
    return out;
}

}  // namespace tordisc
