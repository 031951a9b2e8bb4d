#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "errors.hpp"
#include "numeric.hpp"
#include "types.hpp"

namespace tordisc {

enum class BodyKind { ball, ellipsoid, support_perturbation };

inline const char* to_string(BodyKind kind) {
    switch (kind) {
        case BodyKind::ball: return "ball";
        case BodyKind::ellipsoid: return "ellipsoid";
        case BodyKind::support_perturbation: return "support_perturbation";
    }
    return "unknown";
}

/// One term a * |t| * T_order((w, t) / |t|) added to the support function.
/// T_order is the Chebyshev polynomial, so in the plane with w = e_1 this is
/// a * cos(order * angle).
struct PerturbationTerm {
    double amplitude = 0.0;
    Vec direction;
    int order = 2;
};

/// Herz asymptotic Fourier coefficient of the indicator of r * C (center excluded;
/// callers shift x by the body center).
struct FourierCoefficientAsym {
    IntVector k;
    bool symmetric = true;
    /// Symmetric bodies: (1/pi) K^{-1/2}(k/|k|) |k|^{-(d+1)/2} in magnitude_plus, and
    /// magnitude_minus == magnitude_plus. Otherwise the two (1/2pi) K^{-1/2}(+-k/|k|)
    /// |k|^{-(d+1)/2} prefactors.
    double magnitude_plus = 0.0;
    double magnitude_minus = 0.0;
    /// r P(+-k) - (d-1)/8.
    double phase_plus = 0.0;
    double phase_minus = 0.0;

    /// The grouped coefficient d_k(r, x) at shift x, normalised without the
    /// r^{(d-1)/2} factor.
    double value(const Vec& x) const {
        const double kx = k.cast<double>().dot(x);
        if (symmetric) {
            return magnitude_plus * std::sin(two_pi * phase_plus) * std::cos(two_pi * kx);
        }
        return magnitude_plus * std::sin(two_pi * (phase_plus - kx)) +
               magnitude_minus * std::sin(two_pi * (phase_minus + kx));
    }

    /// Complex coefficient c_k of exp(2 pi i (k, x)) with the same normalisation.
    std::complex<double> complex_coefficient() const {
        const double mp = symmetric ? 0.5 * magnitude_plus : magnitude_plus;
        const double mm = symmetric ? 0.5 * magnitude_minus : magnitude_minus;
        const std::complex<double> i(0.0, 1.0);
        return (mm * std::exp(i * (two_pi * phase_minus)) -
                mp * std::exp(-i * (two_pi * phase_plus))) / i;
    }
};

namespace detail {

/// Orthonormal basis of the orthogonal complement of the unit vector xi (d x (d-1)).
inline Mat tangent_frame(const Vec& xi) {
    const Eigen::Index d = xi.size();
    Mat q = Eigen::HouseholderQR<Mat>(Mat(xi)).householderQ() * Mat::Identity(d, d);
    return q.rightCols(d - 1);
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
    std::vector<double> x(n), w(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = z;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Quasi-uniform points on the unit sphere S^{d-1} for d in {2, 3}.
inline std::vector<Vec> sphere_grid(int d, int count) {
    std::vector<Vec> pts;
    pts.reserve(count);
    if (d == 2) {
        for (int i = 0; i < count; ++i) {
            const double a = two_pi * i / count;
            Vec u(2);
            u << std::cos(a), std::sin(a);
            pts.push_back(u);
        }
    } else {
        const double golden = pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / count;
            const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
            Vec u(3);
            u << s * std::cos(golden * i), s * std::sin(golden * i), z;
            pts.push_back(u);
        }
    }
    return pts;
}

}  // namespace detail

/// A strictly convex body in R^d: a ball, an ellipsoid {y : y^T S^{-1} y <= 1}, or an
/// ellipsoid whose support function carries a finite Chebyshev (trigonometric)
/// perturbation. The body at scale r is r * shape + center. Immutable.
class ConvexBody {
public:
    static constexpr double min_curvature = 1e-3;
    static constexpr double min_radius_of_curvature = 1e-3;

    static ConvexBody ball(int d, Vec center = Vec()) {
        if (d < 1) throw DomainError("ball: dimension must be >= 1");
        ConvexBody b;
        b.kind_ = BodyKind::ball;
        b.init_quadric(Mat::Identity(d, d), std::move(center));
        return b;
    }

    static ConvexBody ellipsoid(const Mat& shape, Vec center = Vec()) {
        ConvexBody b;
        b.kind_ = BodyKind::ellipsoid;
        b.init_quadric(shape, std::move(center));
        return b;
    }

    static ConvexBody support_perturbation(const Mat& shape, std::vector<PerturbationTerm> terms,
                                           Vec center = Vec()) {
        ConvexBody b;
        b.kind_ = BodyKind::support_perturbation;
        b.init_quadric(shape, std::move(center));
        const int d = b.dim_;
        if (d != 2 && d != 3) {
            throw DomainError("support_perturbation: only d = 2 and d = 3 are supported");
        }
        for (auto& t : terms) {
            if (t.direction.size() != d) throw DomainError("perturbation direction has wrong dimension");
            const double n = t.direction.norm();
            if (!(n > 0.0)) throw DomainError("perturbation direction must be nonzero");
            if (t.order < 2) throw DomainError("perturbation order must be >= 2");
            if (!std::isfinite(t.amplitude)) throw DomainError("perturbation amplitude must be finite");
            // Already-unit directions are kept so a saved body reloads bit for bit.
            if (std::abs(n - 1.0) > 4 * std::numeric_limits<double>::epsilon()) t.direction /= n;
            if (t.order % 2 != 0 && t.amplitude != 0.0) b.symmetric_ = false;
        }
        b.terms_ = std::move(terms);
        b.certify_curvature();
        b.inradius_ = b.separation(Vec::Zero(d));
        if (!(b.inradius_ > 0.0)) throw DomainError("support_perturbation: origin not interior");
        double circ = 0.0;
        for (const auto& u : detail::sphere_grid(d, d == 2 ? 4096 : 8192)) {
            circ = std::max(circ, b.shape_support_gradient(u).norm());
        }
        b.circumradius_ = 1.01 * circ;
        b.volume_ = b.perturbed_volume();
        return b;
    }

    int dimension() const { return dim_; }
    BodyKind kind() const { return kind_; }
    bool symmetric() const { return symmetric_; }
    const Vec& center() const { return center_; }
    const Mat& shape() const { return shape_; }
    const Mat& shape_inverse() const { return shape_inv_; }
    const std::vector<PerturbationTerm>& terms() const { return terms_; }

    /// Support function of the (unit scale) body including its center:
    /// sup over the body of (t, x).
    double support(const Vec& t) const {
        check_dim(t, "support");
        if (!(t.squaredNorm() > 0.0)) throw DomainError("support: t must be nonzero");
        return shape_support(t) + center_.dot(t);
    }

    /// Support function of the centered shape.
    double shape_support(const Vec& t) const {
        double p = std::sqrt(t.dot(shape_ * t));
        if (!terms_.empty()) {
            const double s = t.norm();
            for (const auto& term : terms_) {
                p += term.amplitude * s * chebyshev(term.order, term.direction.dot(t) / s).value;
            }
        }
        return p;
    }

    /// Gradient of the shape support function: the boundary point with outer normal t/|t|.
    Vec shape_support_gradient(const Vec& t) const {
        const Vec st = shape_ * t;
        Vec g = st / std::sqrt(t.dot(st));
        if (!terms_.empty()) {
            const double s = t.norm();
            const Vec u = t / s;
            for (const auto& term : terms_) {
                const double c = term.direction.dot(u);
                const auto ch = chebyshev(term.order, c);
                g += term.amplitude * (ch.value * u + ch.d1 * (term.direction - c * u));
            }
        }
        return g;
    }

    Mat shape_support_hessian(const Vec& t) const {
        const Vec st = shape_ * t;
        const double p = std::sqrt(t.dot(st));
        Mat h = shape_ / p - st * st.transpose() / (p * p * p);
        if (!terms_.empty()) {
            const double s = t.norm();
            const Vec u = t / s;
            const Mat proj = Mat::Identity(dim_, dim_) - u * u.transpose();
            for (const auto& term : terms_) {
                const double c = term.direction.dot(u);
                const auto ch = chebyshev(term.order, c);
                const Vec g = term.direction - c * u;
                h += (term.amplitude / s) *
                     ((ch.value - c * ch.d1) * proj + ch.d2 * g * g.transpose());
            }
        }
        return h;
    }

    /// Hessian of the support function restricted to the tangent space at unit xi;
    /// its eigenvalues are the principal radii of curvature.
    Mat tangent_hessian(const Vec& xi) const {
        const Mat frame = detail::tangent_frame(xi);
        return frame.transpose() * shape_support_hessian(xi) * frame;
    }

    /// Gaussian curvature of the boundary at the point with outer normal xi.
    double curvature(const Vec& xi) const {
        check_dim(xi, "curvature_at_normal");
        if (std::abs(xi.norm() - 1.0) > 1e-9) throw DomainError("curvature_at_normal: xi must be a unit vector");
        if (dim_ == 1) return 1.0;
        if (kind_ == BodyKind::ball) return 1.0;
        return 1.0 / tangent_hessian(xi).determinant();
    }

    /// Volume of the unit-scale body.
    double volume() const { return volume_; }

    double inradius() const { return inradius_; }
    double circumradius() const { return circumradius_; }

    /// Extent of the shape along +e_i and -e_i.
    double extent_plus(int i) const { return shape_support(Vec::Unit(dim_, i)); }
    double extent_minus(int i) const { return shape_support(-Vec::Unit(dim_, i)); }

    /// True when r * shape has width at most 1 along every axis.
    bool fits_unit_cube(double r) const {
        for (int i = 0; i < dim_; ++i) {
            if (r * (extent_plus(i) + extent_minus(i)) > 1.0) return false;
        }
        return true;
    }

    /// min over unit u of [h(u) - (u, y)] for a point y in shape coordinates.
    /// Nonnegative iff y lies in the (closed) shape.
    double separation(const Vec& y) const {
        if (kind_ != BodyKind::support_perturbation) {
            // Distance-like value for quadrics, sign only is meaningful.
            return 1.0 - std::sqrt(y.dot(shape_inv_ * y));
        }
        const int d = dim_;
        const auto grid = detail::sphere_grid(d, d == 2 ? 256 : 1024);
        std::vector<std::pair<double, int>> vals;
        vals.reserve(grid.size());
        for (int i = 0; i < static_cast<int>(grid.size()); ++i) {
            vals.emplace_back(shape_support(grid[i]) - grid[i].dot(y), i);
        }
        const std::size_t keep = std::min<std::size_t>(4, vals.size());
        std::partial_sort(vals.begin(), vals.begin() + keep, vals.end());
        double best = vals.front().first;
        for (std::size_t c = 0; c < keep; ++c) {
            best = std::min(best, refine_separation(grid[vals[c].second], y));
        }
        return best;
    }

    /// Closed-body membership of x in r * shape + center.
    bool contains(double r, const Vec& x) const {
        check_dim(x, "contains");
        if (!(r > 0.0)) throw DomainError("contains: r must be positive");
        const Vec y = (x - center_) / r;
        if (kind_ == BodyKind::support_perturbation) {
            const double n = y.norm();
            if (n <= inradius_ * (1.0 - 1e-9)) return true;
            if (n > circumradius_) return false;
            return separation(y) >= 0.0;
        }
        const double q = kind_ == BodyKind::ball ? y.squaredNorm() : y.dot(shape_inv_ * y);
        if (std::abs(q - 1.0) > 1e-12) return q <= 1.0;
        return quadric_contains_extended(r, x);
    }

    /// Quadric membership evaluated in 50-digit arithmetic from the double inputs.
    bool quadric_contains_extended(double r, const Vec& x) const {
        using boost::multiprecision::cpp_bin_float_50;
        std::vector<cpp_bin_float_50> y(dim_);
        for (int i = 0; i < dim_; ++i) {
            y[i] = (cpp_bin_float_50(x[i]) - cpp_bin_float_50(center_[i]));
        }
        cpp_bin_float_50 q = 0;
        for (int i = 0; i < dim_; ++i) {
            for (int j = 0; j < dim_; ++j) {
                const double a = kind_ == BodyKind::ball ? (i == j ? 1.0 : 0.0) : shape_inv_(i, j);
                q += y[i] * cpp_bin_float_50(a) * y[j];
            }
        }
        const cpp_bin_float_50 rr = cpp_bin_float_50(r) * cpp_bin_float_50(r);
        return q <= rr;
    }

private:
    ConvexBody() = default;

    void check_dim(const Vec& v, const char* op) const {
        if (v.size() != dim_) throw DomainError(std::string(op) + ": dimension mismatch");
    }

    void init_quadric(const Mat& shape, Vec center) {
        if (shape.rows() != shape.cols() || shape.rows() < 1) {
            throw DomainError("shape matrix must be square and nonempty");
        }
        dim_ = static_cast<int>(shape.rows());
        if (!shape.isApprox(shape.transpose(), 1e-12)) throw DomainError("shape matrix must be symmetric");
        Eigen::SelfAdjointEigenSolver<Mat> es(shape);
        if (!(es.eigenvalues().minCoeff() > 0.0)) throw DomainError("shape matrix must be positive definite");
        shape_ = shape;
        shape_inv_ = shape.inverse();
        center_ = center.size() == 0 ? Vec::Zero(dim_) : std::move(center);
        if (center_.size() != dim_) throw DomainError("center has wrong dimension");
        symmetric_ = true;
        inradius_ = std::sqrt(es.eigenvalues().minCoeff());
        circumradius_ = std::sqrt(es.eigenvalues().maxCoeff());
        volume_ = unit_ball_volume(dim_) * std::sqrt(shape.determinant());
    }

    void certify_curvature() const {
        for (const auto& u : detail::sphere_grid(dim_, 1000)) {
            const Mat h = tangent_hessian(u);
            Eigen::SelfAdjointEigenSolver<Mat> es(h);
            const double min_radius = es.eigenvalues().minCoeff();
            if (!(min_radius > min_radius_of_curvature)) {
                throw DomainError("support_perturbation: principal radius of curvature too small (amplitude too large)");
            }
            const double k = 1.0 / h.determinant();
            if (!(k > min_curvature)) {
                throw DomainError("support_perturbation: Gaussian curvature below certification threshold");
            }
        }
    }

    double refine_separation(Vec u, const Vec& y) const {
        auto value = [&](const Vec& v) { return shape_support(v) - v.dot(y); };
        double f = value(u);
        for (int iter = 0; iter < 50; ++iter) {
            const Mat frame = detail::tangent_frame(u);
            const Vec grad = frame.transpose() * (shape_support_gradient(u) - y);
            if (grad.norm() < 1e-15) break;
            Mat hess = frame.transpose() * shape_support_hessian(u) * frame -
                       f * Mat::Identity(dim_ - 1, dim_ - 1);
            Vec step;
            Eigen::LLT<Mat> llt(hess);
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(grad);
            } else {
                step = -grad;
            }
            double scale = 1.0;
            bool improved = false;
            for (int ls = 0; ls < 40; ++ls) {
                Vec cand = u + frame * (scale * step);
                cand.normalize();
                const double fc = value(cand);
                if (fc < f) {
                    const double delta = (cand - u).norm();
                    u = cand;
                    f = fc;
                    improved = true;
                    if (delta < 1e-14) iter = 1000;
                    break;
                }
                scale *= 0.5;
            }
            if (!improved) break;
        }
        return f;
    }

    double perturbed_volume() const {
        if (dim_ == 2) {
            double prev = 0.0;
            for (int n = 256; n <= (1 << 16); n *= 2) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i) {
                    const double a = two_pi * i / n;
                    Vec u(2);
                    u << std::cos(a), std::sin(a);
                    Vec tvec(2);
                    tvec << -std::sin(a), std::cos(a);
                    acc += shape_support(u) * tvec.dot(shape_support_hessian(u) * tvec);
                }
                const double v = 0.5 * acc * two_pi / n;
                if (n > 256 && std::abs(v - prev) <= 1e-13 * std::abs(v)) return v;
                prev = v;
            }
            return prev;
        }
        double prev = 0.0;
        for (int n = 32; n <= 1024; n *= 2) {
            const auto [zs, ws] = detail::gauss_legendre(n);
            const int nphi = 2 * n;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                const double s = std::sqrt(1.0 - zs[i] * zs[i]);
                for (int j = 0; j < nphi; ++j) {
                    const double phi = two_pi * j / nphi;
                    Vec u(3);
                    u << s * std::cos(phi), s * std::sin(phi), zs[i];
                    acc += ws[i] * shape_support(u) * tangent_hessian(u).determinant();
                }
            }
            const double v = acc * (two_pi / nphi) / 3.0;
            if (n > 32 && std::abs(v - prev) <= 1e-13 * std::abs(v)) return v;
            prev = v;
        }
        return prev;
    }

    BodyKind kind_ = BodyKind::ball;
    int dim_ = 0;
    bool symmetric_ = true;
    Mat shape_;
    Mat shape_inv_;
    Vec center_;
    std::vector<PerturbationTerm> terms_;
    double inradius_ = 1.0;
    double circumradius_ = 1.0;
    double volume_ = 0.0;
};

inline double support(const ConvexBody& body, const Vec& t) { return body.support(t); }

inline double curvature_at_normal(const ConvexBody& body, const Vec& xi) { return body.curvature(xi); }

inline double volume(const ConvexBody& body) { return body.volume(); }

inline bool contains(const ConvexBody& body, double r, const Vec& x) { return body.contains(r, x); }

inline FourierCoefficientAsym fourier_coeff_asymptotic(const ConvexBody& body, const IntVector& k, double r) {
    const int d = body.dimension();
    if (k.size() != d) throw DomainError("fourier_coeff_asymptotic: k has wrong dimension");
    if (k.isZero()) throw DomainError("fourier_coeff_asymptotic: k must be nonzero");
    if (!(r > 0.0)) throw DomainError("fourier_coeff_asymptotic: r must be positive");
    const Vec kv = k.cast<double>();
    const double norm = kv.norm();
    const Vec khat = kv / norm;
    const double decay = std::pow(norm, -0.5 * (d + 1));
    const double shift = 0.125 * (d - 1);
    FourierCoefficientAsym out;
    out.k = k;
    out.symmetric = body.symmetric();
    if (out.symmetric) {
        out.magnitude_plus = out.magnitude_minus = decay / (pi * std::sqrt(body.curvature(khat)));
        out.phase_plus = out.phase_minus = r * body.shape_support(kv) - shift;
    } else {
        out.magnitude_plus = decay / (two_pi * std::sqrt(body.curvature(khat)));
        out.magnitude_minus = decay / (two_pi * std::sqrt(body.curvature(-khat)));
        out.phase_plus = r * body.shape_support(kv) - shift;
        out.phase_minus = r * body.shape_support(-kv) - shift;
    }
    return out;
}

/// Exact Fourier coefficient int_{|x| <= r} exp(-2 pi i (k, x)) dx of a ball indicator.
/// d = 1 in closed form; d = 2, 3 by adaptive Gauss-Kronrod on the radial integral.
inline double fourier_coeff_exact_ball(int d, double r, const IntVector& k) {
    if (d < 1 || d > 3) throw NotImplementedError("fourier_coeff_exact_ball: only d in {1,2,3}");
    if (k.size() != d) throw DomainError("fourier_coeff_exact_ball: k has wrong dimension");
    if (!(r > 0.0)) throw DomainError("fourier_coeff_exact_ball: r must be positive");
    const double kn = k.cast<double>().norm();
    if (kn == 0.0) return unit_ball_volume(d) * std::pow(r, d);
    if (d == 1) return std::sin(two_pi * r * kn) / (pi * kn);
    using boost::math::quadrature::gauss_kronrod;
    double err = 0.0;
    if (d == 2) {
        auto f = [&](double rho) { return two_pi * rho * std::cyl_bessel_j(0.0, two_pi * kn * rho); };
        return gauss_kronrod<double, 61>::integrate(f, 0.0, r, 20, 1e-13, &err);
    }
    auto f = [&](double rho) {
        const double z = two_pi * kn * rho;
        const double sinc = z == 0.0 ? 1.0 : std::sin(z) / z;
        return 4.0 * pi * rho * rho * sinc;
    };
    return gauss_kronrod<double, 61>::integrate(f, 0.0, r, 20, 1e-13, &err);
}

/// Closed form of the d = 2 ball coefficient, r J_1(2 pi r |k|) / |k|.
inline double ball_coefficient_2d(double r, double knorm) {
    if (knorm == 0.0) return pi * r * r;
    return r * std::cyl_bessel_j(1.0, two_pi * r * knorm) / knorm;
}

/// The ellipsoid {y : (|a|^2 + 1)|y|^2 - (a, y)^2 <= |a|^2 + 1}; its shape matrix is
/// I + a a^T.
inline ConvexBody slanted_cylinder_section(const Vec& alpha) {
    if (!alpha.allFinite()) throw DomainError("slanted_cylinder_section: alpha must be finite");
    const Eigen::Index d = alpha.size();
    return ConvexBody::ellipsoid(Mat::Identity(d, d) + alpha * alpha.transpose());
}

}  // namespace tordisc
