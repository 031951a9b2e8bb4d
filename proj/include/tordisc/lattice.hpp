#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace tordisc {

/// Lower unipotent matrix with last row (alpha_1, ..., alpha_d, 1).
inline Mat shear(const Vec& alpha) {
    const Eigen::Index d = alpha.size();
    Mat m = Mat::Identity(d + 1, d + 1);
    m.block(d, 0, 1, d) = alpha.transpose();
    return m;
}

/// diag(e^{-T/d}, ..., e^{-T/d}, e^T) acting on R^{d+1}, dim = d + 1.
inline Mat diagonal_flow(double T, int dim) {
    if (dim < 2) throw DomainError("diagonal_flow: dim must be >= 2");
    const int d = dim - 1;
    Mat g = Mat::Identity(dim, dim) * std::exp(-T / d);
    g(d, d) = std::exp(T);
    return g;
}

/// A unimodular lattice in R^n given by a basis (columns). Lattices built by
/// dani() evaluate points from integer coordinates with compensated arithmetic,
/// so the last coordinate N((k, alpha) + k_last) keeps full relative accuracy.
class UnimodularLattice {
public:
    UnimodularLattice() = default;

    explicit UnimodularLattice(Mat basis) {
        if (basis.rows() != basis.cols() || basis.rows() < 1) throw DomainError("lattice basis must be square");
        if (!basis.allFinite()) throw DomainError("lattice basis must be finite");
        const double det = basis.determinant();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) throw ReductionError("lattice basis is singular");
        const double n = static_cast<double>(basis.rows());
        basis_ = basis * std::pow(std::abs(det), -1.0 / n);
    }

    /// L(N, alpha) = g_{ln N} Lambda_alpha Z^{d+1}. N is real so flows can use T.
    static UnimodularLattice dani(double N, const Vec& alpha) {
        if (!(N >= 1.0)) throw DomainError("dani_lattice: N must be >= 1");
        if (alpha.size() < 1 || !alpha.allFinite()) throw DomainError("dani_lattice: alpha must be finite and nonempty");
        UnimodularLattice l;
        const int d = static_cast<int>(alpha.size());
        l.basis_ = diagonal_flow(std::log(N), d + 1) * shear(alpha);
        l.dani_ = true;
        l.N_ = N;
        l.alpha_ = alpha;
        l.scale_ = std::pow(N, -1.0 / d);
        // Recompute the exact diagonal/last-row entries.
        for (int i = 0; i < d; ++i) {
            l.basis_(i, i) = l.scale_;
            l.basis_(d, i) = N * alpha[i];
        }
        l.basis_(d, d) = N;
        return l;
    }

    int dim() const { return static_cast<int>(basis_.rows()); }
    const Mat& basis() const { return basis_; }
    bool is_dani() const { return dani_; }
    double dani_N() const { return N_; }
    const Vec& dani_alpha() const { return alpha_; }
    bool is_rotated() const { return rotation_.size() > 0; }

    /// The lattice Q L for an orthogonal Q.
    UnimodularLattice rotated(const Mat& q) const {
        UnimodularLattice l = *this;
        l.rotation_ = rotation_.size() > 0 ? Mat(q * rotation_) : q;
        l.basis_ = q * basis_;
        return l;
    }

    /// The lattice vector with integer coordinates c in this basis.
    Vec point(const IntVector& c) const {
        if (c.size() != dim()) throw DomainError("lattice point: coefficient vector has wrong dimension");
        Vec v;
        if (dani_) {
            const int d = dim() - 1;
            v.resize(d + 1);
            for (int i = 0; i < d; ++i) v[i] = static_cast<double>(c[i]) * scale_;
            v[d] = N_ * dani_offset(c);
        } else {
            v = basis_ * c.cast<double>();
            if (rotation_.size() > 0) return v;
        }
        if (rotation_.size() > 0) return rotation_ * v;
        return v;
    }

    /// (k, alpha) + k_last for a Dani lattice, in double-double.
    double dani_offset(const IntVector& c) const {
        const int d = dim() - 1;
        double hi = static_cast<double>(c[d]);
        double lo = 0.0;
        for (int i = 0; i < d; ++i) {
            const auto [p, e] = two_prod(static_cast<double>(c[i]), alpha_[i]);
            const auto [s, q] = two_sum(hi, p);
            hi = s;
            lo += q + e;
        }
        return hi + lo;
    }

    Mat points(const IntMatrix& c) const {
        Mat out(dim(), c.cols());
        for (Eigen::Index j = 0; j < c.cols(); ++j) out.col(j) = point(c.col(j));
        return out;
    }

private:
    Mat basis_;
    bool dani_ = false;
    double N_ = 1.0;
    Vec alpha_;
    double scale_ = 1.0;
    Mat rotation_;
};

inline UnimodularLattice dani_lattice(double N, const Vec& alpha) { return UnimodularLattice::dani(N, alpha); }

namespace detail {

using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

/// Integer determinant by fraction-free elimination.
inline __int128 integer_determinant(const IntMatrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<std::vector<__int128>> m(n, std::vector<__int128>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m[i][j] = a(i, j);
    __int128 sign = 1, prev = 1;
    for (Eigen::Index k = 0; k < n - 1; ++k) {
        if (m[k][k] == 0) {
            Eigen::Index piv = k + 1;
            while (piv < n && m[piv][k] == 0) ++piv;
            if (piv == n) return 0;
            std::swap(m[k], m[piv]);
            sign = -sign;
        }
        for (Eigen::Index i = k + 1; i < n; ++i)
            for (Eigen::Index j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

/// Gram-Schmidt data of the columns of b.
struct GramSchmidt {
    LMat mu;
    std::vector<long double> norm2;
};

inline GramSchmidt gram_schmidt(const LMat& b) {
    const Eigen::Index m = b.cols();
    GramSchmidt gs;
    gs.mu = LMat::Zero(m, m);
    gs.norm2.assign(m, 0.0L);
    LMat star = b;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            gs.mu(i, j) = b.col(i).dot(star.col(j)) / gs.norm2[j];
            star.col(i) -= gs.mu(i, j) * star.col(j);
        }
        gs.norm2[i] = star.col(i).squaredNorm();
    }
    return gs;
}

/// LLL reduction (delta = 0.99) of the vectors produced by vectors_of(U) for an
/// integer transform U, starting from U = I. Returns the final U.
template <typename VectorsOf>
IntMatrix lll(Eigen::Index m, VectorsOf&& vectors_of, long double delta = 0.99L) {
    IntMatrix u = IntMatrix::Identity(m, m);
    LMat b = vectors_of(u).template cast<long double>();
    GramSchmidt gs = gram_schmidt(b);
    Eigen::Index k = 1;
    std::size_t guard = 0;
    while (k < m) {
        if (++guard > 100000) throw ReductionError("LLL did not terminate");
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            const long double q = std::nearbyint(gs.mu(k, j));
            if (q != 0.0L) {
                if (std::abs(q) > 9.0e15L) throw ReductionError("LLL coefficient overflow");
                u.col(k) -= static_cast<std::int64_t>(q) * u.col(j);
                b = vectors_of(u).template cast<long double>();
                gs = gram_schmidt(b);
            }
        }
        const long double mu = gs.mu(k, k - 1);
        if (gs.norm2[k] >= (delta - mu * mu) * gs.norm2[k - 1]) {
            ++k;
        } else {
            u.col(k).swap(u.col(k - 1));
            b.col(k).swap(b.col(k - 1));
            gs = gram_schmidt(b);
            k = std::max<Eigen::Index>(k - 1, 1);
        }
    }
    return u;
}

/// R factor of a thin QR of b with nonnegative diagonal, plus the Q factor.
inline std::pair<Mat, Mat> thin_qr(const Mat& b) {
    const Eigen::Index n = b.rows(), m = b.cols();
    Eigen::HouseholderQR<Mat> qr(b);
    Mat q = qr.householderQ() * Mat::Identity(n, m);
    Mat r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (r(i, i) < 0.0) {
            r.row(i) *= -1.0;
            q.col(i) *= -1.0;
        }
    }
    return {q, r};
}

/// Fincke-Pohst: calls f(y, dist2) for every integer y with |R y - t|^2 <= radius2.
template <typename F>
void enumerate_close(const Mat& r, const Vec& t, double radius2, F&& f, std::size_t max_visits = 50000000) {
    const Eigen::Index m = r.cols();
    if (m == 0) {
        f(IntVector(0), 0.0);
        return;
    }
    IntVector y(m);
    std::vector<double> partial(m + 1, 0.0);
    std::size_t visits = 0;
    std::function<void(Eigen::Index)> rec = [&](Eigen::Index i) {
        double s = t[i];
        for (Eigen::Index j = i + 1; j < m; ++j) s -= r(i, j) * static_cast<double>(y[j]);
        const double rii = r(i, i);
        const double center = s / rii;
        const double rem = radius2 - partial[i + 1];
        if (rem < 0.0) return;
        const double half = std::sqrt(rem) / rii;
        const auto lo = static_cast<std::int64_t>(std::ceil(center - half));
        const auto hi = static_cast<std::int64_t>(std::floor(center + half));
        for (std::int64_t v = lo; v <= hi; ++v) {
            if (++visits > max_visits) throw ReductionError("lattice enumeration exceeded its visit budget");
            const double diff = rii * (static_cast<double>(v) - center);
            const double p = partial[i + 1] + diff * diff;
            if (p > radius2) continue;
            y[i] = v;
            partial[i] = p;
            if (i == 0) {
                f(static_cast<const IntVector&>(y), p);
            } else {
                rec(i - 1);
            }
        }
    };
    rec(m - 1);
}

/// Unimodular V with first column equal to the primitive vector y.
inline IntMatrix unimodular_completion(const IntVector& y) {
    const Eigen::Index m = y.size();
    IntMatrix v = IntMatrix::Identity(m, m);
    IntVector w = y;
    // Invariant: v * w == y.
    for (Eigen::Index b = m - 1; b >= 1; --b) {
        while (w[b] != 0) {
            const std::int64_t q = w[0] / w[b];
            w[0] -= q * w[b];
            v.col(b) += q * v.col(0);
            std::swap(w[0], w[b]);
            v.col(0).swap(v.col(b));
        }
    }
    if (w[0] == -1) {
        w[0] = 1;
        v.col(0) *= -1;
    }
    if (w[0] != 1) throw ReductionError("unimodular completion: vector is not primitive");
    return v;
}

/// Exact inverse of an integer matrix with determinant det = +-1, as the adjugate.
inline IntMatrix unimodular_inverse(const IntMatrix& a, __int128 det) {
    const Eigen::Index n = a.rows();
    IntMatrix inv(n, n);
    if (n == 1) {
        inv(0, 0) = static_cast<std::int64_t>(det);
        return inv;
    }
    IntMatrix minor(n - 1, n - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc++) = a(r, c);
                }
                ++rr;
            }
            const __int128 cof = ((i + j) % 2 == 0 ? 1 : -1) * integer_determinant(minor);
            inv(j, i) = static_cast<std::int64_t>(cof * det);
        }
    }
    return inv;
}

inline std::int64_t gcd_of(const IntVector& v) {
    std::int64_t g = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) g = std::gcd(g, v[i] < 0 ? -v[i] : v[i]);
    return g;
}

/// +1 when the first entry with |v_i| > tol is positive, -1 when negative, 0 if none.
inline int leading_sign(const Vec& v, double tol) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] > tol) return 1;
        if (v[i] < -tol) return -1;
    }
    return 0;
}

inline int leading_sign(const IntVector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0) return 1;
        if (v[i] < 0) return -1;
    }
    return 0;
}

inline double condition_number(const Mat& b) {
    Eigen::JacobiSVD<Mat> svd(b);
    const auto& s = svd.singularValues();
    return s[0] / s[s.size() - 1];
}

}  // namespace detail

/// The greedy short basis e_1..e_n of a lattice together with the integer
/// coordinates of each e_i (columns of coeffs) in the lattice's own basis.
struct ReducedBasis {
    Mat vectors;            // columns e_1..e_n
    IntMatrix coeffs;       // vectors = lattice.points(coeffs)
    IntMatrix coeffs_inv;   // exact integer inverse of coeffs

    int dim() const { return static_cast<int>(vectors.cols()); }
    Vec e(int i) const { return vectors.col(i); }
};

inline constexpr double reduction_condition_limit = 1e12;
inline constexpr double reduction_tie_tolerance = 1e-9;

/// The greedy reduced basis: e_1 is a shortest nonzero vector; e_i has the shortest
/// nonzero projection onto the orthocomplement of span(e_1..e_{i-1}) and, among
/// those, the shortest length. Ties go to the sign-canonical (first nonzero
/// coordinate positive), lexicographically largest candidate.
inline ReducedBasis reduced_basis(const UnimodularLattice& lat) {
    const int n = lat.dim();
    if (n < 1) throw ReductionError("reduced_basis: empty lattice");
    IntMatrix w = detail::lll(n, [&](const IntMatrix& u) { return lat.points(u); });
    {
        const Mat b = lat.points(w);
        if (!b.allFinite() || detail::condition_number(b) > reduction_condition_limit) {
            throw ReductionError("reduced_basis: basis is too ill-conditioned");
        }
    }
    for (int i = 0; i < n; ++i) {
        const int m = n - i;
        Mat full = lat.points(w);
        Mat q_prev;
        if (i > 0) q_prev = detail::thin_qr(full.leftCols(i)).first;
        auto project = [&](const Mat& v) -> Mat {
            if (i == 0) return v;
            return v - q_prev * (q_prev.transpose() * v);
        };
        // LLL on the projected completion.
        const IntMatrix rest = w.rightCols(m);
        const IntMatrix v_lll = detail::lll(m, [&](const IntMatrix& u) { return project(lat.points(rest * u)); });
        w.rightCols(m) = rest * v_lll;
        full = lat.points(w);
        const Mat proj = project(full.rightCols(m));
        const Mat r_proj = detail::thin_qr(proj).second;

        double bound = std::numeric_limits<double>::infinity();
        for (int j = 0; j < m; ++j) bound = std::min(bound, proj.col(j).squaredNorm());
        std::vector<std::pair<IntVector, double>> cands;
        detail::enumerate_close(r_proj, Vec::Zero(m), bound * (1.0 + 1e-8), [&](const IntVector& y, double dist2) {
            if (!y.isZero()) cands.emplace_back(y, dist2);
        });
        if (cands.empty()) throw ReductionError("reduced_basis: enumeration found no vector");
        double best_proj = std::numeric_limits<double>::infinity();
        for (const auto& c : cands) best_proj = std::min(best_proj, (proj * c.first.cast<double>()).squaredNorm());

        struct Choice {
            IntVector y;
            IntVector z;
            IntVector coeff;
            Vec vec;
            double len2;
        };
        std::vector<Choice> choices;
        const IntMatrix prev = w.leftCols(i);
        const IntMatrix tail = w.rightCols(m);
        Mat q_e, r_e;
        if (i > 0) std::tie(q_e, r_e) = detail::thin_qr(full.leftCols(i));
        for (const auto& c : cands) {
            const Vec pv = proj * c.first.cast<double>();
            if (pv.squaredNorm() > best_proj * (1.0 + reduction_tie_tolerance)) continue;
            const IntVector base = tail * c.first;
            if (i == 0) {
                const Vec v = lat.point(base);
                choices.push_back({c.first, IntVector(0), base, v, v.squaredNorm()});
                continue;
            }
            const Vec wv = lat.point(base);
            const Vec t = q_e.transpose() * wv;
            // Babai rounding gives the enumeration radius.
            IntVector babai(i);
            {
                Vec tt = t;
                for (int k = i - 1; k >= 0; --k) {
                    double s = tt[k];
                    for (int j = k + 1; j < i; ++j) s -= r_e(k, j) * static_cast<double>(babai[j]);
                    babai[k] = static_cast<std::int64_t>(std::nearbyint(s / r_e(k, k)));
                }
            }
            const double babai_d2 = (r_e * babai.cast<double>() - t).squaredNorm();
            std::vector<std::pair<IntVector, double>> lifts;
            detail::enumerate_close(r_e, t, babai_d2 * (1.0 + 1e-8) + 1e-300,
                                    [&](const IntVector& z, double d2) { lifts.emplace_back(z, d2); });
            for (const auto& [z, d2] : lifts) {
                const IntVector coeff = base - prev * z;
                const Vec v = lat.point(coeff);
                choices.push_back({c.first, z, coeff, v, v.squaredNorm()});
            }
        }
        double best_len = std::numeric_limits<double>::infinity();
        for (const auto& ch : choices) best_len = std::min(best_len, ch.len2);
        const Choice* pick = nullptr;
        Vec pick_vec;
        for (const auto& ch : choices) {
            if (ch.len2 > best_len * (1.0 + reduction_tie_tolerance)) continue;
            const int s = detail::leading_sign(ch.vec, 1e-12 * std::sqrt(ch.len2));
            const Vec cv = s < 0 ? Vec(-ch.vec) : ch.vec;
            if (pick == nullptr ||
                std::lexicographical_compare(pick_vec.begin(), pick_vec.end(), cv.begin(), cv.end())) {
                pick = &ch;
                pick_vec = cv;
            }
        }
        // Rebuild the completion so its first column is the chosen vector.
        const IntMatrix v = detail::unimodular_completion(pick->y);
        w.rightCols(m) = tail * v;
        if (i > 0) w.col(i) -= prev * pick->z;
        if (detail::leading_sign(lat.point(w.col(i)), 1e-12 * std::sqrt(pick->len2)) < 0) w.col(i) *= -1;
    }
    ReducedBasis rb;
    rb.coeffs = w;
    rb.vectors = lat.points(w);
    const __int128 det = detail::integer_determinant(w);
    if (det != 1 && det != -1) throw ReductionError("reduced_basis: coefficient matrix is not unimodular");
    rb.coeffs_inv = detail::unimodular_inverse(w, det);
    if ((w * rb.coeffs_inv - IntMatrix::Identity(n, n)).cwiseAbs().maxCoeff() != 0) {
        throw ReductionError("reduced_basis: integer inverse check failed");
    }
    return rb;
}

/// Independent enumeration check of the greedy conditions.
inline bool certify_reduced_basis(const UnimodularLattice& lat, const ReducedBasis& rb, double tol = reduction_tie_tolerance) {
    const int n = lat.dim();
    const __int128 det = detail::integer_determinant(rb.coeffs);
    if (det != 1 && det != -1) return false;
    const IntMatrix u = detail::lll(n, [&](const IntMatrix& c) { return lat.points(c); });
    const Mat b = lat.points(u);
    const Mat r = detail::thin_qr(b).second;
    const Mat e = rb.vectors;
    const auto [q_e, r_e] = detail::thin_qr(e);
    for (int i = 0; i < n; ++i) {
        auto project = [&](const Vec& v) -> Vec {
            if (i == 0) return v;
            return v - q_e.leftCols(i) * (q_e.leftCols(i).transpose() * v);
        };
        const double pe2 = project(e.col(i)).squaredNorm();
        const double e2 = e.col(i).squaredNorm();
        double radius2 = pe2;
        for (int j = 0; j < i; ++j) radius2 += 0.25 * r_e(j, j) * r_e(j, j);
        bool ok = true;
        detail::enumerate_close(r, Vec::Zero(n), radius2 * (1.0 + 1e-9), [&](const IntVector& y, double) {
            if (!ok || y.isZero()) return;
            const Vec v = b * y.cast<double>();
            const double pv2 = project(v).squaredNorm();
            if (pv2 <= 1e-18 * std::max(1.0, v.squaredNorm())) return;
            if (pv2 < pe2 * (1.0 - tol)) ok = false;
            if (pv2 <= pe2 * (1.0 + tol) && v.squaredNorm() < e2 * (1.0 - tol)) ok = false;
        });
        if (!ok) return false;
    }
    return true;
}

/// Primitive integer vectors with sup-norm at most M and first nonzero entry
/// positive; ordered by sup-norm, then lexicographically.
inline std::vector<IntVector> primitive_vectors(int n, int M) {
    if (n < 1) throw DomainError("primitive_vectors: n must be >= 1");
    if (M < 0) throw DomainError("primitive_vectors: M must be >= 0");
    std::vector<IntVector> out;
    IntVector v = IntVector::Constant(n, -M);
    if (M == 0) return out;
    while (true) {
        if (detail::leading_sign(v) > 0 && detail::gcd_of(v) == 1) out.push_back(v);
        Eigen::Index i = n - 1;
        while (i >= 0 && v[i] == M) {
            v[i] = -M;
            --i;
        }
        if (i < 0) break;
        ++v[i];
    }
    std::stable_sort(out.begin(), out.end(), [](const IntVector& a, const IntVector& b) {
        return a.cwiseAbs().maxCoeff() < b.cwiseAbs().maxCoeff();
    });
    return out;
}

struct LatticePoint {
    Vec X;
    double Z = 0.0;
    double R = 0.0;
};

/// sum_i m_i e_i split as (X, Z) with R = |X|.
inline LatticePoint lattice_point_of(const IntVector& m, const ReducedBasis& rb) {
    const Vec v = rb.vectors * m.cast<double>();
    const Eigen::Index n = v.size();
    LatticePoint p;
    p.X = v.head(n - 1);
    p.Z = v[n - 1];
    p.R = p.X.norm();
    return p;
}

/// Same, evaluated exactly from integer coordinates through the lattice.
inline LatticePoint lattice_point_of(const IntVector& m, const ReducedBasis& rb, const UnimodularLattice& lat) {
    const Vec v = lat.point(rb.coeffs * m);
    const Eigen::Index n = v.size();
    return {v.head(n - 1), v[n - 1], v.head(n - 1).norm()};
}

struct ResonantHarmonic {
    IntVector k;
    std::int64_t k_last = 0;
    IntVector m;               // primitive, sign-canonical, in reduced-basis coordinates
    std::int64_t multiplicity = 1;
    int sign = 1;              // (k, k_last) = sign * multiplicity * coeffs * m
    Vec X;
    double Z = 0.0;
    double R = 0.0;
};

/// {k, alpha} in (-1/2, 1/2] and the k_last realising it.
inline std::pair<double, std::int64_t> small_divisor(const IntVector& k, const Vec& alpha) {
    double hi = 0.0, lo = 0.0;
    for (Eigen::Index i = 0; i < k.size(); ++i) {
        const auto [p, e] = two_prod(static_cast<double>(k[i]), alpha[i]);
        const auto [s, q] = two_sum(hi, p);
        hi = s;
        lo += q + e;
    }
    const auto [h2, l2] = two_sum(hi, lo);
    double n = std::nearbyint(h2);
    double theta = (h2 - n) + l2;
    if (theta > 0.5) {
        n += 1.0;
        theta = (h2 - n) + l2;
    } else if (theta <= -0.5) {
        n -= 1.0;
        theta = (h2 - n) + l2;
    }
    return {theta, static_cast<std::int64_t>(-n)};
}

/// Membership of k in the resonant set, tested directly in frequency space.
inline bool in_resonant_region(const IntVector& k, double N, const Vec& alpha, double eps) {
    const int d = static_cast<int>(k.size());
    std::int64_t k2 = 0;
    for (Eigen::Index i = 0; i < k.size(); ++i) k2 += k[i] * k[i];
    const double n2d = std::pow(N, 2.0 / d);
    const double lower = std::pow(eps, (d + 4.0) / (d - 1.0)) * n2d;
    const double upper = n2d / eps;
    const double kk = static_cast<double>(k2);
    if (!(kk > lower && kk < upper)) return false;
    const double theta = small_divisor(k, alpha).first;
    return std::pow(kk, 0.25 * (d + 1)) * std::abs(theta) < std::pow(eps, -0.25 * d) * std::pow(N, -(d - 1.0) / (2.0 * d));
}

/// All k in the resonant set, found by short-vector enumeration in L(N, alpha).
/// Ordered lexicographically by k.
inline std::vector<ResonantHarmonic> resonant_set(double N, const Vec& alpha, double eps,
                                                  const ReducedBasis* rb_in = nullptr) {
    const int d = static_cast<int>(alpha.size());
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("resonant_set: eps must lie in (0, 1)");
    if (!(N >= 2.0)) throw DomainError("resonant_set: N must be >= 2");
    if (d < 2) throw DomainError("resonant_set: d must be >= 2");
    const UnimodularLattice lat = UnimodularLattice::dani(N, alpha);
    const ReducedBasis rb = rb_in != nullptr ? *rb_in : reduced_basis(lat);
    const double r_lo = std::pow(eps, 0.5 * (d + 4.0) / (d - 1.0));
    const double r_hi = std::pow(eps, -0.5);
    const double zscale = std::pow(eps, -0.25 * d);

    std::set<std::vector<std::int64_t>> seen;
    std::vector<ResonantHarmonic> out;
    for (double a = r_lo; a < r_hi; a *= 2.0) {
        const double b = std::min(2.0 * a, r_hi) * (1.0 + 1e-9);
        const double zcap = std::min(zscale * std::pow(a, -0.5 * (d + 1)), 0.5 * N) * (1.0 + 1e-9);
        Vec scale = Vec::Constant(d + 1, 1.0 / b);
        scale[d] = 1.0 / zcap;
        auto scaled = [&](const IntMatrix& c) -> Mat { return scale.asDiagonal() * lat.points(c); };
        const IntMatrix u = detail::lll(d + 1, scaled);
        const Mat bs = scaled(u);
        const Mat r = detail::thin_qr(bs).second;
        detail::enumerate_close(r, Vec::Zero(d + 1), 2.0 * (1.0 + 1e-9), [&](const IntVector& y, double) {
            if (y.isZero()) return;
            const IntVector c = u * y;
            const IntVector k = c.head(d);
            if (!in_resonant_region(k, N, alpha, eps)) return;
            const auto [theta, k_last] = small_divisor(k, alpha);
            if (c[d] != k_last) return;
            std::vector<std::int64_t> key(k.data(), k.data() + d);
            if (!seen.insert(key).second) return;
            ResonantHarmonic h;
            h.k = k;
            h.k_last = k_last;
            const IntVector mf = rb.coeffs_inv * c;
            const std::int64_t g = detail::gcd_of(mf);
            h.multiplicity = g;
            h.m = mf / g;
            h.sign = 1;
            if (detail::leading_sign(h.m) < 0) {
                h.m = -h.m;
                h.sign = -1;
            }
            const Vec v = lat.point(c);
            h.X = v.head(d);
            h.Z = v[d];
            h.R = h.X.norm();
            out.push_back(std::move(h));
        });
    }
    std::sort(out.begin(), out.end(), [](const ResonantHarmonic& a, const ResonantHarmonic& b) {
        return std::lexicographical_compare(a.k.begin(), a.k.end(), b.k.begin(), b.k.end());
    });
    return out;
}

enum class HaarMethod { horospherical, siegel_check };

inline constexpr double default_haar_N = 1e6;

/// Haar-orthogonal matrix with determinant +1.
inline Mat random_rotation(int n, RandomStream& rng) {
    Mat g(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
    auto [q, r] = detail::thin_qr(g);
    if (q.determinant() < 0.0) q.col(0) *= -1.0;
    return q;
}

/// Approximately Haar-distributed unimodular lattice: L(N_haar, alpha) with alpha
/// uniform on the torus. siegel_check additionally applies a random rotation.
inline UnimodularLattice haar_sample(int n, RandomStream& rng, HaarMethod method = HaarMethod::horospherical,
                                     double N_haar = default_haar_N) {
    if (n < 2) throw DomainError("haar_sample: n must be >= 2");
    const Vec alpha = rng.uniform_torus(n - 1);
    UnimodularLattice lat = UnimodularLattice::dani(N_haar, alpha);
    if (method == HaarMethod::siegel_check) lat = lat.rotated(random_rotation(n, rng));
    return lat;
}

/// Number of nonzero lattice vectors of length at most rho.
inline std::size_t count_vectors_in_ball(const UnimodularLattice& lat, double rho) {
    const int n = lat.dim();
    const IntMatrix u = detail::lll(n, [&](const IntMatrix& c) { return lat.points(c); });
    const Mat r = detail::thin_qr(lat.points(u)).second;
    std::size_t count = 0;
    detail::enumerate_close(r, Vec::Zero(n), rho * rho, [&](const IntVector& y, double) {
        if (y.isZero()) return;
        if (lat.point(u * y).squaredNorm() <= rho * rho) ++count;
    });
    return count;
}

using BasisObservable = std::function<double(const ReducedBasis&, const Vec& alpha)>;

struct EquidistributionRow {
    double N = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Monte Carlo mean of an observable of the reduced basis of L(N, alpha) over
/// uniform alpha, for each N. The same alpha draws are used for every N.
inline std::vector<EquidistributionRow> equidistribution_check(const std::vector<double>& N_list, int d,
                                                               const BasisObservable& phi, int samples,
                                                               std::uint64_t seed, int threads = 0) {
    if (samples < 1) throw DomainError("equidistribution_check: samples must be >= 1");
    std::vector<EquidistributionRow> rows;
    for (double N : N_list) {
        std::vector<double> vals(static_cast<std::size_t>(samples));
        parallel_for(vals.size(), [&](std::size_t i) {
            RandomStream rng(seed, StreamTag::equidistribution, i);
            const Vec alpha = rng.uniform_torus(d);
            const auto lat = UnimodularLattice::dani(N, alpha);
            vals[i] = phi(reduced_basis(lat), alpha);
        }, threads);
        double mean = 0.0;
        for (double v : vals) mean += v;
        mean /= samples;
        double var = 0.0;
        for (double v : vals) var += (v - mean) * (v - mean);
        var = samples > 1 ? var / (samples - 1) : 0.0;
        rows.push_back({N, mean, std::sqrt(var / samples)});
    }
    return rows;
}

}  // namespace tordisc
