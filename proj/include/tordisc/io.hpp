#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "convex_body.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "limit_law.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace tordisc {

inline constexpr int schema_version = 1;

using json = nlohmann::json;

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline json to_json(const IntVector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

/// Row-major nested arrays.
inline json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
    return a;
}

inline Vec vec_from_json(const json& j) {
    if (!j.is_array()) throw DomainError("expected a JSON array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

inline Mat mat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw DomainError("expected a nonempty JSON array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Vec r = vec_from_json(j[static_cast<std::size_t>(i)]);
        if (r.size() != cols) throw DomainError("ragged matrix rows");
        m.row(i) = r.transpose();
    }
    return m;
}

/// {kind, d, params, center}; params holds "shape" (row-major) for ellipsoids and
/// additionally "terms" [{amplitude, direction, order}] for support perturbations.
inline json body_to_json(const ConvexBody& body) {
    json j;
    j["kind"] = to_string(body.kind());
    j["d"] = body.dimension();
    json params = json::object();
    if (body.kind() != BodyKind::ball) params["shape"] = to_json(body.shape());
    if (body.kind() == BodyKind::support_perturbation) {
        json terms = json::array();
        for (const auto& t : body.terms()) {
            terms.push_back({{"amplitude", t.amplitude}, {"direction", to_json(t.direction)}, {"order", t.order}});
        }
        params["terms"] = terms;
    }
    j["params"] = params;
    j["center"] = to_json(body.center());
    return j;
}

inline ConvexBody body_from_json(const json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const int d = j.at("d").get<int>();
        Vec center = j.contains("center") ? vec_from_json(j["center"]) : Vec::Zero(d);
        if (center.size() != d) throw DomainError("body json: center has wrong dimension");
        const json params = j.value("params", json::object());
        if (kind == "ball") return ConvexBody::ball(d, center);
        const Mat shape = params.contains("shape") ? mat_from_json(params["shape"]) : Mat(Mat::Identity(d, d));
        if (shape.rows() != d || shape.cols() != d) throw DomainError("body json: shape must be d x d");
        if (kind == "ellipsoid") return ConvexBody::ellipsoid(shape, center);
        if (kind == "support_perturbation") {
            std::vector<PerturbationTerm> terms;
            for (const auto& t : params.value("terms", json::array())) {
                terms.push_back({t.at("amplitude").get<double>(), vec_from_json(t.at("direction")), t.at("order").get<int>()});
            }
            return ConvexBody::support_perturbation(shape, std::move(terms), center);
        }
        throw DomainError("body json: unknown kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw DomainError(std::string("body json: ") + e.what());
    }
}

inline json lattice_to_json(const UnimodularLattice& lat) { return to_json(lat.basis()); }

inline UnimodularLattice lattice_from_json(const json& j) { return UnimodularLattice(mat_from_json(j)); }

namespace detail {

inline void csv_vec(std::ostream& os, const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << format_double(v[i]);
}

inline void csv_header(std::ostream& os, const char* name, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << name << i;
}

}  // namespace detail

inline void write_resonant_csv(std::ostream& os, const std::vector<ResonantHarmonic>& set) {
    const Eigen::Index d = set.empty() ? 0 : set.front().k.size();
    const Eigen::Index n = set.empty() ? 0 : set.front().m.size();
    for (Eigen::Index i = 0; i < d; ++i) os << (i ? ",k" : "k") << i;
    os << (d ? "," : "") << "k_last";
    detail::csv_header(os, "m", n);
    detail::csv_header(os, "X", n - 1);
    os << ",Z,R\n";
    for (const auto& h : set) {
        for (Eigen::Index i = 0; i < h.k.size(); ++i) os << (i ? "," : "") << h.k[i];
        os << (h.k.size() ? "," : "") << h.k_last;
        for (Eigen::Index i = 0; i < h.m.size(); ++i) os << ',' << h.m[i];
        detail::csv_vec(os, h.X);
        os << ',' << format_double(h.Z) << ',' << format_double(h.R) << '\n';
    }
}

inline void write_translation_csv(std::ostream& os, const std::vector<TranslationSample>& s) {
    const Eigen::Index d = s.empty() ? 0 : s.front().alpha.size();
    os << "sample_id,r";
    detail::csv_header(os, "alpha", d);
    detail::csv_header(os, "x", d);
    os << ",raw_discrepancy,normalized,short_vector_flag\n";
    for (const auto& x : s) {
        os << x.id << ',' << format_double(x.r);
        detail::csv_vec(os, x.alpha);
        detail::csv_vec(os, x.x);
        os << ',' << format_double(x.raw) << ',' << format_double(x.normalized) << ',' << (x.short_vector_flag ? 1 : 0) << '\n';
    }
}

inline void write_kesten_csv(std::ostream& os, double r, const std::vector<KestenSample>& s) {
    os << "sample_id,r,alpha0,x0,raw_discrepancy,normalized\n";
    for (const auto& x : s) {
        os << x.id << ',' << format_double(r) << ',' << format_double(x.alpha) << ',' << format_double(x.x) << ','
           << format_double(x.raw) << ',' << format_double(x.normalized) << '\n';
    }
}

inline void write_flow_csv(std::ostream& os, const std::vector<FlowSample>& s) {
    const Eigen::Index d = s.empty() ? 0 : s.front().v.size();
    os << "sample_id,r";
    detail::csv_header(os, "v", d);
    detail::csv_header(os, "x", d);
    os << ",raw_discrepancy,normalized\n";
    for (const auto& x : s) {
        os << x.id << ',' << format_double(x.r);
        detail::csv_vec(os, x.v);
        detail::csv_vec(os, x.x);
        os << ',' << format_double(x.raw) << ',' << format_double(x.normalized) << '\n';
    }
}

inline void write_limit_csv(std::ostream& os, const std::vector<LimitSample>& s) {
    os << "sample_id,value,flagged,resamples,min_R\n";
    for (const auto& x : s) {
        os << x.id << ',' << format_double(x.value) << ',' << (x.flagged ? 1 : 0) << ',' << x.resamples << ','
           << format_double(x.min_R) << '\n';
    }
}

inline void write_tail_csv(std::ostream& os, const std::vector<TailDiagnostic>& s) {
    os << "sample_id,value,value_doubled,change,bound,variance_total\n";
    for (const auto& x : s) {
        os << x.id << ',' << format_double(x.value) << ',' << format_double(x.value_doubled) << ','
           << format_double(std::abs(x.value_doubled - x.value)) << ',' << format_double(x.bound) << ','
           << format_double(x.variance_total) << '\n';
    }
}

/// Sorted samples with their ECDF level i/n.
inline void write_equidistribution_csv(std::ostream& os, const std::vector<EquidistributionRow>& rows) {
    os << "N,mean,stderr\n";
    for (const auto& row : rows) os << format_double(row.N) << ',' << format_double(row.mean) << ',' << format_double(row.stderr_) << '\n';
}

inline void write_ecdf_csv(std::ostream& os, const EmpiricalCDF& e) {
    os << "value,cdf\n";
    const auto& v = e.samples();
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) os << format_double(v[i]) << ',' << format_double((i + 1) / n) << '\n';
}

inline json quantile_report(const EmpiricalCDF& e) {
    json q;
    for (int p : {1, 5, 25, 50, 75, 95, 99}) q[std::to_string(p)] = e.quantile(p / 100.0);
    return q;
}

/// {n_a, n_b, ks, quantiles}; quantiles hold both samples' percentiles.
inline json comparison_json(const EmpiricalCDF& a, const EmpiricalCDF& b) {
    json j;
    j["n_a"] = a.size();
    j["n_b"] = b.size();
    j["ks"] = ks_distance(a, b);
    j["quantiles"] = {{"a", quantile_report(a)}, {"b", quantile_report(b)}};
    return j;
}

inline json cauchy_fit_json(const CauchyFit& f) {
    return {{"location", f.location}, {"scale", f.scale}, {"ks_to_fit", f.ks_to_fit}, {"degenerate", f.degenerate}};
}

}  // namespace tordisc
