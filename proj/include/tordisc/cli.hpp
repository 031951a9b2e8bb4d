#pragma once

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "convex_body.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "lattice.hpp"
#include "limit_law.hpp"
#include "stats.hpp"

namespace tordisc::cli {

enum ExitCode { ok = 0, failure = 1, usage = 2, unsupported = 3 };

/// "0.1,0.2" -> {0.1, 0.2}; a single value is broadcast to d entries when d > 0.
inline Vec parse_vector(const std::string& text, int d = 0) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw DomainError("cannot parse number '" + item + "'");
        }
        if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) {
            throw DomainError("cannot parse number '" + item + "'");
        }
        vals.push_back(v);
    }
    if (vals.empty()) throw DomainError("empty vector argument");
    if (d > 0 && vals.size() == 1) vals.assign(static_cast<std::size_t>(d), vals[0]);
    if (d > 0 && static_cast<int>(vals.size()) != d) {
        throw DomainError("vector argument '" + text + "' needs " + std::to_string(d) + " entries");
    }
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

struct BodyOptions {
    std::string kind = "ball";
    std::string json_path;
    std::string shape;       // diagonal of the shape matrix
    double amplitude = 0.05;
    int order = 3;
    std::string center;
};

inline void add_body_options(CLI::App* app, BodyOptions& b) {
    app->add_option("--body", b.kind, "ball, ellipsoid or perturbed")->check(CLI::IsMember({"ball", "ellipsoid", "perturbed"}));
    app->add_option("--body-json", b.json_path, "body descriptor file; overrides --body");
    app->add_option("--shape", b.shape, "diagonal of the shape matrix, comma separated");
    app->add_option("--amplitude", b.amplitude, "perturbation amplitude");
    app->add_option("--order", b.order, "perturbation Chebyshev order");
    app->add_option("--center", b.center, "body center, comma separated");
}

inline ConvexBody make_body(const BodyOptions& b, int d) {
    if (!b.json_path.empty()) {
        std::ifstream in(b.json_path);
        if (!in) throw DomainError("cannot open body file " + b.json_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw DomainError(std::string("body file: ") + e.what());
        }
        ConvexBody body = body_from_json(j);
        if (body.dimension() != d) throw DomainError("body file dimension differs from --d");
        return body;
    }
    const Vec center = b.center.empty() ? Vec(Vec::Zero(d)) : parse_vector(b.center, d);
    if (b.kind == "ball") return ConvexBody::ball(d, center);
    Mat shape = Mat::Identity(d, d);
    if (!b.shape.empty()) shape = parse_vector(b.shape, d).asDiagonal();
    if (b.kind == "ellipsoid") return ConvexBody::ellipsoid(shape, center);
    Vec dir = Vec::Zero(d);
    dir[0] = 1.0;
    return ConvexBody::support_perturbation(shape, {{b.amplitude, dir, b.order}}, center);
}

struct Output {
    std::string prefix;
};

inline void add_output_option(CLI::App* app, Output& o) {
    app->add_option("--out", o.prefix, "output prefix; writes <prefix>.csv and <prefix>.json");
}

template <typename Writer>
void write_file(const std::string& path, Writer&& w) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    w(f);
}

inline json summary_header(const std::string& subcommand, const json& config) {
    return {{"schema_version", schema_version}, {"subcommand", subcommand}, {"config", config}};
}

inline void emit(const Output& o, const json& summary, std::ostream& out) {
    if (!o.prefix.empty()) write_file(o.prefix + ".json", [&](std::ostream& f) { f << summary.dump(2) << '\n'; });
    out << summary.dump(2) << '\n';
}

inline DirectionDensity parse_density(const std::string& s) {
    return s == "box" ? DirectionDensity::box : DirectionDensity::shell;
}

inline LimitVariant parse_variant(const std::string& s) {
    for (auto v : {LimitVariant::translation_sym, LimitVariant::translation_nonsym, LimitVariant::flow_d2,
                   LimitVariant::flow_dge4_sym, LimitVariant::flow_dge4_nonsym, LimitVariant::geodesic}) {
        if (s == to_string(v)) return v;
    }
    throw DomainError("unknown variant '" + s + "'");
}

inline std::vector<double> values_of(const std::vector<TranslationSample>& s) {
    std::vector<double> v;
    for (const auto& x : s) v.push_back(x.normalized);
    return v;
}

inline std::vector<double> values_of(const std::vector<LimitSample>& s) {
    std::vector<double> v;
    for (const auto& x : s) v.push_back(x.value);
    return v;
}

inline std::vector<double> values_of(const std::vector<FlowSample>& s) {
    std::vector<double> v;
    for (const auto& x : s) v.push_back(x.normalized);
    return v;
}

inline json limit_flags(const std::vector<LimitSample>& s) {
    std::size_t flagged = 0, resamples = 0;
    for (const auto& x : s) {
        flagged += x.flagged ? 1 : 0;
        resamples += static_cast<std::size_t>(x.resamples);
    }
    return {{"flagged", flagged}, {"resamples", resamples}};
}

/// Parses argv and runs one subcommand. JSON summaries go to out, the headline and
/// diagnostics to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Discrepancy of toral translations and flows: samplers and limit-law comparisons", "tordisc"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: TORDISC_THREADS or hardware)");

    // discrepancy-sample / compare share the orbit options.
    int d = 2;
    BodyOptions body;
    double a = 0.2, b = 0.4, gamma = 0.0;
    std::int64_t N = 100000;
    int samples = 2000;
    std::uint64_t seed = 0;
    bool no_short_check = false;
    Output output;

    int M = 8, P_max = 64, limit_samples = 4000, K_max = 128;
    double N_haar = default_haar_N, r = 0.25;
    std::string variant_name, v_text;
    bool no_resample = false;

    double T = 1000.0;
    std::string density = "shell", alpha_text = "0", x_text = "0", y_text;
    double rho = 1.0;
    std::string N_list = "1000,10000,100000";

    auto* ds = app.add_subcommand("discrepancy-sample", "normalized discrepancy of random translation orbits");
    auto* ls = app.add_subcommand("limit-sample", "samples of the limit law series");
    auto* cmp = app.add_subcommand("compare", "KS distance between orbit samples and the limit law");
    auto* kes = app.add_subcommand("kesten", "one-dimensional interval discrepancy with a Cauchy fit");
    auto* flw = app.add_subcommand("flow", "normalized discrepancy of random linear flows");
    auto* cyl = app.add_subcommand("cylinder", "integer points in a slanted capsule");
    auto* geo = app.add_subcommand("geodesic", "geodesic occupation time of a ball");
    auto* eqd = app.add_subcommand("equidistribution", "mean of a reduced-basis observable along L(N, alpha)");
    auto* tv = app.add_subcommand("tail-variance", "truncation diagnostics of the limit law series");

    for (auto* s : {ds, ls, cmp, kes, flw, cyl, geo, eqd, tv}) {
        add_output_option(s, output);
        s->add_option("--threads", threads, "worker threads");
    }
    for (auto* s : {ds, ls, cmp, kes, flw, geo, eqd, tv}) s->add_option("--seed", seed, "random seed")->required();
    for (auto* s : {ds, ls, cmp, flw, cyl, geo, eqd, tv}) s->add_option("--d", d, "dimension");
    for (auto* s : {ds, ls, cmp, flw, tv}) add_body_options(s, body);
    for (auto* s : {ds, cmp, flw, geo}) {
        s->add_option("--a", a, "lower end of the scale range");
        s->add_option("--b", b, "upper end of the scale range");
    }
    for (auto* s : {ds, cmp, kes}) s->add_option("--N", N, "orbit length");
    for (auto* s : {ds, cmp, kes, flw, geo, eqd, tv, ls}) s->add_option("--samples", samples, "number of samples");
    for (auto* s : {ds, cmp}) {
        s->add_option("--gamma", gamma, "shrink exponent: scale r N^-gamma");
        s->add_flag("--no-short-check", no_short_check, "skip the short lattice vector flag");
    }
    for (auto* s : {ls, cmp, tv}) {
        s->add_option("--M", M, "sup-norm cutoff on m");
        s->add_option("--P-max", P_max, "cutoff on p");
        s->add_option("--N-haar", N_haar, "horospherical depth of the Haar sampler");
    }
    cmp->add_option("--limit-samples", limit_samples, "limit law samples");
    ls->add_option("--variant", variant_name, "series variant");
    ls->add_option("--v", v_text, "flow direction for flow variants");
    ls->add_option("--K-max", K_max, "frequency cutoff for flow_d2");
    ls->add_option("--r", r, "body scale for flow_d2");
    ls->add_flag("--no-resample", no_resample, "keep samples with a near-zero projection");
    kes->add_option("--r", r, "interval length")->required();
    for (auto* s : {flw, geo, cyl}) s->add_option("--T", T, "time horizon");
    for (auto* s : {flw, geo}) s->add_option("--density", density, "direction density")->check(CLI::IsMember({"shell", "box"}));
    cyl->add_option("--r", r, "capsule radius")->required();
    cyl->add_option("--alpha", alpha_text, "slope alpha, comma separated or scalar");
    cyl->add_option("--x", x_text, "base point x, comma separated or scalar");
    cyl->add_option("--rho", rho, "speed: v = rho (alpha, 1)");
    geo->add_option("--y", y_text, "ball center (default: all 1/2)");
    eqd->add_option("--N-list", N_list, "comma separated N values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
    if (threads < 0) {
        err << "error: --threads must be >= 0\n";
        return usage;
    }

    try {
        if (ds->parsed() || cmp->parsed()) {
            TranslationSamplerConfig cfg;
            cfg.body = make_body(body, d);
            cfg.a = a;
            cfg.b = b;
            cfg.gamma = gamma;
            cfg.N = N;
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.check_short_vectors = !no_short_check;
            json config = {{"d", d},         {"body", body_to_json(cfg.body)}, {"a", a},   {"b", b},
                           {"gamma", gamma}, {"N", N},                          {"samples", samples},
                           {"seed", seed},   {"short_vector_check", !no_short_check}};
            const auto orbit = sample_translation(cfg);
            std::size_t short_flags = 0;
            for (const auto& s : orbit) short_flags += s.short_vector_flag ? 1 : 0;
            if (!output.prefix.empty()) write_file(output.prefix + ".csv", [&](std::ostream& f) { write_translation_csv(f, orbit); });
            const EmpiricalCDF orbit_ecdf(values_of(orbit));
            if (ds->parsed()) {
                json s = summary_header("discrepancy-sample", config);
                s["n"] = orbit.size();
                s["short_vector_flags"] = short_flags;
                s["quantiles"] = quantile_report(orbit_ecdf);
                emit(output, s, out);
                err << "median normalized discrepancy " << format_double(orbit_ecdf.quantile(0.5)) << '\n';
                return ok;
            }
            LimitLawConfig lc;
            lc.body = cfg.body;
            lc.d = d;
            lc.M = M;
            lc.P_max = P_max;
            lc.samples = limit_samples;
            lc.seed = seed;
            lc.N_haar = N_haar;
            lc.variant = cfg.body.symmetric() ? LimitVariant::translation_sym : LimitVariant::translation_nonsym;
            lc.threads = threads;
            const auto lim = sample_limit(lc);
            if (!output.prefix.empty()) write_file(output.prefix + ".limit.csv", [&](std::ostream& f) { write_limit_csv(f, lim); });
            config["M"] = M;
            config["P_max"] = P_max;
            config["limit_samples"] = limit_samples;
            config["N_haar"] = N_haar;
            config["variant"] = to_string(lc.variant);
            json s = summary_header("compare", config);
            const json c = comparison_json(orbit_ecdf, EmpiricalCDF(values_of(lim)));
            for (auto it = c.begin(); it != c.end(); ++it) s[it.key()] = it.value();
            s["short_vector_flags"] = short_flags;
            s["limit_flags"] = limit_flags(lim);
            emit(output, s, out);
            err << "ks " << format_double(c["ks"].get<double>()) << '\n';
            return ok;
        }
        if (ls->parsed()) {
            LimitLawConfig lc;
            lc.body = make_body(body, d);
            lc.d = d;
            lc.M = M;
            lc.P_max = P_max;
            lc.samples = samples;
            lc.seed = seed;
            lc.N_haar = N_haar;
            lc.K_max = K_max;
            lc.r = r;
            lc.resample = !no_resample;
            lc.threads = threads;
            if (variant_name.empty()) {
                lc.variant = lc.body.symmetric() ? LimitVariant::translation_sym : LimitVariant::translation_nonsym;
            } else {
                lc.variant = parse_variant(variant_name);
            }
            if (!v_text.empty()) lc.v = parse_vector(v_text, d);
            const auto lim = sample_limit(lc);
            const EmpiricalCDF e(values_of(lim));
            if (!output.prefix.empty()) {
                write_file(output.prefix + ".csv", [&](std::ostream& f) { write_limit_csv(f, lim); });
                write_file(output.prefix + ".ecdf.csv", [&](std::ostream& f) { write_ecdf_csv(f, e); });
            }
            json config = {{"d", d}, {"body", body_to_json(lc.body)}, {"variant", to_string(lc.variant)}, {"M", M},
                           {"P_max", P_max}, {"samples", samples}, {"seed", seed}, {"N_haar", N_haar},
                           {"resample", lc.resample}};
            if (lc.variant == LimitVariant::flow_d2) {
                config["K_max"] = K_max;
                config["r"] = r;
            }
            if (lc.v.size() > 0) config["v"] = to_json(lc.v);
            json s = summary_header("limit-sample", config);
            s["n"] = lim.size();
            s["flags"] = limit_flags(lim);
            s["quantiles"] = quantile_report(e);
            emit(output, s, out);
            err << "median " << format_double(e.quantile(0.5)) << '\n';
            return ok;
        }
        if (kes->parsed()) {
            const auto ks = sample_kesten(r, N, samples, seed, threads);
            if (!output.prefix.empty()) write_file(output.prefix + ".csv", [&](std::ostream& f) { write_kesten_csv(f, r, ks); });
            std::vector<double> v;
            for (const auto& x : ks) v.push_back(x.normalized);
            const EmpiricalCDF e(std::move(v));
            const auto fit = cauchy_fit(e);
            json s = summary_header("kesten", {{"r", r}, {"N", N}, {"samples", samples}, {"seed", seed}});
            s["fit"] = cauchy_fit_json(fit);
            s["quantiles"] = quantile_report(e);
            emit(output, s, out);
            err << "cauchy location " << format_double(fit.location) << " scale " << format_double(fit.scale) << " ks "
                << format_double(fit.ks_to_fit) << '\n';
            return ok;
        }
        if (flw->parsed() || geo->parsed()) {
            if (d == 3) throw UnsupportedDimension("d = 3 flows are not supported");
            FlowSamplerConfig cfg;
            cfg.geodesic = geo->parsed();
            if (cfg.geodesic) {
                const Vec y = y_text.empty() ? Vec(Vec::Constant(d, 0.5)) : parse_vector(y_text, d);
                cfg.body = ConvexBody::ball(d, y);
            } else {
                cfg.body = make_body(body, d);
            }
            cfg.a = a;
            cfg.b = b;
            cfg.T = T;
            cfg.density = parse_density(density);
            cfg.samples = samples;
            cfg.seed = seed;
            cfg.threads = threads;
            const auto fs = sample_flow(cfg);
            if (!output.prefix.empty()) write_file(output.prefix + ".csv", [&](std::ostream& f) { write_flow_csv(f, fs); });
            const EmpiricalCDF e(values_of(fs));
            json config = {{"d", d}, {"a", a}, {"b", b}, {"T", T}, {"density", density}, {"samples", samples}, {"seed", seed}};
            if (cfg.geodesic) {
                config["y"] = to_json(cfg.body.center());
            } else {
                config["body"] = body_to_json(cfg.body);
            }
            json s = summary_header(cfg.geodesic ? "geodesic" : "flow", config);
            s["n"] = fs.size();
            s["quantiles"] = quantile_report(e);
            emit(output, s, out);
            err << "median normalized discrepancy " << format_double(e.quantile(0.5)) << '\n';
            return ok;
        }
        if (cyl->parsed()) {
            const Vec alpha = parse_vector(alpha_text, d);
            const Vec x = parse_vector(x_text, d);
            Vec y = Vec::Zero(d + 1), v = Vec::Ones(d + 1);
            y.head(d) = x;
            v.head(d) = alpha;
            v *= rho;
            const auto res = cylinder_count(y, v, r, T);
            if (!output.prefix.empty()) {
                write_file(output.prefix + ".csv", [&](std::ostream& f) {
                    f << "count,volume,discrepancy\n"
                      << res.count << ',' << format_double(res.volume) << ',' << format_double(res.discrepancy) << '\n';
                });
            }
            json s = summary_header("cylinder", {{"d", d}, {"r", r}, {"T", T}, {"alpha", to_json(alpha)}, {"x", to_json(x)}, {"rho", rho}});
            s["count"] = res.count;
            s["volume"] = res.volume;
            s["discrepancy"] = res.discrepancy;
            emit(output, s, out);
            err << "count " << res.count << '\n';
            return ok;
        }
        if (eqd->parsed()) {
            const Vec Ns = parse_vector(N_list);
            std::vector<double> nl(Ns.data(), Ns.data() + Ns.size());
            const auto rows = equidistribution_check(
                nl, d, [](const ReducedBasis& rb, const Vec&) { return rb.vectors.col(0).norm(); }, samples, seed, threads);
            if (!output.prefix.empty()) {
                write_file(output.prefix + ".csv", [&](std::ostream& f) { write_equidistribution_csv(f, rows); });
            }
            json s = summary_header("equidistribution", {{"d", d}, {"N_list", nl}, {"samples", samples}, {"seed", seed},
                                                         {"observable", "shortest_vector_length"}});
            json table = json::array();
            for (const auto& row : rows) table.push_back({{"N", row.N}, {"mean", row.mean}, {"stderr", row.stderr_}});
            s["rows"] = table;
            emit(output, s, out);
            err << "mean shortest vector at N = " << format_double(rows.back().N) << ": " << format_double(rows.back().mean) << '\n';
            return ok;
        }
        if (tv->parsed()) {
            LimitLawConfig lc;
            lc.body = make_body(body, d);
            lc.d = d;
            lc.M = M;
            lc.P_max = P_max;
            lc.samples = samples;
            lc.seed = seed;
            lc.N_haar = N_haar;
            lc.threads = threads;
            const auto rows = sample_tail_diagnostics(lc);
            if (!output.prefix.empty()) write_file(output.prefix + ".csv", [&](std::ostream& f) { write_tail_csv(f, rows); });
            std::size_t within = 0;
            for (const auto& row : rows) within += std::abs(row.value_doubled - row.value) <= row.bound ? 1 : 0;
            const double frac_within = static_cast<double>(within) / static_cast<double>(rows.size());
            json s = summary_header("tail-variance", {{"d", d}, {"body", body_to_json(lc.body)}, {"M", M}, {"P_max", P_max},
                                                      {"samples", samples}, {"seed", seed}, {"N_haar", N_haar}});
            s["n"] = rows.size();
            s["fraction_within_bound"] = frac_within;
            emit(output, s, out);
            err << "fraction within bound " << format_double(frac_within) << '\n';
            return ok;
        }
    } catch (const UnsupportedDimension& e) {
        err << "unsupported: " << e.what() << '\n';
        return unsupported;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const VariantMismatch& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const NotImplementedError& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return failure;
    }
    return usage;
}

}  // namespace tordisc::cli
