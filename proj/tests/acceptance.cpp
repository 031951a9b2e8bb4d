// Desk-scale acceptance run. Prints one [PASS]/[FAIL] line per criterion and
// exits nonzero when any criterion fails. Pass criterion numbers as arguments
// to run a subset.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <tordisc/tordisc.hpp>

#include "oracles.hpp"

using namespace tordisc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

EmpiricalCDF translation_ecdf(std::int64_t N, double gamma, std::uint64_t seed, int samples = 2000) {
    TranslationSamplerConfig cfg;
    cfg.N = N;
    cfg.gamma = gamma;
    cfg.samples = samples;
    cfg.seed = seed;
    cfg.check_short_vectors = false;
    return sample_translation_ecdf(cfg);
}

Outcome main_limit() {
    LimitLawConfig lc;
    lc.M = 8;
    lc.P_max = 64;
    lc.samples = 4000;
    lc.N_haar = 1e6;
    lc.seed = 12;
    const auto limit = sample_limit_ecdf(lc);
    const double ks5 = ks_distance(translation_ecdf(100000, 0.0, 11), limit);
    const double ks4 = ks_distance(translation_ecdf(10000, 0.0, 11), limit);
    return {ks5 <= 0.05 && ks4 > ks5 - 0.01, "ks(N=1e5)=" + fmt("%.4f", ks5) + " ks(N=1e4)=" + fmt("%.4f", ks4)};
}

Outcome kesten() {
    const auto s = sample_kesten(std::sqrt(2.0) - 1.0, 1000000, 2000, 1);
    std::vector<double> v;
    for (const auto& x : s) v.push_back(x.normalized);
    const auto fit = cauchy_fit(EmpiricalCDF(v));
    const bool ok = !fit.degenerate && fit.ks_to_fit <= 0.05 && std::abs(fit.location) <= 0.1 * fit.scale;
    return {ok, "location=" + fmt("%.4f", fit.location) + " scale=" + fmt("%.4f", fit.scale) + " ks_to_fit=" + fmt("%.4f", fit.ks_to_fit)};
}

Outcome small_ball() {
    const double ks = ks_distance(translation_ecdf(1000000, 0.0, 3), translation_ecdf(1000000, 0.2, 4));
    return {ks <= 0.06, "ks=" + fmt("%.4f", ks)};
}

Outcome resonant_reduction() {
    const std::vector<double> eps = {0.4, 0.2, 0.1};
    const int n = 200;
    std::vector<std::vector<double>> diff(eps.size());
    for (int i = 0; i < n; ++i) {
        RandomStream rng(41, StreamTag::orbit, static_cast<std::uint64_t>(i));
        TranslationOrbitSpec s{ConvexBody::ball(2), rng.uniform(0.2, 0.4), rng.uniform_torus(2), rng.uniform_torus(2), 100000, 0.0};
        const double direct = normalized_discrepancy(s);
        for (std::size_t j = 0; j < eps.size(); ++j) diff[j].push_back(direct - fourier_discrepancy(s, FourierMode::resonant, eps[j]));
    }
    std::vector<double> sd, se;
    for (const auto& d : diff) {
        sd.push_back(moments(d).stddev);
        se.push_back(sd.back() / std::sqrt(2.0 * (n - 1)));
    }
    bool ok = true;
    for (std::size_t j = 1; j < sd.size(); ++j) ok = ok && sd[j] <= sd[j - 1] + 2.0 * std::hypot(se[j], se[j - 1]);
    std::string detail;
    for (std::size_t j = 0; j < sd.size(); ++j) detail += "sd(eps=" + fmt("%.1f", eps[j]) + ")=" + fmt("%.4f", sd[j]) + " ";
    return {ok, detail + "se~" + fmt("%.4f", se[0])};
}

Outcome diagonal_identity() {
    LimitLawConfig cfg;
    cfg.variant = LimitVariant::translation_nonsym;
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        auto pt = draw_sample_point(cfg, i);
        pt.b_prime = pt.b;
        LimitLawConfig sym = cfg;
        sym.variant = LimitVariant::translation_sym;
        worst = std::max(worst, std::abs(eval_translation_nonsym(pt, cfg) - eval_translation_sym(pt, sym)));
    }
    return {worst <= 1e-12, "max difference=" + fmt("%.2e", worst)};
}

Outcome lattice_certificates() {
    std::mt19937_64 g(606);
    int good = 0, total = 0;
    for (int n = 3; n <= 5; ++n) {
        for (int t = 0; t < 100; ++t) {
            ++total;
            const UnimodularLattice lat(oracle::random_good_basis(n, g) * oracle::random_unimodular(n, g).cast<double>());
            const auto rb = reduced_basis(lat);
            const long double det = rb.coeffs.cast<long double>().determinant();
            if (certify_reduced_basis(lat, rb) && std::abs(std::llround(det)) == 1) ++good;
        }
    }
    std::uniform_real_distribution<double> u(0, 1);
    int same = 0;
    for (int t = 0; t < 50; ++t) {
        const int d = 2 + t % 2;
        Vec a(d);
        for (int i = 0; i < d; ++i) a[i] = u(g);
        const double N = d == 2 ? 1000 + 9000 * u(g) : 1000 + 4000 * u(g), eps = 0.2 + 0.3 * u(g);
        std::vector<std::vector<std::int64_t>> got;
        for (const auto& h : resonant_set(N, a, eps)) got.emplace_back(h.k.data(), h.k.data() + d);
        same += got == oracle::resonant_scan(N, a, eps) ? 1 : 0;
    }
    return {good == total && same == 50,
            std::to_string(good) + "/" + std::to_string(total) + " certified, " + std::to_string(same) + "/50 resonant sets exact"};
}

Outcome siegel() {
    const int n = 10000;
    const double want = 32.0 * pi / 3.0;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng(707, StreamTag::haar, static_cast<std::uint64_t>(i));
        const double c = static_cast<double>(count_vectors_in_ball(haar_sample(3, rng), 2.0));
        s += c;
        s2 += c * c;
    }
    const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    return {std::abs(mean - want) <= 3 * se,
            "mean=" + fmt("%.3f", mean) + " target=" + fmt("%.3f", want) + " (" + fmt("%.2f", (mean - want) / se) + " se)"};
}

Outcome herz() {
    const double r = 0.25;
    std::vector<double> lx, ly;
    for (int k = 4; k <= 256; k *= 2) {
        double worst = 0.0;
        for (int a = k; a < 2 * k && a <= 256; a += std::max(1, k / 8)) {
            for (const auto& kv : {std::pair{a, 0}, std::pair{a, a / 2}, std::pair{a / 3, a}}) {
                IntVector kk(2);
                kk << kv.first, kv.second;
                const auto c = fourier_coeff_asymptotic(ConvexBody::ball(2), kk, r);
                const double env = std::sqrt(r) * c.magnitude_plus;
                const double exact = ball_coefficient_2d(r, kk.cast<double>().norm());
                worst = std::max(worst, std::abs(env * std::sin(two_pi * c.phase_plus) - exact) / env);
            }
        }
        lx.push_back(std::log(k));
        ly.push_back(std::log(worst));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope <= -0.9, "slope of relative error=" + fmt("%.3f", slope)};
}

Outcome cylinder() {
    std::mt19937_64 g(909);
    std::uniform_real_distribution<double> u(0, 1);
    int exact = 0;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const int d = 1 + i % 3;
        Vec y = Vec::Zero(d + 1), v(d + 1);
        for (int j = 0; j < d; ++j) {
            y[j] = u(g);
            v[j] = 2 * u(g) - 1;
        }
        v[d] = 1.0;
        v *= 0.5 + u(g);
        const double r = 0.05 + 0.45 * u(g), T = 20 * u(g);
        const auto res = cylinder_count(y, v, r, T);
        exact += res.count == oracle::capsule_brute(y, v, r, T) ? 1 : 0;
        worst = std::max(worst, std::abs(res.discrepancy - (res.count - capsule_volume(d + 1, r, v.norm() * T))));
    }
    return {exact == 100 && worst <= 1e-10, std::to_string(exact) + "/100 counts exact, discrepancy error=" + fmt("%.1e", worst)};
}

Outcome geodesic() {
    FlowSamplerConfig cfg;
    cfg.body = ConvexBody::ball(4, Vec::Constant(4, 0.5));
    cfg.geodesic = true;
    cfg.T = 1e4;
    cfg.samples = 1500;
    auto ecdf = [](const std::vector<FlowSample>& s) {
        std::vector<double> v;
        for (const auto& x : s) v.push_back(x.normalized);
        return EmpiricalCDF(v);
    };
    cfg.density = DirectionDensity::shell;
    cfg.seed = 5;
    const auto a = ecdf(sample_flow(cfg));
    cfg.density = DirectionDensity::box;
    cfg.seed = 6;
    const auto b = ecdf(sample_flow(cfg));
    const double ks = ks_distance(a, b);
    return {ks <= 0.07, "ks(shell, box)=" + fmt("%.4f", ks)};
}

Outcome tail() {
    LimitLawConfig cfg;
    cfg.M = 8;
    cfg.P_max = 64;
    cfg.samples = 1000;
    cfg.seed = 13;
    const auto rows = sample_tail_diagnostics(cfg);
    int below = 0;
    for (const auto& r : rows) below += std::abs(r.value_doubled - r.value) <= r.bound ? 1 : 0;
    return {below >= 950, std::to_string(below) + "/1000 changes below the reported bound"};
}

template <typename F>
bool same_csv(F&& write) {
    std::ostringstream a, b;
    write(a, 1);
    write(b, 8);
    return a.str() == b.str() && !a.str().empty();
}

Outcome determinism() {
    std::vector<std::pair<std::string, bool>> checks;
    checks.emplace_back("translation", same_csv([](std::ostream& os, int t) {
        TranslationSamplerConfig c;
        c.N = 20000;
        c.samples = 100;
        c.seed = 1;
        c.threads = t;
        write_translation_csv(os, sample_translation(c));
    }));
    checks.emplace_back("translation_perturbed", same_csv([](std::ostream& os, int t) {
        TranslationSamplerConfig c;
        c.body = ConvexBody::support_perturbation(Mat::Identity(2, 2), {{0.05, Vec::Unit(2, 0), 3}});
        c.N = 5000;
        c.samples = 40;
        c.seed = 1;
        c.threads = t;
        write_translation_csv(os, sample_translation(c));
    }));
    checks.emplace_back("kesten", same_csv([](std::ostream& os, int t) { write_kesten_csv(os, 0.3, sample_kesten(0.3, 20000, 100, 1, t)); }));
    for (bool geo : {false, true}) {
        for (int d : {2, 4}) {
            if (geo && d == 2) continue;
            checks.emplace_back(geo ? "geodesic" : "flow_d" + std::to_string(d), same_csv([&](std::ostream& os, int t) {
                FlowSamplerConfig c;
                c.body = ConvexBody::ball(d, geo ? Vec(Vec::Constant(d, 0.5)) : Vec());
                c.geodesic = geo;
                c.T = 200;
                c.samples = 60;
                c.seed = 1;
                c.threads = t;
                write_flow_csv(os, sample_flow(c));
            }));
        }
    }
    const std::vector<std::pair<LimitVariant, int>> variants = {{LimitVariant::translation_sym, 2},  {LimitVariant::translation_nonsym, 2},
                                                                 {LimitVariant::flow_d2, 2},          {LimitVariant::flow_dge4_sym, 4},
                                                                 {LimitVariant::flow_dge4_nonsym, 4}, {LimitVariant::geodesic, 4}};
    for (const auto& [var, d] : variants) {
        checks.emplace_back(std::string("limit_") + to_string(var), same_csv([&](std::ostream& os, int t) {
            LimitLawConfig c;
            c.d = d;
            c.variant = var;
            c.body = is_nonsymmetric(var) && d == 2 ? ConvexBody::support_perturbation(Mat::Identity(2, 2), {{0.05, Vec::Unit(2, 0), 3}})
                                                    : ConvexBody::ball(d);
            c.M = d == 2 ? 4 : 2;
            c.P_max = 16;
            c.K_max = 16;
            c.v = d == 2 ? Vec((Vec(2) << 1.0, std::sqrt(2.0)).finished()) : Vec((Vec(4) << 0.2, 0.3, -0.1, 1.0).finished());
            c.samples = 40;
            c.seed = 1;
            c.threads = t;
            write_limit_csv(os, sample_limit(c));
        }));
    }
    checks.emplace_back("tail", same_csv([](std::ostream& os, int t) {
        LimitLawConfig c;
        c.M = 3;
        c.P_max = 16;
        c.samples = 40;
        c.seed = 1;
        c.threads = t;
        write_tail_csv(os, sample_tail_diagnostics(c));
    }));
    checks.emplace_back("equidistribution", same_csv([](std::ostream& os, int t) {
        write_equidistribution_csv(os, equidistribution_check({1e3, 1e5}, 2, [](const ReducedBasis& rb, const Vec&) { return rb.vectors.col(0).norm(); }, 50, 1, t));
    }));
    bool ok = true;
    std::string bad;
    for (const auto& [name, same] : checks) {
        ok = ok && same;
        if (!same) bad += " " + name;
    }
    return {ok, std::to_string(checks.size()) + " samplers compared" + (ok ? "" : ", differing:" + bad)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"main limit law, d=2 ball", main_limit},
        {"Kesten Cauchy limit", kesten},
        {"small-ball invariance", small_ball},
        {"resonant reduction", resonant_reduction},
        {"diagonal identity", diagonal_identity},
        {"lattice certificates", lattice_certificates},
        {"Haar sampler Siegel mean", siegel},
        {"Herz asymptotics", herz},
        {"cylinder oracle", cylinder},
        {"geodesic v-independence", geodesic},
        {"tail diagnostics", tail},
        {"determinism across threads", determinism},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << ": " << o.detail << " ("
                  << fmt("%.1f", secs) << " s)" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
