#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <tordisc/io.hpp>
#include <tordisc/stats.hpp>

using namespace tordisc;

namespace {

// Sup of |F_a - F_b| evaluated at every sample point of either set.
double ks_brute(const std::vector<double>& a, const std::vector<double>& b) {
    auto F = [](const std::vector<double>& s, double z) {
        double c = 0;
        for (double x : s) c += x <= z ? 1 : 0;
        return c / s.size();
    };
    double best = 0.0;
    for (const auto* s : {&a, &b})
        for (double z : *s) best = std::max(best, std::abs(F(a, z) - F(b, z)));
    return best;
}

std::vector<double> draw(std::mt19937_64& g, int n, double shift, bool ties) {
    std::normal_distribution<double> nd(shift, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = ties ? std::round(2 * nd(g)) / 2 : nd(g);
    return v;
}

}  // namespace

TEST(Ks, Examples) {
    const EmpiricalCDF a({0.3, -1.0, 2.0});
    EXPECT_EQ(ks_distance(a, a), 0.0);
    EXPECT_EQ(ks_distance(EmpiricalCDF({0.0}), EmpiricalCDF({1.0})), 1.0);
    EXPECT_EQ(ks_distance(EmpiricalCDF({0.0, 1.0}), EmpiricalCDF({0.5})), 0.5);
}

TEST(Ks, MatchesBruteForce) {
    std::mt19937_64 g(1);
    for (int i = 0; i < 200; ++i) {
        const bool ties = i % 2 == 0;
        const auto a = draw(g, 1 + i % 37, 0.0, ties), b = draw(g, 1 + (i * 7) % 53, 0.3, ties);
        EXPECT_NEAR(ks_distance(EmpiricalCDF(a), EmpiricalCDF(b)), ks_brute(a, b), 1e-15);
    }
}

TEST(Ks, SymmetricAndTriangle) {
    std::mt19937_64 g(2);
    for (int i = 0; i < 200; ++i) {
        const bool ties = i % 3 == 0;
        const EmpiricalCDF a(draw(g, 50, 0.0, ties)), b(draw(g, 70, 0.2, ties)), c(draw(g, 30, -0.1, ties));
        EXPECT_EQ(ks_distance(a, b), ks_distance(b, a));
        EXPECT_LE(ks_distance(a, c), ks_distance(a, b) + ks_distance(b, c) + 1e-15);
        EXPECT_GE(ks_distance(a, b), 0.0);
        EXPECT_LE(ks_distance(a, b), 1.0);
    }
}

TEST(Ecdf, Evaluation) {
    const EmpiricalCDF e({3.0, 1.0, 2.0, 2.0});
    EXPECT_EQ(e(0.5), 0.0);
    EXPECT_EQ(e(1.0), 0.25);
    EXPECT_EQ(e(2.0), 0.75);
    EXPECT_EQ(e(3.0), 1.0);
    EXPECT_THROW(EmpiricalCDF(std::vector<double>{}), DomainError);
    EXPECT_THROW(EmpiricalCDF({1.0, std::nan("")}), DomainError);
    const auto n = e.negated();
    EXPECT_EQ(n.samples().front(), -3.0);
    EXPECT_EQ(n.samples().back(), -1.0);
}

TEST(Quantile, Examples) {
    EXPECT_EQ(quantile(EmpiricalCDF({1.0, 2.0, 3.0}), 0.5), 2.0);
    EXPECT_EQ(quantile(EmpiricalCDF({4.0, 2.0, 3.0}), 0.0), 2.0);
    EXPECT_EQ(quantile(EmpiricalCDF({0.0, 1.0, 2.0, 3.0, 4.0}), 0.25), 1.0);
    EXPECT_NEAR(quantile(EmpiricalCDF({0.0, 10.0}), 0.3), 3.0, 1e-15);
    EXPECT_THROW(quantile(EmpiricalCDF({1.0}), 1.5), DomainError);
    EXPECT_THROW(quantile(EmpiricalCDF({1.0}), -0.1), DomainError);
}

TEST(Quantile, Monotone) {
    std::mt19937_64 g(3);
    const EmpiricalCDF e(draw(g, 101, 0.0, true));
    double prev = -1e300;
    for (int i = 0; i <= 1000; ++i) {
        const double q = quantile(e, i / 1000.0);
        EXPECT_GE(q, prev);
        prev = q;
    }
    EXPECT_EQ(quantile(e, 1.0), e.samples().back());
}

TEST(Cauchy, CdfAtZero) {
    EXPECT_EQ(cauchy_cdf(0.0), 0.5);
    EXPECT_NEAR(cauchy_cdf(1.0), 0.75, 1e-15);
    EXPECT_NEAR(cauchy_cdf(3.0, 1.0, 2.0), 0.75, 1e-15);
}

TEST(Cauchy, IdealQuantileGrid) {
    const int n = 10000;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = std::tan(M_PI * ((i + 0.5) / n - 0.5));
    const auto fit = cauchy_fit(EmpiricalCDF(v));
    EXPECT_FALSE(fit.degenerate);
    EXPECT_NEAR(fit.location, 0.0, 1e-3);
    EXPECT_NEAR(fit.scale, 1.0, 1e-3);
    EXPECT_LE(fit.ks_to_fit, 1e-3);
}

TEST(Cauchy, ShiftedScaledGrid) {
    const int n = 4000;
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = -2.0 + 0.5 * std::tan(M_PI * ((i + 0.5) / n - 0.5));
    const auto fit = cauchy_fit(EmpiricalCDF(v));
    EXPECT_NEAR(fit.location, -2.0, 1e-3);
    EXPECT_NEAR(fit.scale, 0.5, 1e-3);
    EXPECT_LE(fit.ks_to_fit, 1e-3);
}

TEST(Cauchy, DegenerateAndSmall) {
    const auto fit = cauchy_fit(EmpiricalCDF(std::vector<double>(200, 1.5)));
    EXPECT_TRUE(fit.degenerate);
    EXPECT_EQ(fit.scale, 0.0);
    EXPECT_THROW(cauchy_fit(EmpiricalCDF(std::vector<double>(99, 1.0))), DomainError);
}

TEST(Report, ComparisonJson) {
    std::vector<double> a(100), b(100);
    for (int i = 0; i < 100; ++i) {
        a[i] = i;
        b[i] = i + 0.5;
    }
    const auto j = comparison_json(EmpiricalCDF(a), EmpiricalCDF(b));
    EXPECT_EQ(j["n_a"], 100);
    EXPECT_EQ(j["n_b"], 100);
    EXPECT_NEAR(j["ks"].get<double>(), 0.01, 1e-15);
    for (const char* k : {"1", "5", "25", "50", "75", "95", "99"}) {
        EXPECT_TRUE(j["quantiles"]["a"].contains(k));
        EXPECT_TRUE(j["quantiles"]["b"].contains(k));
    }
    EXPECT_DOUBLE_EQ(j["quantiles"]["a"]["50"].get<double>(), 49.5);
}
