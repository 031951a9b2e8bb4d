#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <tordisc/io.hpp>

namespace fs = std::filesystem;
using tordisc::json;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + TORDISC_CLI_PATH + " " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (p == nullptr) return r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("tordisc_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Cli, CylinderExample) {
    const auto r = run("cylinder --d 2 --r 0.1 --T 1 --alpha 0 --x 0,0");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["count"], 2);
    EXPECT_EQ(j["schema_version"], 1);
    EXPECT_EQ(j["subcommand"], "cylinder");
    EXPECT_EQ(j["config"]["r"], 0.1);
    EXPECT_EQ(j["config"]["T"], 1.0);
}

TEST(Cli, CompareExample) {
    const auto r = run("compare --d 2 --body ball --N 100000 --samples 2000 --limit-samples 4000 --seed 7");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    ASSERT_TRUE(j.contains("ks"));
    EXPECT_GE(j["ks"].get<double>(), 0.0);
    EXPECT_LE(j["ks"].get<double>(), 1.0);
    EXPECT_EQ(j["n_a"], 2000);
    EXPECT_EQ(j["n_b"], 4000);
    EXPECT_EQ(j["config"]["seed"], 7);
    EXPECT_EQ(j["config"]["N"], 100000);
}

TEST(Cli, KestenExample) {
    const auto r = run("kesten --r 0.41421356 --N 1000000 --samples 2000 --seed 1");
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    for (const char* k : {"location", "scale", "ks_to_fit", "degenerate"}) EXPECT_TRUE(j["fit"].contains(k)) << k;
    EXPECT_GT(j["fit"]["scale"].get<double>(), 0.0);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("discrepancy-sample --seed 1 --bogus 3").code, 2);
    EXPECT_EQ(run("no-such-command").code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("discrepancy-sample --N 100").code, 2);
    EXPECT_EQ(run("limit-sample --d 2").code, 2);
    EXPECT_EQ(run("discrepancy-sample --seed 1 --a 0.5 --b 0.2 --N 100 --samples 4").code, 2);
    EXPECT_EQ(run("kesten --seed 1 --r 1.5 --N 10 --samples 4").code, 2);
    EXPECT_EQ(run("kesten --seed 1 --r 0.3 --N 10 --samples 50").code, 2);
    EXPECT_EQ(run("limit-sample --seed 1 --body perturbed --variant translation_sym --samples 4").code, 2);
    EXPECT_EQ(run("discrepancy-sample --help").code, 0);
}

TEST(Cli, UnsupportedDimension) {
    EXPECT_EQ(run("flow --d 3 --seed 1 --samples 4 --T 10").code, 3);
    EXPECT_EQ(run("geodesic --d 3 --seed 1 --samples 4 --T 10").code, 3);
}

TEST(Cli, OutputsIgnoreThreadCount) {
    const std::vector<std::string> cmds = {
        "discrepancy-sample --d 2 --N 5000 --samples 40 --seed 3",
        "discrepancy-sample --d 2 --body perturbed --N 2000 --samples 20 --seed 3",
        "limit-sample --d 2 --samples 40 --M 4 --P-max 16 --seed 3",
        "limit-sample --d 2 --body perturbed --variant translation_nonsym --samples 20 --M 3 --P-max 8 --seed 3",
        "compare --d 2 --N 2000 --samples 30 --limit-samples 30 --M 4 --P-max 16 --seed 3",
        "kesten --r 0.3 --N 5000 --samples 120 --seed 3",
        "flow --d 2 --T 50 --samples 30 --seed 3",
        "flow --d 4 --T 50 --samples 20 --density box --seed 3",
        "geodesic --d 4 --T 50 --samples 20 --seed 3",
        "equidistribution --d 2 --samples 20 --N-list 100,1000 --seed 3",
        "tail-variance --d 2 --samples 20 --M 3 --P-max 16 --seed 3",
    };
    int i = 0;
    for (const auto& c : cmds) {
        const auto a = scratch("a" + std::to_string(i)), b = scratch("b" + std::to_string(i)), e = scratch("e" + std::to_string(i));
        ++i;
        ASSERT_EQ(run(c + " --threads 1 --out " + a.string()).code, 0) << c;
        ASSERT_EQ(run(c + " --threads 8 --out " + b.string()).code, 0) << c;
        ASSERT_EQ(run(c + " --out " + e.string(), "TORDISC_THREADS=3").code, 0) << c;
        const std::string ca = slurp(a.string() + ".csv");
        EXPECT_FALSE(ca.empty()) << c;
        EXPECT_EQ(ca, slurp(b.string() + ".csv")) << c;
        EXPECT_EQ(ca, slurp(e.string() + ".csv")) << c;
        const auto j = json::parse(slurp(a.string() + ".json"));
        EXPECT_EQ(j["schema_version"], 1) << c;
        EXPECT_TRUE(j.contains("config")) << c;
        EXPECT_EQ(j["config"]["seed"], 3) << c;
    }
}

TEST(Cli, SeedChangesOutput) {
    const auto a = scratch("s1"), b = scratch("s2");
    ASSERT_EQ(run("discrepancy-sample --N 1000 --samples 10 --seed 1 --out " + a.string()).code, 0);
    ASSERT_EQ(run("discrepancy-sample --N 1000 --samples 10 --seed 2 --out " + b.string()).code, 0);
    EXPECT_NE(slurp(a.string() + ".csv"), slurp(b.string() + ".csv"));
}

TEST(Cli, CsvHeaders) {
    const auto a = scratch("h1"), b = scratch("h2");
    ASSERT_EQ(run("discrepancy-sample --N 1000 --samples 3 --seed 1 --out " + a.string()).code, 0);
    const std::string csv = slurp(a.string() + ".csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_id,r,alpha0,alpha1,x0,x1,raw_discrepancy,normalized,short_vector_flag");
    ASSERT_EQ(run("limit-sample --samples 3 --M 2 --P-max 4 --seed 1 --out " + b.string()).code, 0);
    const std::string lim = slurp(b.string() + ".csv");
    EXPECT_EQ(lim.substr(0, lim.find('\n')), "sample_id,value,flagged,resamples,min_R");
    const std::string ecdf = slurp(b.string() + ".ecdf.csv");
    EXPECT_EQ(ecdf.substr(0, ecdf.find('\n')), "value,cdf");
}

TEST(Cli, BodyJsonRoundTrip) {
    tordisc::Mat s(2, 2);
    s << 1.2, 0.1, 0.1, 0.9;
    tordisc::Vec dir(2);
    dir << 1.0, 0.5;
    const std::vector<tordisc::ConvexBody> bodies = {
        tordisc::ConvexBody::ball(3), tordisc::ConvexBody::ellipsoid(s, tordisc::Vec::Constant(2, 0.25)),
        tordisc::ConvexBody::support_perturbation(s, {{0.03, dir, 3}, {0.01, dir, 4}})};
    for (const auto& b : bodies) {
        const json j = tordisc::body_to_json(b);
        const auto back = tordisc::body_from_json(j);
        EXPECT_EQ(tordisc::body_to_json(back).dump(), j.dump());
        EXPECT_EQ(back.volume(), b.volume());
        tordisc::Vec t = tordisc::Vec::LinSpaced(b.dimension(), 0.3, 1.1);
        EXPECT_EQ(back.support(t), b.support(t));
    }
    // The same body given by file and by flags.
    const auto f = scratch("body.json");
    const tordisc::Mat diag = (tordisc::Vec(2) << 1.5, 0.7).finished().asDiagonal();
    std::ofstream(f) << tordisc::body_to_json(tordisc::ConvexBody::ellipsoid(diag)).dump();
    const auto a = scratch("bf"), c = scratch("bg");
    ASSERT_EQ(run("discrepancy-sample --N 2000 --samples 10 --seed 4 --body-json " + f.string() + " --out " + a.string()).code, 0);
    ASSERT_EQ(run("discrepancy-sample --N 2000 --samples 10 --seed 4 --body ellipsoid --shape 1.5,0.7 --out " + c.string()).code, 0);
    EXPECT_EQ(slurp(a.string() + ".csv"), slurp(c.string() + ".csv"));
}

TEST(Cli, MalformedBodyJson) {
    const auto f = scratch("bad.json");
    std::ofstream(f) << R"({"kind": "torus", "d": 2})";
    EXPECT_EQ(run("discrepancy-sample --N 100 --samples 2 --seed 1 --body-json " + f.string()).code, 2);
}
