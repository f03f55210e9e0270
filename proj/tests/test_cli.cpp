#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <lowlying/cli.hpp>

#include "oracles/density_oracle.hpp"

using namespace lowlying;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + "/lowlying_" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

const std::string default_panel = std::string(LOWLYING_DATA_DIR) + "/quartic_panel.txt";

}  // namespace

TEST(Cli, ClassgroupTwentyThree) {
    Result r = run({"classgroup", "23"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["h"], 3);
    EXPECT_EQ(j["forms"].size(), 3u);
    EXPECT_EQ(j["forms"][0], nlohmann::json({1, 1, 6}));
}

TEST(Cli, ClassgroupThree) {
    Result r = run({"classgroup", "3"});
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["h"], 1);
    EXPECT_EQ(j["w"], 6);
}

TEST(Cli, ClassgroupNonFundamental) {
    Result r = run({"classgroup", "12"});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find("fundamental"), std::string::npos);
}

TEST(Cli, SigmaOutsideSupport) {
    Result r = run({"--sigma", "1.2", "density-sweep"});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find("(-1, 1)"), std::string::npos);
}

TEST(Cli, BadFlagsAreConfigErrors) {
    EXPECT_EQ(run({"--window", "10:5", "density-sweep"}).code, cli::exit_config);
    EXPECT_EQ(run({"--format", "xml", "density-sweep"}).code, cli::exit_config);
    EXPECT_EQ(run({"--window", "1000:1100", "--window", "1050:1200", "density-sweep"}).code, cli::exit_config);
    EXPECT_EQ(run({}).code, cli::exit_config);
    EXPECT_EQ(run({"--version"}).code, cli::exit_ok);
}

TEST(Cli, EmptyWindowListGivesHeaderOnly) {
    Result r = run({"density-sweep"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "delta,h,sigma,cosh_term,const_term,s1,s2,sinh_term,total_D,residual_vs_usp\n");
    Result t = run({"--odd-only", "tau-table"});
    ASSERT_EQ(t.code, 0);
    EXPECT_EQ(t.out.find('\n'), t.out.size() - 1);
}

TEST(Cli, DensityRowsMatchOracle) {
    const std::string path = tmp("density.csv");
    Result r = run({"--window", "1000:1030", "--output", path, "density-sweep"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = data_rows(slurp(path));
    ASSERT_GE(rows.size(), 3u);
    for (std::size_t i : {std::size_t{0}, rows.size() / 2, rows.size() - 1}) {
        const auto d = std::stoll(rows[i][0]);
        oracle::DensityParts o = oracle::fejer_density(d, 0.9);
        EXPECT_EQ(std::stoll(rows[i][1]), o.h);
        EXPECT_NEAR(std::stod(rows[i][8]), o.total, 1e-10) << d;
        EXPECT_NEAR(std::stod(rows[i][9]), o.total - 0.55, 1e-10) << d;
    }
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LT(std::stoll(rows[i - 1][0]), std::stoll(rows[i][0]));
    auto m = nlohmann::json::parse(slurp(path + ".manifest.json"));
    EXPECT_EQ(m["command"], "density-sweep");
    EXPECT_EQ(m["rows"], rows.size());
    EXPECT_EQ(m["config"]["sigma"], 0.9);
    EXPECT_EQ(m["windows"][0]["count"], rows.size());
}

TEST(Cli, OutputIndependentOfThreadCount) {
    const std::string a = tmp("t1.csv"), b = tmp("t4.csv");
    ASSERT_EQ(run({"--window", "5000:5200", "--threads", "1", "--output", a, "density-sweep"}).code, 0);
    ASSERT_EQ(run({"--window", "5000:5200", "--threads", "4", "--output", b, "density-sweep"}).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const std::string c = tmp("t1.json"), d = tmp("t4.json");
    ASSERT_EQ(run({"--window", "2000:2100", "--odd-only", "--cutoff-inert", "20000", "--format", "json", "--threads", "1",
                   "--output", c, "tau-table"}).code, 0);
    ASSERT_EQ(run({"--window", "2000:2100", "--odd-only", "--cutoff-inert", "20000", "--format", "json", "--threads", "3",
                   "--output", d, "tau-table"}).code, 0);
    EXPECT_EQ(slurp(c), slurp(d));
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const std::string conf = tmp("sweep.conf");
    spit(conf, "# sample\nsigma = 0.5\nwindow = 1000:1020\n");
    Result a = run({"--config", conf, "density-sweep"});
    ASSERT_EQ(a.code, 0) << a.err;
    auto rows = data_rows(a.out);
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(std::stod(rows[0][2]), 0.5);
    Result b = run({"--config", conf, "--sigma", "0.7", "density-sweep"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(std::stod(data_rows(b.out)[0][2]), 0.7);
    spit(conf, "sigmaa = 0.5\n");
    EXPECT_EQ(run({"--config", conf, "density-sweep"}).code, cli::exit_config);
}

TEST(Cli, UnwritableOutput) {
    Result r = run({"--window", "1000:1010", "--output", "/nonexistent-dir/x.csv", "density-sweep"});
    EXPECT_EQ(r.code, cli::exit_io);
}

TEST(Cli, TauTableEulerColumnAllTrue) {
    Result r = run({"--window", "1000:1300", "--odd-only", "--cutoff-inert", "100000", "tau-table"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto rows = data_rows(r.out);
    ASSERT_GT(rows.size(), 5u);
    for (const auto& row : rows) {
        ASSERT_EQ(row.size(), 13u);
        EXPECT_EQ(row[9], "true") << row[0];
        EXPECT_EQ(std::stoll(row[1]) % 2, 1);
        EXPECT_LE(std::fabs(std::stod(row[7]) - std::stod(row[8])), 1e-6);
    }
    EXPECT_NE(r.out.find("# window_lo,window_hi,count,median_abs_lhs_minus_rhs,median_abs_tau"), std::string::npos);
    Result w = run({"--window", "1000:1010", "--cutoff-inert", "1000", "tau-table"});
    EXPECT_NE(w.err.find("--odd-only"), std::string::npos);
}

// the default panel fails the |sqrt(beta)| identity on every field; the exit code says so
TEST(Cli, AppendixDefaultPanel) {
    Result r = run({"--threads", "2", "appendix-checks", "--panel", default_panel, "--trials", "300"});
    EXPECT_EQ(r.code, cli::exit_invariant);
    auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["fields"].size(), 10u);
    EXPECT_TRUE(j["m_unit_constant_per_base"].get<bool>());
    for (const auto& f : j["fields"]) {
        EXPECT_TRUE(f["checks"]["inverse_residual"].get<bool>());
        EXPECT_TRUE(f["checks"]["entry_bound"].get<bool>());
        EXPECT_TRUE(f["checks"]["normform"].get<bool>());
        EXPECT_TRUE(f["checks"]["discriminant_identity"].get<bool>());
        EXPECT_FALSE(f["checks"]["sqrtbeta_identity"].get<bool>());
        EXPECT_LE(f["sqrtbeta_norm_err"].get<double>(), 1e-12);
    }
    EXPECT_EQ(j["fields"][1]["beta"], "-3 + sqrt(2)");
    EXPECT_EQ(j["fields"][1]["delta"], 7168);
}

TEST(Cli, AppendixPanelErrors) {
    const std::string bad = tmp("bad_panel.txt");
    spit(bad, "2 -1 0\n2 1 1\n");
    Result r = run({"appendix-checks", "--panel", bad});
    EXPECT_EQ(r.code, cli::exit_config);
    EXPECT_NE(r.err.find(":2:"), std::string::npos);
    EXPECT_NE(r.err.find("sigma_1"), std::string::npos);
    spit(bad, "2 -1 x\n");
    EXPECT_EQ(run({"appendix-checks", "--panel", bad}).code, cli::exit_config);
    EXPECT_EQ(run({"appendix-checks", "--panel", bad + ".missing"}).code, cli::exit_config);
    const std::string empty = tmp("empty_panel.txt");
    spit(empty, "# nothing\n");
    Result e = run({"appendix-checks", "--panel", empty});
    EXPECT_EQ(e.code, 0);
    EXPECT_TRUE(nlohmann::json::parse(e.out)["fields"].empty());
}

TEST(Cli, BinaryExitCodes) {
    const std::string bin = LOWLYING_CLI;
    auto status = [&](const std::string& args) {
        int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    EXPECT_EQ(status("classgroup 23"), 0);
    EXPECT_EQ(status("classgroup 12"), 1);
    EXPECT_EQ(status("--sigma 1.2 density-sweep"), 1);
}
