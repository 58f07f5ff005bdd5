#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using solman::cli::run_cli;
using nlohmann::json;

namespace {

const std::string kLin = std::string(SOLMAN_SOURCE_DIR) + "/configs/lin.json";
const std::string kSin = std::string(SOLMAN_SOURCE_DIR) + "/configs/sin.json";

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class CliFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("solman_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string write(const std::string& name, const std::string& text) {
        const auto p = dir / name;
        std::ofstream(p) << text;
        return p.string();
    }

    fs::path dir;
};

const char* kSegment = "t,x,dx\n-1,0.1,0\n-0.5,0.4,0.5\n-0.2,0.2,-0.3\n0,0.3,1\n";

} // namespace

TEST(CliVerify, LinFullSuitePasses) {
    const auto r = cli({"verify", "--config", kLin, "--seed", "42"});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j.at("pass").get<bool>());
    EXPECT_EQ(j.at("seed").get<std::uint64_t>(), 42u);
    EXPECT_TRUE(j.contains("timestamp"));
}

TEST(CliVerify, IsDeterministicModuloTimestamp) {
    auto a = json::parse(cli({"verify", "--config", kSin, "--suite", "psi,h,manifold"}).out);
    auto b = json::parse(cli({"--config", kSin, "verify", "--suite", "psi,h,manifold"}).out);
    a.erase("timestamp");
    b.erase("timestamp");
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(CliVerify, SuiteSelectorRestrictsChecks) {
    const auto r = cli({"verify", "--config", kLin, "--suite", "roundtrip"});
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    ASSERT_FALSE(j.at("checks").empty());
    for (const auto& c : j.at("checks")) EXPECT_EQ(c.at("suite"), "roundtrip");
}

TEST(CliVerify, CsvFormat) {
    const auto r = cli({"verify", "--config", kLin, "--suite", "constants", "--format", "csv"});
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_csv(r.out);
    EXPECT_EQ(rows.at(0).size(), 7u);
    EXPECT_EQ(rows.at(0).at(0), "suite");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].at(6), "true");
}

TEST_F(CliFiles, ConfigErrorsExitWithTwo) {
    const auto bad = write("bad.json", R"({"r": 1, "eta0": 0, "g": {"kind": "linear", "slope": -1},
        "d": {"kind": "table", "ts": [-1, 0, 1], "xs": [0.5, 0.5, 0.5]}})");
    auto r = cli({"verify", "--config", bad});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("vanish"), std::string::npos);
    EXPECT_EQ(cli({"verify", "--config", write("junk.json", "{not json")}).code, 2);
    EXPECT_EQ(cli({"verify", "--config", (dir / "missing.json").string()}).code, 2);
    EXPECT_EQ(cli({"verify"}).code, 2);
    EXPECT_EQ(cli({"verify", "--config", kLin, "--suite", "nonsense"}).code, 2);
    EXPECT_EQ(cli({"verify", "--config", kLin, "--format", "xml"}).code, 2);
    EXPECT_EQ(cli({"--config", kLin}).code, 2);
    EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(CliSample, SinglePointAtEta0IsTheZeroRow) {
    const auto r = cli({"sample-manifold", "--config", kLin, "--count", "1", "--xi-min", "0", "--xi-max", "0"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "xi,residual,x0,x_delayed,dx0\n0,0,0,0,0\n");
}

TEST(CliSample, HundredPointsOnTheManifold) {
    for (const char* shape : {"--random-shape", "--nodes=64"}) {
        const auto r = cli({"sample-manifold", "--config", kSin, "--count", "100", shape});
        ASSERT_EQ(r.code, 0);
        const auto rows = parse_csv(r.out);
        ASSERT_EQ(rows.size(), 101u);
        for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::abs(std::stod(rows[i][1])), 1e-12);
        EXPECT_EQ(std::stod(rows[1][0]), -2.0);
        EXPECT_EQ(std::stod(rows[100][0]), 2.0);
    }
}

TEST(CliSample, EmptyRangeGivesHeaderOnly) {
    const auto r = cli({"sample-manifold", "--config", kLin, "--xi-min", "1", "--xi-max", "-1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "xi,residual,x0,x_delayed,dx0\n");
}

TEST_F(CliFiles, MapRoundTripThroughFiles) {
    const auto in = write("seg.csv", kSegment);
    const auto a = (dir / "a.csv").string(), ba = (dir / "ba.csv").string();
    const auto rep = (dir / "rep.json").string();
    ASSERT_EQ(cli({"map", "--config", kLin, "--dir", "A", "--in", in, "--out", a, "--emit-branch-report", rep}).code, 0);
    const auto j = json::parse(slurp(rep));
    EXPECT_EQ(j.at("branch_used"), "plus");
    EXPECT_EQ(j.at("eta").get<double>(), 0.3);
    EXPECT_FALSE(j.contains("sigma"));

    // A(phi) lies in X_0 and keeps the head value
    std::ifstream as(a);
    const auto seg = solman::read_segment_csv(as);
    EXPECT_EQ(seg.eval(0.0), 0.3);
    EXPECT_LE(std::abs(seg.eval_deriv(0.0) - (1.0 - solman::load_problem(kLin).g(j.at("tau").get<double>()))),
              1e-15);

    ASSERT_EQ(cli({"map", "--config", kLin, "--dir", "B", "--in", a, "--out", ba, "--emit-branch-report", rep,
                   "--check-overlap"})
                  .code,
              0);
    const auto jb = json::parse(slurp(rep));
    EXPECT_TRUE(jb.contains("sigma"));
    EXPECT_TRUE(jb.at("overlap_checked").get<bool>());
    std::ifstream bs(ba);
    const auto back = solman::read_segment_csv(bs);
    std::istringstream orig(kSegment);
    const auto phi = solman::read_segment_csv(orig);
    // the intermediate file samples the psi tail, so agreement is to interpolation accuracy
    for (double t : phi.nodes()) EXPECT_NEAR(back.eval(t), phi.eval(t), 1e-6);
}

TEST_F(CliFiles, MapRejectsBadInput) {
    const auto in = write("seg.csv", kSegment);
    EXPECT_EQ(cli({"map", "--config", kLin, "--dir", "C", "--in", in}).code, 2);
    EXPECT_EQ(cli({"map", "--config", kLin, "--dir", "A"}).code, 2);
    EXPECT_EQ(cli({"map", "--config", kLin, "--dir", "A", "--in", write("bad.csv", "t,x\n")}).code, 2);
    const auto wide = write("wide.csv", "t,x,dx\n-2,0,0\n0,0,0\n");
    const auto r = cli({"map", "--config", kLin, "--dir", "A", "--in", wide});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("r = 1"), std::string::npos);
}

TEST_F(CliFiles, IntegrateWritesResidualColumn) {
    const auto out = (dir / "traj.csv").string();
    const auto flat = write("flat.csv", "t,x,dx\n-1,0.3,0\n-0.5,0.3,0\n-0.1,0.3,0\n-0.05,0.3,0\n0,0.3,-0.3\n");
    auto r = cli({"integrate", "--config", kLin, "--init", flat, "--t-end", "1", "--step", "0.001", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    // phi(-d(0.3)) = 0.3 exactly, so phi'(0) = g(0.3) puts it on the manifold
    EXPECT_TRUE(r.err.empty()) << r.err;
    const auto rows = parse_csv(slurp(out));
    ASSERT_EQ(rows.at(0), (std::vector<std::string>{"t", "x", "dx", "residual"}));
    EXPECT_EQ(rows.size(), 1002u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::abs(std::stod(rows[i][3])), 1e-5);

    const auto off = write("off.csv", "t,x,dx\n-1,0.3,0\n0,0.3,0.5\n");
    r = cli({"integrate", "--config", kLin, "--init", off, "--t-end", "0.5", "--step", "0.01", "--every", "10"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.err.find("warning"), std::string::npos);
    EXPECT_EQ(parse_csv(r.out).size(), 7u);
    EXPECT_EQ(cli({"integrate", "--config", kLin, "--init", off, "--t-end", "1", "--step", "0"}).code, 2);
}

TEST(CliPlot, BumpStaysInUnitInterval) {
    const auto r = cli({"plot", "bump", "--config", kLin, "--n", "801"});
    ASSERT_EQ(r.code, 0);
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 802u);
    EXPECT_EQ(std::stod(rows[1][0]), -2.0);
    EXPECT_EQ(std::stod(rows[801][0]), 2.0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GE(std::stod(rows[i][1]), 0.0);
        EXPECT_LE(std::stod(rows[i][1]), 1.0);
    }
}

TEST(CliPlot, HAtEta0IsIdentity) {
    const auto r = cli({"plot", "h", "--config", kSin, "--eta", "0", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const auto j = json::parse(r.out);
    for (const auto& row : j.at("rows")) EXPECT_EQ(row[0].get<double>(), row[1].get<double>());
}

TEST(CliPlot, PsiVanishesBeforeTheCutoff) {
    const auto r = cli({"plot", "psi", "--config", kLin, "--eta", "0.3", "--n", "2001"});
    ASSERT_EQ(r.code, 0);
    const double z = -0.09 / 1.09;
    const auto rows = parse_csv(r.out);
    int inside = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = std::stod(rows[i][0]);
        if (t <= z) {
            ++inside;
            EXPECT_LE(std::abs(std::stod(rows[i][1])), 1e-15);
        }
    }
    EXPECT_GT(inside, 1800);
    EXPECT_EQ(rows.back().at(2), "1");
}

TEST_F(CliFiles, PlotWritesSvgAndTrajectories) {
    const auto svg = (dir / "slice.svg").string();
    ASSERT_EQ(cli({"plot", "slice", "--config", kSin, "--eta", "0.4", "--svg", svg}).code, 0);
    const auto text = slurp(svg);
    EXPECT_EQ(text.rfind("<svg", 0), 0u);
    EXPECT_NE(text.find("<polyline"), std::string::npos);

    const auto flat = write("flat.csv", "t,x,dx\n-1,0.3,0\n-0.1,0.3,0\n0,0.3,-0.3\n");
    const auto r = cli({"plot", "trajectory", "--config", kLin, "--init", flat, "--t-end", "2", "--n", "5"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(parse_csv(r.out).size(), 6u);
    EXPECT_EQ(cli({"plot", "trajectory", "--config", kLin}).code, 2);
    EXPECT_EQ(cli({"plot", "spiral", "--config", kLin}).code, 2);
}
