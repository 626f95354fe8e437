#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run_cli(const std::string& args)
{
    const std::string cmd = std::string(NOMASPC_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string scenario(const std::string& name)
{
    return std::string(NOMASPC_SCENARIO_DIR) + "/" + name;
}

fs::path temp_dir()
{
    auto d = fs::temp_directory_path() / ("nomaspc_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
    return p.string();
}

} // namespace

TEST(Cli, RequiresSubcommand)
{
    EXPECT_NE(run_cli("").code, 0);
    EXPECT_NE(run_cli("bler-sweep").code, 0);
}

TEST(Cli, BlerSweepWritesCsvAndPlotScript)
{
    const auto dir = temp_dir();
    const auto ini = write_file(dir / "s.ini", "[sweep]\ngrid = 10, 20\n");
    const auto out = (dir / "bler.csv").string();
    const auto r = run_cli("bler-sweep --scenario " + ini + " --tiers closed,quadrature --out " + out);
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream csv(out);
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("gamma0_db,method,diversity,tier,bler_H,bler_L", 0), 0u);
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        ++rows;
    EXPECT_EQ(rows, 2 * 4 * 2);
    EXPECT_TRUE(fs::exists(dir / "bler.py"));
}

TEST(Cli, CorruptedScenarioReportsLine)
{
    const auto dir = temp_dir();
    const auto ini = write_file(dir / "bad.ini", "[system]\nK_S = 2\nm = -3x\n");
    const auto r = run_cli("bler-sweep --scenario " + ini);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("bad.ini:3: [system] m"), std::string::npos) << r.out;
    EXPECT_EQ(run_cli("bler-sweep --scenario " + ini + "_missing").code, 1);
    EXPECT_NE(run_cli("bler-sweep --scenario " + ini + " --dispersion gauss").code, 0);
    EXPECT_EQ(run_cli("bler-sweep --scenario " + scenario("bler_H_vs_snr.ini") + " --tiers exact").code, 1);
}

TEST(Cli, OptimizeEmitsJson)
{
    const auto dir = temp_dir();
    const auto out = (dir / "opt.json").string();
    const auto r = run_cli("optimize --scenario " + scenario("power_split.ini") + " --out " + out);
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream in(out);
    const auto doc = nlohmann::json::parse(in);
    ASSERT_EQ(doc.size(), 4u);
    for (const auto& j : doc) {
        if (j["method"] == "HCS") {
            EXPECT_EQ(j["status"], "infeasible");
        } else {
            EXPECT_EQ(j["status"], "converged");
            EXPECT_LE(j["iterations"].get<int>(), 60);
            EXPECT_GT(j["N_opt"].get<double>(), 0.0);
        }
    }
}

TEST(Cli, BlocklengthAndOmaSweeps)
{
    const auto b = run_cli("blocklength-sweep --scenario " + scenario("power_split.ini"));
    EXPECT_EQ(b.code, 0);
    EXPECT_NE(b.out.find("alpha_L,method,diversity,N_H,N_L"), std::string::npos);
    EXPECT_NE(b.out.find("crossing LCS TAS_SC"), std::string::npos);
    const auto o = run_cli("compare-oma --scenario " + scenario("noma_vs_oma.ini"));
    EXPECT_EQ(o.code, 0) << o.out;
    EXPECT_NE(o.out.find("delta_N"), std::string::npos);
}

TEST(Cli, ValidateIsByteReproducibleAndEchoesSeed)
{
    const auto dir = temp_dir();
    const auto ini = write_file(dir / "v.ini", "[sweep]\ngrid = 20, 30\n[simulation]\nbatch = 2000\n");
    const std::string args = "validate --scenario " + ini + " --trials 20000 --seed 31337";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    EXPECT_TRUE(a.code == 0 || a.code == 2);
    EXPECT_EQ(a.code, b.code);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out.rfind("seed 31337 generator", 0), 0u) << a.out;
    const auto c = run_cli("validate --scenario " + ini + " --trials 20000 --seed 31338");
    EXPECT_NE(a.out, c.out);
}
