#include "qwit/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qwit/io.hpp"

using namespace qwit;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string data(const char* f) { return (std::filesystem::path(QWIT_DATA_DIR) / f).string(); }

}  // namespace

TEST(CliWitness, QubitVViolates) {
    const auto r = run({"witness", "--builtin", "paper-qubit", "--which", "v"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("superposition      1.0000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("violated           true"), std::string::npos);
}

TEST(CliWitness, QutritWJson) {
    const auto r = run({"witness", "--builtin", "paper-qutrit", "--which", "w", "--format", "json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_NEAR(j["superposition_value"].get<double>(), 2.0 / 3.0, 1e-12);
    EXPECT_TRUE(j["violated"].get<bool>());
    EXPECT_EQ(j.dump(2) + "\n", r.out);
}

TEST(CliWitness, IdentityInterventionFromFiles) {
    const auto r = run({"witness", "--dim", "2", "--u0", data("identity2.mat"), "--u1", data("hadamard.mat"),
                        "--format", "json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    const Json j = Json::parse(r.out);
    EXPECT_NEAR(j["superposition_value"].get<double>(), 0.0, 1e-12);
    for (const auto& c : j["control_values"]) EXPECT_NEAR(c.get<double>(), 0.0, 1e-12);
    EXPECT_FALSE(j["violated"].get<bool>());
}

TEST(CliWitness, ConfigFileMatchesBuiltin) {
    const auto golden = (std::filesystem::path(QWIT_TEST_DATA) / "golden" / "paper-qutrit-v.config.json").string();
    const auto a = run({"witness", "--config", golden, "--format", "json"});
    const auto b = run({"witness", "--builtin", "paper-qutrit", "--which", "v", "--format", "json"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(CliWitness, ErrorsMapToExitCodes) {
    EXPECT_EQ(run({"witness", "--builtin", "paper-ququart"}).code, cli::kExitConfigError);
    EXPECT_EQ(run({"witness", "--dim", "2", "--u0", data("missing.mat")}).code, cli::kExitConfigError);
    EXPECT_EQ(run({"witness", "--dim", "3", "--u0", data("identity2.mat")}).code, cli::kExitConfigError);
    EXPECT_EQ(run({"witness", "--builtin", "paper-qubit", "--format", "xml"}).code, cli::kExitConfigError);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kExitConfigError);

    const auto path = std::filesystem::temp_directory_path() / "qwit_nonunitary.mat";
    std::ofstream(path) << "2\n1+0i 1+0i\n1+0i -1+0i\n";
    EXPECT_EQ(run({"witness", "--dim", "2", "--u0", path.string()}).code, cli::kExitNumericalError);
    std::filesystem::remove(path);
}

TEST(CliOptimal, Dimensions) {
    auto r = run({"optimal", "--dim", "2"});
    EXPECT_NE(r.out.find("W predicted  0.5000  simulated 0.5000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("V predicted  1.0000  simulated 1.0000"), std::string::npos);
    r = run({"optimal", "--dim", "8", "--format", "json"});
    ASSERT_EQ(r.code, 0);
    const Json j = Json::parse(r.out);
    EXPECT_EQ(j["predicted_w"].get<double>(), 0.875);
    EXPECT_NEAR(j["simulated_w"].get<double>(), 0.875, 1e-10);
    EXPECT_NEAR(j["simulated_v"].get<double>(), 1.0, 1e-10);
    EXPECT_EQ(run({"optimal", "--dim", "1"}).code, cli::kExitConfigError);
}

TEST(CliCompile, QutritAndIdentity) {
    auto r = run({"compile", "--matrix", data("qutrit_u1.mat"), "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    Json j = Json::parse(r.out);
    EXPECT_EQ(j["layout"]["bd_count"].get<int>(), 3);
    EXPECT_LT(j["reconstruction_error"].get<double>(), 1e-10);

    r = run({"compile", "--matrix", data("identity4.mat"), "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    j = Json::parse(r.out);
    EXPECT_EQ(j["layout"]["bd_count"].get<int>(), 4);
    EXPECT_EQ(j["reconstruction_error"].get<double>(), 0.0);

    r = run({"compile", "--random", "6", "--seed", "3", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(Json::parse(r.out)["reconstruction_error"].get<double>(), 1e-10);
}

TEST(CliCompile, LayoutTextExport) {
    const auto path = std::filesystem::temp_directory_path() / "qwit_layout.txt";
    const auto r = run({"compile", "--random", "5", "--seed", "9", "--layout-out", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("layout ", 0), 0u);
    std::filesystem::remove(path);
}

TEST(CliNoise, QubitWStdInRange) {
    const auto r = run({"noise", "--builtin", "paper-qubit", "--which", "w", "--totals", "13000", "--trials",
                        "10000", "--seed", "1", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    const double sd = j[0]["witness_std"].get<double>();
    EXPECT_GE(sd, 0.003);
    EXPECT_LE(sd, 0.012);
}

TEST(CliNoise, QuadruplingTotalsHalvesStd) {
    const auto r = run({"noise", "--builtin", "paper-qubit", "--which", "w", "--totals", "13000,52000", "--trials",
                        "4000", "--seed", "2", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const Json j = Json::parse(r.out);
    const double ratio = j[1]["witness_std"].get<double>() / j[0]["witness_std"].get<double>();
    EXPECT_NEAR(ratio, 0.5, 0.1);
}

TEST(CliNoise, TwoTrialsAndCsv) {
    const auto r = run({"noise", "--builtin", "paper-qutrit", "--which", "v", "--trials", "2", "--totals", "50",
                        "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("witness,expected_total", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 2);
}

TEST(CliNoise, SeedFromEnvironment) {
    const std::vector<std::string> args{"noise", "--builtin", "paper-qubit", "--which", "w", "--trials", "50",
                                        "--totals", "500", "--format", "json"};
    ::setenv(cli::kSeedEnv, "77", 1);
    const auto a = run(args);
    auto explicit_args = args;
    explicit_args.insert(explicit_args.end(), {"--seed", "77"});
    const auto b = run(explicit_args);
    ::unsetenv(cli::kSeedEnv);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, run(args).out);
}

TEST(CliNoise, ThreadCountInvariant) {
    const std::vector<std::string> base{"noise", "--builtin", "paper-qutrit", "--which", "w", "--trials", "500",
                                        "--totals", "1000,4000", "--seed", "5", "--format", "json"};
    auto one = base, many = base;
    one.insert(one.end(), {"--threads", "1"});
    many.insert(many.end(), {"--threads", "6"});
    EXPECT_EQ(run(one).out, run(many).out);
}

TEST(CliQuartz, Examples) {
    auto r = run({"quartz", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    Json j = Json::parse(r.out);
    EXPECT_NEAR(j["min_thickness_mm"].get<double>(), 23.97, 0.2397);
    r = run({"quartz", "--birefringence", "1", "--format", "json"});
    EXPECT_NEAR(Json::parse(r.out)["min_thickness_mm"].get<double>(), 0.2142, 1e-4);
    r = run({"quartz", "--birefringence", "1", "--bandwidth", "801.6", "--format", "json"});
    EXPECT_NEAR(Json::parse(r.out)["min_thickness_mm"].get<double>(), 801.6e-6, 1e-15);
    EXPECT_EQ(run({"quartz", "--bandwidth", "-1"}).code, cli::kExitConfigError);
}

TEST(CliOutput, WritesToFile) {
    const auto path = std::filesystem::temp_directory_path() / "qwit_out.json";
    const auto r = run({"optimal", "--dim", "4", "--format", "json", "--output", path.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    const Json j = Json::parse(in);
    EXPECT_EQ(j["dim"].get<int>(), 4);
    std::filesystem::remove(path);
}

TEST(CliQuartz, InstalledCrystalVerdict) {
    auto r = run({"quartz", "--installed", "28.77", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(Json::parse(r.out)["installed_sufficient"].get<bool>());
    r = run({"quartz", "--installed", "20", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_FALSE(Json::parse(r.out)["installed_sufficient"].get<bool>());
    EXPECT_EQ(run({"quartz", "--dim", "1"}).code, cli::kExitConfigError);
}
