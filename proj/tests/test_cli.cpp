#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ttsprt/cli.hpp"

namespace fs = std::filesystem;
using ttsprt::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

int shell(const std::string& args) {
    const std::string cmd = std::string(TTSPRT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "ttsprt_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string config(const std::string& name) { return std::string(TTSPRT_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST(CliAllocation, SymmetricTwoArm) {
    const auto r = call({"allocation", "--family", "gaussian", "--sigma", "1", "--means", "1,0", "--beta", "0.5"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("weights=0.5,0.5\n"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("gamma=0.125\n"), std::string::npos) << r.out;
}

TEST(CliAllocation, PrintsLowerBoundWhenDeltaGiven) {
    const auto r = call({"allocation", "--family", "gaussian", "--means", "1,0", "--delta", "0.36787944117144233"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("lower_bound=8"), std::string::npos) << r.out;
}

TEST(CliAllocation, Errors) {
    EXPECT_EQ(call({"allocation", "--family", "gaussian"}).code, 2);
    const auto beta = call({"allocation", "--family", "gaussian", "--means", "1,0", "--beta", "1.0"});
    EXPECT_EQ(beta.code, 2);
    EXPECT_NE(beta.err.find("beta"), std::string::npos);
    const auto tie = call({"allocation", "--family", "bernoulli", "--means", "0.5,0.5"});
    EXPECT_EQ(tie.code, 2);
    EXPECT_EQ(call({"allocation", "--family", "poisson", "--means", "1,0"}).code, 2);
    EXPECT_EQ(call({"allocation", "--family", "bernoulli", "--means", "1.5,0.5"}).code, 2);
}

TEST(CliThreshold, MatchesLibrary) {
    const auto r = call({"threshold", "--kind", "gaussian", "--arms", "2", "--delta", "0.1", "--n", "1"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, ttsprt::format_real(ttsprt::threshold({ttsprt::threshold_kind::gaussian, 0.1, 2}, 1)) + "\n");
    EXPECT_NEAR(std::stod(r.out), 8.12953306684962914, 1e-13);
}

TEST(CliThreshold, ExponentialAboveGaussian) {
    const auto e = call({"threshold", "--kind", "exponential", "--arms", "5", "--delta", "0.1", "--n", "1000"});
    const auto g = call({"threshold", "--kind", "gaussian", "--arms", "5", "--delta", "0.1", "--n", "1000"});
    ASSERT_EQ(e.code, 0);
    ASSERT_EQ(g.code, 0);
    EXPECT_GT(std::stod(e.out), std::stod(g.out));
}

TEST(CliThreshold, DomainErrors) {
    EXPECT_EQ(call({"threshold", "--kind", "gaussian", "--arms", "2", "--delta", "0", "--n", "1"}).code, 2);
    EXPECT_EQ(call({"threshold", "--kind", "gaussian", "--arms", "2", "--delta", "0.1", "--n", "0"}).code, 2);
    EXPECT_EQ(call({"threshold", "--kind", "bogus", "--arms", "2", "--delta", "0.1", "--n", "1"}).code, 2);
}

TEST(CliRun, RequiresSeed) {
    const auto r = call({"run", "--family", "bernoulli", "--means", "0.6,0.4", "--trials", "3"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("seed"), std::string::npos) << r.err;
}

TEST(CliRun, BaselinesOutOfScope) {
    for (const char* id : {"dkm", "lucb", "fw"}) {
        const auto r = call({"run", "--family", "bernoulli", "--means", "0.6,0.4", "--seed", "1", "--policy", id});
        EXPECT_EQ(r.code, 2);
        EXPECT_NE(r.err.find("not implemented; out of scope"), std::string::npos) << r.err;
    }
    EXPECT_EQ(call({"run", "--family", "bernoulli", "--means", "0.6,0.4", "--seed", "1", "--policy", "xyz"}).code, 2);
}

TEST(CliRun, WritesCsvAndSummary) {
    const auto out = scratch("run.csv");
    const auto trials = scratch("trials.csv");
    const auto r = call({"run", "--family", "bernoulli", "--means", "0.6,0.4,0.3", "--seed", "5", "--trials", "20",
                         "--output", out.string(), "--trials-output", trials.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("mean_tau="), std::string::npos);
    const std::string csv = slurp(out);
    EXPECT_EQ(csv.rfind("policy,family,num_arms,delta,beta,trials,mean_tau", 0), 0u);
    EXPECT_NE(csv.find("\nttsprt,bernoulli,3,"), std::string::npos);
    const std::string per_trial = slurp(trials);
    EXPECT_EQ(std::count(per_trial.begin(), per_trial.end(), '\n'), 21);
}

TEST(CliRun, SameSeedSameBytesAcrossThreads) {
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    const std::vector<std::string> base{"run",      "--family", "exponential", "--means", "0.9,0.7,0.5",
                                        "--seed",   "9",        "--trials",    "30",      "--policy",
                                        "t3c"};
    auto first = base, second = base;
    first.insert(first.end(), {"--threads", "1", "--output", a.string()});
    second.insert(second.end(), {"--threads", "8", "--output", b.string()});
    ASSERT_EQ(call(first).code, 0);
    ASSERT_EQ(call(second).code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(CliRun, AllCensoredExitsThree) {
    const auto r = call({"run", "--family", "gaussian", "--means", "1,0.99", "--seed", "1", "--trials", "4",
                         "--horizon-cap", "10"});
    EXPECT_EQ(r.code, 3);
}

TEST(CliRun, ConfigFileWithOverrides) {
    const auto out = scratch("cfg.csv");
    const auto r = call({"run", "--config", config("exponential_run.ini"), "--trials", "6", "--output", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = slurp(out);
    EXPECT_NE(csv.find("\nttsprt,exponential,5,0.10000000000000001,0.5,6,"), std::string::npos) << csv;
}

TEST(CliRun, ShippedConfigsParse) {
    const auto csv = scratch("x.csv").string();
    for (const char* name : {"exponential_run.ini", "bernoulli_ttts.ini"}) {
        const auto r = call({"run", "--config", config(name), "--trials", "2", "--output", csv});
        EXPECT_EQ(r.code, 0) << name << r.err;
    }
    const auto sweep = call({"sweep-beta", "--config", config("gaussian_beta_sweep.ini"), "--trials", "2", "--betas",
                             "0.5", "--output", csv});
    EXPECT_EQ(sweep.code, 0) << sweep.err;
    const auto cost = call({"ttts-cost", "--config", config("ttts_cost.ini"), "--n-grid", "100,200", "--draws", "50",
                            "--output", csv});
    EXPECT_EQ(cost.code, 0) << cost.err;
}

TEST(CliSweepBeta, OneRowPerBeta) {
    const auto r = call({"sweep-beta", "--family", "gaussian", "--means", "1,0.5", "--seed", "2", "--trials", "10",
                         "--betas", "0.3,0.5,0.7"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
    EXPECT_EQ(call({"sweep-beta", "--family", "gaussian", "--means", "1,0.5", "--seed", "2", "--betas", "0.5,1.5"}).code,
              2);
}

TEST(CliTttsCost, DefaultsAndGaps) {
    const auto r = call({"ttts-cost", "--seed", "4", "--n-grid", "100,300", "--draws", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("n,gap,draws,mean_samples", 0), 0u);
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
    const auto g = call({"ttts-cost", "--seed", "4", "--n-grid", "500", "--draws", "100", "--gaps", "0.1,0.2,0.3"});
    ASSERT_EQ(g.code, 0) << g.err;
    EXPECT_NE(g.out.find("\n500,0.20000000000000001,100,"), std::string::npos) << g.out;
    EXPECT_EQ(call({"ttts-cost", "--seed", "4", "--family", "bernoulli", "--means", "0.5,0.2"}).code, 2);
    EXPECT_EQ(call({"ttts-cost", "--n-grid", "100"}).code, 2);
}

TEST(CliBinary, ExitCodes) {
    EXPECT_EQ(shell("threshold --kind gaussian --arms 2 --delta 0.1 --n 1"), 0);
    EXPECT_EQ(shell("threshold --kind gaussian --arms 2 --delta 0 --n 1"), 2);
    EXPECT_EQ(shell("allocation --family gaussian --means 1,0 --beta 1.0"), 2);
    EXPECT_EQ(shell("run --family bernoulli --means 0.6,0.4 --seed 1 --policy dkm"), 2);
    EXPECT_EQ(shell("run --family gaussian --means 1,0.99 --seed 1 --trials 2 --horizon-cap 10"), 3);
    EXPECT_EQ(shell("frobnicate"), 2);
    EXPECT_EQ(shell(""), 2);
    EXPECT_EQ(shell("run --help"), 0);
}
