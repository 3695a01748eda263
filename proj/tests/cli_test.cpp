#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("ocfs_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    CliRun run(const std::string& args) const {
        const std::string out = path("stdout.txt"), err = path("stderr.txt");
        const std::string cmd = std::string(OCFS_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream s;
        s << in.rdbuf();
        return s.str();
    }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, GenIsReproducible) {
    const std::string args = "--no-timestamp gen --lots 100 --parametric 10 --yield 20 --bad 3 --seed 7";
    auto a = run(args + " -o " + path("a.csv") + " --labels " + path("a_labels.csv"));
    auto b = run(args + " -o " + path("b.csv") + " --labels " + path("b_labels.csv"));
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a_labels.csv")), slurp(path("b_labels.csv")));
    auto so = run(args);
    EXPECT_EQ(so.out, slurp(path("a.csv")));
}

TEST_F(Cli, TimestampLineUnlessSuppressed) {
    auto with = run("gen --lots 10 --parametric 2 --yield 0 --bad 1 --informative 1");
    ASSERT_EQ(with.code, 0) << with.err;
    EXPECT_EQ(with.out.rfind("# ocfs gen ", 0), 0u);
    auto without = run("--no-timestamp gen --lots 10 --parametric 2 --yield 0 --bad 1 --informative 1");
    EXPECT_EQ(without.out.rfind("lot,", 0), 0u);
    EXPECT_EQ(with.out.substr(with.out.find('\n') + 1), without.out);
}

TEST_F(Cli, RankEntropyPutsConstantColumnLast) {
    write("in.csv", "lot,a,k,b\nL1,1,5,3\nL2,2,5,1\nL3,3,5,2\nL4,9,5,0\n");
    auto r = run("--no-timestamp rank --method entropy --bins 32 " + path("in.csv"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("rank,param_id,method,score\n", 0), 0u);
    EXPECT_NE(r.out.find("\n3,k,ENTROPY,0\n"), std::string::npos) << r.out;
}

TEST_F(Cli, FullChainProducesCombinedRow) {
    const std::string data = path("d.csv"), labels = path("l.csv");
    ASSERT_EQ(run("--no-timestamp gen --lots 120 --parametric 20 --yield 20 --bad 6 --informative 5 --seed 3 -o " +
                  data + " --labels " + labels)
                  .code,
              0);
    auto sel = run("--no-timestamp select --method rfe -k 10 --batch 5 " + data + " -o " + path("rfe.ids") +
                   " --trace " + path("trace.csv"));
    ASSERT_EQ(sel.code, 0) << sel.err;
    ASSERT_EQ(run("--no-timestamp select --method entropy -k 10 " + data + " -o " + path("ent.ids")).code, 0);
    for (std::string m : {"rfe", "ent"}) {
        auto t = run("--no-timestamp train " + data + " --features " + path(m + ".ids") + " -o " + path(m + ".model"));
        ASSERT_EQ(t.code, 0) << t.err;
        auto s = run("--no-timestamp score " + data + " --model " + path(m + ".model") + " -o " + path(m + ".scores"));
        ASSERT_EQ(s.code, 0) << s.err;
    }
    auto e = run("--no-timestamp eval --labels " + labels + " --scores RFE=" + path("rfe.scores") +
                 " --scores ENTROPY=" + path("ent.scores"));
    ASSERT_EQ(e.code, 0) << e.err;
    EXPECT_NE(e.out.find("COMBINED"), std::string::npos);
    EXPECT_NE(e.out.find("\nTotal"), std::string::npos);
    EXPECT_NE(e.out.find("\nECC"), std::string::npos);
    EXPECT_EQ(slurp(path("trace.csv")).rfind("iteration,param_id,criterion,eliminated\n", 0), 0u);
    std::istringstream ids(slurp(path("rfe.ids")));
    int n = 0;
    for (std::string line; std::getline(ids, line);) ++n;
    EXPECT_EQ(n, 10);
}

TEST_F(Cli, ScoreWithCalibrationAddsGreyColumn) {
    const std::string data = path("d.csv");
    ASSERT_EQ(run("--no-timestamp gen --lots 40 --parametric 8 --yield 0 --bad 2 --informative 2 -o " + data).code, 0);
    auto eb = run("--no-timestamp errorbar " + data + " --models 4 --removed 2 --draws 3 -o " + path("cal.csv") +
                  " --scores-out " + path("sm.csv"));
    ASSERT_EQ(eb.code, 0) << eb.err;
    EXPECT_EQ(slurp(path("cal.csv")).rfind("removal_fraction,ratio,r_squared,n_models,n_removed\n", 0), 0u);
    EXPECT_EQ(slurp(path("sm.csv")).rfind("lot,m0,m1,m2,m3\n", 0), 0u);
    ASSERT_EQ(run("--no-timestamp train " + data + " -o " + path("m.model")).code, 0);
    auto s = run("--no-timestamp score " + data + " --model " + path("m.model") + " --calibration " + path("cal.csv"));
    ASSERT_EQ(s.code, 0) << s.err;
    EXPECT_EQ(s.out.rfind("lot,decision,flagged,grey\n", 0), 0u);
}

TEST_F(Cli, ConfigFileSuppliesOptions) {
    write("cfg.toml", "[gen]\nlots = 12\nparametric = 3\nyield = 1\nbad = 1\ninformative = 1\nseed = 4\n");
    auto a = run("--no-timestamp --config " + path("cfg.toml") + " gen");
    ASSERT_EQ(a.code, 0) << a.err;
    auto b = run("--no-timestamp gen --lots 12 --parametric 3 --yield 1 --bad 1 --informative 1 --seed 4");
    EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, ExitCodes) {
    auto usage = run("select");
    EXPECT_EQ(usage.code, 1);
    EXPECT_NE(usage.err.find("select"), std::string::npos);
    EXPECT_EQ(run("frobnicate").code, 1);
    EXPECT_EQ(run("rank --method rfe " + path("none.csv")).code, 1);
    auto missing = run("rank " + path("none.csv"));
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("error"), std::string::npos);
    write("bad.csv", "lot,p,p\nA,1,2\n");
    EXPECT_EQ(run("rank " + path("bad.csv")).code, 2);
    write("ok.csv", "lot,p,q\nA,1,2\nB,2,1\nC,0,0\n");
    EXPECT_EQ(run("select --method rfe -k 5 " + path("ok.csv")).code, 1);
    EXPECT_EQ(run("train --nu 0 " + path("ok.csv") + " -o " + path("m")).code, 1);
    EXPECT_EQ(run("--help").code, 0);
}
