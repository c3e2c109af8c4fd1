#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

int run(const std::string& args) {
    const int status = std::system((std::string(SCLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("sclab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string d(const std::string& sub) const { return (dir_ / sub).string(); }

    fs::path dir_;
};

TEST_F(Cli, CampaignIsByteReproducible) {
    for (const char* sub : {"a", "b"})
        ASSERT_EQ(run("campaign --preset ncm --n 300 --seed 1 --workers 2 --out-dir " + d(sub)), 0);
    for (const char* f : {"traces.mltr", "traces.mltr.json", "config.json", "manifest.json"})
        EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
    ASSERT_EQ(run("campaign --preset ncm --n 300 --seed 1 --workers 1 --out-dir " + d("c")), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "traces.mltr"), slurp(dir_ / "c" / "traces.mltr"));
}

TEST_F(Cli, AttackReportsDisclosure) {
    ASSERT_EQ(run("campaign --preset ncm --n 1500 --seed 3 --out-dir " + d("camp")), 0);
    ASSERT_EQ(run("attack --traces " + d("camp/traces.mltr") + " --out-dir " + d("atk")), 0);
    const auto rep = nlohmann::json::parse(slurp(dir_ / "atk" / "report.json"));
    EXPECT_EQ(rep["key"].get<int>(), 0x2B);
    EXPECT_EQ(rep["best_candidate"].get<int>(), 0x2B);
    ASSERT_FALSE(rep["mtd"].is_null());
    EXPECT_LE(rep["mtd"].get<int>(), 1500);
    EXPECT_EQ(slurp(dir_ / "atk" / "rank_curve.csv").rfind("checkpoint,", 0), 0u);
    EXPECT_EQ(run("verify --dir " + d("atk")), 0);
}

TEST_F(Cli, ClockImageOffIsStriped) {
    ASSERT_EQ(run("clockviz --mode off --cycles 64 --width 16 --out-dir " + d("img")), 0);
    const std::string pgm = slurp(dir_ / "img" / "clock.pgm");
    const std::string header = "P5\n16 8\n255\n";
    ASSERT_EQ(pgm.substr(0, header.size()), header);
    for (std::size_t i = header.size(); i < pgm.size(); ++i)
        EXPECT_EQ(static_cast<unsigned char>(pgm[i]), (i - header.size()) % 2 == 0 ? 255 : 0);
}

TEST_F(Cli, ManifestDetectsTampering) {
    ASSERT_EQ(run("transform --in aes_sbox --mask --out-dir " + d("t")), 0);
    EXPECT_EQ(run("verify --dir " + d("t")), 0);
    const auto m = nlohmann::json::parse(slurp(dir_ / "t" / "manifest.json"));
    ASSERT_EQ(m["files"].size(), 1u);
    EXPECT_EQ(m["files"][0]["sha256"].get<std::string>().size(), 64u);
    std::ofstream(dir_ / "t" / m["files"][0]["path"].get<std::string>(), std::ios::app) << "# extra\n";
    EXPECT_EQ(run("verify --dir " + d("t")), 3);
    EXPECT_EQ(run("verify --dir " + d("missing")), 3);
}

TEST_F(Cli, TransformMatchesCommittedNetlist) {
    ASSERT_EQ(run("transform --in aes_sbox --out " + d("sbox.net")), 0);
    EXPECT_EQ(slurp(dir_ / "sbox.net"), slurp(fs::path(SCLAB_DATA_DIR) / "aes_sbox.net"));
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("bogus"), 2);
    EXPECT_EQ(run("campaign --preset nope --out-dir " + d("x")), 2);
    EXPECT_EQ(run("transform --in aes_sbox --ddl --out-dir " + d("x")), 2);
    std::ofstream(dir_ / "bad.json") << "{\"hold_cycles\": 1}";
    EXPECT_EQ(run("campaign --config " + d("bad.json") + " --out-dir " + d("x")), 2);
    std::ofstream(dir_ / "bad.net") << "input a\ngate z = and a\n";
    EXPECT_EQ(run("transform --in " + d("bad.net") + " --out " + d("y.net")), 3);
    std::ofstream(dir_ / "bad.mltr") << "nope";
    EXPECT_EQ(run("attack --traces " + d("bad.mltr") + " --key 1 --out-dir " + d("x")), 3);
}

TEST_F(Cli, RngTestWritesOutputs) {
    ASSERT_EQ(run("rngtest --streams 2 --bits 20000 --out-dir " + d("r")), 0);
    for (const char* f : {"battery.csv", "proportions.csv", "autocorr.csv", "entropy.json", "stream_0.bin"})
        EXPECT_TRUE(fs::exists(dir_ / "r" / f)) << f;
    EXPECT_EQ(run("verify --dir " + d("r")), 0);
}

}  // namespace
