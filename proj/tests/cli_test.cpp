#include "deepdc/cli.hpp"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "deepdc/evalkit.hpp"
#include "test_support.hpp"

namespace deepdc {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = run_cli(args, out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(testing::scratch_dir("cli"));
    const CliResult r = run({"make-test-weights", "--scale", "8", "--seed", "3", "--out", (*dir_ / "w.ddcw").string()});
    ASSERT_EQ(r.status, 0) << r.err;
    const Image ref = testing::synthetic_image(64, 80, 1);
    write_png(ref, *dir_ / "ref.png");
    write_png(testing::add_gaussian_noise(ref, 0.1, 2), *dir_ / "dist.png");
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string path(const std::string& name) { return (*dir_ / name).string(); }
  static std::string weights() { return path("w.ddcw"); }

  static fs::path* dir_;
};

fs::path* CliTest::dir_ = nullptr;

TEST_F(CliTest, SelfScoreIsZero) {
  const CliResult r = run({"score", "--weights", weights(), "--ref", path("ref.png"), "--dist", path("ref.png"),
                           "--short-side", "64", "--json"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_LE(j["deepdc"].get<double>(), 1e-6);
  ASSERT_EQ(j["layers"].size(), 5u);
  EXPECT_EQ(j["layers"][2]["layer"], "conv3_4");
  EXPECT_EQ(j["short_side"], 64);
}

TEST_F(CliTest, ScoreTextOutput) {
  const CliResult r =
      run({"score", "--weights", weights(), "--ref", path("ref.png"), "--dist", path("dist.png"), "--short-side", "64"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("deepdc ", 0), 0u);
  EXPECT_NE(r.out.find("conv5_4 r2="), std::string::npos);
}

TEST_F(CliTest, Toy) {
  const CliResult r = run({"toy", "--n", "1000", "--seed", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["n"], 1000);
  EXPECT_LT(std::abs(j["quadratic"]["pearson"].get<double>()), 0.1);
  EXPECT_GT(j["quadratic"]["dcorr"].get<double>(), 0.3);
  EXPECT_GE(j["linear"]["pearson"].get<double>(), 0.99);
  EXPECT_GE(j["linear"]["dcorr"].get<double>(), 0.99);
}

TEST_F(CliTest, GenGtAndEval) {
  const auto src = fs::path(path("gt_src"));
  fs::create_directories(src);
  DatasetManifest m{src, {}};
  for (int i = 0; i < 3; ++i) {
    const std::string name = "p" + std::to_string(i) + ".png";
    write_png(testing::synthetic_image(48, 48, 10 + i), src / name);
    m.records.push_back({name, name, 50.0 + i});
  }
  write_manifest(m, src / "manifest.csv");

  const std::string out_dir = path("gt_out");
  const CliResult gen = run({"gen-gt", "--manifest", (src / "manifest.csv").string(), "--out-dir", out_dir, "--json"});
  ASSERT_EQ(gen.status, 0) << gen.err;
  EXPECT_EQ(json::parse(gen.out)["records"], 15);
  EXPECT_EQ(read_manifest(fs::path(out_dir) / "manifest.csv").records.size(), 15u);

  const std::string report = path("report.json");
  const CliResult ev = run({"eval", "--weights", weights(), "--manifest", out_dir + "/manifest.csv", "--short-side",
                            "48", "--out", report});
  ASSERT_EQ(ev.status, 0) << ev.err;
  std::ifstream in(report);
  const json j = json::parse(in);
  EXPECT_EQ(j["predictions"].size(), 15u);
  EXPECT_TRUE(j["errors"].empty());
}

TEST_F(CliTest, ExportDistmat) {
  const std::string prefix = path("mats");
  const CliResult r = run({"export-distmat", "--weights", weights(), "--ref", path("ref.png"), "--dist",
                           path("dist.png"), "--layer", "conv2_2", "--short-side", "64", "--out", prefix, "--json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["n"], 16);
  std::ifstream in(prefix + ".ref.csv");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 15);
  }
  EXPECT_EQ(rows, 16);
  EXPECT_TRUE(fs::exists(prefix + ".dist.csv"));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).status, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).status, kExitUsage);
  EXPECT_EQ(run({"score", "--ref", "a.png"}).status, kExitUsage);
  EXPECT_EQ(run({"score", "--ref", "a.png", "--dist", "b.png"}).status, kExitUsage);
  EXPECT_EQ(run({"toy", "--n", "1"}).status, kExitUsage);
  EXPECT_EQ(run({"make-test-weights", "--scale", "3", "--out", path("x.ddcw")}).status, kExitUsage);
  EXPECT_EQ(run({"export-distmat", "--weights", weights(), "--ref", path("ref.png"), "--dist", path("dist.png"),
                 "--layer", "conv9_9", "--out", path("m")})
                .status,
            kExitUsage);
  EXPECT_EQ(run({"--help"}).status, kExitOk);
}

TEST_F(CliTest, RuntimeErrors) {
  const CliResult missing =
      run({"score", "--weights", weights(), "--ref", path("nope.png"), "--dist", path("dist.png"), "--short-side", "64"});
  EXPECT_EQ(missing.status, kExitRuntime);
  EXPECT_FALSE(missing.err.empty());
  std::ofstream(path("junk.ddcw")) << "not a container";
  EXPECT_EQ(run({"score", "--weights", path("junk.ddcw"), "--ref", path("ref.png"), "--dist", path("dist.png")}).status,
            kExitRuntime);
}

}  // namespace
}  // namespace deepdc
