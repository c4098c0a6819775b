/*
Copyright 2026 The CCID Workbench Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

// End-to-end runs of the ccid executable.

#include <gtest/gtest.h>

#include <httplib.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "ccid/confidence.hpp"
#include "ccid/simd.hpp"
#include "support.hpp"

namespace ccid {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int exit_code;
  std::string output;  // stdout and stderr
};

CliRun ccid(const std::string& args, const std::string& env = {}) {
  test::TempDir dir;
  const std::string cmd = env + " " + CCID_CLI_PATH + " " + args + " > " + (dir / "log").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(dir / "log");
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
    ++files;
  }
  std::size_t other = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) other += e.is_regular_file();
  EXPECT_EQ(files, other);
  EXPECT_GT(files, 0u);
}

std::string fixtures() { return test::fixtures_dir().string(); }

TEST(Cli, HelpAndUnknownCommand) {
  EXPECT_EQ(ccid("--help").exit_code, 0);
  const CliRun bad = ccid("frobnicate");
  EXPECT_NE(bad.exit_code, 0);
}

TEST(Cli, SweepWritesCurve) {
  test::TempDir out;
  const CliRun r = ccid("sweep --dataset " + fixtures() +
                     " --noise gaussian:25 --reliable gaussian:4 --deep mock:box3 --mode dct,dwt --grid 0:1:0.5 --out " +
                     out.path().string() + " --no-images");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp(out / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "w,mode,psnr_db,ssim");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Cli, SweepErrorsExitOne) {
  test::TempDir out;
  const CliRun r = ccid("sweep --dataset " + fixtures() + " --noise gaussian:500 --deep mock:box3 --out " +
                     out.path().string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("ccid: error:"), std::string::npos) << r.output;
  EXPECT_EQ(ccid("sweep --dataset /nonexistent --deep mock:box3 --out " + out.path().string()).exit_code, 1);
  EXPECT_EQ(ccid("sweep --dataset " + fixtures() + " --deep mock:box3 --grid 0.5,0.1 --out " +
                 out.path().string()).exit_code, 1);
}

TEST(Cli, PartialSweepExitsTwo) {
  test::TempDir data, deep, out;
  const auto files = std::vector<std::string>{"camera.png", "coins.pgm"};
  for (const auto& f : files) fs::copy(test::fixtures_dir() / f, data / f);
  save_image(test::fixture("camera.png"), deep / "camera.png");
  const CliRun r = ccid("sweep --dataset " + data.path().string() + " --deep file:" + deep.path().string() +
                     " --grid 0.5 --no-images --out " + out.path().string());
  EXPECT_EQ(r.exit_code, 2) << r.output;
  EXPECT_TRUE(fs::exists(out / "failures.csv"));
  EXPECT_NE(slurp(out / "failures.csv").find("coins"), std::string::npos);
}

TEST(Cli, SweepIsIdenticalAcrossKernelVariants) {
  test::TempDir a, b;
  const std::string args = "sweep --dataset " + fixtures() +
                           " --noise gaussian:30 --deep mock:corrupt_half --mode dct,dwt,dwt-conf --conf oracle"
                           " --grid 0:1:0.25 --seed 3 --out ";
  ASSERT_EQ(ccid(args + a.path().string(), "CCID_SIMD=scalar").exit_code, 0);
  // widest compiled variant; falls back to scalar where nothing else is available
  const std::string widest(simd::available_kernels().back()->name);
  ASSERT_EQ(ccid(args + b.path().string(), "CCID_SIMD=" + widest).exit_code, 0);
  expect_same_tree(a.path(), b.path());
}

TEST(Cli, OodTable) {
  test::TempDir out;
  const CliRun r = ccid("ood --dataset " + fixtures() +
                     " --deep mock:corrupt_half --grid 0:1:0.1 --case noise_level,gaussian:40"
                     " --case noise_type,poisson:25 --out " + out.path().string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string csv = slurp(out / "ood.csv");
  EXPECT_NE(csv.find("\nnoise_level,"), std::string::npos);
  EXPECT_NE(csv.find("\nnoise_type,"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "ood_float.csv"));
  EXPECT_EQ(ccid("ood --dataset " + fixtures() + " --deep mock:box3 --case weather,gaussian:5 --out " +
                 out.path().string()).exit_code, 1);
}

TEST(Cli, ConfDist) {
  test::TempDir out;
  const CliRun r = ccid("conf-dist --dataset " + fixtures() + " --deep mock:box3 --sigmas 0,50,100 --out " +
                     out.path().string());
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const std::string hist = slurp(out / "conf_hist.csv");
  // header plus 2 denoisers x 3 levels x 20 bins
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 121);
  EXPECT_TRUE(fs::exists(out / "conf_mean.csv"));
}

TEST(Cli, FitModelThenUseIt) {
  test::TempDir out;
  const CliRun fit = ccid("fit-model --dataset " + fixtures() + " --deep mock:box3 --out " + (out / "m.json").string());
  ASSERT_EQ(fit.exit_code, 0) << fit.output;
  EXPECT_NO_THROW(load_model(out / "m.json"));
  const CliRun fuse = ccid("fuse --clean " + (test::fixtures_dir() / "moon.pgm").string() +
                        " --noise gaussian:25 --deep mock:box3 --mode dwt-conf --conf model:" +
                        (out / "m.json").string() + " --w 0.6 --out " + (out / "f.png").string() +
                        " --conf-out " + (out / "f.cmap").string() + " --overlay " + (out / "o.png").string());
  ASSERT_EQ(fuse.exit_code, 0) << fuse.output;
  const auto j = nlohmann::json::parse(fuse.output);
  EXPECT_EQ(j["mode"], "dwt-conf");
  EXPECT_EQ(j["image"], "moon");
  EXPECT_TRUE(j.contains("psnr_db"));
  EXPECT_EQ(load_image(out / "f.png").width(), 256u);
  EXPECT_EQ(load_confidence(out / "f.cmap").grid_width, 32u);
  EXPECT_TRUE(fs::exists(out / "o.png"));
}

TEST(Cli, FuseNeedsAnInput) {
  test::TempDir out;
  EXPECT_EQ(ccid("fuse --out " + (out / "x.png").string()).exit_code, 1);
  EXPECT_EQ(ccid("fuse --noisy " + (test::fixtures_dir() / "moon.pgm").string() + " --conf oracle --mode dwt-conf --out " +
                 (out / "x.png").string()).exit_code, 1);
}

TEST(Cli, ServeAnswersHealth) {
  const int port = 20000 + static_cast<int>(::getpid() % 20000);
  test::TempDir dir;
  const std::string cmd = "CCID_PORT=" + std::to_string(port) + " " + CCID_CLI_PATH + " serve > " +
                          (dir / "log").string() + " 2>&1 & echo $! > " + (dir / "pid").string();
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  httplib::Client cli("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !res; ++i) {
    res = cli.Get("/health");
    if (!res) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  const std::string pid = slurp(dir / "pid");
  EXPECT_EQ(std::system(("kill " + pid).c_str()), 0);
  ASSERT_TRUE(res) << slurp(dir / "log");
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("\"ok\""), std::string::npos);
}

}  // namespace
}  // namespace ccid
