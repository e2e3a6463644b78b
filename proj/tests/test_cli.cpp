// End-to-end runs of the survey binary.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const auto* info = testing::UnitTest::GetInstance()->current_test_info();
  const auto p = fs::temp_directory_path() / (std::string("dvdp_cli_") + info->name());
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Runs the binary with `args`, stdout and stderr to <dir>/log. Returns the exit status.
int run(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd =
      env + " " + DVDP_SURVEY + " " + args + " > " + (dir / "log").string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Data rows (no comment lines, no header) split on commas.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(slurp(p));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> r;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) r.push_back(c);
    out.push_back(r);
  }
  return out;
}

std::string classification(const fs::path& csv, const std::string& dom, int p) {
  for (const auto& r : rows(csv))
    if (r[0] == dom && r[1] == std::to_string(p)) return r.back();
  return "";
}

}  // namespace

TEST(Cli, UsageErrors) {
  const auto d = scratch();
  EXPECT_EQ(run(d, ""), 2);
  std::ofstream(d / "empty.cfg").close();
  EXPECT_EQ(run(d, "-c " + (d / "empty.cfg").string()), 2);
  EXPECT_EQ(run(d, "cycles --set bogus=1"), 2);
  EXPECT_EQ(run(d, "cycles --p1 x --p2 0"), 2);
  EXPECT_EQ(run(d, "--repro fig99"), 2);
  EXPECT_EQ(run(d, "census-plane --set p1_n=1"), 2);
  EXPECT_EQ(run(d, "resonance --eps 0"), 2);
  EXPECT_EQ(run(d, "cycles --p1 0 --p2 0 -o " + d.string(), "DVDP_WORKERS=abc"), 2);
  EXPECT_EQ(run(d, "--no-such-flag"), 2);
  EXPECT_EQ(run(d, "--list-presets"), 0);
  EXPECT_NE(slurp(d / "log").find("fig11j"), std::string::npos);
}

TEST(Cli, ResonancePresets) {
  const auto d = scratch();
  const std::pair<const char*, const char*> want[] = {
      {"fig6a", "IMPASSABLE"}, {"fig6b", "PARTIALLY_PASSABLE"}, {"fig6c", "IMPASSABLE"}, {"fig6d", "PARTIALLY_PASSABLE"}};
  for (const auto& [fig, cls] : want) {
    const auto o = d / fig;
    ASSERT_EQ(run(d, std::string("--repro ") + fig + " -o " + o.string()), 0) << slurp(d / "log");
    const bool g2 = fig[4] >= 'c';
    EXPECT_EQ(classification(o / "resonance.csv", g2 ? "G2" : "G1+", g2 ? 3 : 2), cls) << fig;
    EXPECT_TRUE(fs::exists(o / (g2 ? "resonance_G2_p3.svg" : "resonance_G1+_p2.svg"))) << fig;
  }
}

// Loop frequencies stay below sqrt 2, so p4 > sqrt2 p_max leaves no level.
TEST(Cli, NoLoopZonesAboveTheFrequencyBound) {
  const auto d = scratch();
  ASSERT_EQ(run(d, "resonance --eps 0.1 --p1 1 --p4 7.5 --set p_max=5 --set domains=G1+,G1- -o " + d.string()), 0);
  EXPECT_TRUE(rows(d / "resonance.csv").empty());
}

TEST(Cli, TwoImpassableZonesInTheRightLoop) {
  const auto d = scratch();
  ASSERT_EQ(run(d, "--repro fig7 -o " + d.string()), 0) << slurp(d / "log");
  EXPECT_GT(rows(d / "poincare.csv").size(), 24u * 100u);
  // the same parameters through the resonance table
  const auto r = d / "zones";
  ASSERT_EQ(run(d, "--repro fig7 resonance --set domains=G1+ -o " + r.string()), 0) << slurp(d / "log");
  EXPECT_EQ(classification(r / "resonance.csv", "G1+", 2), "IMPASSABLE");
  EXPECT_EQ(classification(r / "resonance.csv", "G1+", 3), "IMPASSABLE");
}

TEST(Cli, LeftLoopTangencyPreset) {
  const auto d = scratch();
  ASSERT_EQ(run(d, "--repro fig8b -o " + d.string()), 0) << slurp(d / "log");
  EXPECT_NE(slurp(d / "separatrix.csv").find("# config.p3 = 1.7\n"), std::string::npos);
  EXPECT_FALSE(rows(d / "separatrix.csv").empty());
  EXPECT_EQ(rows(d / "separatrix_splitting.csv").size(), 4u);
}

TEST(Cli, ProbeCellAndMirroredGrid) {
  const auto d = scratch();
  // a 2x2 grid shrunk onto the D12 probe point
  ASSERT_EQ(run(d, "census-plane --set p1_lo=-0.1988958 --set p1_hi=-0.1988956 --set p2_lo=1.1952956 "
                   "--set p2_hi=1.1952958 --set p1_n=2 --set p2_n=2 -o " + d.string()),
            0)
      << slurp(d / "log");
  const auto cell = rows(d / "census-plane.csv");
  ASSERT_EQ(cell.size(), 4u);
  for (const auto& r : cell) {
    EXPECT_EQ(r[2] + r[3] + r[4], "200");
    EXPECT_EQ(r[5], "D12");
  }

  const auto up = d / "up", down = d / "down";
  const std::string grid = " --set p1_lo=-1.5 --set p1_hi=1.5 --set p1_n=13 --set p2_n=9 ";
  ASSERT_EQ(run(d, "census-plane" + grid + "--set p2_lo=0.1 --set p2_hi=2 -o " + up.string()), 0);
  ASSERT_EQ(run(d, "census-plane" + grid + "--set p2_lo=-2 --set p2_hi=-0.1 -o " + down.string()), 0);
  const auto a = rows(up / "census-plane.csv"), b = rows(down / "census-plane.csv");
  ASSERT_EQ(a.size(), 13u * 9u);
  ASSERT_EQ(b.size(), a.size());
  // row j of one grid mirrors row 8 - j of the other; i and j swap
  for (int j = 0; j < 9; ++j)
    for (int i = 0; i < 13; ++i) {
      const auto& u = a[j * 13 + i];
      const auto& m = b[(8 - j) * 13 + i];
      EXPECT_EQ(u[0], m[0]);
      EXPECT_NEAR(std::stod(u[1]), -std::stod(m[1]), 1e-12);
      EXPECT_EQ(u[2], m[3]);
      EXPECT_EQ(u[3], m[2]);
      EXPECT_EQ(u[4], m[4]);
    }
}

// The output directory is part of the echoed config, so every run writes to
// the same place and the files are read back in between.
TEST(Cli, WorkerCountNeverChangesOutput) {
  const auto d = scratch();
  const std::string cfg = "census-plane --set p1_n=25 --set p2_n=17 --no-timestamp -o " + d.string();
  std::vector<std::string> csv, svg;
  for (const auto& [args, env] : {std::pair{" -j 1", ""}, {" -j 3", ""}, {"", "DVDP_WORKERS=5"}}) {
    ASSERT_EQ(run(d, cfg + args, env), 0) << slurp(d / "log");
    csv.push_back(slurp(d / "census-plane.csv"));
    svg.push_back(slurp(d / "census-plane.svg"));
  }
  EXPECT_FALSE(csv[0].empty());
  for (int i = 1; i < 3; ++i) {
    EXPECT_EQ(csv[i], csv[0]) << i;
    EXPECT_EQ(svg[i], svg[0]) << i;
  }
  ASSERT_EQ(run(d, "--repro fig4 -j 1 -o " + d.string()), 0);
  const auto a = slurp(d / "cycles.csv");
  ASSERT_EQ(run(d, "--repro fig4 -j 4 -o " + d.string()), 0);
  EXPECT_EQ(slurp(d / "cycles.csv"), a);
}

TEST(Cli, ProvenanceHeaders) {
  const auto d = scratch();
  ASSERT_EQ(run(d, "melnikov --eps 0.1 --p1 0.78 --p2 0.3 --p3 1.2 --p4 4 -o " + d.string()), 0);
  const auto csv = slurp(d / "melnikov.csv");
  for (const char* k : {"# tool = dvdp_survey ", "# command = melnikov\n", "# config.p1 = 0.78\n",
                        "# config.p4 = 4\n", "# status = complete\n"})
    EXPECT_NE(csv.find(k), std::string::npos) << k;
  const auto svg = slurp(d / "melnikov.svg");
  EXPECT_NE(svg.find("<!-- dvdp_survey "), std::string::npos);
  EXPECT_NE(svg.find(" p3=1.2 "), std::string::npos);
  EXPECT_NE(svg.find("<!-- generated "), std::string::npos);
  ASSERT_EQ(run(d, "melnikov --eps 0.1 --p1 0.78 --p2 0.3 --p3 1.2 --p4 4 --no-timestamp -o " + d.string()), 0);
  EXPECT_EQ(slurp(d / "melnikov.svg").find("<!-- generated "), std::string::npos);
}

TEST(Cli, RepeatRunsAreByteIdentical) {
  const auto d = scratch();
  const std::string a = "separatrix --eps 0.1 --p1 0.78 --p2 0.3 --p3 0.6 --p4 4 --set budget=2 --set phases=4 "
                        "--no-timestamp -o " + d.string();
  const char* files[] = {"separatrix.csv", "separatrix_splitting.csv", "separatrix.svg"};
  ASSERT_EQ(run(d, a), 0);
  std::vector<std::string> first;
  for (const char* f : files) first.push_back(slurp(d / f));
  ASSERT_EQ(run(d, a + " -j 2"), 0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(slurp(d / files[i]), first[i]) << files[i];
}

TEST(Cli, NumericFailureKeepsPartialOutput) {
  const auto d = scratch();
  ASSERT_EQ(run(d, "separatrix --eps 0.1 --p1 0.78 --p2 0.1 --p3 0.5 --p4 4 --set budget=3 --set max_points=40 "
                   "--set phases=2 -o " + d.string()),
            3);
  const auto csv = slurp(d / "separatrix.csv");
  EXPECT_NE(csv.find("# status = partial: "), std::string::npos);
  EXPECT_NE(csv.find("BudgetExhausted"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "separatrix_splitting.csv"));
  EXPECT_NE(slurp(d / "separatrix.svg").find("status=partial"), std::string::npos);
}

TEST(Cli, DiagramCurveCounts) {
  const auto d = scratch();
  const std::pair<const char*, int> want[] = {{"fig12", 6}, {"fig13", 3}, {"fig14", 5}};
  for (const auto& [fig, n] : want) {
    ASSERT_EQ(run(d, std::string("--repro ") + fig + " -o " + d.string()), 0) << slurp(d / "log");
    EXPECT_NE(slurp(d / "log").find("diagram: " + std::to_string(n) + " curves"), std::string::npos)
        << fig << "\n" << slurp(d / "log");
  }
  // p1 = 0.8: the own-loop lines merge into N1
  ASSERT_EQ(run(d, "--repro fig13 -o " + d.string()), 0);
  int n1 = 0;
  for (const auto& r : rows(d / "diagram.csv")) n1 += r[0] == "N1" && r[1] == "analytic";
  EXPECT_EQ(n1, 2);
}
