#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "dvdp/io.hpp"
#include "dvdp/sweep.hpp"
#include "survey_config.hpp"

using namespace dvdp;

namespace {

// Restores DVDP_WORKERS on scope exit.
struct EnvGuard {
  std::string old;
  bool had;
  EnvGuard() : had(std::getenv("DVDP_WORKERS") != nullptr) {
    if (had) old = std::getenv("DVDP_WORKERS");
  }
  ~EnvGuard() {
    if (had) setenv("DVDP_WORKERS", old.c_str(), 1);
    else unsetenv("DVDP_WORKERS");
  }
};

std::string tmp_file(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p.string();
}

}  // namespace

TEST(Sweep, ParallelEqualsSerial) {
  std::vector<int> in(1000);
  for (int i = 0; i < 1000; ++i) in[i] = i;
  auto f = [](int i) { return std::sin(0.37 * i) * std::exp(-1e-3 * i); };
  const auto a = sweep::ordered_map(in, f, 1);
  for (unsigned w : {2u, 3u, 8u, 64u}) EXPECT_EQ(sweep::ordered_map(in, f, w), a) << w;
}

TEST(Sweep, EmptyInput) {
  const std::vector<int> in;
  EXPECT_TRUE(sweep::ordered_map(in, [](int i) { return i; }, 4).empty());
}

TEST(Sweep, FirstExceptionPropagates) {
  std::vector<int> in(200);
  for (int i = 0; i < 200; ++i) in[i] = i;
  auto f = [](int i) {
    if (i == 137) throw NoConvergence("cell 137");
    return i;
  };
  for (unsigned w : {1u, 4u}) EXPECT_THROW(sweep::ordered_map(in, f, w), NoConvergence) << w;
}

TEST(Sweep, WorkerCountFromEnvironment) {
  EnvGuard g;
  EXPECT_EQ(sweep::worker_count(5), 5u);
  setenv("DVDP_WORKERS", "3", 1);
  EXPECT_EQ(sweep::worker_count(), 3u);
  EXPECT_EQ(sweep::worker_count(2), 2u);  // explicit wins
  for (const char* bad : {"abc", "0", "-2", ""}) {
    setenv("DVDP_WORKERS", bad, 1);
    EXPECT_THROW(sweep::worker_count(), ConfigError) << bad;
  }
  unsetenv("DVDP_WORKERS");
  EXPECT_GE(sweep::worker_count(), 1u);
}

TEST(Io, FormatRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.7551195621, 4.9e-324}) {
    EXPECT_EQ(std::strtod(io::fmt(v).c_str(), nullptr), v) << io::fmt(v);
  }
  EXPECT_EQ(io::fmt(NAN), "nan");
  EXPECT_EQ(io::fmt(2.0), "2");
}

TEST(Io, CsvLayout) {
  io::Csv c({"p1", "p2", "type"});
  c.meta("tool", "t");
  c.meta("alpha", 0.5);
  c.row(std::vector<std::string>{"1", "2", "(1,0,0)"});
  c.row(std::vector<double>{0.1, NAN, 3});
  EXPECT_THROW(c.row(std::vector<double>{1, 2}), ConfigError);
  // meta sorted by key, then header, then rows
  EXPECT_EQ(c.str(), "# alpha = 0.5\n# tool = t\np1,p2,type\n1,2,(1,0,0)\n0.10000000000000001,nan,3\n");
}

TEST(Io, CsvWriteFailsOnBadPath) {
  io::Csv c({"a"});
  EXPECT_THROW(c.write("/nonexistent-dir/x.csv"), ConfigError);
}

TEST(Io, SvgSkipsNonFinitePoints) {
  io::Series s;
  s.pts = {{0, 0}, {1, 1}, {NAN, 2}, {2, 0}};
  s.label = "curve";
  io::Series d;
  d.pts = {{0.5, 0.5}};
  d.dots = true;
  const auto out = io::svg({s, d}, "title");
  EXPECT_EQ(out.rfind("<svg", 0), 0u);
  EXPECT_NE(out.find("</svg>"), std::string::npos);
  EXPECT_EQ(out.find("nan"), std::string::npos);
  EXPECT_NE(out.find("<polyline"), std::string::npos);
  EXPECT_NE(out.find("<circle"), std::string::npos);
  EXPECT_NE(out.find(">curve<"), std::string::npos);
  EXPECT_EQ(out, io::svg({s, d}, "title"));
  // degenerate extent still draws
  EXPECT_NO_THROW(io::svg({}, "empty"));
}

TEST(Config, UnknownKeyAndMalformedAssignment) {
  survey::Config c;
  EXPECT_THROW(c.set("p5", "1"), ConfigError);
  EXPECT_THROW(c.assign("p1"), ConfigError);
  c.assign(" p1 = 0.75 ");
  EXPECT_EQ(c.num("p1"), 0.75);
}

TEST(Config, StrictNumbers) {
  survey::Config c;
  for (const char* bad : {"1.5x", "", "nan", "inf", "abc"}) {
    c.set("p2", bad);
    EXPECT_THROW(c.num("p2"), ConfigError) << bad;
  }
  EXPECT_THROW(c.num("p3"), ConfigError);  // missing, no default
  EXPECT_EQ(c.num("p3", 2.0), 2.0);
  c.set("p1_n", "2.5");
  EXPECT_THROW(c.integer("p1_n", 3), ConfigError);
  c.set("p1_n", "1");
  EXPECT_THROW(c.resolution("p1_n", 3), ConfigError);
  c.set("portrait", "maybe");
  EXPECT_THROW(c.flag("portrait", false), ConfigError);
  c.set("portrait", "Yes");
  EXPECT_TRUE(c.flag("portrait", false));
  c.set("p1_lo", "1");
  c.set("p1_hi", "1");
  EXPECT_THROW(c.range("p1_lo", "p1_hi", 0, 1), ConfigError);
}

TEST(Config, ParamsValidation) {
  survey::Config c;
  c.set("eps", "0");
  EXPECT_NO_THROW(c.params(false));
  EXPECT_THROW(c.params(true), ConfigError);
  c.set("eps", "0.1");
  c.set("p1", "inf");
  EXPECT_THROW(c.params(false), ConfigError);
}

TEST(Config, FileErrorsCarryLineNumbers) {
  const auto path = tmp_file("dvdp_cfg_test.cfg", "# comment\neps = 0.1\n\np1 = 0.7  # trailing\nbogus = 3\n");
  survey::Config c;
  try {
    c.load_file(path);
    FAIL() << "no error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":5:"), std::string::npos) << e.what();
  }
  EXPECT_EQ(c.num("p1"), 0.7);
  EXPECT_THROW(c.load_file("/nonexistent/cfg"), ConfigError);
  std::filesystem::remove(path);
}

TEST(Config, PresetsExistAndUseKnownKeys) {
  for (const char* n : {"fig4", "fig5", "fig6a", "fig6b", "fig6c", "fig6d", "fig7", "fig8a", "fig8b", "fig8c", "fig9a",
                        "fig9b", "fig10a", "fig10d", "fig11a", "fig11j", "fig12", "fig13", "fig14"}) {
    const auto& p = survey::find_preset(n);
    survey::Config c;
    for (const auto& [k, v] : p.entries) EXPECT_NO_THROW(c.set(k, v)) << n << " " << k;
    EXPECT_TRUE(c.has("command")) << n;
  }
  EXPECT_THROW(survey::find_preset("fig99"), ConfigError);
}

TEST(Config, EchoOmitsWorkers) {
  survey::Config c;
  c.set("p1", "1");
  c.set("workers", "4");
  const auto e = c.echo();
  EXPECT_EQ(e.count("workers"), 0u);
  EXPECT_EQ(e.at("p1"), "1");
}
