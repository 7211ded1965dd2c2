#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "oracles.hpp"

using namespace corrlog;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "corrlog");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Value of a "key: value" summary line.
std::string summary_value(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return {};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("corrlog_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Defaults n = 6, T = 40, seed = 5; `extra` flag/value pairs replace them.
  std::string synth(const std::string& name, const std::vector<std::string>& extra = {}) {
    std::vector<std::pair<std::string, std::string>> flags{{"--n", "6"}, {"--T", "40"}, {"--seed", "5"}};
    for (std::size_t i = 0; i + 1 < extra.size(); i += 2) {
      const auto it = std::find_if(flags.begin(), flags.end(), [&](const auto& f) { return f.first == extra[i]; });
      if (it != flags.end()) {
        it->second = extra[i + 1];
      } else {
        flags.emplace_back(extra[i], extra[i + 1]);
      }
    }
    std::vector<std::string> args{"synth", "--out", path(name)};
    for (const auto& [flag, value] : flags) {
      args.push_back(flag);
      args.push_back(value);
    }
    const Outcome r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"--help"}).code, cli::kSuccess);
  EXPECT_EQ(run_cli({"synth", "--out", path("a"), "--bogus"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"regress", "--in", path("missing.mtrj"), "--out", path("b")}).code, cli::kUsage);
  const std::string s = synth("s.mtrj");
  EXPECT_EQ(run_cli({"regress", "--in", s, "--out", path("b"), "--frame", "hyperbolic"}).code, cli::kUsage);
}

TEST_F(CliTest, SynthIsByteDeterministic) {
  const std::string a = slurp(synth("a.mtrj"));
  const std::string b = slurp(synth("b.mtrj"));
  EXPECT_EQ(a, b);
  const std::string c = slurp(synth("c.mtrj", {"--seed", "6"}));
  EXPECT_NE(a, c);
  const Trajectory t = read_trajectory(path("a.mtrj"));
  EXPECT_EQ(t.size(), 40u);
  EXPECT_EQ(t.tag(), SpaceTag::correlation);
}

TEST_F(CliTest, WindowReportsCountAndRejectsWideWindow) {
  std::mt19937_64 rng(200);
  std::normal_distribution<double> normal(0.0, 1.0);
  RegionTimeSeries ts;
  ts.data.resize(4, 60);
  for (Index s = 0; s < 60; ++s) {
    for (Index r = 0; r < 4; ++r) ts.data(r, s) = normal(rng);
  }
  write_timeseries_csv(path("ts.csv"), ts);

  const Outcome r = run_cli({"window", "--in", path("ts.csv"), "--width", "15", "--offset", "1", "--out", path("w.mtrj")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(summary_value(r.out, "windows"), "46");
  EXPECT_NE(r.err.find("time window"), std::string::npos);
  const std::string first = slurp(path("w.mtrj"));
  ASSERT_EQ(run_cli({"window", "--in", path("ts.csv"), "--width", "15", "--out", path("w.mtrj")}).code, 0);
  EXPECT_EQ(slurp(path("w.mtrj")), first);

  EXPECT_EQ(run_cli({"window", "--in", path("ts.csv"), "--width", "61", "--out", path("x.mtrj")}).code, cli::kUsage);

  std::ofstream(path("bad.csv")) << "a,b\n1,2\n3,nan\n";
  const Outcome bad = run_cli({"window", "--in", path("bad.csv"), "--width", "2", "--out", path("y.mtrj")});
  EXPECT_EQ(bad.code, cli::kDataError);
  EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;
}

TEST_F(CliTest, TransformIdentityAndRoundTrip) {
  const Trajectory ident(Trajectory::index_times(3), std::vector<Matrix>(3, Matrix::Identity(4, 4)),
                         SpaceTag::correlation);
  write_trajectory(path("id.mtrj"), ident);
  ASSERT_EQ(run_cli({"transform", "--in", path("id.mtrj"), "--out", path("z.mtrj"), "--frame", "offlog"}).code, 0);
  const Trajectory zero = read_trajectory(path("z.mtrj"));
  EXPECT_EQ(zero.tag(), SpaceTag::hollow);
  for (const Matrix& m : zero.values()) EXPECT_LE(m.norm(), 1e-15);

  const std::string s = synth("s.mtrj", {"--noise", "0.2"});
  const Trajectory original = read_trajectory(s);
  for (const std::string frame : {"offlog", "logscaling", "spd", "euclidean"}) {
    const Outcome fwd = run_cli({"transform", "--in", s, "--out", path("f.mtrj"), "--frame", frame});
    ASSERT_EQ(fwd.code, 0) << frame << fwd.err;
    EXPECT_NE(fwd.err.find("time transform forward"), std::string::npos);
    const Outcome inv =
        run_cli({"transform", "--in", path("f.mtrj"), "--out", path("b.mtrj"), "--frame", frame, "--inverse"});
    ASSERT_EQ(inv.code, 0) << frame << inv.err;
    const Trajectory back = read_trajectory(path("b.mtrj"));
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_LE((back.value(i) - original.value(i)).norm(), 1e-8 * original.value(i).norm()) << frame;
    }
  }
}

TEST_F(CliTest, TransformRejectsWrongTagAndBadForm) {
  const std::string s = synth("s.mtrj");
  EXPECT_EQ(run_cli({"transform", "--in", s, "--out", path("f.mtrj"), "--frame", "offlog", "--inverse"}).code,
            cli::kDataError);
  ASSERT_EQ(run_cli({"transform", "--in", s, "--out", path("h.mtrj"), "--frame", "offlog"}).code, 0);
  EXPECT_EQ(run_cli({"transform", "--in", path("h.mtrj"), "--out", path("g.mtrj"), "--frame", "offlog"}).code,
            cli::kDataError);
  EXPECT_EQ(run_cli({"transform", "--in", s, "--out", path("f.mtrj"), "--alpha", "-1"}).code, cli::kUsage);
  EXPECT_EQ(run_cli({"transform", "--in", s, "--out", path("f.mtrj"), "--alpha", "1", "--beta", "0.5"}).code, 0);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  const std::string s = synth("s.mtrj", {"--spread", "2"});
  ASSERT_EQ(run_cli({"transform", "--in", s, "--out", path("h.mtrj"), "--frame", "offlog"}).code, 0);
  EXPECT_EQ(run_cli({"transform", "--in", path("h.mtrj"), "--out", path("c.mtrj"), "--frame", "offlog",
                     "--inverse", "--diag-max-iter", "1"})
                .code,
            cli::kNumericalError);

  const Trajectory constant(Trajectory::index_times(6), std::vector<Matrix>(6, Matrix::Identity(3, 3)),
                            SpaceTag::correlation);
  write_trajectory(path("const.mtrj"), constant);
  EXPECT_EQ(run_cli({"pca", "--in", path("const.mtrj"), "--out", path("p.csv")}).code, cli::kNumericalError);
}

TEST_F(CliTest, RegressConstantInputGivesConstantOutput) {
  std::mt19937_64 rng(201);
  const Matrix c = oracle::random_correlation(5, rng).matrix();
  write_trajectory(path("c.mtrj"), Trajectory(Trajectory::index_times(20), std::vector<Matrix>(20, c),
                                              SpaceTag::correlation));
  for (const std::string frame : {"offlog", "logscaling", "spd", "euclidean"}) {
    const Outcome r = run_cli({"regress", "--in", path("c.mtrj"), "--out", path("r.mtrj"), "--frame", frame,
                               "--degree", "2", "--samples", "5"});
    ASSERT_EQ(r.code, 0) << frame << r.err;
    const Trajectory out = read_trajectory(path("r.mtrj"));
    for (const Matrix& m : out.values()) EXPECT_LE((m - c).norm(), 1e-9) << frame;
  }
}

TEST_F(CliTest, RegressSummariesAndDiagnostics) {
  const std::string s = synth("s.mtrj", {"--n", "10", "--T", "100", "--noise", "0.3", "--spread", "1.5"});
  for (const std::string frame : {"offlog", "logscaling"}) {
    const Outcome r = run_cli({"regress", "--in", s, "--out", path("r.mtrj"), "--frame", frame,
                               "--diagnostics", path("d.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(summary_value(r.out, "valid_correlation"), "100/100") << frame;
    EXPECT_EQ(summary_value(r.out, "nonpositive_min_eigenvalue"), "0");
  }
  const Outcome e = run_cli({"regress", "--in", s, "--out", path("e.mtrj"), "--frame", "euclidean",
                             "--diagnostics", path("d.csv")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_GT(std::stoi(summary_value(e.out, "nonpositive_min_eigenvalue")), 0);
  EXPECT_EQ(read_trajectory(path("e.mtrj")).tag(), SpaceTag::symmetric);
  const std::string diag = slurp(path("d.csv"));
  EXPECT_EQ(diag.substr(0, diag.find('\n')), "time,min_eigenvalue,negative,deviation_percent,scaling_min,scaling_max");
  EXPECT_NE(diag.find(",1,,,\n"), std::string::npos);

  const Outcome spd = run_cli({"regress", "--in", s, "--out", path("p.mtrj"), "--frame", "spd"});
  ASSERT_EQ(spd.code, 0);
  EXPECT_GT(std::stod(summary_value(spd.out, "max_deviation_percent")), 0.0);
}

TEST_F(CliTest, GridSearchRecoversCubicAndIsDeterministic) {
  const Outcome g = run_cli({"synth", "--kind", "polynomial", "--degree", "3", "--n", "5", "--T", "60", "--seed",
                             "2", "--out", path("p.mtrj")});
  ASSERT_EQ(g.code, 0) << g.err;
  const std::vector<std::string> args{"gridsearch", "--in", path("p.mtrj"), "--out", path("g.csv"), "--frame",
                                      "offlog", "--degrees", "1-6", "--samples-list", "4,6,10"};
  const Outcome r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(summary_value(r.out, "best_degree"), "3");
  EXPECT_EQ(summary_value(r.out, "best_samples"), "4");
  const std::string first = slurp(path("g.csv"));
  EXPECT_EQ(run_cli(args).out, r.out);
  EXPECT_EQ(slurp(path("g.csv")), first);
  EXPECT_NE(first.find("\n3,4,"), std::string::npos);

  EXPECT_EQ(run_cli({"gridsearch", "--in", path("p.mtrj"), "--out", path("g.csv"), "--degrees", ""}).code,
            cli::kUsage);
  EXPECT_EQ(run_cli({"gridsearch", "--in", path("p.mtrj"), "--out", path("g.csv"), "--samples-list", " , "}).code,
            cli::kUsage);
  EXPECT_EQ(run_cli({"gridsearch", "--in", path("p.mtrj"), "--out", path("g.csv"), "--degrees", "5-2"}).code,
            cli::kUsage);
}

TEST_F(CliTest, PcaWritesCoordinatesAndVariances) {
  const std::string s = synth("s.mtrj", {"--noise", "0.1"});
  const Outcome r = run_cli({"pca", "--in", s, "--out", path("p.csv"), "--variance-out", path("v.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string coords = slurp(path("p.csv"));
  EXPECT_EQ(coords.substr(0, coords.find('\n')), "time,pc1,pc2,pc3");
  EXPECT_EQ(std::count(coords.begin(), coords.end(), '\n'), 41);
  const std::string var = slurp(path("v.csv"));
  EXPECT_EQ(var.rfind("component,variance,explained_ratio\npc1,", 0), 0u) << var;

  const PcaResult expected = pca3(to_flat(read_trajectory(s), Frame::offlog));
  EXPECT_GE(expected.variance(0), expected.variance(1));
  EXPECT_GE(expected.variance(1), expected.variance(2));
  ASSERT_EQ(run_cli({"pca", "--in", s, "--out", path("q.csv")}).code, 0);
  EXPECT_EQ(slurp(path("q.csv")), coords);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const std::string s = synth("s.mtrj");
  std::ofstream(path("run.cfg")) << "# pipeline settings\n"
                                    "frame = euclidean\n"
                                    "degree = 2\n"
                                    "samples = 5\n"
                                    "width = 600\n";
  const Outcome from_cfg = run_cli({"regress", "--in", s, "--out", path("r.mtrj"), "--config", path("run.cfg")});
  ASSERT_EQ(from_cfg.code, 0) << from_cfg.err;
  EXPECT_EQ(summary_value(from_cfg.out, "frame"), "euclidean");
  EXPECT_EQ(summary_value(from_cfg.out, "degree"), "2");
  EXPECT_EQ(summary_value(from_cfg.out, "samples"), "5");

  const Outcome overridden = run_cli(
      {"regress", "--in", s, "--out", path("r.mtrj"), "--config", path("run.cfg"), "--frame", "logscaling"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_EQ(summary_value(overridden.out, "frame"), "logscaling");
  EXPECT_EQ(summary_value(overridden.out, "degree"), "2");

  std::ofstream(path("flags.cfg")) << "exclude_seam = true\nseam = 30\nwidth = 10\n";
  std::mt19937_64 rng(202);
  std::normal_distribution<double> normal(0.0, 1.0);
  RegionTimeSeries ts;
  ts.data.resize(3, 60);
  for (Index i = 0; i < ts.data.size(); ++i) ts.data.data()[i] = normal(rng);
  write_timeseries_csv(path("ts.csv"), ts);
  const Outcome w = run_cli({"window", "--in", path("ts.csv"), "--out", path("w.mtrj"), "--offset", "5",
                             "--config", path("flags.cfg")});
  ASSERT_EQ(w.code, 0) << w.err;
  EXPECT_EQ(summary_value(w.out, "windows"), "10");

  std::ofstream(path("bad.cfg")) << "no_such_key = 3\n";
  EXPECT_EQ(run_cli({"regress", "--in", s, "--out", path("r.mtrj"), "--config", path("bad.cfg")}).code, cli::kUsage);
  std::ofstream(path("noeq.cfg")) << "frame offlog\n";
  EXPECT_EQ(run_cli({"regress", "--in", s, "--out", path("r.mtrj"), "--config", path("noeq.cfg")}).code, cli::kUsage);
}
