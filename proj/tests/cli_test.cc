// Copyright 2026 The PairRank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Runs the pairrank binary as a subprocess.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "pairrank/io.h"

namespace pairrank {
namespace {

namespace fs = std::filesystem;

struct Result {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("pairrank_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string P(const std::string& name) const { return (dir_ / name).string(); }

  // `args` is appended to the binary path verbatim (shell syntax).
  Result Run(const std::string& args, const std::string& env = "") const {
    const std::string cmd = env + " " + PAIRRANK_CLI_PATH + " " + args + " >" + P("stdout") +
                            " 2>" + P("stderr") + " </dev/null";
    const int status = std::system(cmd.c_str());
    Result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = Slurp(P("stdout"));
    r.err = Slurp(P("stderr"));
    return r;
  }

  void Write(const std::string& name, const std::string& content) const {
    std::ofstream(P(name), std::ios::binary) << content;
  }

  // Simulated logistic round robin written to `name`.
  void Simulate(const std::string& name, int n, int folds, int seed = 1) const {
    const Result r = Run("--seed " + std::to_string(seed) + " simulate --n " + std::to_string(n) +
                         " --folds " + std::to_string(folds) + " --out " + P(name));
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }

  fs::path dir_;
};

double Field(const std::string& text, const std::string& key) {
  const std::regex re("(^|\\s)" + key + "=(-?[0-9.]+|inf)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) {
    ADD_FAILURE() << "no " << key << " in: " << text;
    return 0.0;
  }
  return m[2] == "inf" ? INFINITY : std::stod(m[2]);
}

int CountLines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

// --- Help -------------------------------------------------------------------

TEST_F(CliTest, HelpMatchesGoldenFiles) {
  const std::vector<std::string> commands{"",          "fit",  "gof",      "bootstrap", "add-word",
                                          "loo",       "simulate", "shootout", "correlate", "density"};
  for (const auto& cmd : commands) {
    const Result r = Run(cmd + " --help");
    EXPECT_EQ(r.exit_code, 0) << cmd;
    const fs::path golden = fs::path(PAIRRANK_GOLDEN_DIR) / ("help_" + (cmd.empty() ? "main" : cmd) + ".txt");
    ASSERT_TRUE(fs::exists(golden)) << golden;
    EXPECT_EQ(r.out, Slurp(golden)) << "help of '" << cmd << "' changed";
  }
}

TEST_F(CliTest, HelpDocumentsGlobalFlags) {
  const Result r = Run("--help");
  for (const char* flag : {"--seed", "--model", "--sigma", "--quiet", "--threads"}) {
    EXPECT_NE(r.out.find(flag), std::string::npos) << flag;
  }
  EXPECT_NE(r.out.find("[0.333333]"), std::string::npos);
}

TEST_F(CliTest, UsageErrorsExitTwoBeforeTouchingFiles) {
  EXPECT_EQ(Run("").exit_code, 2);
  EXPECT_EQ(Run("frobnicate").exit_code, 2);
  EXPECT_EQ(Run("fit --input " + P("missing.csv") + " --out " + P("lex.json")).exit_code, 2);
  EXPECT_EQ(Run("--model cauchy simulate --n 3").exit_code, 2);
  EXPECT_EQ(Run("--sigma -1 simulate --n 3").exit_code, 2);
  EXPECT_EQ(Run("simulate --n 1").exit_code, 2);
  EXPECT_FALSE(fs::exists(P("lex.json")));
}

// --- simulate ---------------------------------------------------------------

TEST_F(CliTest, SimulateRecordCounts) {
  Simulate("c200.csv", 200, 2);
  EXPECT_EQ(CountLines(Slurp(P("c200.csv"))), 39801);
  const Result r = Run("simulate --n 199 --folds 2");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(CountLines(r.out), 39403);
  EXPECT_NE(r.err.find("records=39402"), std::string::npos);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "first,second,outcome,annotator,timestamp");
}

TEST_F(CliTest, SeedFlagAndEnvironmentAreDeterministic) {
  const Result a = Run("--seed 5 simulate --n 20");
  const Result b = Run("--seed 5 simulate --n 20");
  const Result env = Run("simulate --n 20", "PAIRRANK_SEED=5");
  const Result other = Run("--seed 6 simulate --n 20");
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, env.out);
  EXPECT_NE(a.out, other.out);
  EXPECT_EQ(Run("simulate --n 20", "PAIRRANK_SEED=abc").exit_code, 2);
}

TEST_F(CliTest, SimulateFromRatingsFile) {
  Write("ratings.csv", "word,score\ngut,0.5\nschlecht,-0.5\nneutral,0\n");
  const Result r = Run("simulate --ratings " + P("ratings.csv") + " --folds 3 --truth-out " + P("truth.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const ComparisonTable t = ParseComparisons(r.out);
  EXPECT_EQ(t.records.size(), 9u);
  EXPECT_EQ(ReadLexiconFile(P("truth.json")).Find("gut")->score, 0.5);
}

// --- fit ----------------------------------------------------------------------

TEST_F(CliTest, FitRecoversDrawWidthAndLeavesOriginUncalibrated) {
  Simulate("c.csv", 199, 2, 3);
  const Result r = Run("fit --input " + P("c.csv") + " --out " + P("lex.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NEAR(Field(r.out, "t"), 0.122, 0.01);
  EXPECT_NE(r.err.find("uncalibrated"), std::string::npos);
  const Lexicon lex = ReadLexiconFile(P("lex.json"));
  EXPECT_EQ(lex.entries.size(), 199u);
  EXPECT_FALSE(lex.model.calibrated);
  EXPECT_EQ(lex.model.origin_shift, 0.0);
  EXPECT_EQ(lex.model.method, FitMethod::kLsq);
  EXPECT_EQ(lex.provenance.record_count, 39402u);
  EXPECT_NEAR(lex.model.t, Field(r.out, "t"), 1e-6);
}

TEST_F(CliTest, FitToStdoutKeepsDiagnosticsOnStderr) {
  Simulate("c.csv", 12, 3);
  const Result r = Run("fit --input " + P("c.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NO_THROW(ParseLexicon(r.out));
  EXPECT_NE(r.err.find("method=lsq"), std::string::npos);
  const Result quiet = Run("--quiet fit --input " + P("c.csv"));
  EXPECT_EQ(quiet.out, r.out);
  EXPECT_EQ(quiet.err, "");
}

TEST_F(CliTest, WarmStartedMleDoesNotLoseLikelihood) {
  Simulate("c.csv", 30, 2, 4);
  const Result r = Run("fit --method lsq+mle --input " + P("c.csv") + " --out " + P("lex.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_GE(Field(r.out, "loglik"), Field(r.out, "loglik_start"));
  EXPECT_EQ(ReadLexiconFile(P("lex.json")).model.method, FitMethod::kLsqThenMle);
}

TEST_F(CliTest, DirectGradesCalibrateTheOrigin) {
  Simulate("c.csv", 12, 3);
  const Result fit = Run("fit --input " + P("c.csv") + " --out " + P("plain.json"));
  ASSERT_EQ(fit.exit_code, 0);
  const Lexicon plain = ReadLexiconFile(P("plain.json"));
  // Graders call the top word negative, so the origin has to move up to it.
  const auto top = std::max_element(plain.entries.begin(), plain.entries.end(),
                                    [](auto& a, auto& b) { return a.score < b.score; });
  ASSERT_GT(top->score, 0.0);
  Write("grades.csv", "word,annotator,grade\n" + top->word + ",p1,strong-\n" + top->word + ",p2,-0.5\n");
  const Result r = Run("fit --input " + P("c.csv") + " --direct " + P("grades.csv") + " --out " + P("cal.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const Lexicon cal = ReadLexiconFile(P("cal.json"));
  EXPECT_TRUE(cal.model.calibrated);
  EXPECT_NEAR(cal.model.origin_shift, -top->score, 1e-6);
  EXPECT_NEAR(cal.Find(top->word)->score, 0.0, 1e-6);
  EXPECT_NEAR(cal.entries[0].score - plain.entries[0].score, cal.model.origin_shift, 2e-6);
}

TEST_F(CliTest, MalformedInputFailsWithLineNumber) {
  Write("bad.csv", "first,second,outcome\na,b,first\na,c,tie\n");
  const Result r = Run("fit --input " + P("bad.csv"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.out, "");
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

// --- gof --------------------------------------------------------------------

TEST_F(CliTest, GofRowThresholdAndReduction) {
  Simulate("c.csv", 199, 2, 8);
  ASSERT_EQ(Run("fit --input " + P("c.csv") + " --out " + P("lex.json")).exit_code, 0);
  const Result r = Run("gof --input " + P("c.csv") + " --lexicon " + P("lex.json") + " --groups 600 --groups-out " +
                       P("groups.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Field(r.out, "dof"), 999);
  EXPECT_NEAR(Field(r.out, "threshold_95"), 1074, 1);
  EXPECT_GT(Field(r.out, "p"), 0.0);
  EXPECT_EQ(CountLines(Slurp(P("groups.csv"))), 601);

  const Result big = Run("gof --input " + P("c.csv") + " --lexicon " + P("lex.json") + " --groups 100000");
  ASSERT_EQ(big.exit_code, 0) << big.err;
  EXPECT_NE(big.err.find("reduced"), std::string::npos) << big.err;
}

TEST_F(CliTest, UniformLeastSquaresGivesInfiniteChiSquare) {
  Simulate("c.csv", 60, 2, 2);
  ASSERT_EQ(Run("--model uniform fit --input " + P("c.csv") + " --out " + P("u.json")).exit_code, 0);
  const Result r = Run("gof --input " + P("c.csv") + " --lexicon " + P("u.json") + " --groups 100");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("chi2=inf"), std::string::npos) << r.out;
}

// --- bootstrap ----------------------------------------------------------------

TEST_F(CliTest, BootstrapIsDeterministicAcrossRunsAndThreads) {
  Simulate("c.csv", 15, 2);
  ASSERT_EQ(Run("--seed 9 bootstrap --reps 20 --input " + P("c.csv") + " --out " + P("a.json")).exit_code, 0);
  ASSERT_EQ(Run("--seed 9 --threads 4 bootstrap --reps 20 --input " + P("c.csv") + " --out " + P("b.json"))
                .exit_code,
            0);
  EXPECT_EQ(Slurp(P("a.json")), Slurp(P("b.json")));
  const Lexicon lex = ReadLexiconFile(P("a.json"));
  for (const auto& e : lex.entries) EXPECT_TRUE(e.bootstrap_sd.has_value()) << e.word;
  EXPECT_EQ(Run("--seed 10 bootstrap --reps 20 --input " + P("c.csv")).out == Slurp(P("a.json")), false);
}

TEST_F(CliTest, SingleReplicationOmitsSdWithWarning) {
  Simulate("c.csv", 10, 2);
  const Result r = Run("bootstrap --reps 1 --input " + P("c.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_EQ(r.out.find("bootstrap_sd"), std::string::npos);
}

// --- add-word ------------------------------------------------------------------

class AddWordTest : public CliTest {
 protected:
  // 199 anchors spread evenly over [-1, 1].
  void SetUp() override {
    CliTest::SetUp();
    Lexicon lex;
    lex.model.distribution = Distribution{Family::kLogistic, 1.0 / 3.0};
    lex.model.t = 0.122;
    for (int k = 0; k < 199; ++k) {
      lex.entries.push_back({"a" + std::to_string(1000 + k), -1.0 + 2.0 * k / 198, std::nullopt});
    }
    WriteLexiconFile(P("lex.json"), lex);
  }
};

TEST_F(AddWordTest, EighteenComparisonsSplitIntoSearchAndFill) {
  // Wins walk the search to the far end: the full ceil(log2 199) = 8 steps.
  std::string wins;
  for (int k = 0; k < 18; ++k) wins += "first\n";
  Write("wins.txt", wins);
  const Result deep = Run("add-word --lexicon " + P("lex.json") + " --word neu --answers " + P("wins.txt"));
  ASSERT_EQ(deep.exit_code, 0) << deep.err;
  EXPECT_EQ(Field(deep.out, "search_comparisons"), 8);
  EXPECT_EQ(Field(deep.out, "comparisons"), 18);

  // Draws move left, where the interval empties one step sooner; the fill
  // phase takes up the slack.
  Write("answers.txt", "# all draws\n" + [] {
    std::string s;
    for (int k = 0; k < 18; ++k) s += "draw\n";
    return s;
  }());
  const Result r = Run("add-word --lexicon " + P("lex.json") + " --word neu --answers " + P("answers.txt") +
                       " --out " + P("out.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Field(r.out, "comparisons"), 18);
  EXPECT_EQ(Field(r.out, "search_comparisons"), 7);
  const Lexicon out = ReadLexiconFile(P("out.json"));
  ASSERT_NE(out.Find("neu"), nullptr);
  EXPECT_NEAR(out.Find("neu")->score, Field(r.out, "score"), 1e-6);
}

TEST_F(AddWordTest, AllDrawsAgainstMiddleAnchorsGiveTheirRating) {
  // Without jitter the search walks left on draws; the estimate sits among
  // the anchors that were drawn against.
  std::string answers;
  for (int k = 0; k < 10; ++k) answers += "=\n";
  Write("answers.txt", answers);
  const Result r = Run("add-word --lexicon " + P("lex.json") + " --word neu --m 10 --answers " + P("answers.txt"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::vector<double> served;
  std::istringstream log(r.err);
  for (std::string line; std::getline(log, line);) {
    const std::smatch m = [&] {
      std::smatch mm;
      std::regex_search(line, mm, std::regex("neu vs a(\\d+): draw"));
      return mm;
    }();
    if (!m.empty()) served.push_back(-1.0 + 2.0 * (std::stoi(m[1]) - 1000) / 198);
  }
  ASSERT_EQ(served.size(), 10u);
  const double score = Field(r.out, "score");
  EXPECT_GE(score, *std::min_element(served.begin(), served.end()));
  EXPECT_LE(score, *std::max_element(served.begin(), served.end()));
  EXPECT_NE(r.out.find("boundary=none"), std::string::npos);
}

TEST_F(AddWordTest, AllWinsWarnAndWriteNothing) {
  std::string answers;
  for (int k = 0; k < 18; ++k) answers += "first\n";
  Write("answers.txt", answers);
  const Result r = Run("add-word --lexicon " + P("lex.json") + " --word neu --answers " + P("answers.txt") +
                       " --out " + P("out.json"));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("boundary=plus_infinity"), std::string::npos) << r.out;
  EXPECT_NE(r.err.find("no score written"), std::string::npos);
  EXPECT_FALSE(fs::exists(P("out.json")));
}

TEST_F(AddWordTest, AnswerFileErrors) {
  Write("short.txt", "draw\ndraw\n");
  EXPECT_EQ(Run("add-word --lexicon " + P("lex.json") + " --word neu --answers " + P("short.txt")).exit_code, 1);
  Write("wrong.txt", "a1000,draw\n");
  const Result r = Run("add-word --lexicon " + P("lex.json") + " --word neu --answers " + P("wrong.txt"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("pending anchor is 'a1099'"), std::string::npos) << r.err;
  EXPECT_EQ(Run("add-word --lexicon " + P("lex.json") + " --word a1005 --answers " + P("short.txt")).exit_code, 1);
  EXPECT_EQ(Run("add-word --lexicon " + P("lex.json") + " --word neu --m 7 --answers " + P("short.txt")).exit_code,
            1);
  EXPECT_EQ(Run("add-word --lexicon " + P("lex.json") + " --word neu").exit_code, 2);
}

TEST_F(AddWordTest, InteractivePromptsOnStderr) {
  std::string answers;
  for (int k = 0; k < 8; ++k) answers += (k == 0 ? "maybe\n+\n" : "-\n");
  Write("stdin.txt", answers);
  const std::string cmd = std::string(PAIRRANK_CLI_PATH) + " add-word --lexicon " + P("lex.json") +
                          " --word neu --m 8 --interactive <" + P("stdin.txt") + " >" + P("o") + " 2>" + P("e");
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 0) << Slurp(P("e"));
  const std::string err = Slurp(P("e"));
  EXPECT_NE(err.find("[1/8] 'neu' vs 'a1099'"), std::string::npos) << err;
  EXPECT_NE(err.find("please answer first, draw or second"), std::string::npos);
  EXPECT_NE(Slurp(P("o")).find("comparisons=8"), std::string::npos);
}

// --- loo, shootout, correlate, density --------------------------------------------

TEST_F(CliTest, LooCurveHasOneRowPerM) {
  Simulate("c.csv", 40, 2, 6);
  const Result r = Run("loo --input " + P("c.csv") + " --m 10..30 --out " + P("curve.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const std::string curve = Slurp(P("curve.csv"));
  EXPECT_EQ(CountLines(curve), 22);
  EXPECT_EQ(curve.substr(0, curve.find('\n')),
            "m,mean_abs_err,median_abs_err,reference_sd,boundary_estimates,max_comparisons_per_fold");
  const Result random = Run("loo --input " + P("c.csv") + " --m 10,20 --mode random --reps 5");
  ASSERT_EQ(random.exit_code, 0) << random.err;
  EXPECT_EQ(CountLines(random.out), 3);
  EXPECT_EQ(Run("loo --input " + P("c.csv") + " --m 3").exit_code, 1);
  EXPECT_EQ(Run("loo --input " + P("c.csv") + " --m x..y").exit_code, 1);
}

TEST_F(CliTest, ShootoutReport) {
  const Result r = Run("shootout --n 40 --groups 60 --no-mle");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(CountLines(r.out), 4);
  EXPECT_NE(r.out.find("logistic,lsq,"), std::string::npos);
  EXPECT_NE(r.out.find("uniform,lsq,inf,"), std::string::npos) << r.out;
}

TEST_F(CliTest, CorrelateIdenticalFilesIsOne) {
  Write("a.csv", "gut,0.5\nschlecht,-0.4\nneutral,0.01\ntoll,0.9\n");
  const Result r = Run("correlate " + P("a.csv") + " " + P("a.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "n=4 r=1.000000\n");
  Write("b.tsv", "word\tscore\ngut\t-0.5\nschlecht\t0.4\nneutral\t-0.01\n");
  EXPECT_EQ(Run("correlate " + P("a.csv") + " " + P("b.tsv")).out, "n=3 r=-1.000000\n");
}

TEST_F(CliTest, DensityExport) {
  Write("s.csv", "a,-0.5\nb,-0.4\nc,0.4\nd,0.5\n");
  const Result r = Run("density --input " + P("s.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 10), "x,density\n");
  EXPECT_GT(CountLines(r.out), 100);
  EXPECT_EQ(Run("density --input " + P("s.csv") + " --bandwidth 0.05").exit_code, 0);
}

}  // namespace
}  // namespace pairrank
