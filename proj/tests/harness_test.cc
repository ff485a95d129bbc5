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

#include "pairrank/harness.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

namespace pairrank {
namespace {

const Distribution kLogistic{Family::kLogistic, 1.0 / 3.0};

SimulationConfig Config(int n, int folds, std::uint64_t seed) {
  SimulationConfig c;
  c.n = n;
  c.folds = folds;
  c.seed = seed;
  c.distribution = kLogistic;
  return c;
}

// Average ranks (ties share the mean rank).
std::vector<double> Ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = 0.5 * (i + j) + 1.0;
    i = j + 1;
  }
  return ranks;
}

double Spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = Ranks(a), rb = Ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / ra.size();
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / rb.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(SimulateRoundRobin, TwoItemsOneFoldGivesOneRecord) {
  EXPECT_EQ(SimulateRoundRobin(Config(2, 1, 3)).records.size(), 1u);
}

TEST(SimulateRoundRobin, EveryPairAppearsOncePerFold) {
  EXPECT_EQ(SimulateRoundRobin(Config(200, 2, 5)).records.size(), 39800u);
  const Simulation sim = SimulateRoundRobin(Config(199, 2, 5));
  ASSERT_EQ(sim.records.size(), 39402u);
  std::map<std::pair<std::string, std::string>, int> seen;
  for (const auto& r : sim.records) {
    ASSERT_NE(r.first, r.second);
    ++seen[std::minmax(r.first, r.second)];
  }
  EXPECT_EQ(seen.size(), 19701u);
  for (const auto& [pair, count] : seen) EXPECT_EQ(count, 2);
}

TEST(SimulateRoundRobin, EvenMatchWithoutDrawsSplitsEvenly) {
  SimulationConfig c = Config(2, 10000, 11);
  c.true_ratings = {0.0, 0.0};
  c.draw_width = DrawWidth(0.0);
  const Simulation sim = SimulateRoundRobin(c);
  int wins = 0, draws = 0;
  for (const auto& r : sim.records) {
    const bool first_is_w0 = r.first == sim.items[0];
    if (r.outcome == PairOutcome::kDraw) ++draws;
    if ((r.outcome == PairOutcome::kFirstWins) == first_is_w0 &&
        r.outcome != PairOutcome::kDraw) {
      ++wins;
    }
  }
  EXPECT_EQ(draws, 0);
  EXPECT_NEAR(wins / 10000.0, 0.5, 0.02);
}

TEST(SimulateRoundRobin, OutcomeFrequenciesFollowModel) {
  SimulationConfig c = Config(2, 40000, 17);
  c.true_ratings = {0.25, -0.1};
  const Simulation sim = SimulateRoundRobin(c);
  double counts[3] = {0, 0, 0};  // from w0's side: win, draw, loss
  for (const auto& r : sim.records) {
    Outcome o = FirstOutcome(r.outcome);
    if (r.first != sim.items[0]) o = Reverse(o);
    counts[o == Outcome::kWin ? 0 : o == Outcome::kDraw ? 1 : 2] += 1;
  }
  const auto p = ComputeOutcomeProbabilities(kLogistic, 0.25, -0.1, DrawWidth(0.122));
  const double expected[3] = {p.p_win, p.p_draw, p.p_loss};
  for (int k = 0; k < 3; ++k) {
    const double share = counts[k] / 40000.0;
    const double se = std::sqrt(expected[k] * (1 - expected[k]) / 40000.0);
    EXPECT_NEAR(share, expected[k], 4.5 * se) << k;
  }
}

TEST(SimulateRoundRobin, DeterministicUnderSeed) {
  const Simulation a = SimulateRoundRobin(Config(30, 2, 42));
  const Simulation b = SimulateRoundRobin(Config(30, 2, 42));
  const Simulation c = SimulateRoundRobin(Config(30, 2, 43));
  ASSERT_EQ(a.records.size(), b.records.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].first, b.records[k].first);
    EXPECT_EQ(a.records[k].outcome, b.records[k].outcome);
    differs |= a.records[k].outcome != c.records[k].outcome;
  }
  EXPECT_EQ(a.truth, b.truth);
  EXPECT_TRUE(differs);
}

TEST(SimulateRoundRobin, RejectsInvalidConfig) {
  EXPECT_THROW(SimulateRoundRobin(Config(1, 1, 0)), Error);
  EXPECT_THROW(SimulateRoundRobin(Config(5, 0, 0)), Error);
  SimulationConfig c = Config(3, 1, 0);
  c.true_ratings = {0.1, 0.2};
  EXPECT_THROW(SimulateRoundRobin(c), Error);
}

TEST(BimodalRatings, LeaveAValleyAroundZero) {
  std::mt19937_64 rng(9);
  const auto r = BimodalRatings(2000, rng);
  int negative = 0;
  for (double x : r) {
    EXPECT_GE(std::abs(x), 0.15);
    EXPECT_LE(std::abs(x), 1.0);
    negative += x < 0;
  }
  EXPECT_NEAR(negative / 2000.0, 0.5, 0.05);
}

TEST(SimulatedItemName, SortsNumerically) {
  EXPECT_EQ(SimulatedItemName(7, 199), "w007");
  EXPECT_LT(SimulatedItemName(9, 199), SimulatedItemName(10, 199));
}

class LooTest : public ::testing::Test {
 protected:
  void SetUp() override {
    sim_ = SimulateRoundRobin(Config(40, 2, 2024));
    truth_ = sim_.TruthFit(kLogistic, DrawWidth(0.122));
  }
  Simulation sim_;
  ModelFit truth_;
};

TEST_F(LooTest, RejectsComparisonCountsOutsideRange) {
  LooOptions o;
  o.m_values = {5};  // ceil(log2 40) = 6
  EXPECT_THROW(LeaveOneOut(sim_.records, truth_, o), Error);
  o.m_values = {40};
  EXPECT_THROW(LeaveOneOut(sim_.records, truth_, o), Error);
  o.m_values = {6, 39};
  EXPECT_NO_THROW(LeaveOneOut(sim_.records, truth_, o));
}

TEST_F(LooTest, MissingOutcomeIsReported) {
  std::vector<ComparisonRecord> partial;
  for (const auto& r : sim_.records) {
    if (std::minmax(r.first, r.second) != std::minmax(sim_.items[3], sim_.items[4])) {
      partial.push_back(r);
    }
  }
  LooOptions o;
  o.m_values = {39};
  try {
    LeaveOneOut(partial, truth_, o);
    FAIL() << "expected MissingOutcome";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingOutcome);
  }
}

TEST_F(LooTest, AdaptiveNeverExceedsBudget) {
  LooOptions o;
  o.m_values = {6, 10, 18};
  o.pivot_jitter = 1;
  const LooResult r = LeaveOneOut(sim_.records, truth_, o);
  ASSERT_EQ(r.curve.size(), 3u);
  for (const auto& p : r.curve) {
    EXPECT_LE(p.max_comparisons_per_fold, p.m);
    EXPECT_GE(p.max_comparisons_per_fold, 1);
  }
}

TEST_F(LooTest, AllAnchorsMatchFullInformation) {
  LooOptions o;
  o.m_values = {39};
  const LooResult r = LeaveOneOut(sim_.records, truth_, o);
  const auto full = FullInformationErrors(sim_.records, truth_);
  EXPECT_NEAR(r.curve[0].mean_abs_err, internal::Mean(full), 1e-12);
  EXPECT_NEAR(r.curve[0].median_abs_err, internal::Median(full), 1e-12);
}

TEST_F(LooTest, RandomModeWithAllAnchorsIsExact) {
  LooOptions o;
  o.m_values = {39};
  o.mode = SelectionMode::kRandom;
  o.monte_carlo_reps = 3;
  const LooResult r = LeaveOneOut(sim_.records, truth_, o);
  EXPECT_NEAR(r.curve[0].mean_abs_err, internal::Mean(FullInformationErrors(sim_.records, truth_)),
              1e-12);
}

TEST_F(LooTest, ThreadCountDoesNotChangeResults) {
  for (SelectionMode mode : {SelectionMode::kAdaptive, SelectionMode::kRandom}) {
    LooOptions o;
    o.m_values = {8, 14};
    o.mode = mode;
    o.monte_carlo_reps = 5;
    o.pivot_jitter = 2;
    o.seed = 77;
    const LooResult one = LeaveOneOut(sim_.records, truth_, o);
    o.threads = 4;
    const LooResult four = LeaveOneOut(sim_.records, truth_, o);
    for (std::size_t k = 0; k < one.curve.size(); ++k) {
      EXPECT_EQ(one.curve[k].mean_abs_err, four.curve[k].mean_abs_err);
      EXPECT_EQ(one.curve[k].median_abs_err, four.curve[k].median_abs_err);
      EXPECT_EQ(one.curve[k].boundary_estimates, four.curve[k].boundary_estimates);
    }
  }
}

TEST(LeaveOneOut, MedianErrorFallsWithMoreComparisons) {
  const std::vector<int> ms{6, 10, 15, 20, 30, 40};
  std::vector<std::vector<double>> per_m(ms.size());
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Simulation sim = SimulateRoundRobin(Config(41, 2, seed));
    LooOptions o;
    o.m_values = ms;
    o.seed = seed;
    const LooResult r = LeaveOneOut(sim.records, sim.TruthFit(kLogistic, DrawWidth(0.122)), o);
    for (std::size_t k = 0; k < ms.size(); ++k) per_m[k].push_back(r.curve[k].median_abs_err);
  }
  std::vector<double> m_axis, medians;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    m_axis.push_back(ms[k]);
    medians.push_back(internal::Median(per_m[k]));
  }
  EXPECT_LE(Spearman(m_axis, medians), -0.8);
}

TEST(FullInformationErrors, ZeroAgainstOwnLeastSquaresFit) {
  const Simulation sim = SimulateRoundRobin(Config(50, 2, 8));
  const ModelFit fit = LsqFit(IndexedComparisons::Build(sim.records), kLogistic);
  const auto errors = FullInformationErrors(sim.records, fit);
  ASSERT_EQ(errors.size(), 50u);
  EXPECT_LT(internal::Mean(errors), 1e-6);
}

TEST(MedianHelpers, EvenAndOdd) {
  EXPECT_DOUBLE_EQ(internal::Median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(internal::Median({4, 1, 3, 2}), 2.5);
  EXPECT_DOUBLE_EQ(internal::Median({}), 0.0);
  BootstrapResult boot;
  boot.sd = {{"a", 0.1}, {"b", 0.3}, {"c", 0.2}};
  EXPECT_DOUBLE_EQ(MedianBootstrapSd(boot), 0.2);
}

TEST(EstimatorShootout, LogisticBeatsNormalOnLogisticData) {
  ShootoutOptions o;
  o.include_mle = false;
  o.families = {Family::kNormal, Family::kLogistic};
  int logistic_better = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ShootoutReport r = EstimatorShootout(Config(199, 2, seed), o);
    ASSERT_EQ(r.rows.size(), 2u);
    ASSERT_TRUE(r.rows[0].error.empty()) << r.rows[0].error;
    ASSERT_TRUE(r.rows[1].error.empty()) << r.rows[1].error;
    EXPECT_EQ(r.rows[1].dof, 2 * 600 - 199 - 2);
    EXPECT_GE(r.rows[1].recovery_correlation, 0.99);
    logistic_better += r.rows[1].chi2 <= r.rows[0].chi2;
  }
  EXPECT_GE(logistic_better, 16);
}

TEST(EstimatorShootout, ReportsEveryCombination) {
  ShootoutOptions o;
  o.groups = 100;
  const ShootoutReport r = EstimatorShootout(Config(60, 2, 4), o);
  EXPECT_EQ(r.record_count, 3540u);
  EXPECT_EQ(r.requested_groups, 100);
  ASSERT_EQ(r.rows.size(), 6u);
  std::set<std::pair<Family, FitMethod>> combos;
  for (const auto& row : r.rows) {
    combos.insert({row.family, row.method});
    EXPECT_TRUE(row.error.empty()) << row.error;
    if (row.family != Family::kUniform) {
      EXPECT_TRUE(row.converged);
      EXPECT_TRUE(std::isfinite(row.chi2));
      EXPECT_GE(row.recovery_correlation, 0.95);
    }
  }
  EXPECT_EQ(combos.size(), 6u);
  // Least squares leaves some observed outcome impossible under the uniform
  // model, so its likelihood-based statistic is infinite.
  EXPECT_TRUE(std::isinf(r.rows[4].chi2));
  EXPECT_EQ(r.rows[4].family, Family::kUniform);
  EXPECT_EQ(r.rows[4].method, FitMethod::kLsq);
}

TEST(EstimatorShootout, TooFewGroupsIsReportedPerRow) {
  ShootoutOptions o;
  o.groups = 100;  // dof = 200 - 199 - 2 < 0
  o.include_mle = false;
  const ShootoutReport r = EstimatorShootout(Config(199, 1, 6), o);
  for (const auto& row : r.rows) EXPECT_FALSE(row.error.empty());
}

}  // namespace
}  // namespace pairrank
