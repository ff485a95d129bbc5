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

#include "pairrank/analysis.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include "pairrank/harness.h"

namespace pairrank {
namespace {

const Distribution kLogistic{Family::kLogistic, 1.0 / 3.0};
const Distribution kUniform{Family::kUniform, 1.0 / 3.0};

ComparisonRecord Rec(std::string a, std::string b, PairOutcome o) {
  ComparisonRecord r;
  r.first = std::move(a);
  r.second = std::move(b);
  r.outcome = o;
  return r;
}

Simulation Simulate(int n, int folds, std::uint64_t seed, const Distribution& dist = kLogistic) {
  SimulationConfig config;
  config.n = n;
  config.folds = folds;
  config.distribution = dist;
  config.seed = seed;
  return SimulateRoundRobin(config);
}

TEST(SpecialFunctionsTest, ChiSquareQuantilesAtReferenceDof) {
  EXPECT_NEAR(special::ChiSquareInverseSurvival(0.05, 999), 1074.0, 1.0);
  EXPECT_NEAR(special::ChiSquareInverseSurvival(0.05, 1399), 1487.0, 1.0);
  for (double dof : {1.0, 2.0, 10.0, 57.0, 999.0, 1399.0}) {
    const boost::math::chi_squared chi(dof);
    EXPECT_NEAR(special::ChiSquareInverseSurvival(0.05, dof), boost::math::quantile(boost::math::complement(chi, 0.05)),
                1e-6 * dof)
        << dof;
  }
}

TEST(SpecialFunctionsTest, SurvivalMatchesBoostAndDualEvaluation) {
  for (double dof : {1.0, 10.0, 999.0, 1399.0}) {
    const double a = dof / 2.0;
    const boost::math::chi_squared chi(dof);
    for (double z : {-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double x = std::max(1e-3, dof + z * std::sqrt(2.0 * dof));
      EXPECT_NEAR(special::ChiSquareSurvival(x, dof), boost::math::cdf(boost::math::complement(chi, x)), 1e-10)
          << dof << " " << x;
      // Series and continued fraction agree where both converge.
      const double half = x / 2.0;
      if (half > a + 1.0) {
        EXPECT_NEAR(1.0 - special::GammaPSeries(a, half),
                    special::GammaQContinuedFraction(a, half), 1e-10);
      }
    }
  }
  EXPECT_NEAR(special::GammaP(3.5, 2.0), boost::math::gamma_p(3.5, 2.0), 1e-14);
  EXPECT_NEAR(special::GammaQ(0.5, 30.0), boost::math::gamma_q(0.5, 30.0), 1e-20);
}

TEST(SpecialFunctionsTest, NormalTails) {
  const boost::math::normal n01;
  for (double z : {-8.0, -2.0, 0.0, 1.96, 6.3368, 12.0}) {
    EXPECT_NEAR(special::StandardNormalSurvival(z), boost::math::cdf(boost::math::complement(n01, z)),
                1e-15 + 1e-12 * boost::math::cdf(boost::math::complement(n01, z)));
    EXPECT_NEAR(special::StandardNormalCdf(z), boost::math::cdf(n01, z), 1e-15);
  }
}

TEST(GofTest, CountsAndExpectationsAreConsistent) {
  const auto sim = Simulate(30, 2, 1);
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto report = GofChiSquare(sim.records, fit, 40);
  double total = 0.0;
  for (const auto& g : report.groups) {
    total += g.wins + g.draws + g.losses;
    EXPECT_NEAR(g.expected_wins + g.expected_draws + g.expected_losses, g.size, 1e-9);
    EXPECT_EQ(g.wins + g.draws + g.losses, g.size);
    EXPECT_LE(g.lo, g.hi);
  }
  EXPECT_EQ(total, static_cast<double>(sim.records.size()));
  EXPECT_EQ(report.group_count(), 40);
  EXPECT_EQ(report.dof, 2 * 40 - 30 - 2);
  EXPECT_GE(report.p_value, 0.0);
  EXPECT_LE(report.p_value, 1.0);
  EXPECT_NEAR(report.threshold_95, boost::math::quantile(boost::math::complement(boost::math::chi_squared(48), 0.05)),
              1e-6);
}

TEST(GofTest, ChiSquareMatchesDirectComputation) {
  const auto sim = Simulate(12, 3, 2);
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto report = GofChiSquare(sim.records, fit, 10);
  double chi2 = 0.0;
  for (const auto& g : report.groups) {
    chi2 += std::pow(g.wins - g.expected_wins, 2) / g.expected_wins;
    chi2 += std::pow(g.draws - g.expected_draws, 2) / g.expected_draws;
    chi2 += std::pow(g.losses - g.expected_losses, 2) / g.expected_losses;
  }
  EXPECT_NEAR(report.chi2, chi2, 1e-9 * chi2);
  EXPECT_NEAR(report.p_value,
              boost::math::cdf(boost::math::complement(boost::math::chi_squared(report.dof), report.chi2)), 1e-10);
}

TEST(GofTest, InvariantToRecordOrderAndOrientation) {
  const auto sim = Simulate(25, 2, 3);
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto base = GofChiSquare(sim.records, fit, 30);
  auto shuffled = sim.records;
  std::mt19937_64 rng(4);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  for (std::size_t k = 0; k < shuffled.size(); k += 2) {
    std::swap(shuffled[k].first, shuffled[k].second);
    shuffled[k].outcome = Mirror(shuffled[k].outcome);
  }
  EXPECT_NEAR(GofChiSquare(shuffled, fit, 30).chi2, base.chi2, 1e-9);
}

TEST(GofTest, HalvingGroupsStillGivesValidReport) {
  const auto sim = Simulate(20, 4, 5);
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto full = GofChiSquare(sim.records, fit, 60);
  const auto half = GofChiSquare(sim.records, fit, 30);
  EXPECT_EQ(full.dof, 2 * 60 - 20 - 2);
  EXPECT_EQ(half.dof, 60 - 20 - 2);
  EXPECT_TRUE(std::isfinite(half.chi2));
}

TEST(GofTest, ReducesGroupsForTooFewRecords) {
  const auto sim = Simulate(6, 2, 6);  // 30 records
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto report = GofChiSquare(sim.records, fit, 20);
  EXPECT_TRUE(report.groups_reduced);
  EXPECT_EQ(report.group_count(), 6);
}

TEST(GofTest, NonPositiveDofIsAnError) {
  const auto sim = Simulate(30, 1, 7);
  const auto fit = LsqFit(sim.records, kLogistic);
  EXPECT_THROW(GofChiSquare(sim.records, fit, 16), Error);  // 32 - 30 - 2 = 0
  EXPECT_THROW(GofChiSquare(sim.records, fit, 1), Error);
}

TEST(GofTest, UniformImpossibleOutcomeGivesInfinity) {
  // A far below B still beats B: zero probability under the uniform model.
  std::vector<ComparisonRecord> recs;
  ModelFit fit;
  fit.distribution = kUniform;
  fit.draw_width = DrawWidth(0.05);
  for (int k = 0; k < 12; ++k) {
    fit.items.push_back("i" + std::to_string(10 + k));
    fit.ratings.push_back(-1.0 + 0.2 * k);
  }
  for (int i = 0; i < 12; ++i) {
    for (int j = i + 1; j < 12; ++j) {
      recs.push_back(Rec(fit.items[j], fit.items[i], PairOutcome::kFirstWins));
    }
  }
  recs.push_back(Rec(fit.items[0], fit.items[11], PairOutcome::kFirstWins));
  const auto report = GofChiSquare(recs, fit, 20);
  EXPECT_TRUE(report.impossible_outcome);
  EXPECT_TRUE(std::isinf(report.chi2));
  EXPECT_EQ(report.p_value, 0.0);
}

TEST(GofTest, StatisticIsCalibratedAtTrueParameters) {
  // With the generating ratings nothing is fitted, so the statistic should
  // average about 2G.
  const int runs = 20, groups = 100;
  double mean = 0.0;
  for (int seed = 0; seed < runs; ++seed) {
    const auto sim = Simulate(50, 2, 1000 + seed);
    const auto truth = sim.TruthFit(kLogistic, DrawWidth(0.122));
    mean += GofChiSquare(sim.records, truth, groups).chi2 / runs;
  }
  EXPECT_NEAR(mean, 2.0 * groups, 0.15 * 2.0 * groups);
}

TEST(FrequencyBinsTest, ModelMatchesObservedOnAverage) {
  const auto sim = Simulate(60, 2, 8);
  const auto fit = LsqFit(sim.records, kLogistic);
  const auto bins = OutcomeFrequencyBins(sim.records, fit, 9, 3);
  int count = 0;
  for (const auto& b : bins) {
    count += b.count;
    if (b.count > 300) {
      EXPECT_NEAR(b.observed_win, b.model_win, 0.08);
      EXPECT_NEAR(b.observed_draw, b.model_draw, 0.08);
    }
  }
  EXPECT_EQ(count, static_cast<int>(sim.records.size()));
  const auto again = OutcomeFrequencyBins(sim.records, fit, 9, 3);
  for (std::size_t k = 0; k < bins.size(); ++k) EXPECT_EQ(bins[k].observed_win, again[k].observed_win);
}

TEST(BootstrapTest, DegenerateInputHasZeroSd) {
  const std::vector<ComparisonRecord> recs{Rec("A", "B", PairOutcome::kDraw)};
  const auto result = BootstrapSd(recs, kLogistic, {.replications = 2, .seed = 1});
  EXPECT_EQ(result.replications, 2);
  EXPECT_EQ(result.sd.at("A"), 0.0);
  EXPECT_EQ(result.sd.at("B"), 0.0);
}

TEST(BootstrapTest, SingleReplicateGivesNoSpread) {
  const auto sim = Simulate(10, 2, 9);
  const auto result = BootstrapSd(sim.records, kLogistic, {.replications = 1});
  for (const auto& [item, sd] : result.sd) EXPECT_EQ(sd, 0.0) << item;
  EXPECT_THROW(BootstrapSd(sim.records, kLogistic, {.replications = 0}), Error);
}

TEST(BootstrapTest, DeterministicAcrossRunsAndThreadCounts) {
  const auto sim = Simulate(25, 2, 10);
  const auto a = BootstrapSd(sim.records, kLogistic, {.replications = 20, .seed = 7, .threads = 1});
  const auto b = BootstrapSd(sim.records, kLogistic, {.replications = 20, .seed = 7, .threads = 3});
  EXPECT_EQ(a.sd, b.sd);
  const auto c = BootstrapSd(sim.records, kLogistic, {.replications = 20, .seed = 8});
  EXPECT_NE(a.sd, c.sd);
}

TEST(BootstrapTest, SpreadMatchesRatingErrorScaleAndGrowsAtExtremes) {
  SimulationConfig config;
  config.n = 80;
  config.folds = 2;
  config.distribution = kLogistic;
  config.seed = 11;
  const auto sim = SimulateRoundRobin(config);
  const auto result = BootstrapSd(sim.records, kLogistic, {.replications = 60, .seed = 2});
  std::vector<double> sds, extreme, middle;
  const auto truth = sim.TruthFit(kLogistic, DrawWidth(0.122));
  for (std::size_t k = 0; k < truth.items.size(); ++k) {
    const double sd = result.sd.at(truth.items[k]);
    EXPECT_GE(sd, 0.0);
    sds.push_back(sd);
    (std::abs(truth.ratings[k]) > 0.8 ? extreme : middle).push_back(sd);
  }
  const double median = internal::Median(sds);
  EXPECT_GT(median, 0.01);
  EXPECT_LT(median, 0.1);
  ASSERT_FALSE(extreme.empty());
  EXPECT_GT(internal::Mean(extreme), internal::Mean(middle));
}

TEST(ScoreDifferenceTest, KnownValues) {
  EXPECT_EQ(ScoreDifferencePValue(0.3, 0.02, 0.3, 0.04), 0.5);
  EXPECT_EQ(ScoreDifferencePValue(0.3, 0.0, 0.3, 0.0), 0.5);
  const double p = ScoreDifferencePValue(-0.396, 0.026, -0.629, 0.026);
  EXPECT_LT(p, 1e-9);
  EXPECT_NEAR(p, boost::math::cdf(boost::math::complement(boost::math::normal(), 0.233 / std::sqrt(2 * 0.026 * 0.026))),
              1e-20);
  const double s = std::sqrt(0.03 * 0.03 + 0.04 * 0.04);
  EXPECT_NEAR(ScoreDifferencePValue(0.0, 0.03, 1.959963984540054 * s, 0.04), 0.025, 1e-12);
  EXPECT_THROW(ScoreDifferencePValue(0.0, -1.0, 0.0, 0.1), Error);
  EXPECT_THROW(ScoreDifferencePValue(0.1, 0.0, 0.2, 0.0), Error);
}

TEST(PearsonTest, AffineAndInvariance) {
  const std::vector<double> xs{0.1, -0.4, 0.9, 0.3, -0.7, 0.2};
  std::vector<double> up, down, scaled;
  for (double x : xs) {
    up.push_back(2 * x + 3);
    down.push_back(-x);
  }
  EXPECT_NEAR(PearsonCorrelation(xs, up), 1.0, 1e-15);
  EXPECT_NEAR(PearsonCorrelation(xs, down), -1.0, 1e-15);
  const std::vector<double> ys{0.3, -0.1, 0.5, 0.6, -0.9, -0.2};
  for (double x : xs) scaled.push_back(4.5 * x - 1.25);
  EXPECT_NEAR(PearsonCorrelation(scaled, ys), PearsonCorrelation(xs, ys), 1e-12);
  // Textbook formula as oracle.
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) mx += xs[k] / 6, my += ys[k] / 6;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  EXPECT_NEAR(PearsonCorrelation(xs, ys), sxy / std::sqrt(sxx * syy), 1e-14);
  EXPECT_THROW(PearsonCorrelation(xs, std::vector<double>(6, 1.0)), Error);
  EXPECT_THROW(PearsonCorrelation(std::vector<double>{1.0}, std::vector<double>{1.0}), Error);
}

double Trapezoid(const std::vector<DensityPoint>& pts) {
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    area += 0.5 * (pts[k].density + pts[k - 1].density) * (pts[k].x - pts[k - 1].x);
  }
  return area;
}

TEST(DensityTest, NormalizedOnDefaultGrid) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 0.3);
  std::vector<double> r(300);
  for (auto& x : r) x = z(rng);
  const auto pts = DensityExport(r);
  EXPECT_EQ(pts.size(), 512u);
  EXPECT_NEAR(Trapezoid(pts), 1.0, 0.01);
  const double h = SilvermanBandwidth(r);
  EXPECT_NEAR(pts.front().x, *std::min_element(r.begin(), r.end()) - 3 * h, 1e-12);
  EXPECT_NEAR(pts.back().x, *std::max_element(r.begin(), r.end()) + 3 * h, 1e-12);
}

TEST(DensityTest, ConstantSampleGivesSinglePeak) {
  const std::vector<double> r(20, 0.4);
  const auto pts = DensityExport(r);
  const auto peak = std::max_element(pts.begin(), pts.end(),
                                     [](const auto& a, const auto& b) { return a.density < b.density; });
  EXPECT_NEAR(peak->x, 0.4, (pts[1].x - pts[0].x));
  EXPECT_NEAR(Trapezoid(pts), 1.0, 0.01);
}

TEST(DensityTest, BimodalSampleHasTwoMaxima) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> z(0.0, 0.08);
  std::vector<double> r;
  for (int k = 0; k < 200; ++k) r.push_back((k % 2 ? 0.5 : -0.5) + z(rng));
  const auto pts = DensityExport(r);
  int maxima = 0;
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    if (pts[k].density > pts[k - 1].density && pts[k].density >= pts[k + 1].density) ++maxima;
  }
  EXPECT_EQ(maxima, 2);
  EXPECT_THROW(DensityExport(std::vector<double>{1.0}), Error);
  EXPECT_THROW(DensityExport(r, -1.0), Error);
}

}  // namespace
}  // namespace pairrank
