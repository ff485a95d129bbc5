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

// Model validation and inference on fitted ratings: chi-square goodness of
// fit over |delta r| quantile groups, bootstrap standard errors, significance
// of score differences, Pearson correlation and kernel density export.

#ifndef PAIRRANK_ANALYSIS_H_
#define PAIRRANK_ANALYSIS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pairrank/error.h"
#include "pairrank/estimate_joint.h"
#include "pairrank/model.h"
#include "pairrank/random.h"
#include "pairrank/special_functions.h"

namespace pairrank {

// --- Goodness of fit --------------------------------------------------------

struct GofGroup {
  double lo = 0.0;  // interval (lo, hi] over |delta r|
  double hi = 0.0;
  int size = 0;
  double wins = 0.0;
  double draws = 0.0;
  double losses = 0.0;
  double expected_wins = 0.0;
  double expected_draws = 0.0;
  double expected_losses = 0.0;
};

struct GofReport {
  int requested_groups = 0;
  std::vector<GofGroup> groups;
  int item_count = 0;
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double threshold_95 = 0.0;
  // G was lowered because the data could not fill the requested groups.
  bool groups_reduced = false;
  // Some observed outcome has zero model probability; chi2 is +inf.
  bool impossible_outcome = false;
  // Cells with expected count below 1 (reported, not corrected).
  int small_expected_cells = 0;

  int group_count() const { return static_cast<int>(groups.size()); }
};

struct GofOptions {
  // Groups are reduced until each holds at least this many comparisons.
  int min_group_size = 5;
};

namespace internal {

struct OrientedComparison {
  double delta;  // >= 0
  PairOutcome outcome;
};

// Orients every record so that the higher-rated item comes first (delta >= 0);
// exact ties are ordered by item name.
inline std::vector<OrientedComparison> Orient(std::span<const ComparisonRecord> records,
                                              const ModelFit& fit) {
  std::vector<OrientedComparison> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    const double a = fit.RatingOf(rec.first);
    const double b = fit.RatingOf(rec.second);
    PairOutcome outcome = rec.outcome;
    if (a < b || (a == b && rec.first > rec.second)) outcome = Mirror(outcome);
    out.push_back({std::abs(a - b), outcome});
  }
  return out;
}

}  // namespace internal

inline GofReport GofChiSquare(std::span<const ComparisonRecord> records, const ModelFit& fit,
                              int groups, const GofOptions& options = {}) {
  if (groups < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 groups");
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "no comparisons");
  GofReport report;
  report.requested_groups = groups;
  report.item_count = static_cast<int>(fit.items.size());

  auto oriented = internal::Orient(records, fit);
  std::sort(oriented.begin(), oriented.end(),
            [](const auto& x, const auto& y) { return x.delta < y.delta; });
  const int total = static_cast<int>(oriented.size());
  int g_count = groups;
  const int max_groups = std::max(1, total / std::max(1, options.min_group_size));
  if (g_count > max_groups) {
    g_count = max_groups;
    report.groups_reduced = true;
  }

  // Right-closed quantile intervals; ties on a boundary fall in the lower group.
  std::vector<double> upper;
  for (int g = 1; g <= g_count; ++g) {
    const long long pos = (static_cast<long long>(g) * total + g_count - 1) / g_count;
    const double bound = oriented[pos - 1].delta;
    if (upper.empty() || bound > upper.back()) upper.push_back(bound);
  }
  if (static_cast<int>(upper.size()) < g_count) report.groups_reduced = true;
  report.groups.resize(upper.size());
  for (std::size_t g = 0; g < upper.size(); ++g) {
    report.groups[g].lo = g == 0 ? 0.0 : upper[g - 1];
    report.groups[g].hi = upper[g];
  }

  const Distribution& dist = fit.distribution;
  std::size_t g = 0;
  for (const auto& c : oriented) {
    while (c.delta > upper[g]) ++g;
    GofGroup& grp = report.groups[g];
    const OutcomeProbabilities p = ComputeOutcomeProbabilities(dist, c.delta, 0.0, fit.draw_width);
    ++grp.size;
    grp.expected_wins += p.p_win;
    grp.expected_draws += p.p_draw;
    grp.expected_losses += p.p_loss;
    double observed_probability = 0.0;
    switch (c.outcome) {
      case PairOutcome::kFirstWins: grp.wins += 1.0; observed_probability = p.p_win; break;
      case PairOutcome::kDraw: grp.draws += 1.0; observed_probability = p.p_draw; break;
      case PairOutcome::kSecondWins: grp.losses += 1.0; observed_probability = p.p_loss; break;
    }
    if (observed_probability <= 0.0) report.impossible_outcome = true;
  }

  report.dof = 2 * report.group_count() - report.item_count - 2;
  if (report.dof <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "degrees of freedom 2G - n - 2 = " + std::to_string(report.dof) +
                    " must be positive (G=" + std::to_string(report.group_count()) +
                    ", n=" + std::to_string(report.item_count) + ")");
  }
  report.threshold_95 = special::ChiSquareInverseSurvival(0.05, report.dof);

  double chi2 = 0.0;
  auto cell = [&](double observed, double expected) {
    if (expected < 1.0) ++report.small_expected_cells;
    if (expected <= 0.0) {
      if (observed > 0.0) chi2 = std::numeric_limits<double>::infinity();
      return;
    }
    chi2 += (observed - expected) * (observed - expected) / expected;
  };
  for (const auto& grp : report.groups) {
    cell(grp.wins, grp.expected_wins);
    cell(grp.draws, grp.expected_draws);
    cell(grp.losses, grp.expected_losses);
  }
  if (report.impossible_outcome) chi2 = std::numeric_limits<double>::infinity();
  report.chi2 = chi2;
  report.p_value = std::isinf(chi2) ? 0.0 : special::ChiSquareSurvival(chi2, report.dof);
  return report;
}

// Observed outcome frequencies against model probabilities in equal-width bins
// of signed delta r. Pair order is shuffled per record (seeded) so positive and
// negative differences are equally represented.
struct FrequencyBin {
  double center = 0.0;
  int count = 0;
  double observed_win = 0.0;
  double observed_draw = 0.0;
  double model_win = 0.0;
  double model_draw = 0.0;
};

inline std::vector<FrequencyBin> OutcomeFrequencyBins(std::span<const ComparisonRecord> records,
                                                      const ModelFit& fit, int bins,
                                                      std::uint64_t seed) {
  if (bins < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one bin");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution flip(0.5);
  std::vector<std::pair<double, PairOutcome>> signed_deltas;
  double max_abs = 0.0;
  for (const auto& rec : records) {
    double delta = fit.RatingOf(rec.first) - fit.RatingOf(rec.second);
    PairOutcome outcome = rec.outcome;
    if (flip(rng)) {
      delta = -delta;
      outcome = Mirror(outcome);
    }
    max_abs = std::max(max_abs, std::abs(delta));
    signed_deltas.emplace_back(delta, outcome);
  }
  std::vector<FrequencyBin> out(bins);
  const double width = max_abs > 0.0 ? 2.0 * max_abs / bins : 1.0;
  for (int b = 0; b < bins; ++b) out[b].center = -max_abs + (b + 0.5) * width;
  for (const auto& [delta, outcome] : signed_deltas) {
    const int b = std::clamp(static_cast<int>((delta + max_abs) / width), 0, bins - 1);
    const auto p = ComputeOutcomeProbabilities(fit.distribution, delta, 0.0, fit.draw_width);
    FrequencyBin& bin = out[b];
    ++bin.count;
    if (outcome == PairOutcome::kFirstWins) bin.observed_win += 1.0;
    if (outcome == PairOutcome::kDraw) bin.observed_draw += 1.0;
    bin.model_win += p.p_win;
    bin.model_draw += p.p_draw;
  }
  for (auto& bin : out) {
    if (bin.count == 0) continue;
    bin.observed_win /= bin.count;
    bin.observed_draw /= bin.count;
    bin.model_win /= bin.count;
    bin.model_draw /= bin.count;
  }
  return out;
}

// --- Bootstrap --------------------------------------------------------------

struct BootstrapOptions {
  int replications = 200;
  std::uint64_t seed = 0;
  int threads = 1;
  int max_retries = 10;
};

struct BootstrapResult {
  std::map<std::string, double> sd;  // per-item standard deviation
  int replications = 0;              // replicates that entered the estimate
  std::uint64_t seed = 0;
  int retries = 0;                   // resamples redrawn for disconnection
  bool flagged = false;              // some replicate stayed disconnected
  ModelFit point;                    // least-squares fit on all records
};

// Resamples the records with replacement, refits by least squares (warm start
// from the point estimate), aligns each replicate to the point estimate by its
// mean difference over shared items and reports per-item sample sd.
inline BootstrapResult BootstrapSd(std::span<const ComparisonRecord> records,
                                   const Distribution& dist, const BootstrapOptions& options) {
  if (options.replications < 1) throw Error(ErrorCode::kInvalidArgument, "need B >= 1");
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "no comparisons");
  BootstrapResult result;
  result.seed = options.seed;
  result.point = LsqFit(records, dist);
  const ModelFit& point = result.point;
  LsqOptions warm;
  warm.initial_ratings = point.RatingMap();

  const int b_count = options.replications;
  std::vector<std::optional<std::vector<std::pair<int, double>>>> replicate(b_count);
  std::vector<int> retries(b_count, 0);

  auto run = [&](int b) {
    std::vector<ComparisonRecord> sample(records.size());
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
      auto rng = StreamFor(options.seed, {static_cast<std::uint64_t>(b),
                                           static_cast<std::uint64_t>(attempt)});
      std::uniform_int_distribution<std::size_t> pick(0, records.size() - 1);
      for (auto& rec : sample) rec = records[pick(rng)];
      const IndexedComparisons data = IndexedComparisons::Build(sample);
      const auto comp = data.Components();
      if (*std::max_element(comp.begin(), comp.end()) > 0) {
        ++retries[b];
        continue;
      }
      const ModelFit fit = LsqFit(data, dist, warm);
      double shift = 0.0;
      std::vector<std::pair<int, double>> values;
      for (std::size_t k = 0; k < fit.items.size(); ++k) {
        const auto it = std::lower_bound(point.items.begin(), point.items.end(), fit.items[k]);
        const int idx = static_cast<int>(it - point.items.begin());
        values.emplace_back(idx, fit.ratings[k]);
        shift += fit.ratings[k] - point.ratings[idx];
      }
      shift /= static_cast<double>(values.size());
      for (auto& [idx, value] : values) value -= shift;
      replicate[b] = std::move(values);
      return;
    }
  };

  const int threads = std::max(1, std::min(options.threads, b_count));
  if (threads == 1) {
    for (int b = 0; b < b_count; ++b) run(b);
  } else {
    std::vector<std::thread> workers;
    for (int w = 0; w < threads; ++w) {
      workers.emplace_back([&, w] {
        for (int b = w; b < b_count; b += threads) run(b);
      });
    }
    for (auto& worker : workers) worker.join();
  }

  const std::size_t n = point.items.size();
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  std::vector<int> count(n, 0);
  // Accumulate offsets from each item's first value for numeric stability.
  std::vector<double> first(n, 0.0);
  std::vector<char> have_first(n, 0);
  for (int b = 0; b < b_count; ++b) {
    result.retries += retries[b];
    if (!replicate[b]) {
      result.flagged = true;
      continue;
    }
    ++result.replications;
    for (const auto& [idx, value] : *replicate[b]) {
      if (!have_first[idx]) {
        first[idx] = value;
        have_first[idx] = 1;
      }
      const double x = value - first[idx];
      sum[idx] += x;
      sum_sq[idx] += x * x;
      ++count[idx];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    double sd = 0.0;
    if (count[k] >= 2) {
      const double mean = sum[k] / count[k];
      const double var = (sum_sq[k] - count[k] * mean * mean) / (count[k] - 1);
      sd = std::sqrt(std::max(0.0, var));
    }
    result.sd[point.items[k]] = sd;
  }
  return result;
}

// One-sided p-value 1 - Phi(|r_i - r_j| / sqrt(sd_i^2 + sd_j^2)).
inline double ScoreDifferencePValue(double r_i, double sd_i, double r_j, double sd_j) {
  if (sd_i < 0.0 || sd_j < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative sd");
  const double diff = std::abs(r_i - r_j);
  const double scale = std::sqrt(sd_i * sd_i + sd_j * sd_j);
  if (scale == 0.0) {
    if (diff == 0.0) return 0.5;
    throw Error(ErrorCode::kInvalidArgument, "both sds are zero for distinct scores");
  }
  return special::StandardNormalSurvival(diff / scale);
}

inline double PearsonCorrelation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "need two equal-length lists of >= 2 values");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - mx, dy = ys[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kInvalidArgument, "zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct DensityPoint {
  double x = 0.0;
  double density = 0.0;
};

// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5), falling back to
// whichever spread is nonzero and to 0.1 for a constant sample.
inline double SilvermanBandwidth(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / (n - 1.0));
  auto quantile = [&](double p) {
    const double pos = p * (n - 1.0);
    const std::size_t k = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(k);
    return k + 1 < v.size() ? v[k] * (1.0 - frac) + v[k + 1] * frac : v.back();
  };
  const double iqr = (quantile(0.75) - quantile(0.25)) / 1.34;
  // Rounding leaves a constant sample with sd ~1e-17; treat that as zero.
  const double noise = 1e-12 * std::max(1.0, std::abs(mean));
  double spread = std::min(sd, iqr);
  if (spread <= noise) spread = std::max(sd, iqr);
  if (spread <= noise) return 0.1;
  return 0.9 * spread * std::pow(n, -0.2);
}

// Gaussian kernel density on 512 evenly spaced points over
// [min - 3h, max + 3h].
inline std::vector<DensityPoint> DensityExport(std::span<const double> ratings,
                                               std::optional<double> bandwidth = std::nullopt) {
  if (ratings.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least 2 ratings");
  const double h = bandwidth.value_or(SilvermanBandwidth(ratings));
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bandwidth must be positive");
  const auto [min_it, max_it] = std::minmax_element(ratings.begin(), ratings.end());
  const double lo = *min_it - 3.0 * h, hi = *max_it + 3.0 * h;
  constexpr int kPoints = 512;
  const double norm = 1.0 / (static_cast<double>(ratings.size()) * h *
                             std::sqrt(2.0 * std::numbers::pi));
  std::vector<DensityPoint> out(kPoints);
  for (int k = 0; k < kPoints; ++k) {
    const double x = lo + (hi - lo) * k / (kPoints - 1);
    double sum = 0.0;
    for (double r : ratings) {
      const double z = (x - r) / h;
      sum += std::exp(-0.5 * z * z);
    }
    out[k] = {x, sum * norm};
  }
  return out;
}

}  // namespace pairrank

#endif  // PAIRRANK_ANALYSIS_H_
