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

// Synthetic round-robin data and the evaluation experiments: leave-one-out
// insertion error as a function of the comparison budget, a random-selection
// baseline, and an estimator comparison across families and methods.

#ifndef PAIRRANK_HARNESS_H_
#define PAIRRANK_HARNESS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pairrank/adaptive.h"
#include "pairrank/analysis.h"
#include "pairrank/error.h"
#include "pairrank/estimate_joint.h"
#include "pairrank/estimate_single.h"
#include "pairrank/model.h"
#include "pairrank/random.h"

namespace pairrank {

struct SimulationConfig {
  int n = 199;
  // Generating ratings; drawn from the bimodal generator when empty.
  std::vector<double> true_ratings;
  Distribution distribution;
  DrawWidth draw_width{0.122};
  int folds = 2;
  std::uint64_t seed = 0;
};

struct Simulation {
  std::vector<std::string> items;
  std::vector<double> truth;  // parallel to items
  std::vector<ComparisonRecord> records;

  // Generating ratings as a fit, for use as ground truth.
  ModelFit TruthFit(const Distribution& dist, DrawWidth t) const {
    ModelFit fit;
    fit.distribution = dist;
    fit.draw_width = t;
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return items[a] < items[b]; });
    for (auto k : order) {
      fit.items.push_back(items[k]);
      fit.ratings.push_back(truth[k]);
    }
    fit.component.assign(items.size(), 0);
    fit.converged = true;
    return fit;
  }
};

// Uniform mixture on [-1, -0.15] and [0.15, 1]: a valley around neutral.
inline std::vector<double> BimodalRatings(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> magnitude(0.15, 1.0);
  std::bernoulli_distribution positive(0.5);
  std::vector<double> out(n);
  for (auto& r : out) r = positive(rng) ? magnitude(rng) : -magnitude(rng);
  return out;
}

inline std::string SimulatedItemName(int k, int n) {
  std::string digits = std::to_string(k);
  const std::size_t width = std::to_string(std::max(n - 1, 0)).size();
  return "w" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

inline PairOutcome SampleOutcome(const OutcomeProbabilities& p, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (u < p.p_win) return PairOutcome::kFirstWins;
  if (u < p.p_win + p.p_draw) return PairOutcome::kDraw;
  return PairOutcome::kSecondWins;
}

// `folds` judgments per unordered pair, outcomes drawn from the model. Pair
// order within a record is randomized; judgments are dealt round-robin to ten
// simulated annotators.
inline Simulation SimulateRoundRobin(const SimulationConfig& config) {
  if (config.n < 2 || config.folds < 1) {
    throw Error(ErrorCode::kInvalidArgument, "need n >= 2 and folds >= 1");
  }
  config.distribution.Validate();
  std::mt19937_64 rng(config.seed);
  Simulation sim;
  if (config.true_ratings.empty()) {
    sim.truth = BimodalRatings(config.n, rng);
  } else {
    if (static_cast<int>(config.true_ratings.size()) != config.n) {
      throw Error(ErrorCode::kInvalidArgument, "true_ratings size must equal n");
    }
    sim.truth = config.true_ratings;
  }
  for (int k = 0; k < config.n; ++k) sim.items.push_back(SimulatedItemName(k, config.n));
  sim.records.reserve(static_cast<std::size_t>(config.n) * (config.n - 1) / 2 * config.folds);
  std::bernoulli_distribution swap(0.5);
  std::size_t counter = 0;
  for (int fold = 0; fold < config.folds; ++fold) {
    for (int i = 0; i < config.n; ++i) {
      for (int j = i + 1; j < config.n; ++j) {
        int a = i, b = j;
        if (swap(rng)) std::swap(a, b);
        const auto p = ComputeOutcomeProbabilities(config.distribution, sim.truth[a],
                                                   sim.truth[b], config.draw_width);
        ComparisonRecord rec;
        rec.first = sim.items[a];
        rec.second = sim.items[b];
        rec.outcome = SampleOutcome(p, rng);
        rec.annotator = "p" + std::to_string(counter++ % 10 + 1);
        sim.records.push_back(std::move(rec));
      }
    }
  }
  return sim;
}

// --- Leave-one-out insertion ------------------------------------------------

enum class SelectionMode { kAdaptive, kRandom };

struct LooOptions {
  std::vector<int> m_values{kDefaultComparisons};
  SelectionMode mode = SelectionMode::kAdaptive;
  std::uint64_t seed = 0;
  int monte_carlo_reps = 100;  // random mode only
  int pivot_jitter = 0;
  SingleMethod estimator = SingleMethod::kMoments;
  int threads = 1;
};

struct LooPoint {
  int m = 0;
  double mean_abs_err = 0.0;
  double median_abs_err = 0.0;
  int boundary_estimates = 0;
  // Largest number of comparisons issued by one fold of one insertion.
  int max_comparisons_per_fold = 0;
};

struct LooResult {
  std::vector<LooPoint> curve;  // one entry per m, in the order requested
  std::optional<double> reference_sd;
};

namespace internal {

inline double Median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

inline double Mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Recorded outcomes per ordered item pair, from the row item's perspective.
class OutcomeTable {
 public:
  OutcomeTable(std::span<const ComparisonRecord> records, const ModelFit& truth)
      : n_(truth.items.size()), cells_(n_ * n_) {
    for (const auto& rec : records) {
      const int a = IndexOf(truth, rec.first);
      const int b = IndexOf(truth, rec.second);
      const Outcome o = FirstOutcome(rec.outcome);
      cells_[a * n_ + b].push_back(o);
      cells_[b * n_ + a].push_back(Reverse(o));
    }
  }

  const std::vector<Outcome>& At(int row, int col) const {
    const auto& cell = cells_[row * n_ + col];
    if (cell.empty()) {
      throw Error(ErrorCode::kMissingOutcome,
                  "no recorded comparison for pair (" + std::to_string(row) + ", " +
                      std::to_string(col) + ")");
    }
    return cell;
  }

 private:
  static int IndexOf(const ModelFit& fit, const std::string& item) {
    const auto it = std::lower_bound(fit.items.begin(), fit.items.end(), item);
    if (it == fit.items.end() || *it != item) {
      throw Error(ErrorCode::kInvalidArgument, "record item '" + item + "' has no ground truth");
    }
    return static_cast<int>(it - fit.items.begin());
  }

  std::size_t n_;
  std::vector<std::vector<Outcome>> cells_;
};

}  // namespace internal

// Removes each item in turn, treats all others as anchors at their
// ground-truth ratings and re-estimates it from recorded outcomes.
//
// Adaptive mode replays the insertion search once per item: each query is
// answered with the first recorded outcome of that pair, and every recorded
// outcome of each selected pair (all folds) enters the estimate. Random mode
// picks m anchors uniformly, `monte_carlo_reps` times, and averages the
// per-repetition mean and median errors.
inline LooResult LeaveOneOut(std::span<const ComparisonRecord> records,
                             const ModelFit& ground_truth, const LooOptions& options) {
  const int n = static_cast<int>(ground_truth.items.size());
  if (n < 3) throw Error(ErrorCode::kInvalidArgument, "need at least 3 items");
  const int min_m = SearchDepth(static_cast<std::size_t>(n));
  for (int m : options.m_values) {
    if (m < min_m || m > n - 1) {
      throw Error(ErrorCode::kInvalidArgument, "m=" + std::to_string(m) + " outside [" +
                                                   std::to_string(min_m) + ", " +
                                                   std::to_string(n - 1) + "]");
    }
  }
  const internal::OutcomeTable table(records, ground_truth);
  const Distribution& dist = ground_truth.distribution;
  const DrawWidth t = ground_truth.draw_width;

  auto estimate = [&](int item, std::span<const int> selected) {
    std::vector<AnchorOutcome> pool;
    for (int y : selected) {
      for (Outcome o : table.At(item, y)) pool.push_back({ground_truth.ratings[y], o});
    }
    return EstimateSingle(pool, dist, t, options.estimator);
  };

  LooResult result;
  for (std::size_t mi = 0; mi < options.m_values.size(); ++mi) {
    const int m = options.m_values[mi];
    const int reps = options.mode == SelectionMode::kRandom ? options.monte_carlo_reps : 1;
    // errors[rep][item]
    std::vector<std::vector<double>> errors(reps, std::vector<double>(n, 0.0));
    std::vector<int> boundary(n, 0), max_used(n, 0);

    auto run_item = [&](int x) {
      if (options.mode == SelectionMode::kAdaptive) {
        std::vector<Anchor> anchors;
        std::vector<int> anchor_index;
        for (int y = 0; y < n; ++y) {
          if (y == x) continue;
          anchors.push_back({ground_truth.items[y], ground_truth.ratings[y]});
          anchor_index.push_back(y);
        }
        InsertionOptions io;
        io.comparisons = m;
        io.folds = 1;
        io.pivot_jitter = options.pivot_jitter;
        io.seed = StreamFor(options.seed, {static_cast<std::uint64_t>(x),
                                           static_cast<std::uint64_t>(m)})();
        InsertionSession session(ground_truth.items[x], std::move(anchors), io);
        // Sorted anchor position -> global item index.
        std::vector<int> global(session.anchors().size());
        for (std::size_t k = 0; k < global.size(); ++k) {
          const auto& name = session.anchors()[k].item;
          global[k] = static_cast<int>(
              std::lower_bound(ground_truth.items.begin(), ground_truth.items.end(), name) -
              ground_truth.items.begin());
        }
        while (session.phase() != Phase::kDone) {
          const std::size_t q = session.NextQuery();
          session.RecordOutcome(q, table.At(x, global[q]).front());
        }
        std::vector<int> selected;
        for (std::size_t q : session.queried()) selected.push_back(global[q]);
        const SingleEstimate est = estimate(x, selected);
        errors[0][x] = std::abs(est.rating - ground_truth.ratings[x]);
        boundary[x] = est.at_boundary != Boundary::kNone ? 1 : 0;
        max_used[x] = session.comparisons_used();
        return;
      }
      std::vector<int> others;
      for (int y = 0; y < n; ++y) {
        if (y != x) others.push_back(y);
      }
      for (int rep = 0; rep < reps; ++rep) {
        auto rng = StreamFor(options.seed, {static_cast<std::uint64_t>(x),
                                            static_cast<std::uint64_t>(m),
                                            static_cast<std::uint64_t>(rep)});
        std::vector<int> pool = others;
        for (int k = 0; k < m; ++k) {
          std::uniform_int_distribution<int> pick(k, static_cast<int>(pool.size()) - 1);
          std::swap(pool[k], pool[pick(rng)]);
        }
        const SingleEstimate est = estimate(x, std::span<const int>(pool.data(), m));
        errors[rep][x] = std::abs(est.rating - ground_truth.ratings[x]);
        boundary[x] += est.at_boundary != Boundary::kNone ? 1 : 0;
      }
      max_used[x] = m;
    };

    const int threads = std::max(1, std::min(options.threads, n));
    if (threads == 1) {
      for (int x = 0; x < n; ++x) run_item(x);
    } else {
      std::vector<std::thread> workers;
      for (int w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
          for (int x = w; x < n; x += threads) run_item(x);
        });
      }
      for (auto& worker : workers) worker.join();
    }

    LooPoint point;
    point.m = m;
    for (const auto& rep_errors : errors) {
      point.mean_abs_err += internal::Mean(rep_errors);
      point.median_abs_err += internal::Median(rep_errors);
    }
    point.mean_abs_err /= reps;
    point.median_abs_err /= reps;
    point.boundary_estimates = std::accumulate(boundary.begin(), boundary.end(), 0);
    point.max_comparisons_per_fold = *std::max_element(max_used.begin(), max_used.end());
    result.curve.push_back(point);
  }
  return result;
}

// |single-rating estimate - ground truth| for every item when all of its
// recorded comparisons and all other ratings are used.
inline std::vector<double> FullInformationErrors(std::span<const ComparisonRecord> records,
                                                 const ModelFit& ground_truth,
                                                 SingleMethod method = SingleMethod::kMoments) {
  const IndexedComparisons data = IndexedComparisons::Build(records);
  std::vector<std::vector<AnchorOutcome>> pools(data.size());
  for (const auto& rec : records) {
    const int a = data.index.at(rec.first), b = data.index.at(rec.second);
    const Outcome o = FirstOutcome(rec.outcome);
    pools[a].push_back({ground_truth.RatingOf(rec.second), o});
    pools[b].push_back({ground_truth.RatingOf(rec.first), Reverse(o)});
  }
  std::vector<double> errors;
  for (int k = 0; k < data.size(); ++k) {
    const auto est = EstimateSingle(pools[k], ground_truth.distribution,
                                    ground_truth.draw_width, method);
    errors.push_back(std::abs(est.rating - ground_truth.RatingOf(data.items[k])));
  }
  return errors;
}

inline double MedianBootstrapSd(const BootstrapResult& boot) {
  std::vector<double> sds;
  for (const auto& [item, sd] : boot.sd) sds.push_back(sd);
  return internal::Median(std::move(sds));
}

// --- Estimator comparison ---------------------------------------------------

struct ShootoutRow {
  Family family = Family::kLogistic;
  FitMethod method = FitMethod::kLsq;
  double chi2 = 0.0;
  double p_value = 0.0;
  int dof = 0;
  double draw_width = 0.0;
  double recovery_correlation = 0.0;
  bool converged = false;
  std::string error;  // non-empty when the fit could not be computed
};

struct ShootoutOptions {
  int groups = 600;
  bool include_mle = true;
  std::vector<Family> families{Family::kNormal, Family::kLogistic, Family::kUniform};
  MleOptions mle;
};

struct ShootoutReport {
  std::size_t record_count = 0;
  int requested_groups = 0;
  std::vector<ShootoutRow> rows;
};

// Fits every (family, method) combination to one simulated data set and
// reports goodness of fit and rating recovery.
inline ShootoutReport EstimatorShootout(const SimulationConfig& config,
                                        const ShootoutOptions& options = {}) {
  const Simulation sim = SimulateRoundRobin(config);
  const ModelFit truth = sim.TruthFit(config.distribution, config.draw_width);
  const IndexedComparisons data = IndexedComparisons::Build(sim.records);
  ShootoutReport report;
  report.record_count = sim.records.size();
  report.requested_groups = options.groups;
  for (Family family : options.families) {
    Distribution dist{family, config.distribution.sigma};
    std::vector<FitMethod> methods{FitMethod::kLsq};
    if (options.include_mle) methods.push_back(FitMethod::kLsqThenMle);
    for (FitMethod method : methods) {
      ShootoutRow row;
      row.family = family;
      row.method = method;
      try {
        const ModelFit fit =
            method == FitMethod::kLsq ? LsqFit(data, dist) : MleFit(data, dist, options.mle);
        const GofReport gof = GofChiSquare(sim.records, fit, options.groups);
        row.chi2 = gof.chi2;
        row.p_value = gof.p_value;
        row.dof = gof.dof;
        row.draw_width = fit.draw_width.value();
        row.converged = fit.converged;
        std::vector<double> fitted, generating;
        for (std::size_t k = 0; k < fit.items.size(); ++k) {
          fitted.push_back(fit.ratings[k]);
          generating.push_back(truth.RatingOf(fit.items[k]));
        }
        row.recovery_correlation = PearsonCorrelation(fitted, generating);
      } catch (const Error& e) {
        row.error = e.what();
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace pairrank

#endif  // PAIRRANK_HARNESS_H_
