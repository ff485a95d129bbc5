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

// Estimation of a single unknown rating from comparisons against anchors whose
// ratings are known.
//
// Two estimators are provided:
//  * maximum likelihood over the three-outcome model with a fixed draw width;
//  * method of moments: solve  W + D/2 = sum_i F(r - q_i)  for r. The draw
//    width only enters at second order, so this estimator ignores it.
//
// Undefeated (or winless) items have an infinite estimate under the normal and
// logistic families. Those cases are returned clamped to the search interval
// with a boundary flag. For the uniform family the solution set is a
// half-line instead and the point closest to zero is returned.

#ifndef PAIRRANK_ESTIMATE_SINGLE_H_
#define PAIRRANK_ESTIMATE_SINGLE_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pairrank/error.h"
#include "pairrank/model.h"
#include "pairrank/optimize.h"

namespace pairrank {

// Result of one comparison, seen from the item being scored.
enum class Outcome { kLoss, kDraw, kWin };

inline double ScoreOf(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWin: return 1.0;
    case Outcome::kDraw: return 0.5;
    case Outcome::kLoss: return 0.0;
  }
  return 0.0;
}

inline Outcome Reverse(Outcome outcome) {
  switch (outcome) {
    case Outcome::kWin: return Outcome::kLoss;
    case Outcome::kLoss: return Outcome::kWin;
    case Outcome::kDraw: return Outcome::kDraw;
  }
  return outcome;
}

struct AnchorOutcome {
  double anchor_rating = 0.0;
  Outcome outcome = Outcome::kDraw;

  double score() const { return ScoreOf(outcome); }
};

enum class Boundary { kNone, kPlusInfinity, kMinusInfinity };

inline std::string_view BoundaryName(Boundary boundary) {
  switch (boundary) {
    case Boundary::kNone: return "none";
    case Boundary::kPlusInfinity: return "plus_infinity";
    case Boundary::kMinusInfinity: return "minus_infinity";
  }
  return "none";
}

enum class SingleMethod { kMle, kMoments };

inline std::string_view SingleMethodName(SingleMethod method) {
  return method == SingleMethod::kMle ? "mle" : "moments";
}

struct SingleEstimate {
  double rating = 0.0;
  SingleMethod method = SingleMethod::kMoments;
  bool converged = false;
  Boundary at_boundary = Boundary::kNone;
};

struct SearchInterval {
  double lo = -1.0;
  double hi = 1.0;
};

// [min(q) - 3w, max(q) + 3w] with w = max(1, max(q) - min(q)).
inline SearchInterval DefaultSearchInterval(std::span<const double> anchor_ratings) {
  if (anchor_ratings.empty()) return {-3.0, 3.0};
  const auto [min_it, max_it] = std::minmax_element(anchor_ratings.begin(), anchor_ratings.end());
  const double width = std::max(1.0, *max_it - *min_it);
  return {*min_it - 3.0 * width, *max_it + 3.0 * width};
}

inline SearchInterval DefaultSearchInterval(std::span<const AnchorOutcome> outcomes) {
  std::vector<double> q;
  q.reserve(outcomes.size());
  for (const auto& o : outcomes) q.push_back(o.anchor_rating);
  return DefaultSearchInterval(std::span<const double>(q));
}

// Log-likelihood of rating r given outcomes against known anchors. Returns
// -inf when any outcome has zero probability.
inline double LogLikelihoodSingle(double r, std::span<const AnchorOutcome> outcomes,
                                  const Distribution& dist, DrawWidth t) {
  if (outcomes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no outcomes");
  }
  const double w = t.value();
  double total = 0.0;
  for (const auto& o : outcomes) {
    const double diff = r - o.anchor_rating;
    switch (o.outcome) {
      case Outcome::kWin: total += LogCdf(dist, diff - w); break;
      case Outcome::kLoss: total += LogCdf(dist, -diff - w); break;
      case Outcome::kDraw: {
        const double p = Cdf(dist, diff + w) - Cdf(dist, diff - w);
        total += p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
        break;
      }
    }
    if (total == -std::numeric_limits<double>::infinity()) return total;
  }
  return total;
}

namespace internal {

inline void CheckInterval(const SearchInterval& interval) {
  if (!(interval.lo < interval.hi)) {
    throw Error(ErrorCode::kInvalidArgument, "search interval requires lo < hi");
  }
}

}  // namespace internal

inline SingleEstimate MleSingle(std::span<const AnchorOutcome> outcomes,
                                const Distribution& dist, DrawWidth t,
                                std::optional<SearchInterval> search = std::nullopt) {
  if (outcomes.empty()) throw Error(ErrorCode::kInvalidArgument, "no outcomes");
  dist.Validate();
  const SearchInterval interval = search.value_or(DefaultSearchInterval(outcomes));
  internal::CheckInterval(interval);

  const bool all_wins = std::all_of(outcomes.begin(), outcomes.end(),
                                    [](const auto& o) { return o.outcome == Outcome::kWin; });
  const bool all_losses = std::all_of(outcomes.begin(), outcomes.end(),
                                      [](const auto& o) { return o.outcome == Outcome::kLoss; });
  SingleEstimate est;
  est.method = SingleMethod::kMle;
  if (all_wins || all_losses) {
    if (dist.family == Family::kUniform) {
      // Every r past the last anchor's support attains likelihood 1.
      const double reach = t.value() + dist.UniformHalfWidth();
      double edge = 0.0;
      if (all_wins) {
        edge = -std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) edge = std::max(edge, o.anchor_rating + reach);
      } else {
        edge = std::numeric_limits<double>::infinity();
        for (const auto& o : outcomes) edge = std::min(edge, o.anchor_rating - reach);
      }
      const double lo = all_wins ? edge : interval.lo;
      const double hi = all_wins ? interval.hi : edge;
      if (lo <= hi) {
        est.rating = std::clamp(0.0, lo, hi);
        est.converged = true;
        return est;
      }
    }
    est.at_boundary = all_wins ? Boundary::kPlusInfinity : Boundary::kMinusInfinity;
    est.rating = all_wins ? interval.hi : interval.lo;
    est.converged = false;
    return est;
  }

  auto negative_ll = [&](double r) { return -LogLikelihoodSingle(r, outcomes, dist, t); };
  // Coarse scan brackets the maximizer even where the likelihood is -inf on
  // part of the interval (uniform family).
  constexpr int kGrid = 2000;
  const double step = (interval.hi - interval.lo) / kGrid;
  int best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    const double v = negative_ll(interval.lo + k * step);
    if (v < best_value) {
      best_value = v;
      best = k;
    }
  }
  const double lo = interval.lo + std::max(0, best - 1) * step;
  const double hi = interval.lo + std::min(kGrid, best + 1) * step;
  const auto min = optimize::BrentMinimize(negative_ll, lo, hi, 1e-10);
  est.rating = min.value <= best_value ? min.x : interval.lo + best * step;
  est.converged = std::isfinite(best_value);
  return est;
}

// Solves total_score = sum_i F(r - q_i) for r. When the solution set is an
// interval (possible for the uniform family) the point closest to zero is
// returned. Fractional total scores are accepted.
inline SingleEstimate SolveMomentEquation(std::span<const double> anchor_ratings,
                                          double total_score, const Distribution& dist,
                                          std::optional<SearchInterval> search = std::nullopt) {
  if (anchor_ratings.empty()) throw Error(ErrorCode::kInvalidArgument, "no anchors");
  dist.Validate();
  const SearchInterval interval = search.value_or(DefaultSearchInterval(anchor_ratings));
  internal::CheckInterval(interval);
  const double m = static_cast<double>(anchor_ratings.size());

  SingleEstimate est;
  est.method = SingleMethod::kMoments;
  const bool unbounded_family = dist.family != Family::kUniform;
  if (unbounded_family && (total_score <= 0.0 || total_score >= m)) {
    est.at_boundary = total_score <= 0.0 ? Boundary::kMinusInfinity : Boundary::kPlusInfinity;
    est.rating = total_score <= 0.0 ? interval.lo : interval.hi;
    return est;
  }

  auto expected = [&](double r) {
    double sum = 0.0;
    for (double q : anchor_ratings) sum += Cdf(dist, r - q);
    return sum;
  };
  if (expected(interval.hi) < total_score) {
    est.at_boundary = Boundary::kPlusInfinity;
    est.rating = interval.hi;
    return est;
  }
  if (expected(interval.lo) > total_score) {
    est.at_boundary = Boundary::kMinusInfinity;
    est.rating = interval.lo;
    return est;
  }
  constexpr double kTol = 1e-11;
  const double lower = optimize::LowerCrossing(expected, total_score, interval.lo, interval.hi, kTol);
  const double upper = optimize::UpperCrossing(expected, total_score, interval.lo, interval.hi, kTol);
  const double a = std::min(lower, upper), b = std::max(lower, upper);
  est.rating = b - a <= 1e-9 ? 0.5 * (a + b) : std::clamp(0.0, a, b);
  est.converged = true;
  return est;
}

inline SingleEstimate MomentsSingle(std::span<const AnchorOutcome> outcomes,
                                    const Distribution& dist,
                                    std::optional<SearchInterval> search = std::nullopt) {
  if (outcomes.empty()) throw Error(ErrorCode::kInvalidArgument, "no outcomes");
  std::vector<double> q;
  q.reserve(outcomes.size());
  double total = 0.0;
  for (const auto& o : outcomes) {
    q.push_back(o.anchor_rating);
    total += o.score();
  }
  return SolveMomentEquation(q, total, dist, search);
}

inline SingleEstimate EstimateSingle(std::span<const AnchorOutcome> outcomes,
                                     const Distribution& dist, DrawWidth t,
                                     SingleMethod method,
                                     std::optional<SearchInterval> search = std::nullopt) {
  return method == SingleMethod::kMle ? MleSingle(outcomes, dist, t, search)
                                      : MomentsSingle(outcomes, dist, search);
}

}  // namespace pairrank

#endif  // PAIRRANK_ESTIMATE_SINGLE_H_
