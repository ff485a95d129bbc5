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

// Joint estimation of all ratings and the draw width from arbitrary paired
// comparisons.
//
// Least squares. With S_i = W_i + D_i/2 the scoring of item i and C_i the
// multiset of its opponents, the ratings minimize
//
//   SS(r) = sum_i ( S_i - sum_{j in C_i} F(r_i - r_j) )^2
//
// by Levenberg-Marquardt. The residuals do not depend on t. The draw width then
// has the closed form
//
//   t = sum_i f_i D_i / (2 sum_i f_i^2),   f_i = sum_{j in C_i} F'(r_i - r_j),
//
// which minimizes sum_i (D_i - 2 t f_i)^2.
//
// Maximum likelihood maximizes the full three-outcome log-likelihood over
// (r, t), by BFGS for the differentiable families and by Nelder-Mead for the
// uniform family.
//
// Ratings are only defined up to a common shift. Fits are reported with mean
// zero per connected component; `CalibrateOrigin` fixes the origin against
// direct positive/negative judgments.

#ifndef PAIRRANK_ESTIMATE_JOINT_H_
#define PAIRRANK_ESTIMATE_JOINT_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pairrank/error.h"
#include "pairrank/estimate_single.h"
#include "pairrank/model.h"
#include "pairrank/optimize.h"

namespace pairrank {

enum class PairOutcome { kFirstWins, kDraw, kSecondWins };

struct ComparisonRecord {
  std::string first;
  std::string second;
  PairOutcome outcome = PairOutcome::kDraw;
  std::string annotator;
  std::string timestamp;
  // Values of columns this library does not interpret, in file column order.
  std::vector<std::string> extra;
};

// Outcome of a record from the point of view of `first`.
inline Outcome FirstOutcome(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::kFirstWins: return Outcome::kWin;
    case PairOutcome::kDraw: return Outcome::kDraw;
    case PairOutcome::kSecondWins: return Outcome::kLoss;
  }
  return Outcome::kDraw;
}

inline PairOutcome Mirror(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::kFirstWins: return PairOutcome::kSecondWins;
    case PairOutcome::kSecondWins: return PairOutcome::kFirstWins;
    case PairOutcome::kDraw: return PairOutcome::kDraw;
  }
  return outcome;
}

struct ItemTally {
  std::string item;
  int wins = 0;
  int draws = 0;
  int losses = 0;
  std::vector<std::string> opponents;

  double scoring() const { return wins + 0.5 * draws; }
};

// Per-item win/draw/loss counts in order of first appearance. Items listed in
// `universe` but absent from the records get empty tallies (appended after
// the compared items).
inline std::vector<ItemTally> Tally(std::span<const ComparisonRecord> records,
                                    std::span<const std::string> universe = {}) {
  std::vector<ItemTally> tallies;
  std::unordered_map<std::string, std::size_t> index;
  auto slot = [&](const std::string& item) {
    auto [it, inserted] = index.try_emplace(item, tallies.size());
    if (inserted) {
      ItemTally fresh;
      fresh.item = item;
      tallies.push_back(std::move(fresh));
    }
    return it->second;
  };
  for (const auto& rec : records) {
    if (rec.first == rec.second) {
      throw Error(ErrorCode::kInvalidArgument, "item compared with itself: " + rec.first);
    }
    const std::size_t ia = slot(rec.first);
    const std::size_t ib = slot(rec.second);
    ItemTally& a = tallies[ia];
    ItemTally& b = tallies[ib];
    a.opponents.push_back(rec.second);
    b.opponents.push_back(rec.first);
    switch (rec.outcome) {
      case PairOutcome::kFirstWins: ++a.wins; ++b.losses; break;
      case PairOutcome::kSecondWins: ++a.losses; ++b.wins; break;
      case PairOutcome::kDraw: ++a.draws; ++b.draws; break;
    }
  }
  for (const auto& item : universe) slot(item);
  return tallies;
}

// Records aggregated by unordered item pair, with items indexed in sorted name
// order. Shared by the estimators and the diagnostics.
struct IndexedComparisons {
  struct Pair {
    int i = 0;  // i < j
    int j = 0;
    double wins_i = 0.0;
    double draws = 0.0;
    double wins_j = 0.0;

    double total() const { return wins_i + draws + wins_j; }
  };

  std::vector<std::string> items;
  std::unordered_map<std::string, int> index;
  std::vector<Pair> pairs;
  std::vector<double> scoring;  // S_i
  std::vector<double> draws;    // D_i

  int size() const { return static_cast<int>(items.size()); }

  static IndexedComparisons Build(std::span<const ComparisonRecord> records) {
    IndexedComparisons out;
    for (const auto& rec : records) {
      if (rec.first == rec.second) {
        throw Error(ErrorCode::kInvalidArgument, "item compared with itself: " + rec.first);
      }
      out.index.try_emplace(rec.first, 0);
      out.index.try_emplace(rec.second, 0);
    }
    out.items.reserve(out.index.size());
    for (const auto& [name, unused] : out.index) out.items.push_back(name);
    std::sort(out.items.begin(), out.items.end());
    for (int k = 0; k < out.size(); ++k) out.index[out.items[k]] = k;

    std::map<std::pair<int, int>, std::size_t> pair_slot;
    for (const auto& rec : records) {
      int a = out.index[rec.first];
      int b = out.index[rec.second];
      PairOutcome outcome = rec.outcome;
      if (a > b) {
        std::swap(a, b);
        outcome = Mirror(outcome);
      }
      auto [it, inserted] = pair_slot.try_emplace({a, b}, out.pairs.size());
      if (inserted) out.pairs.push_back(Pair{a, b});
      Pair& p = out.pairs[it->second];
      switch (outcome) {
        case PairOutcome::kFirstWins: p.wins_i += 1.0; break;
        case PairOutcome::kDraw: p.draws += 1.0; break;
        case PairOutcome::kSecondWins: p.wins_j += 1.0; break;
      }
    }
    out.scoring.assign(out.size(), 0.0);
    out.draws.assign(out.size(), 0.0);
    for (const auto& p : out.pairs) {
      out.scoring[p.i] += p.wins_i + 0.5 * p.draws;
      out.scoring[p.j] += p.wins_j + 0.5 * p.draws;
      out.draws[p.i] += p.draws;
      out.draws[p.j] += p.draws;
    }
    return out;
  }

  // Connected component label per item (labels 0..k-1 in order of lowest item).
  std::vector<int> Components() const {
    std::vector<int> parent(size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& p : pairs) {
      const int a = find(p.i), b = find(p.j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<int> label(size(), -1);
    std::unordered_map<int, int> root_label;
    for (int k = 0; k < size(); ++k) {
      auto [it, inserted] = root_label.try_emplace(find(k), static_cast<int>(root_label.size()));
      label[k] = it->second;
    }
    return label;
  }

  // Sub-problem restricted to `members` (sorted item indices). Pairs leaving
  // the subset are dropped.
  IndexedComparisons Subset(const std::vector<int>& members) const {
    IndexedComparisons out;
    std::vector<int> remap(size(), -1);
    for (int k = 0; k < static_cast<int>(members.size()); ++k) {
      remap[members[k]] = k;
      out.items.push_back(items[members[k]]);
      out.index[items[members[k]]] = k;
    }
    out.scoring.assign(members.size(), 0.0);
    out.draws.assign(members.size(), 0.0);
    for (const auto& p : pairs) {
      if (remap[p.i] < 0 || remap[p.j] < 0) continue;
      Pair q = p;
      q.i = remap[p.i];
      q.j = remap[p.j];
      out.pairs.push_back(q);
      out.scoring[q.i] += q.wins_i + 0.5 * q.draws;
      out.scoring[q.j] += q.wins_j + 0.5 * q.draws;
      out.draws[q.i] += q.draws;
      out.draws[q.j] += q.draws;
    }
    return out;
  }
};

enum class FitMethod { kLsq, kMle, kLsqThenMle };

inline std::string_view FitMethodName(FitMethod method) {
  switch (method) {
    case FitMethod::kLsq: return "lsq";
    case FitMethod::kMle: return "mle";
    case FitMethod::kLsqThenMle: return "lsq+mle";
  }
  return "lsq";
}

inline FitMethod ParseFitMethod(std::string_view name) {
  if (name == "lsq") return FitMethod::kLsq;
  if (name == "mle") return FitMethod::kMle;
  if (name == "lsq+mle" || name == "lsq_then_mle") return FitMethod::kLsqThenMle;
  throw Error(ErrorCode::kInvalidArgument, "unknown fit method '" + std::string(name) + "'");
}

struct ModelFit {
  Distribution distribution;
  std::vector<std::string> items;  // sorted
  std::vector<double> ratings;     // parallel to items
  DrawWidth draw_width;
  bool draw_width_defined = true;
  double origin_shift = 0.0;
  bool calibrated = false;  // ratings already include origin_shift
  FitMethod method = FitMethod::kLsq;
  // Sum of squares for least squares; log-likelihood for maximum likelihood.
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
  bool connected = true;
  std::vector<int> component;  // parallel to items

  std::optional<double> Find(std::string_view item) const {
    const auto it = std::lower_bound(items.begin(), items.end(), item);
    if (it == items.end() || *it != item) return std::nullopt;
    return ratings[it - items.begin()];
  }

  double RatingOf(std::string_view item) const {
    const auto r = Find(item);
    if (!r) throw Error(ErrorCode::kInvalidArgument, "no rating for '" + std::string(item) + "'");
    return *r;
  }

  std::unordered_map<std::string, double> RatingMap() const {
    std::unordered_map<std::string, double> out;
    for (std::size_t k = 0; k < items.size(); ++k) out[items[k]] = ratings[k];
    return out;
  }
};

// Scoring residuals S_i - sum_j F(r_i - r_j) and their Jacobian.
class LsqProblem {
 public:
  LsqProblem(IndexedComparisons data, Distribution dist)
      : data_(std::move(data)), dist_(dist) {}

  const IndexedComparisons& data() const { return data_; }

  Eigen::VectorXd Residuals(const Eigen::VectorXd& r) const {
    Eigen::VectorXd res = Eigen::Map<const Eigen::VectorXd>(data_.scoring.data(), data_.size());
    for (const auto& p : data_.pairs) {
      const double f = Cdf(dist_, r[p.i] - r[p.j]);
      res[p.i] -= p.total() * f;
      res[p.j] -= p.total() * (1.0 - f);
    }
    return res;
  }

  // J_ik = d residual_i / d r_k. Symmetric because F' is even.
  Eigen::MatrixXd Jacobian(const Eigen::VectorXd& r) const {
    const int n = data_.size();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : data_.pairs) {
      const double w = p.total() * Pdf(dist_, r[p.i] - r[p.j]);
      jac(p.i, p.i) -= w;
      jac(p.j, p.j) -= w;
      jac(p.i, p.j) += w;
      jac(p.j, p.i) += w;
    }
    return jac;
  }

  double Objective(const Eigen::VectorXd& r) const { return Residuals(r).squaredNorm(); }

 private:
  IndexedComparisons data_;
  Distribution dist_;
};

struct LsqOptions {
  // Starting ratings by item name; missing items start at the mean of the
  // provided ones (or 0).
  std::unordered_map<std::string, double> initial_ratings;
  int max_iterations = 500;
  double initial_lambda = 1e-3;
  double step_tol = 1e-10;
  double relative_decrease_tol = 1e-12;
};

struct LmResult {
  Eigen::VectorXd ratings;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace internal {

inline void CenterInPlace(Eigen::VectorXd& r) {
  if (r.size() > 0) r.array() -= r.mean();
}

// Levenberg-Marquardt on one connected component. The shift direction is
// removed by re-centering every iterate and by a rank-one term 1 1^T in the
// normal equations (the gradient is orthogonal to it).
inline LmResult LevenbergMarquardt(const LsqProblem& problem, Eigen::VectorXd r,
                                   const LsqOptions& options) {
  const Eigen::Index n = r.size();
  LmResult out;
  CenterInPlace(r);
  Eigen::VectorXd res = problem.Residuals(r);
  double ss = res.squaredNorm();
  double lambda = options.initial_lambda;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  int iter = 0;
  while (iter < options.max_iterations) {
    if (ss == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jac = problem.Jacobian(r);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * res;
    Eigen::VectorXd diag = jtj.diagonal();
    const double diag_scale = std::max(diag.maxCoeff(), 1e-300);
    diag = diag.cwiseMax(1e-12 * diag_scale);
    const double gauge = diag.mean() / static_cast<double>(n);
    bool accepted = false;
    bool stop = false;
    while (iter < options.max_iterations) {
      ++iter;
      Eigen::MatrixXd system = jtj + gauge * ones * ones.transpose();
      system.diagonal() += lambda * diag;
      Eigen::VectorXd step = system.ldlt().solve(-grad);
      CenterInPlace(step);
      if (!step.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const Eigen::VectorXd candidate = r + step;
      const Eigen::VectorXd cand_res = problem.Residuals(candidate);
      const double cand_ss = cand_res.squaredNorm();
      if (cand_ss < ss) {
        const double decrease = (ss - cand_ss) / ss;
        r = candidate;
        res = cand_res;
        ss = cand_ss;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (step.lpNorm<Eigen::Infinity>() < options.step_tol ||
            decrease < options.relative_decrease_tol) {
          stop = true;
        }
        break;
      }
      if (step.lpNorm<Eigen::Infinity>() < options.step_tol) {
        // No decrease even for a vanishing step: at a minimum to precision.
        stop = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e16) {
        stop = true;
        break;
      }
    }
    if (stop) {
      out.converged = true;
      break;
    }
    if (!accepted) break;
  }
  CenterInPlace(r);
  out.ratings = std::move(r);
  out.objective = ss;
  out.iterations = iter;
  return out;
}

}  // namespace internal

// Closed-form least-squares draw width for given ratings. Throws
// UndefinedDrawWidth when every f_i vanishes.
inline DrawWidth DrawWidthLsq(const IndexedComparisons& data, std::span<const double> ratings,
                              const Distribution& dist) {
  std::vector<double> f(data.size(), 0.0);
  for (const auto& p : data.pairs) {
    const double w = p.total() * Pdf(dist, ratings[p.i] - ratings[p.j]);
    f[p.i] += w;
    f[p.j] += w;
  }
  double numerator = 0.0, denominator = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    numerator += f[i] * data.draws[i];
    denominator += f[i] * f[i];
  }
  if (denominator == 0.0) {
    throw Error(ErrorCode::kUndefinedDrawWidth,
                "all draw-width weights are zero (no comparison inside the support)");
  }
  return DrawWidth(std::max(0.0, numerator / (2.0 * denominator)));
}

inline DrawWidth DrawWidthLsq(std::span<const ComparisonRecord> records,
                              const std::unordered_map<std::string, double>& ratings,
                              const Distribution& dist) {
  const IndexedComparisons data = IndexedComparisons::Build(records);
  std::vector<double> r(data.size());
  for (int k = 0; k < data.size(); ++k) {
    const auto it = ratings.find(data.items[k]);
    if (it == ratings.end()) {
      throw Error(ErrorCode::kInvalidArgument, "no rating for '" + data.items[k] + "'");
    }
    r[k] = it->second;
  }
  return DrawWidthLsq(data, r, dist);
}

inline DrawWidth DrawWidthLsq(std::span<const ComparisonRecord> records, const ModelFit& fit) {
  return DrawWidthLsq(records, fit.RatingMap(), fit.distribution);
}

// sum_i (D_i - 2 t f_i)^2, the objective the closed form minimizes.
inline double DrawWidthObjective(const IndexedComparisons& data, std::span<const double> ratings,
                                 const Distribution& dist, double t) {
  std::vector<double> f(data.size(), 0.0);
  for (const auto& p : data.pairs) {
    const double w = p.total() * Pdf(dist, ratings[p.i] - ratings[p.j]);
    f[p.i] += w;
    f[p.j] += w;
  }
  double ss = 0.0;
  for (int i = 0; i < data.size(); ++i) {
    const double d = data.draws[i] - 2.0 * t * f[i];
    ss += d * d;
  }
  return ss;
}

// Least-squares ratings (Levenberg-Marquardt) followed by the closed-form draw
// width. A disconnected comparison graph is fit per component, each centered
// at zero, and flagged via `connected = false`.
inline ModelFit LsqFit(const IndexedComparisons& data, const Distribution& dist,
                       const LsqOptions& options = {}) {
  dist.Validate();
  ModelFit fit;
  fit.distribution = dist;
  fit.method = FitMethod::kLsq;
  fit.items = data.items;
  fit.ratings.assign(data.size(), 0.0);
  fit.component = data.Components();
  const int n_components =
      data.size() == 0 ? 0 : *std::max_element(fit.component.begin(), fit.component.end()) + 1;
  fit.connected = n_components <= 1;
  fit.converged = true;

  double init_mean = 0.0;
  if (!options.initial_ratings.empty()) {
    for (const auto& [name, value] : options.initial_ratings) init_mean += value;
    init_mean /= static_cast<double>(options.initial_ratings.size());
  }
  for (int c = 0; c < n_components; ++c) {
    std::vector<int> members;
    for (int k = 0; k < data.size(); ++k) {
      if (fit.component[k] == c) members.push_back(k);
    }
    LsqProblem problem(n_components == 1 ? data : data.Subset(members), dist);
    Eigen::VectorXd start(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto it = options.initial_ratings.find(data.items[members[k]]);
      start[k] = it != options.initial_ratings.end() ? it->second : init_mean;
    }
    const LmResult lm = internal::LevenbergMarquardt(problem, start, options);
    for (std::size_t k = 0; k < members.size(); ++k) fit.ratings[members[k]] = lm.ratings[k];
    fit.objective_value += lm.objective;
    fit.iterations = std::max(fit.iterations, lm.iterations);
    fit.converged = fit.converged && lm.converged;
  }
  try {
    fit.draw_width = DrawWidthLsq(data, fit.ratings, dist);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUndefinedDrawWidth) throw;
    fit.draw_width = DrawWidth(0.0);
    fit.draw_width_defined = false;
  }
  return fit;
}

inline ModelFit LsqFit(std::span<const ComparisonRecord> records, const Distribution& dist,
                       const LsqOptions& options = {}) {
  return LsqFit(IndexedComparisons::Build(records), dist, options);
}

// Full three-outcome log-likelihood over aggregated pairs.
class LikelihoodProblem {
 public:
  LikelihoodProblem(IndexedComparisons data, Distribution dist)
      : data_(std::move(data)), dist_(dist) {}

  const IndexedComparisons& data() const { return data_; }

  double LogLikelihood(const Eigen::VectorXd& r, double t) const {
    double ll = 0.0;
    for (const auto& p : data_.pairs) {
      const double d = r[p.i] - r[p.j];
      if (p.wins_i > 0.0) ll += p.wins_i * LogCdf(dist_, d - t);
      if (p.wins_j > 0.0) ll += p.wins_j * LogCdf(dist_, -d - t);
      if (p.draws > 0.0) ll += p.draws * std::log(DrawProbability(d, t));
      if (ll == -std::numeric_limits<double>::infinity()) return ll;
    }
    return ll;
  }

  // Gradient of the log-likelihood with respect to (r, t); the last entry is
  // d/dt. Only meaningful for the differentiable families.
  Eigen::VectorXd Gradient(const Eigen::VectorXd& r, double t) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(r.size() + 1);
    double dt = 0.0;
    for (const auto& p : data_.pairs) {
      const double d = r[p.i] - r[p.j];
      double dd = 0.0;
      if (p.wins_i > 0.0) {
        const double h = LogCdfDerivative(dist_, d - t);
        dd += p.wins_i * h;
        dt -= p.wins_i * h;
      }
      if (p.wins_j > 0.0) {
        const double h = LogCdfDerivative(dist_, -d - t);
        dd -= p.wins_j * h;
        dt -= p.wins_j * h;
      }
      if (p.draws > 0.0) {
        const double prob = DrawProbability(d, t);
        const double upper = Pdf(dist_, d + t), lower = Pdf(dist_, d - t);
        dd += p.draws * (upper - lower) / prob;
        dt += p.draws * (upper + lower) / prob;
      }
      g[p.i] += dd;
      g[p.j] -= dd;
    }
    g[r.size()] = dt;
    return g;
  }

  double TotalDraws() const {
    double total = 0.0;
    for (const auto& p : data_.pairs) total += p.draws;
    return total;
  }

 private:
  // F(d+t) - F(d-t), evaluated in the tail nearer zero for accuracy.
  double DrawProbability(double d, double t) const {
    const double x = -std::abs(d);
    return Cdf(dist_, x + t) - Cdf(dist_, x - t);
  }

  IndexedComparisons data_;
  Distribution dist_;
};

// Items whose ratings diverge under maximum likelihood: members of source or
// sink components of the "did not lose to" digraph, other than the largest
// component (undefeated and winless items in the simplest case). Empty iff
// the likelihood has a finite maximizer on a connected graph.
inline std::vector<std::string> UnboundedItems(const IndexedComparisons& data) {
  const int n = data.size();
  std::vector<std::vector<int>> out_edges(n), in_edges(n);
  auto edge = [&](int from, int to) {
    out_edges[from].push_back(to);
    in_edges[to].push_back(from);
  };
  for (const auto& p : data.pairs) {
    if (p.wins_i > 0.0 || p.draws > 0.0) edge(p.i, p.j);
    if (p.wins_j > 0.0 || p.draws > 0.0) edge(p.j, p.i);
  }
  // Kosaraju.
  std::vector<int> order;
  std::vector<char> seen(n, 0);
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::pair<int, std::size_t>> stack{{s, 0}};
    seen[s] = 1;
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k < out_edges[v].size()) {
        const int w = out_edges[v][k++];
        if (!seen[w]) {
          seen[w] = 1;
          stack.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        stack.pop_back();
      }
    }
  }
  std::vector<int> scc(n, -1);
  int n_scc = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (scc[*it] >= 0) continue;
    std::vector<int> stack{*it};
    scc[*it] = n_scc;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : in_edges[v]) {
        if (scc[w] < 0) {
          scc[w] = n_scc;
          stack.push_back(w);
        }
      }
    }
    ++n_scc;
  }
  if (n_scc <= 1) return {};
  std::vector<char> has_in(n_scc, 0), has_out(n_scc, 0);
  for (int v = 0; v < n; ++v) {
    for (int w : out_edges[v]) {
      if (scc[v] != scc[w]) {
        has_out[scc[v]] = 1;
        has_in[scc[w]] = 1;
      }
    }
  }
  // The largest component is the reference scale; everything in a source or
  // sink component elsewhere drifts off relative to it.
  std::vector<int> scc_size(n_scc, 0);
  for (int v = 0; v < n; ++v) ++scc_size[scc[v]];
  const int reference = static_cast<int>(std::max_element(scc_size.begin(), scc_size.end()) - scc_size.begin());
  std::vector<std::string> unbounded;
  for (int v = 0; v < n; ++v) {
    if (scc[v] == reference) continue;
    if (!has_in[scc[v]] || !has_out[scc[v]]) unbounded.push_back(data.items[v]);
  }
  return unbounded;
}

struct MleOptions {
  bool warm_start = true;  // start from the least-squares solution
  optimize::BfgsOptions bfgs;
  optimize::NelderMeadOptions simplex;
};

// Maximum-likelihood ratings and draw width.
inline ModelFit MleFit(const IndexedComparisons& data, const Distribution& dist,
                       const MleOptions& options = {}) {
  dist.Validate();
  if (data.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two items");
  const std::vector<int> component = data.Components();
  if (*std::max_element(component.begin(), component.end()) > 0) {
    throw Error(ErrorCode::kDisconnectedGraph, "comparison graph is not connected");
  }
  if (dist.family != Family::kUniform) {
    const auto unbounded = UnboundedItems(data);
    if (!unbounded.empty()) {
      std::string list;
      for (const auto& item : unbounded) list += (list.empty() ? "" : ", ") + item;
      throw Error(ErrorCode::kUnboundedLikelihood, "ratings diverge for: " + list);
    }
  }
  const int n = data.size();
  LikelihoodProblem problem(data, dist);
  const bool has_draws = problem.TotalDraws() > 0.0;

  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(n);
  double t0 = has_draws ? 0.3 * dist.sigma : 0.0;
  ModelFit fit;
  fit.method = FitMethod::kMle;
  if (options.warm_start) {
    const ModelFit lsq = LsqFit(data, dist);
    r0 = Eigen::Map<const Eigen::VectorXd>(lsq.ratings.data(), n);
    if (has_draws) t0 = std::max(lsq.draw_width.value(), 1e-3 * dist.sigma);
    fit.method = FitMethod::kLsqThenMle;
  }

  fit.distribution = dist;
  fit.items = data.items;
  fit.component = component;

  if (dist.family == Family::kUniform) {
    if (!std::isfinite(problem.LogLikelihood(r0, t0))) {
      // Shrink the start until every observed outcome has positive
      // probability: with max |r_i - r_j| <= a/2 and t = a/4 all three
      // outcomes are possible. A tiny deterministic jitter breaks ties.
      const double a = dist.UniformHalfWidth();
      const double spread = r0.maxCoeff() - r0.minCoeff();
      if (spread > 0.5 * a) r0 *= 0.5 * a / spread;
      t0 = has_draws ? 0.25 * a : 0.0;
      for (int k = 0; k < n; ++k) r0[k] += 1e-6 * a * std::sin(1.0 + k);
    }
    Eigen::VectorXd x0(n + (has_draws ? 1 : 0));
    x0.head(n) = r0;
    if (has_draws) x0[n] = t0;
    auto objective = [&](const Eigen::VectorXd& x) {
      const double t = has_draws ? x[n] : 0.0;
      if (t < 0.0) return std::numeric_limits<double>::infinity();
      return -problem.LogLikelihood(x.head(n), t);
    };
    optimize::NelderMeadOptions nm = options.simplex;
    nm.initial_step = std::min(nm.initial_step, 0.1 * dist.sigma);
    const auto min = optimize::NelderMeadMinimize(objective, x0, nm);
    Eigen::VectorXd r = min.x.head(n);
    internal::CenterInPlace(r);
    fit.ratings.assign(r.data(), r.data() + n);
    fit.draw_width = DrawWidth(has_draws ? std::max(0.0, min.x[n]) : 0.0);
    fit.objective_value = -min.value;
    fit.converged = min.converged;
    fit.iterations = min.iterations;
    return fit;
  }

  // Differentiable families: BFGS over (r, log t). Without draws the
  // likelihood increases as t -> 0, so t is pinned at 0.
  Eigen::VectorXd x0(n + (has_draws ? 1 : 0));
  x0.head(n) = r0;
  if (has_draws) x0[n] = std::log(t0);
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const double t = has_draws ? std::exp(x[n]) : 0.0;
    const Eigen::VectorXd r = x.head(n);
    const double ll = problem.LogLikelihood(r, t);
    if (grad != nullptr) {
      grad->resize(x.size());
      if (!std::isfinite(ll)) {
        grad->setZero();
      } else {
        const Eigen::VectorXd g = problem.Gradient(r, t);
        grad->head(n) = -g.head(n);
        if (has_draws) (*grad)[n] = -g[n] * t;
      }
    }
    return -ll;
  };
  auto project = [n](Eigen::VectorXd& x) { x.head(n).array() -= x.head(n).mean(); };
  const auto min = optimize::BfgsMinimize(objective, x0, options.bfgs, project);
  fit.ratings.assign(min.x.data(), min.x.data() + n);
  fit.draw_width = DrawWidth(has_draws ? std::exp(min.x[n]) : 0.0);
  fit.objective_value = -min.value;
  fit.converged = min.converged;
  fit.iterations = min.iterations;
  return fit;
}

inline ModelFit MleFit(std::span<const ComparisonRecord> records, const Distribution& dist,
                       const MleOptions& options = {}) {
  return MleFit(IndexedComparisons::Build(records), dist, options);
}

// Log-likelihood of an existing fit on the given records.
inline double FitLogLikelihood(std::span<const ComparisonRecord> records, const ModelFit& fit) {
  const IndexedComparisons data = IndexedComparisons::Build(records);
  Eigen::VectorXd r(data.size());
  for (int k = 0; k < data.size(); ++k) r[k] = fit.RatingOf(data.items[k]);
  return LikelihoodProblem(data, fit.distribution).LogLikelihood(r, fit.draw_width.value());
}

// --- Direct assignment and origin calibration ------------------------------

enum class Grade { kStrongNegative, kWeakNegative, kNeutral, kWeakPositive, kStrongPositive };

inline double GradeValue(Grade grade) {
  switch (grade) {
    case Grade::kStrongNegative: return -1.0;
    case Grade::kWeakNegative: return -0.5;
    case Grade::kNeutral: return 0.0;
    case Grade::kWeakPositive: return 0.5;
    case Grade::kStrongPositive: return 1.0;
  }
  return 0.0;
}

// Accepts the symbolic tokens (words joined by '_', '-' or ' '), the short
// forms and the metric values.
inline Grade ParseGrade(std::string_view token) {
  if (token == "strong-" || token == "-1") return Grade::kStrongNegative;
  if (token == "weak-" || token == "-0.5") return Grade::kWeakNegative;
  if (token == "0") return Grade::kNeutral;
  if (token == "weak+" || token == "0.5") return Grade::kWeakPositive;
  if (token == "strong+" || token == "1") return Grade::kStrongPositive;
  std::string word(token);
  std::replace_if(word.begin(), word.end(), [](char c) { return c == ' ' || c == '-'; }, '_');
  if (word == "strong_negative") return Grade::kStrongNegative;
  if (word == "weak_negative") return Grade::kWeakNegative;
  if (word == "neutral") return Grade::kNeutral;
  if (word == "weak_positive") return Grade::kWeakPositive;
  if (word == "strong_positive") return Grade::kStrongPositive;
  throw Error(ErrorCode::kParse, "unknown grade '" + std::string(token) + "'");
}

inline std::string_view GradeName(Grade grade) {
  switch (grade) {
    case Grade::kStrongNegative: return "strong_negative";
    case Grade::kWeakNegative: return "weak_negative";
    case Grade::kNeutral: return "neutral";
    case Grade::kWeakPositive: return "weak_positive";
    case Grade::kStrongPositive: return "strong_positive";
  }
  return "neutral";
}

struct DirectScore {
  std::string item;
  double value = 0.0;  // in [-1, 1]
};

inline DirectScore DirectScoreAverage(std::string item, std::span<const Grade> grades) {
  if (grades.empty()) throw Error(ErrorCode::kInvalidArgument, "no grades for '" + item + "'");
  double sum = 0.0;
  for (Grade g : grades) sum += GradeValue(g);
  return {std::move(item), sum / static_cast<double>(grades.size())};
}

struct OriginCalibration {
  double shift = 0.0;           // rho
  double squared_error = 0.0;   // SE(rho)
  std::unordered_map<std::string, double> shifted;
};

// SE(rho) = sum over mismatched signs of (rho + r_i)^2. sign(0) matches any
// sign, so items with a zero direct score never contribute.
inline double OriginSquaredError(std::span<const double> ratings,
                                 std::span<const double> direct, double rho) {
  double se = 0.0;
  for (std::size_t k = 0; k < ratings.size(); ++k) {
    const double x = rho + ratings[k];
    if ((direct[k] > 0.0 && x < 0.0) || (direct[k] < 0.0 && x > 0.0)) se += x * x;
  }
  return se;
}

// Exact minimizer of SE(rho). SE is a convex piecewise quadratic with
// breakpoints at -r_i; each piece is minimized in closed form and among equal
// minima the shift closest to zero wins.
inline OriginCalibration CalibrateOrigin(const std::unordered_map<std::string, double>& ratings,
                                         std::span<const DirectScore> direct) {
  std::vector<double> r, d;
  for (const auto& ds : direct) {
    const auto it = ratings.find(ds.item);
    if (it == ratings.end()) continue;
    r.push_back(it->second);
    d.push_back(ds.value);
  }
  if (r.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no overlap between ratings and direct scores");
  }
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::kInvalidArgument, "direct scores carry no sign");
  }
  std::vector<double> breaks;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (d[k] != 0.0) breaks.push_back(-r[k]);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> candidates(breaks);
  for (std::size_t piece = 0; piece <= breaks.size(); ++piece) {
    const double lo = piece == 0 ? -kInf : breaks[piece - 1];
    const double hi = piece == breaks.size() ? kInf : breaks[piece];
    // Interior point identifies which terms are active on this piece.
    double probe;
    if (std::isinf(lo) && std::isinf(hi)) probe = 0.0;
    else if (std::isinf(lo)) probe = hi - 1.0;
    else if (std::isinf(hi)) probe = lo + 1.0;
    else probe = 0.5 * (lo + hi);
    double a = 0.0, b = 0.0;  // SE = a rho^2 + b rho + c on this piece
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double x = probe + r[k];
      if ((d[k] > 0.0 && x < 0.0) || (d[k] < 0.0 && x > 0.0)) {
        a += 1.0;
        b += 2.0 * r[k];
      }
    }
    if (a > 0.0) {
      candidates.push_back(std::clamp(-b / (2.0 * a), lo, hi));
    } else {
      candidates.push_back(std::clamp(0.0, lo, hi));
    }
  }
  OriginCalibration best;
  best.squared_error = kInf;
  best.shift = kInf;
  for (double rho : candidates) {
    if (!std::isfinite(rho)) continue;
    const double se = OriginSquaredError(r, d, rho);
    if (se < best.squared_error ||
        (se == best.squared_error && std::abs(rho) < std::abs(best.shift))) {
      best.squared_error = se;
      best.shift = rho;
    }
  }
  for (const auto& [item, value] : ratings) best.shifted[item] = value + best.shift;
  return best;
}

// Returns a copy of `fit` with the origin shift applied to every rating.
inline ModelFit ApplyOrigin(ModelFit fit, double shift) {
  for (double& r : fit.ratings) r += shift;
  fit.origin_shift += shift;
  fit.calibrated = true;
  return fit;
}

}  // namespace pairrank

#endif  // PAIRRANK_ESTIMATE_JOINT_H_
