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

// Adaptive insertion of a new item into a rated set with a fixed budget of m
// comparisons per fold.
//
// Each fold runs a binary search over the anchors sorted by rating: the pivot
// is the midpoint of the open bracket (lo, hi), optionally perturbed by a small
// random index offset. A win (score > 1/2) moves lo up to the pivot; a draw or
// a loss moves hi down. When the bracket closes, the remaining budget is spent
// on the unused anchors whose ratings are closest to (q_lo + q_hi) / 2. After
// all folds the rating is estimated from every collected outcome.
//
// Anchor positions are 0-based indices into the sorted anchor list.

#ifndef PAIRRANK_ADAPTIVE_H_
#define PAIRRANK_ADAPTIVE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pairrank/error.h"
#include "pairrank/estimate_single.h"
#include "pairrank/model.h"
#include "pairrank/random.h"

namespace pairrank {

struct Anchor {
  std::string item;
  double rating = 0.0;
};

enum class Phase { kSearching, kFilling, kDone };

inline std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kSearching: return "searching";
    case Phase::kFilling: return "filling";
    case Phase::kDone: return "done";
  }
  return "done";
}

inline constexpr int kDefaultComparisons = 18;

struct InsertionOptions {
  int comparisons = kDefaultComparisons;  // m, per fold
  int folds = 1;
  int pivot_jitter = 0;
  std::uint64_t seed = 0;
};

// ceil(log2(n)): comparisons the search phase may need on n anchors.
inline int SearchDepth(std::size_t n) {
  int depth = 0;
  while ((std::size_t{1} << depth) < n) ++depth;
  return depth;
}

class InsertionSession {
 public:
  InsertionSession(std::string new_item, std::vector<Anchor> anchors, InsertionOptions options)
      : new_item_(std::move(new_item)), anchors_(std::move(anchors)), options_(options) {
    if (anchors_.size() < 2) {
      throw Error(ErrorCode::kInsufficientAnchors, "need at least two anchors");
    }
    if (options_.comparisons < 1 || options_.folds < 1 || options_.pivot_jitter < 0) {
      throw Error(ErrorCode::kInvalidArgument, "comparisons and folds must be >= 1, jitter >= 0");
    }
    if (static_cast<std::size_t>(options_.comparisons) > anchors_.size()) {
      throw Error(ErrorCode::kInsufficientAnchors,
                  "budget m=" + std::to_string(options_.comparisons) + " exceeds the " +
                      std::to_string(anchors_.size()) + " available anchors");
    }
    std::stable_sort(anchors_.begin(), anchors_.end(), [](const Anchor& a, const Anchor& b) {
      return a.rating != b.rating ? a.rating < b.rating : a.item < b.item;
    });
    StartFold();
  }

  const std::string& new_item() const { return new_item_; }
  const std::vector<Anchor>& anchors() const { return anchors_; }
  const InsertionOptions& options() const { return options_; }
  Phase phase() const { return phase_; }
  int fold() const { return fold_; }
  std::size_t lower() const { return lo_; }
  std::size_t upper() const { return hi_; }
  // Comparisons spent in the search phase of the current (or last) fold.
  int search_comparisons() const { return search_used_; }
  int comparisons_used() const { return static_cast<int>(collected_.size()); }
  int budget() const { return options_.comparisons * options_.folds; }
  const std::vector<AnchorOutcome>& collected() const { return collected_; }
  // Anchor index of every recorded comparison, in order.
  const std::vector<std::size_t>& queried() const { return queried_; }

  // Binary-search pivot awaiting an outcome.
  std::size_t NextPivot() const {
    if (phase_ != Phase::kSearching) {
      throw Error(ErrorCode::kOutOfOrder, "no pivot outside the search phase");
    }
    return pending_;
  }

  // Anchor index of the next comparison in either phase.
  std::size_t NextQuery() const {
    switch (phase_) {
      case Phase::kSearching: return pending_;
      case Phase::kFilling: return fill_[fill_pos_];
      case Phase::kDone: break;
    }
    throw Error(ErrorCode::kOutOfOrder, "session is complete");
  }

  const Anchor& NextAnchor() const { return anchors_[NextQuery()]; }

  // Records the new item's outcome against the anchor at `anchor_index`, which
  // must be the pending query.
  void RecordOutcome(std::size_t anchor_index, Outcome outcome) {
    if (phase_ == Phase::kDone) throw Error(ErrorCode::kOutOfOrder, "session is complete");
    const std::size_t expected = NextQuery();
    if (anchor_index != expected) {
      throw Error(ErrorCode::kOutOfOrder, "outcome for anchor " + std::to_string(anchor_index) +
                                              " but pending query is " + std::to_string(expected));
    }
    collected_.push_back({anchors_[anchor_index].rating, outcome});
    queried_.push_back(anchor_index);
    used_[anchor_index] = 1;
    if (phase_ == Phase::kSearching) {
      ++search_used_;
      if (ScoreOf(outcome) > 0.5) lo_ = anchor_index; else hi_ = anchor_index;
      if (hi_ - lo_ <= 1 || search_used_ >= options_.comparisons) {
        EnterFilling();
      } else {
        ChoosePivot();
      }
      return;
    }
    if (++fill_pos_ >= fill_.size()) FinishFold();
  }

  // Anchors selected for the fill phase of the current fold (including those
  // already answered).
  const std::vector<std::size_t>& FillCandidates() const {
    if (phase_ != Phase::kFilling) {
      throw Error(ErrorCode::kOutOfOrder, "fill candidates exist only in the fill phase");
    }
    return fill_;
  }

  // First guess (q_lo + q_hi) / 2 of the current fold.
  double FirstGuess() const { return 0.5 * (anchors_[lo_].rating + anchors_[hi_].rating); }

  SingleEstimate Finalize(const Distribution& dist, DrawWidth t,
                          SingleMethod method = SingleMethod::kMoments) const {
    if (phase_ != Phase::kDone) {
      throw Error(ErrorCode::kOutOfOrder, "queued comparisons are still unanswered");
    }
    return EstimateSingle(collected_, dist, t, method);
  }

 private:
  void StartFold() {
    lo_ = 0;
    hi_ = anchors_.size() - 1;
    used_.assign(anchors_.size(), 0);
    search_used_ = 0;
    fill_.clear();
    fill_pos_ = 0;
    rng_ = StreamFor(options_.seed, {static_cast<std::uint64_t>(fold_)});
    phase_ = Phase::kSearching;
    if (hi_ - lo_ <= 1) {
      EnterFilling();
    } else {
      ChoosePivot();
    }
  }

  void ChoosePivot() {
    const std::size_t mid = (lo_ + hi_) / 2;
    long long pivot = static_cast<long long>(mid);
    if (options_.pivot_jitter > 0) {
      std::uniform_int_distribution<int> offset(-options_.pivot_jitter, options_.pivot_jitter);
      pivot += offset(rng_);
    }
    pending_ = static_cast<std::size_t>(std::clamp<long long>(
        pivot, static_cast<long long>(lo_) + 1, static_cast<long long>(hi_) - 1));
  }

  void EnterFilling() {
    phase_ = Phase::kFilling;
    const double guess = FirstGuess();
    std::vector<std::size_t> unused;
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
      if (!used_[k]) unused.push_back(k);
    }
    const std::size_t wanted = static_cast<std::size_t>(options_.comparisons - search_used_);
    if (unused.size() < wanted) {
      throw Error(ErrorCode::kInsufficientAnchors, "too few unused anchors for the fill phase");
    }
    std::stable_sort(unused.begin(), unused.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(anchors_[a].rating - guess) < std::abs(anchors_[b].rating - guess);
    });
    fill_.assign(unused.begin(), unused.begin() + static_cast<std::ptrdiff_t>(wanted));
    fill_pos_ = 0;
    if (fill_.empty()) FinishFold();
  }

  void FinishFold() {
    if (++fold_ < options_.folds) {
      StartFold();
    } else {
      phase_ = Phase::kDone;
    }
  }

  std::string new_item_;
  std::vector<Anchor> anchors_;
  InsertionOptions options_;
  Phase phase_ = Phase::kSearching;
  int fold_ = 0;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
  std::size_t pending_ = 0;
  int search_used_ = 0;
  std::vector<char> used_;
  std::vector<std::size_t> fill_;
  std::size_t fill_pos_ = 0;
  std::vector<AnchorOutcome> collected_;
  std::vector<std::size_t> queried_;
  std::mt19937_64 rng_;
};

}  // namespace pairrank

#endif  // PAIRRANK_ADAPTIVE_H_
