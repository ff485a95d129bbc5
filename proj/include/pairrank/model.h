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

// Three-outcome paired-comparison model.
//
// Item i with latent rating r_i is judged against item j. With F the CDF of a
// zero-symmetric variable and t >= 0 the draw width:
//
//   P(i beats j)    = F(r_i - r_j - t)
//   P(draw)         = F(r_i - r_j + t) - F(r_i - r_j - t)
//   P(j beats i)    = F(r_j - r_i - t)
//
// F is parameterized by its standard deviation sigma for every family, so the
// three families are directly comparable:
//   normal    N(0, sigma^2)                     (Thurstone)
//   logistic  scale s = sigma * sqrt(3) / pi    (Bradley-Terry)
//   uniform   support [-a, a], a = sigma * sqrt(3)

#ifndef PAIRRANK_MODEL_H_
#define PAIRRANK_MODEL_H_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "pairrank/error.h"

namespace pairrank {

enum class Family { kNormal, kLogistic, kUniform };

inline constexpr double kDefaultSigma = 1.0 / 3.0;

inline std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kNormal: return "normal";
    case Family::kLogistic: return "logistic";
    case Family::kUniform: return "uniform";
  }
  return "unknown";
}

inline Family ParseFamily(std::string_view name) {
  if (name == "normal") return Family::kNormal;
  if (name == "logistic") return Family::kLogistic;
  if (name == "uniform") return Family::kUniform;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown distribution family '" + std::string(name) + "'");
}

struct Distribution {
  Family family = Family::kLogistic;
  double sigma = kDefaultSigma;

  void Validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
    }
  }

  // Native scale of each family.
  double LogisticScale() const { return sigma * std::numbers::sqrt3 / std::numbers::pi; }
  double UniformHalfWidth() const { return sigma * std::numbers::sqrt3; }
};

// Nonnegative draw width in rating units.
class DrawWidth {
 public:
  constexpr DrawWidth() = default;
  explicit DrawWidth(double value) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidArgument, "draw width must be finite and >= 0");
    }
  }
  constexpr double value() const { return value_; }

 private:
  double value_ = 0.0;
};

inline double Cdf(const Distribution& dist, double x) {
  switch (dist.family) {
    case Family::kNormal:
      return 0.5 * std::erfc(-x / (dist.sigma * std::numbers::sqrt2));
    case Family::kLogistic: {
      const double z = x / dist.LogisticScale();
      // Evaluate on the side where exp() cannot overflow.
      if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
      const double e = std::exp(z);
      return e / (1.0 + e);
    }
    case Family::kUniform: {
      const double a = dist.UniformHalfWidth();
      return std::clamp((x + a) / (2.0 * a), 0.0, 1.0);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// F'(x). The uniform density takes its interior value on the support boundary.
inline double Pdf(const Distribution& dist, double x) {
  switch (dist.family) {
    case Family::kNormal: {
      const double z = x / dist.sigma;
      return std::exp(-0.5 * z * z) / (dist.sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    case Family::kLogistic: {
      const double s = dist.LogisticScale();
      const double e = std::exp(-std::abs(x) / s);
      return e / (s * (1.0 + e) * (1.0 + e));
    }
    case Family::kUniform: {
      const double a = dist.UniformHalfWidth();
      return std::abs(x) <= a ? 1.0 / (2.0 * a) : 0.0;
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// log F(x), accurate far into the lower tail. -inf where F(x) == 0.
inline double LogCdf(const Distribution& dist, double x) {
  switch (dist.family) {
    case Family::kNormal: {
      const double z = x / dist.sigma;
      if (z > -30.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
      // Asymptotic Mills-ratio expansion.
      const double z2 = z * z;
      return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
             std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
    }
    case Family::kLogistic: {
      const double z = x / dist.LogisticScale();
      if (z >= 0.0) return -std::log1p(std::exp(-z));
      return z - std::log1p(std::exp(z));
    }
    case Family::kUniform:
      return std::log(Cdf(dist, x));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// F'(x) / F(x), the derivative of log F.
inline double LogCdfDerivative(const Distribution& dist, double x) {
  switch (dist.family) {
    case Family::kNormal: {
      const double z = x / dist.sigma;
      if (z > -30.0) return Pdf(dist, x) / Cdf(dist, x);
      // phi(z)/Phi(z) ~ -z (1 + 1/z^2 ...)^-1 for z -> -inf.
      const double z2 = z * z;
      return (-z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2))) / dist.sigma;
    }
    case Family::kLogistic:
      return (1.0 - Cdf(dist, x)) / dist.LogisticScale();
    case Family::kUniform: {
      const double f = Cdf(dist, x);
      return f > 0.0 ? Pdf(dist, x) / f : std::numeric_limits<double>::infinity();
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

struct OutcomeProbabilities {
  double p_win = 0.0;
  double p_draw = 0.0;
  double p_loss = 0.0;
};

// Probabilities that item i (rating r_i) beats, draws with, or loses to item j.
// Never clamped away from zero; the uniform family yields exact zeros.
inline OutcomeProbabilities ComputeOutcomeProbabilities(const Distribution& dist,
                                                        double r_i, double r_j,
                                                        DrawWidth t) {
  const double diff = r_i - r_j;
  const double lower = Cdf(dist, diff - t.value());
  OutcomeProbabilities p;
  p.p_win = lower;
  p.p_draw = Cdf(dist, diff + t.value()) - lower;
  p.p_loss = Cdf(dist, (r_j - r_i) - t.value());
  return p;
}

}  // namespace pairrank

#endif  // PAIRRANK_MODEL_H_
