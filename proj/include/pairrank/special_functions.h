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

// Regularized incomplete gamma functions and the chi-square distribution.

#ifndef PAIRRANK_SPECIAL_FUNCTIONS_H_
#define PAIRRANK_SPECIAL_FUNCTIONS_H_

#include <cmath>
#include <limits>
#include <numbers>

#include "pairrank/error.h"

namespace pairrank::special {

namespace internal {

inline double LogPrefactor(double a, double x) {
  return a * std::log(x) - x - std::lgamma(a);
}

}  // namespace internal

// P(a, x) by its power series. Converges for all x >= 0, fastest for x < a+1.
inline double GammaPSeries(double a, double x) {
  if (x <= 0.0) return 0.0;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 100000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return std::exp(internal::LogPrefactor(a, x)) * sum;
}

// Q(a, x) by its continued fraction (modified Lentz). Converges for x > 0,
// fastest for x > a+1.
inline double GammaQContinuedFraction(double a, double x) {
  if (x <= 0.0) return 1.0;
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(internal::LogPrefactor(a, x)) * h;
}

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
inline double GammaQ(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "GammaQ requires a > 0, x >= 0");
  }
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - GammaPSeries(a, x);
  return GammaQContinuedFraction(a, x);
}

inline double GammaP(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "GammaP requires a > 0, x >= 0");
  }
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return GammaPSeries(a, x);
  return 1.0 - GammaQContinuedFraction(a, x);
}

// P(X > x) for X ~ chi-square(dof).
inline double ChiSquareSurvival(double x, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dof must be positive");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  return GammaQ(0.5 * dof, 0.5 * x);
}

// x with P(X > x) = upper_tail for X ~ chi-square(dof).
inline double ChiSquareInverseSurvival(double upper_tail, double dof) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tail probability must lie in (0, 1)");
  }
  double lo = 0.0, hi = std::max(1.0, dof);
  while (ChiSquareSurvival(hi, dof) > upper_tail) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ChiSquareSurvival(mid, dof) > upper_tail) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double StandardNormalCdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// 1 - Phi(z) without cancellation.
inline double StandardNormalSurvival(double z) {
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

}  // namespace pairrank::special

#endif  // PAIRRANK_SPECIAL_FUNCTIONS_H_
