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

// General-purpose numeric optimizers used by the estimators: Brent's 1-D
// minimizer, monotone root bracketing, BFGS with a Wolfe line search, and an
// adaptive Nelder-Mead simplex.

#ifndef PAIRRANK_OPTIMIZE_H_
#define PAIRRANK_OPTIMIZE_H_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pairrank::optimize {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
  int evaluations = 0;
};

// Brent's method for a unimodal function on [lo, hi]. Non-finite values are
// treated as +inf.
template <typename Fn>
ScalarMinimum BrentMinimize(Fn&& fn, double lo, double hi, double abs_tol = 1e-8,
                            int max_iterations = 500) {
  constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2
  auto eval = [&fn](double x) {
    const double v = fn(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  double a = lo, b = hi;
  double x = a + kGolden * (b - a);
  double w = x, v = x;
  double fx = eval(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evaluations = 1;
  for (int iter = 0; iter < max_iterations; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = abs_tol / 3.0 + 1e-12 * std::abs(x);
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1 && std::isfinite(fx) && std::isfinite(fw) && std::isfinite(fv)) {
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_prev = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = x < mid ? tol1 : -tol1;
        golden = false;
      }
    }
    if (golden) {
      e = (x >= mid ? a : b) - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + (d > 0.0 ? tol1 : -tol1);
    const double fu = eval(u);
    ++evaluations;
    if (fu <= fx) {
      if (u >= x) a = x; else b = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evaluations};
}

// Smallest x in [lo, hi] with fn(x) >= target, for nondecreasing fn. Returns
// hi when fn(hi) < target.
template <typename Fn>
double LowerCrossing(Fn&& fn, double target, double lo, double hi, double abs_tol = 1e-10) {
  if (fn(lo) >= target) return lo;
  if (fn(hi) < target) return hi;
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) >= target) hi = mid; else lo = mid;
  }
  return hi;
}

// Largest x in [lo, hi] with fn(x) <= target, for nondecreasing fn. Returns lo
// when fn(lo) > target.
template <typename Fn>
double UpperCrossing(Fn&& fn, double target, double lo, double hi, double abs_tol = 1e-10) {
  if (fn(hi) <= target) return hi;
  if (fn(lo) > target) return lo;
  while (hi - lo > abs_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (fn(mid) <= target) lo = mid; else hi = mid;
  }
  return lo;
}

struct VectorMinimum {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

struct BfgsOptions {
  int max_iterations = 2000;
  double gradient_tol = 1e-8;      // max-norm of the gradient
  double relative_value_tol = 1e-14;
};

// Objective: double(const VectorXd& x, VectorXd* gradient). May return +inf
// (outside the domain); the line search backs off from such points.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

namespace internal {

struct LinePoint {
  double step;
  double value;
  double slope;
  Eigen::VectorXd gradient;
};

// Strong-Wolfe line search (bracketing + zoom by safeguarded interpolation).
inline bool WolfeSearch(const Objective& fn, const Eigen::VectorXd& x, double f0,
                        double slope0, const Eigen::VectorXd& dir, double initial_step,
                        LinePoint* out, int* evaluations) {
  constexpr double kC1 = 1e-4;
  constexpr double kC2 = 0.9;
  auto eval = [&](double step) {
    LinePoint p;
    p.step = step;
    p.gradient.resize(x.size());
    p.value = fn(x + step * dir, &p.gradient);
    ++*evaluations;
    p.slope = std::isfinite(p.value) ? p.gradient.dot(dir)
                                     : std::numeric_limits<double>::infinity();
    if (!std::isfinite(p.value)) p.value = std::numeric_limits<double>::infinity();
    return p;
  };
  auto zoom = [&](LinePoint lo, LinePoint hi) {
    for (int i = 0; i < 60; ++i) {
      double trial = 0.5 * (lo.step + hi.step);
      if (std::isfinite(hi.value) && std::isfinite(lo.slope)) {
        // Quadratic interpolation from lo (value, slope) and hi (value).
        const double d = hi.step - lo.step;
        const double denom = 2.0 * (hi.value - lo.value - lo.slope * d);
        if (denom > 0.0) {
          const double q = lo.step - lo.slope * d * d / denom;
          const double a = std::min(lo.step, hi.step), b = std::max(lo.step, hi.step);
          if (q > a + 0.1 * (b - a) && q < b - 0.1 * (b - a)) trial = q;
        }
      }
      LinePoint p = eval(trial);
      if (p.value > f0 + kC1 * trial * slope0 || p.value >= lo.value) {
        hi = std::move(p);
      } else {
        if (std::abs(p.slope) <= -kC2 * slope0) {
          *out = std::move(p);
          return true;
        }
        if (p.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = std::move(p);
      }
      if (std::abs(hi.step - lo.step) < 1e-16 * std::max(1.0, lo.step)) break;
    }
    // Accept any sufficient decrease found.
    if (lo.step > 0.0 && lo.value < f0) {
      *out = std::move(lo);
      return true;
    }
    return false;
  };

  LinePoint prev{0.0, f0, slope0, Eigen::VectorXd()};
  double step = initial_step;
  for (int i = 0; i < 50; ++i) {
    LinePoint p = eval(step);
    if (p.value > f0 + kC1 * step * slope0 || (i > 0 && p.value >= prev.value)) {
      return zoom(std::move(prev), std::move(p));
    }
    if (std::abs(p.slope) <= -kC2 * slope0) {
      *out = std::move(p);
      return true;
    }
    if (p.slope >= 0.0) return zoom(std::move(p), std::move(prev));
    prev = std::move(p);
    step *= 2.0;
  }
  return false;
}

}  // namespace internal

// Quasi-Newton minimization with the BFGS inverse-Hessian update. `project`
// (optional) maps each accepted iterate onto an equivalent representative,
// e.g. to fix a gauge; it must not change the objective value.
inline VectorMinimum BfgsMinimize(const Objective& fn, Eigen::VectorXd x,
                                  const BfgsOptions& options = {},
                                  const std::function<void(Eigen::VectorXd&)>& project = {}) {
  const Eigen::Index n = x.size();
  VectorMinimum result;
  Eigen::VectorXd grad(n);
  double value = fn(x, &grad);
  result.evaluations = 1;
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int stalls = 0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    result.iterations = iter;
    if (!std::isfinite(value)) break;
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tol) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd dir = -inv_hessian * grad;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }
    const double initial_step = scaled ? 1.0 : std::min(1.0, 1.0 / grad.lpNorm<Eigen::Infinity>());
    internal::LinePoint point;
    if (!internal::WolfeSearch(fn, x, value, slope, dir, initial_step, &point,
                               &result.evaluations)) {
      if (inv_hessian.isIdentity()) break;
      inv_hessian.setIdentity();
      scaled = false;
      continue;
    }
    const Eigen::VectorXd s = point.step * dir;
    const Eigen::VectorXd y = point.gradient - grad;
    const double previous = value;
    x += s;
    value = point.value;
    grad = point.gradient;
    if (project) project(x);
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inv_hessian *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      inv_hessian += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
                     rho * (hy * s.transpose() + s * hy.transpose());
    }
    if (std::abs(previous - value) <=
        options.relative_value_tol * std::max(1.0, std::abs(value))) {
      if (++stalls >= 3) {
        result.converged = true;
        result.iterations = iter + 1;
        break;
      }
    } else {
      stalls = 0;
    }
    result.iterations = iter + 1;
  }
  result.x = std::move(x);
  result.value = value;
  return result;
}

struct NelderMeadOptions {
  int max_evaluations = 200000;
  double value_tol = 1e-10;   // spread of simplex values
  double size_tol = 1e-8;     // max vertex distance from the best vertex
  double initial_step = 0.05;
};

// Adaptive Nelder-Mead (dimension-dependent coefficients). Non-finite values
// are treated as +inf.
inline VectorMinimum NelderMeadMinimize(
    const std::function<double(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& start,
    const NelderMeadOptions& options = {}) {
  const Eigen::Index n = start.size();
  const double dim = static_cast<double>(n);
  const double alpha = 1.0;
  const double gamma = n > 1 ? 1.0 + 2.0 / dim : 2.0;
  const double rho = n > 1 ? 0.75 - 1.0 / (2.0 * dim) : 0.5;
  const double shrink = n > 1 ? 1.0 - 1.0 / dim : 0.5;

  VectorMinimum result;
  auto eval = [&](const Eigen::VectorXd& p) {
    ++result.evaluations;
    const double v = fn(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[i + 1][i] += options.initial_step;
  }
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<Eigen::Index> order(n + 1);
  while (result.evaluations < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    const Eigen::Index best = order.front(), worst = order.back(),
                       second_worst = order[n - 1];
    double size = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      size = std::max(size, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    }
    if (std::isfinite(values[worst]) && values[worst] - values[best] <= options.value_tol &&
        size <= options.size_tol) {
      result.converged = true;
      break;
    }
    if (size <= 1e-15) break;
    ++result.iterations;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= dim;
    const Eigen::VectorXd reflected = centroid + alpha * (centroid - simplex[worst]);
    const double f_reflected = eval(reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
      const double f_expanded = eval(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + rho * (reflected - centroid))
                : Eigen::VectorXd(centroid + rho * (simplex[worst] - centroid));
    const double f_contracted = eval(contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  result.x = simplex[best_it - values.begin()];
  result.value = *best_it;
  return result;
}

}  // namespace pairrank::optimize

#endif  // PAIRRANK_OPTIMIZE_H_
