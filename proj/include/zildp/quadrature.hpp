// Copyright 2026 The zildp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace zildp {

struct LaguerreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// L_n and L_{n-1} at x by the three-term recurrence.
inline std::array<double, 2> laguerre_pair(int n, double x) {
  double prev = 1.0;
  double cur = 1.0 - x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

// Golub-Welsch eigenvalues of the Jacobi matrix, polished by Newton steps on
// L_n; weights from w_i = x_i / ((n + 1) L_{n+1}(x_i))^2.
inline LaguerreRule build_laguerre_rule(int n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    jacobi(i, i) = 2.0 * i + 1.0;
    if (i + 1 < n) {
      jacobi(i, i + 1) = i + 1.0;
      jacobi(i + 1, i) = i + 1.0;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      jacobi, Eigen::EigenvaluesOnly);
  LaguerreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    for (int iter = 0; iter < 4; ++iter) {
      const auto [ln, lnm1] = laguerre_pair(n, x);
      const double deriv = n * (ln - lnm1) / x;
      if (!std::isfinite(deriv) || deriv == 0.0) break;
      const double step = ln / deriv;
      x -= step;
      if (std::fabs(step) <= 1e-16 * x) break;
    }
    const double lnp1 = laguerre_pair(n + 1, x)[0];
    const double denom = (n + 1.0) * lnp1;
    const double w = x / (denom * denom);
    rule.nodes[i] = x;
    rule.weights[i] = std::isfinite(w) ? w : 0.0;
  }
  return rule;
}

}  // namespace detail

// Cached rules of order 32, 64, 128 and 256.
inline const LaguerreRule& laguerre_rule(int order) {
  static const std::array<LaguerreRule, 4> rules = {
      detail::build_laguerre_rule(32), detail::build_laguerre_rule(64),
      detail::build_laguerre_rule(128), detail::build_laguerre_rule(256)};
  switch (order) {
    case 32: return rules[0];
    case 64: return rules[1];
    case 128: return rules[2];
    default: return rules[3];
  }
}

struct QuadratureResult {
  double value = 0.0;
  int evaluations = 0;
  // False when the Laguerre orders disagreed and the log-scale trapezoid
  // produced the value.
  bool laguerre = true;
};

template <class F>
double apply_laguerre(const LaguerreRule& rule, F& g) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    if (rule.weights[i] == 0.0) continue;
    sum += rule.weights[i] * g(rule.nodes[i]);
  }
  return sum;
}

// Trapezoid rule on t = log w for the integral of g(w) e^{-w} over (0, inf).
// The transformed integrand g(e^t) exp(t - e^t) decays at least
// exponentially in both directions, so the trapezoid sum converges
// geometrically in the step. `scale_hint` marks where g changes on the w
// axis; the grid extends 16 units below its logarithm.
template <class F>
QuadratureResult integrate_exp_weight_logscale(F&& g, double scale_hint,
                                               double rel_tol = 1e-12) {
  const double t_hi = std::log(750.0);
  double t_lo = -80.0;
  if (scale_hint > 0.0 && std::isfinite(scale_hint)) {
    t_lo = std::min(t_lo, std::log(scale_hint) - 16.0);
  }
  auto term = [&](double t) {
    const double w = std::exp(t);
    if (w == 0.0) return 0.0;
    const double v = g(w);
    if (v == 0.0) return 0.0;
    return v * std::exp(t - w);
  };
  QuadratureResult out;
  out.laguerre = false;
  double h = 0.5;
  const int base = static_cast<int>(std::ceil((t_hi - t_lo) / h));
  h = (t_hi - t_lo) / base;
  double sum = 0.5 * (term(t_lo) + term(t_hi));
  for (int k = 1; k < base; ++k) sum += term(t_lo + k * h);
  out.evaluations = base + 1;
  double estimate = sum * h;
  for (int level = 0; level < 7; ++level) {
    const int count = base << level;
    double added = 0.0;
    for (int k = 0; k < count; ++k) added += term(t_lo + (k + 0.5) * h);
    out.evaluations += count;
    sum += added;
    h *= 0.5;
    const double refined = sum * h;
    const double change = std::fabs(refined - estimate);
    estimate = refined;
    if (level >= 1 && change <= rel_tol * std::fabs(refined)) break;
    if (level >= 1 && change == 0.0) break;
  }
  out.value = estimate;
  return out;
}

// Integral of g(w) e^{-w} over (0, inf). Gauss-Laguerre with order doubling
// 32 -> 64 -> 128 until two successive orders agree to `rel_tol`; when they
// do not (mass concentrated near w = 0, where Laguerre nodes are sparse) the
// log-scale trapezoid takes over. A small `scale_hint` goes there directly.
template <class F>
QuadratureResult integrate_exp_weight(F&& g, double scale_hint = 1.0,
                                      double rel_tol = 1e-12) {
  // Features narrower than the first 128-point node (about 0.011) are
  // invisible to every order, which would then agree on a wrong value.
  if (scale_hint < 0.02) {
    return integrate_exp_weight_logscale(g, scale_hint, rel_tol);
  }
  QuadratureResult out;
  double previous = apply_laguerre(laguerre_rule(32), g);
  out.evaluations = 32;
  for (int order : {64, 128}) {
    const double current = apply_laguerre(laguerre_rule(order), g);
    out.evaluations += order;
    if (std::fabs(current - previous) <= rel_tol * std::fabs(current)) {
      out.value = current;
      return out;
    }
    previous = current;
  }
  QuadratureResult fallback =
      integrate_exp_weight_logscale(g, scale_hint, rel_tol);
  fallback.evaluations += out.evaluations;
  return fallback;
}

}  // namespace zildp
