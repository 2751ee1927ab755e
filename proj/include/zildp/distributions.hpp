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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "zildp/error.hpp"
#include "zildp/linalg.hpp"
#include "zildp/quadrature.hpp"
#include "zildp/rng.hpp"
#include "zildp/special.hpp"

namespace zildp {

// Parameters of ZIL(zero_mass, scale^2 I): each noise vector is exactly zero
// with probability zero_mass, otherwise an SL draw with per-coordinate
// variance scale^2.
struct NoiseParams {
  double zero_mass = 0.0;
  double scale = 0.0;

  void validate() const {
    if (!(zero_mass > 0.0 && zero_mass < 1.0)) {
      throw ParameterError("zero_mass must lie in (0, 1), got " +
                           std::to_string(zero_mass));
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw ParameterError("scale must be positive and finite, got " +
                           std::to_string(scale));
    }
  }
};

// One SL_d(variance * I) draw written into `out`: sqrt(W) * N(0, variance I)
// with W ~ Exp(1).
inline void draw_sl(RngStream& rng, double variance, std::span<double> out) {
  const double radius = std::sqrt(rng.exponential() * variance);
  for (double& v : out) v = radius * rng.normal();
}

inline Matrix sample_sl(int d, double variance, int n, RngStream& rng) {
  detail::require(d >= 1, "sample_sl: dimension must be >= 1");
  detail::require(n >= 1, "sample_sl: count must be >= 1");
  detail::require(variance > 0.0 && std::isfinite(variance),
                  "sample_sl: variance must be positive");
  Matrix out(n, d);
  for (int i = 0; i < n; ++i) {
    draw_sl(rng, variance, std::span<double>(out.row(i).data(), d));
  }
  return out;
}

// One ZIL draw; returns true when the zero event occurred.
inline bool draw_zil(RngStream& rng, const NoiseParams& params,
                     std::span<double> out) {
  if (rng.bernoulli(params.zero_mass)) {
    for (double& v : out) v = 0.0;
    return true;
  }
  draw_sl(rng, params.scale * params.scale, out);
  return false;
}

inline Matrix sample_zil(int d, const NoiseParams& params, int n,
                         RngStream& rng) {
  params.validate();
  detail::require(d >= 1, "sample_zil: dimension must be >= 1");
  detail::require(n >= 1, "sample_zil: count must be >= 1");
  Matrix out(n, d);
  for (int i = 0; i < n; ++i) {
    draw_zil(rng, params, std::span<double>(out.row(i).data(), d));
  }
  return out;
}

// Log density of SL_d(variance * I) at x, computed from the normal scale
// mixture  int_0^inf (2 pi w v)^{-d/2} exp(-|x|^2 / (2 w v)) e^{-w} dw.
// The density is unbounded at x = 0 when d >= 2.
inline double sl_log_density(std::span<const double> x, double variance) {
  detail::require(variance > 0.0 && std::isfinite(variance),
                  "sl_log_density: variance must be positive");
  const auto d = static_cast<double>(x.size());
  detail::require(!x.empty(), "sl_log_density: empty point");
  double r2 = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw ParameterError("sl_log_density: non-finite x");
    r2 += v * v;
  }
  if (r2 == 0.0 && x.size() >= 2) {
    throw DomainError(
        "sl_log_density: the SL density is singular at x = 0 for d >= 2");
  }
  const double s = r2 / (2.0 * variance);
  // The integrand peaks near the maximiser of -(d/2) log w - s/w - w; the
  // shift keeps g(w) representable for large |x|.
  const double peak = 0.5 * (-0.5 * d + std::sqrt(0.25 * d * d + 4.0 * s));
  const double shift = std::sqrt(2.0 * s);
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * variance);
  auto g = [&](double w) {
    return std::exp(-0.5 * d * std::log(w) - s / w + shift);
  };
  const double hint = peak > 0.0 ? peak : 1.0;
  const QuadratureResult q = integrate_exp_weight(g, hint);
  return log_norm + std::log(q.value) - shift;
}

inline double sl_log_density(const Vector& x, double variance) {
  return sl_log_density(std::span<const double>(x.data(), x.size()), variance);
}

// Standard Laplace L(1).
inline double laplace_cdf(double t) {
  return t < 0.0 ? 0.5 * std::exp(t) : 1.0 - 0.5 * std::exp(-t);
}

inline double laplace_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw ParameterError("laplace_quantile: p must lie in (0, 1)");
  }
  return p < 0.5 ? std::log(2.0 * p) : -std::log(2.0 * (1.0 - p));
}

// Independent standard normals truncated to [lower_j, upper_j], drawn by
// inverting the truncated CDF coordinate-wise.
inline Matrix sample_truncated_normal(std::span<const double> lower,
                                      std::span<const double> upper, int n,
                                      RngStream& rng) {
  detail::require(lower.size() == upper.size() && !lower.empty(),
                  "sample_truncated_normal: bound vectors must match");
  detail::require(n >= 1, "sample_truncated_normal: count must be >= 1");
  const std::size_t d = lower.size();
  for (std::size_t j = 0; j < d; ++j) {
    if (!(lower[j] < upper[j])) {
      throw ParameterError("sample_truncated_normal: empty interval in column " +
                           std::to_string(j));
    }
  }
  Matrix out(n, static_cast<Eigen::Index>(d));
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double u = rng.uniform();
      double x;
      if (lower[j] >= 0.0) {
        // Upper-tail interval: invert the survival function.
        const double sa = normal_sf(lower[j]);
        const double sb = normal_sf(upper[j]);
        x = -normal_quantile(sa - u * (sa - sb));
      } else {
        const double fa = normal_cdf(lower[j]);
        const double fb = normal_cdf(upper[j]);
        x = normal_quantile(fa + u * (fb - fa));
      }
      out(i, static_cast<Eigen::Index>(j)) =
          std::clamp(x, lower[j], upper[j]);
    }
  }
  return out;
}

}  // namespace zildp
