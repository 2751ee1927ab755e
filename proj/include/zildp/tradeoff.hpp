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
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zildp/distributions.hpp"
#include "zildp/error.hpp"
#include "zildp/io.hpp"
#include "zildp/parallel.hpp"
#include "zildp/quadrature.hpp"
#include "zildp/rng.hpp"
#include "zildp/roots.hpp"
#include "zildp/special.hpp"
#include "zildp/support.hpp"

namespace zildp {

// (epsilon, delta_dp) differential-privacy budget. delta_dp is the DP slack,
// unrelated to the ZIL zero mass.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta_dp = 0.0;

  void validate() const {
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
      throw ParameterError("epsilon must be finite and >= 0");
    }
    if (!(delta_dp >= 0.0 && delta_dp < 1.0)) {
      throw ParameterError("delta_dp must lie in [0, 1)");
    }
  }
};

// A trade-off function sampled on an increasing alpha grid.
struct TradeoffCurve {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::string label;
  std::optional<std::vector<double>> std_errs;

  std::size_t size() const { return alphas.size(); }

  // Linear interpolation; alpha outside the grid is clamped.
  double at(double alpha) const {
    if (alphas.empty()) throw ParameterError("TradeoffCurve: empty curve");
    if (alpha <= alphas.front()) return betas.front();
    if (alpha >= alphas.back()) return betas.back();
    const auto it = std::upper_bound(alphas.begin(), alphas.end(), alpha);
    const std::size_t k = static_cast<std::size_t>(it - alphas.begin());
    const double a0 = alphas[k - 1], a1 = alphas[k];
    const double t = (alpha - a0) / (a1 - a0);
    return betas[k - 1] + t * (betas[k] - betas[k - 1]);
  }

  // Largest violation of: beta non-increasing, beta <= 1 - alpha, beta in
  // [0, 1]. Zero for a valid trade-off curve.
  double invariant_violation() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      worst = std::max(worst, betas[i] - (1.0 - alphas[i]));
      worst = std::max(worst, -betas[i]);
      worst = std::max(worst, betas[i] - 1.0);
      if (i > 0) worst = std::max(worst, betas[i] - betas[i - 1]);
    }
    return worst;
  }

  // Most negative second difference (convexity check), scaled per unit
  // alpha spacing.
  double convexity_violation() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < size(); ++i) {
      const double left = (betas[i] - betas[i - 1]) / (alphas[i] - alphas[i - 1]);
      const double right =
          (betas[i + 1] - betas[i]) / (alphas[i + 1] - alphas[i]);
      worst = std::max(worst, (left - right) * (alphas[i + 1] - alphas[i - 1]));
    }
    return worst;
  }
};

// Inclusive grid {0, 1/(points-1), ..., 1}; the default has step 0.001.
inline std::vector<double> alpha_grid(std::size_t points = 1001) {
  detail::require(points >= 2, "alpha_grid: need at least two points");
  std::vector<double> grid(points);
  const double denom = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = static_cast<double>(i) / denom;
  }
  return grid;
}

template <class F>
TradeoffCurve tabulate_curve(std::string label, F&& beta,
                             const std::vector<double>& grid = alpha_grid()) {
  TradeoffCurve curve;
  curve.label = std::move(label);
  curve.alphas = grid;
  curve.betas.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) curve.betas[i] = beta(grid[i]);
  return curve;
}

inline void check_alpha(double alpha, const char* who) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError(std::string(who) + ": alpha must lie in [0, 1]");
  }
}

inline void check_c(double c, const char* who) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ParameterError(std::string(who) + ": c must be positive");
  }
}

inline void check_zero_mass(double zero_mass, const char* who) {
  if (!(zero_mass > 0.0 && zero_mass < 1.0)) {
    throw ParameterError(std::string(who) + ": zero_mass must lie in (0, 1)");
  }
}

// Piecewise-linear trade-off function of (epsilon, delta_dp)-DP.
inline double f_eps_delta(double alpha, const PrivacyBudget& budget) {
  check_alpha(alpha, "f_eps_delta");
  budget.validate();
  const double e = budget.epsilon, d = budget.delta_dp;
  return std::max({0.0, 1.0 - d - std::exp(e) * alpha,
                   std::exp(-e) * (1.0 - d - alpha)});
}

namespace detail {

// The limiting log-likelihood ratio c X / sqrt(W) - c^2 / (2 W) has
// conditional CDF Phi(z(w)) with z(w) = sqrt(w) x / c + c / (2 sqrt(w)).
inline double llr_scale_hint(double x, double c) {
  return x != 0.0 ? c * c / (2.0 * std::fabs(x)) : 1.0;
}

}  // namespace detail

// CDF of c X_1 W^{-1/2} - c^2 (2W)^{-1}, X_1 ~ N(0,1), W ~ Exp(1).
inline double F_c(double x, double c) {
  check_c(c, "F_c");
  if (!std::isfinite(x)) {
    if (std::isnan(x)) throw ParameterError("F_c: x is NaN");
    return x > 0.0 ? 1.0 : 0.0;
  }
  auto g = [x, c](double w) {
    const double sw = std::sqrt(w);
    return normal_cdf(sw * x / c + c / (2.0 * sw));
  };
  return integrate_exp_weight(g, detail::llr_scale_hint(x, c)).value;
}

// 1 - F_c(x), evaluated without cancellation.
inline double F_c_upper(double x, double c) {
  check_c(c, "F_c_upper");
  if (!std::isfinite(x)) {
    if (std::isnan(x)) throw ParameterError("F_c_upper: x is NaN");
    return x > 0.0 ? 0.0 : 1.0;
  }
  auto g = [x, c](double w) {
    const double sw = std::sqrt(w);
    return normal_sf(sw * x / c + c / (2.0 * sw));
  };
  return integrate_exp_weight(g, detail::llr_scale_hint(x, c)).value;
}

namespace detail {

// Solves F_c(x) = p (lower = true) or 1 - F_c(x) = q (lower = false),
// whichever probability is the smaller one, so tails keep full precision.
inline double F_c_solve(double prob, bool lower, double c) {
  auto fn = [&](double x) {
    return lower ? F_c(x, c) - prob : prob - F_c_upper(x, c);
  };
  const Bracket br = expand_bracket_increasing(fn, -1.0, 1.0);
  return brent_root(fn, br, 1e-13, 1e-14 * std::max(prob, 1e-300));
}

}  // namespace detail

// Quantile of F_c; p in {0, 1} has an infinite quantile.
inline double F_c_inverse(double p, double c) {
  check_c(c, "F_c_inverse");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError("F_c_inverse: p must lie in [0, 1]");
  }
  if (p == 0.0 || p == 1.0) {
    throw DomainError("F_c_inverse: the quantile at p = 0 or 1 is infinite");
  }
  return p <= 0.5 ? detail::F_c_solve(p, true, c)
                  : detail::F_c_solve(1.0 - p, false, c);
}

// F_c^{-1}(1 - alpha) computed from the upper tail directly.
inline double F_c_upper_quantile(double alpha, double c) {
  check_c(c, "F_c_upper_quantile");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("F_c_upper_quantile: alpha must lie in (0, 1)");
  }
  return alpha <= 0.5 ? detail::F_c_solve(alpha, false, c)
                      : detail::F_c_solve(1.0 - alpha, true, c);
}

// h_c(alpha) = F_c^{-1}(1 - alpha) / c.
inline double h_c(double alpha, double c) {
  return F_c_upper_quantile(alpha, c) / c;
}

namespace detail {

// [1 + (sqrt2 / s)^2]^{-1} exp(-c / s) with s = h + sqrt(2 + h^2).
inline double beta_from_h(double h, double c) {
  const double root = std::sqrt(2.0 + h * h);
  const double s = h >= 0.0 ? h + root : 2.0 / (root - h);
  const double ratio = std::numbers::sqrt2 / s;
  return std::exp(-c / s) / (1.0 + ratio * ratio);
}

inline double beta_integral_at(double threshold, double c) {
  auto g = [threshold, c](double w) {
    const double sw = std::sqrt(w);
    return normal_cdf(sw * threshold / c - c / (2.0 * sw));
  };
  return integrate_exp_weight(g, llr_scale_hint(threshold, c)).value;
}

}  // namespace detail

// Limit trade-off function evaluated through the h_c closed form.
inline double beta_c_closed_form(double alpha, double c) {
  check_alpha(alpha, "beta_c_closed_form");
  check_c(c, "beta_c_closed_form");
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return 0.0;
  return detail::beta_from_h(h_c(alpha, c), c);
}

// Limit trade-off function evaluated by quadrature of
// int Phi(sqrt(w) t / c - c / (2 sqrt(w))) e^{-w} dw, t = F_c^{-1}(1 - alpha).
inline double beta_c_integral(double alpha, double c) {
  check_alpha(alpha, "beta_c_integral");
  check_c(c, "beta_c_integral");
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return 0.0;
  return detail::beta_integral_at(F_c_upper_quantile(alpha, c), c);
}

// Tolerance of the agreement check between the two routes in beta_c.
inline constexpr double kBetaRouteTolerance = 1e-6;

// beta_c(alpha): quadrature route, cross-checked against the closed form.
inline double beta_c(double alpha, double c) {
  check_alpha(alpha, "beta_c");
  check_c(c, "beta_c");
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return 0.0;
  const double threshold = F_c_upper_quantile(alpha, c);
  const double integral = detail::beta_integral_at(threshold, c);
  const double closed = detail::beta_from_h(threshold / c, c);
  if (std::fabs(integral - closed) > kBetaRouteTolerance) {
    throw NumericError("beta_c: quadrature and closed form disagree at alpha=" +
                       format_double(alpha) + ", c=" + format_double(c));
  }
  return integral;
}

// Zero-inflated version: (1 - zm) beta_c(alpha / (1 - zm)) below 1 - zm,
// zero above.
inline double beta_c_delta(double alpha, double c, double zero_mass) {
  check_alpha(alpha, "beta_c_delta");
  check_c(c, "beta_c_delta");
  check_zero_mass(zero_mass, "beta_c_delta");
  const double keep = 1.0 - zero_mass;
  if (alpha > keep) return 0.0;
  return keep * beta_c(std::min(1.0, alpha / keep), c);
}

// Exact one-dimensional trade-off F_Lap(F_Lap^{-1}(1 - alpha) - sqrt2 c).
inline double t1c_closed_form(double alpha, double c) {
  check_alpha(alpha, "t1c_closed_form");
  check_c(c, "t1c_closed_form");
  if (alpha == 0.0) return 1.0;
  if (alpha == 1.0) return 0.0;
  // F_Lap^{-1}(1 - alpha) from alpha directly to keep small alphas exact.
  const double q = alpha < 0.5 ? -std::log(2.0 * alpha)
                               : std::log(2.0 * (1.0 - alpha));
  return laplace_cdf(q - std::numbers::sqrt2 * c);
}

// Applies (1 - zm) T(alpha / (1 - zm)), zero above 1 - zm, and resamples the
// result onto the input grid by linear interpolation.
inline TradeoffCurve tradeoff_shrink(const TradeoffCurve& curve,
                                     double zero_mass) {
  check_zero_mass(zero_mass, "tradeoff_shrink");
  if (curve.size() < 2) throw ParameterError("tradeoff_shrink: curve too short");
  TradeoffCurve out;
  out.label = curve.label + "|zero_mass=" + format_double(zero_mass);
  out.alphas = curve.alphas;
  out.betas.resize(curve.size());
  const double keep = 1.0 - zero_mass;
  std::vector<double> errs;
  if (curve.std_errs) errs.resize(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double a = curve.alphas[i];
    if (a > keep) {
      out.betas[i] = 0.0;
      if (curve.std_errs) errs[i] = 0.0;
      continue;
    }
    const double scaled = std::min(1.0, a / keep);
    out.betas[i] = keep * curve.at(scaled);
    if (curve.std_errs) {
      TradeoffCurve se_curve{curve.alphas, *curve.std_errs, "", std::nullopt};
      errs[i] = keep * se_curve.at(scaled);
    }
  }
  if (curve.std_errs) out.std_errs = std::move(errs);
  return out;
}

namespace detail {

struct RocPoint {
  double alpha;
  double beta;
};

// Piecewise-linear interpolation of ROC points sorted by alpha.
inline double roc_at(const std::vector<RocPoint>& roc, double a) {
  const auto it = std::lower_bound(
      roc.begin(), roc.end(), a,
      [](const RocPoint& p, double x) { return p.alpha < x; });
  if (it == roc.begin()) return it->beta;
  if (it == roc.end()) return roc.back().beta;
  const RocPoint& p1 = *it;
  const RocPoint& p0 = *(it - 1);
  if (p1.alpha == p0.alpha) return p1.beta;
  return p0.beta + (p1.beta - p0.beta) * (a - p0.alpha) / (p1.alpha - p0.alpha);
}

}  // namespace detail

// Monte-Carlo trade-off curve T_{d,c} for SL_d(I) versus (c,0,...,0) +
// SL_d(I). The Neyman-Pearson statistic log f(s - c e1) - log f(s) is
// computed for n_sim draws under each hypothesis; the ROC of all threshold
// tests, joined by randomised tests between consecutive thresholds, is
// interpolated onto the 1001-point alpha grid. No convex hull is taken: the
// hull of a noisy ROC is biased low.
inline TradeoffCurve empirical_tradeoff(int d, double c, int n_sim,
                                        const RngStream& rng) {
  detail::require(d >= 1, "empirical_tradeoff: d must be >= 1");
  check_c(c, "empirical_tradeoff");
  detail::require(n_sim >= 10000, "empirical_tradeoff: n_sim must be >= 1e4");

  constexpr int kChunk = 4096;
  const int chunks = (n_sim + kChunk - 1) / kChunk;
  // stats[0..n) under P, stats[n..2n) under Q.
  std::vector<double> stats(2 * static_cast<std::size_t>(n_sim));
  parallel_for(2 * static_cast<std::size_t>(chunks), [&](std::size_t job) {
    const bool under_q = job >= static_cast<std::size_t>(chunks);
    const std::size_t chunk = under_q ? job - chunks : job;
    RngStream stream = rng.substream(under_q ? 1 : 0).substream(chunk);
    std::vector<double> s(static_cast<std::size_t>(d));
    std::vector<double> shifted(static_cast<std::size_t>(d));
    const std::size_t begin = chunk * kChunk;
    const std::size_t end =
        std::min<std::size_t>(begin + kChunk, static_cast<std::size_t>(n_sim));
    for (std::size_t i = begin; i < end; ++i) {
      draw_sl(stream, 1.0, s);
      if (under_q) s[0] += c;
      shifted = s;
      shifted[0] -= c;
      const double llr = sl_log_density(shifted, 1.0) - sl_log_density(s, 1.0);
      stats[(under_q ? static_cast<std::size_t>(n_sim) : 0) + i] = llr;
    }
  });

  // Reject H0 when the statistic exceeds the threshold; sweep thresholds from
  // +inf downwards, moving tied statistics together.
  std::vector<std::pair<double, bool>> tagged(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    tagged[i] = {stats[i], i >= static_cast<std::size_t>(n_sim)};
  }
  std::sort(tagged.begin(), tagged.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  const double inv_n = 1.0 / n_sim;
  std::vector<detail::RocPoint> roc;
  roc.reserve(tagged.size() + 2);
  roc.push_back({0.0, 1.0});
  std::size_t p_count = 0, q_count = 0;
  for (std::size_t i = 0; i < tagged.size();) {
    std::size_t j = i;
    while (j < tagged.size() && tagged[j].first == tagged[i].first) {
      (tagged[j].second ? q_count : p_count) += 1;
      ++j;
    }
    roc.push_back({p_count * inv_n, 1.0 - q_count * inv_n});
    i = j;
  }
  roc.push_back({1.0, 0.0});

  TradeoffCurve curve;
  curve.label = "empirical T_{" + std::to_string(d) + "," + format_double(c) +
                "} n_sim=" + std::to_string(n_sim);
  curve.alphas = alpha_grid();
  curve.betas.resize(curve.alphas.size());
  std::vector<double> errs(curve.alphas.size());
  constexpr double kSlopeWindow = 0.01;
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    const double a = curve.alphas[i];
    const double beta = std::clamp(detail::roc_at(roc, a), 0.0, 1.0);
    curve.betas[i] = beta;
    const double lo = std::max(0.0, a - kSlopeWindow);
    const double hi = std::min(1.0, a + kSlopeWindow);
    const double slope =
        (detail::roc_at(roc, hi) - detail::roc_at(roc, lo)) / (hi - lo);
    // Binomial error of the type-II rate plus the threshold's own error
    // propagated through the local slope.
    errs[i] = std::sqrt((beta * (1.0 - beta) + slope * slope * a * (1.0 - a)) *
                        inv_n);
  }
  curve.std_errs = std::move(errs);
  return curve;
}

// delta_c(epsilon): the DP slack at epsilon implied by beta_c, written as
// (1 - B) - e^eps (1 - F_c(eps)) with both terms evaluated in a
// cancellation-free way.
inline double delta_profile(double c, double epsilon) {
  check_c(c, "delta_profile");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ParameterError("delta_profile: epsilon must be finite and >= 0");
  }
  const double r = epsilon / c;
  const double s = r + std::sqrt(2.0 + r * r);
  const double one_minus_b = -std::expm1(-c / s - std::log1p(2.0 / (s * s)));
  auto g = [epsilon, c](double w) {
    const double sw = std::sqrt(w);
    return std::exp(epsilon + log_normal_sf(sw * epsilon / c + c / (2.0 * sw)));
  };
  const double tail =
      integrate_exp_weight(g, detail::llr_scale_hint(epsilon, c)).value;
  return std::clamp(one_minus_b - tail, 0.0, 1.0);
}

// Slack of the zero-inflated curve beta_{c, zero_mass}.
inline double delta_profile_zil(double c, double epsilon, double zero_mass) {
  check_zero_mass(zero_mass, "delta_profile_zil");
  return 1.0 - (1.0 - zero_mass) * (1.0 - delta_profile(c, epsilon));
}

enum class PrivacyMode { kAttribute, kIndividual };

struct Calibration {
  double c_prime = 0.0;
  double lambda = 0.0;
};

// Solves delta_profile_zil(c', target.epsilon, zero_mass) = target.delta_dp
// and converts c' into a noise scale: max_j diam(X_j) / c' for attribute
// privacy, diam(X) / c' for individual privacy.
inline Calibration calibrate(const PrivacyBudget& target, double zero_mass,
                             const SupportBox& support, PrivacyMode mode) {
  target.validate();
  check_zero_mass(zero_mass, "calibrate");
  if (!(zero_mass < target.delta_dp)) {
    throw InfeasibleError(
        "calibrate: a solution exists only when zero_mass < delta_dp (got "
        "zero_mass=" + format_double(zero_mass) +
        ", delta_dp=" + format_double(target.delta_dp) + ")");
  }
  const double diam = mode == PrivacyMode::kAttribute ? diam_attribute(support)
                                                      : diam_individual(support);
  auto fn = [&](double log_c) {
    return delta_profile_zil(std::exp(log_c), target.epsilon, zero_mass) -
           target.delta_dp;
  };
  const Bracket br = expand_bracket_increasing(fn, std::log(0.1), 0.0, 40);
  Calibration out;
  out.c_prime = std::exp(brent_root(fn, br, 1e-9));
  out.lambda = diam / out.c_prime;
  return out;
}

inline void write_curve_csv(const std::filesystem::path& path,
                            const TradeoffCurve& curve) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "alpha,beta,stderr,label\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << format_double(curve.alphas[i]) << ','
        << format_double(curve.betas[i]) << ',';
    if (curve.std_errs) out << format_double((*curve.std_errs)[i]);
    out << ',' << '"' << curve.label << '"' << '\n';
  }
}

inline TradeoffCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("alpha,beta,stderr,label", 0) != 0) {
    throw DataError(path.string() + ": unexpected curve header");
  }
  TradeoffCurve curve;
  std::vector<double> errs;
  bool has_errs = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // The label may contain commas; it is the quoted tail of the line.
    const auto quote = line.find('"');
    const std::string numeric = line.substr(0, quote);
    if (quote != std::string::npos && curve.label.empty()) {
      const auto end = line.rfind('"');
      curve.label = line.substr(quote + 1, end - quote - 1);
    }
    const auto cells = split_csv_line(numeric);
    if (cells.size() < 3) throw DataError(path.string() + ": short row");
    curve.alphas.push_back(parse_double(cells[0], path.string()));
    curve.betas.push_back(parse_double(cells[1], path.string()));
    if (cells[2].empty()) {
      has_errs = false;
    } else {
      errs.push_back(parse_double(cells[2], path.string()));
    }
  }
  if (has_errs && errs.size() == curve.size()) curve.std_errs = std::move(errs);
  return curve;
}

}  // namespace zildp
