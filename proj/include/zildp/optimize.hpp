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
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "zildp/error.hpp"
#include "zildp/io.hpp"
#include "zildp/linalg.hpp"
#include "zildp/rng.hpp"

namespace zildp {

// Objective value at theta; when grad is non-null a (sub)gradient is written
// into it.
using Objective = std::function<double(const Vector& theta, Vector* grad)>;

// A smooth surrogate family f_h of a nonsmooth objective, f_h -> f as
// h -> 0.
using SmoothedObjective =
    std::function<double(const Vector& theta, double h, Vector* grad)>;

enum class OptimMethod { kBfgs, kSubgradientAdaptive, kNelderMead, kMultistart };

inline std::string to_string(OptimMethod m) {
  switch (m) {
    case OptimMethod::kBfgs: return "bfgs";
    case OptimMethod::kSubgradientAdaptive: return "subgradient-adaptive";
    case OptimMethod::kNelderMead: return "nelder-mead";
    case OptimMethod::kMultistart: return "multistart";
  }
  return "?";
}

inline OptimMethod parse_optim_method(const std::string& s) {
  if (s == "bfgs") return OptimMethod::kBfgs;
  if (s == "subgradient-adaptive") return OptimMethod::kSubgradientAdaptive;
  if (s == "nelder-mead") return OptimMethod::kNelderMead;
  if (s == "multistart") return OptimMethod::kMultistart;
  throw ParameterError("unknown optimizer '" + s + "'");
}

struct OptimOptions {
  OptimMethod method = OptimMethod::kMultistart;
  // Local solver inside multistart; unset picks BFGS for objectives smooth in
  // theta and subgradient followed by Nelder-Mead otherwise.
  std::optional<OptimMethod> local_method;
  bool smooth = true;
  int max_iters = 2000;
  double tol_step = 1e-9;
  double tol_objective = 1e-12;
  int restarts = 5;
  double restart_spread = 2.0;
  std::uint64_t seed = 0;
  // Final Nelder-Mead pass on the best restart (p <= 10, nonsmooth only).
  bool polish = true;
  int nm_restarts = 3;
  // Bandwidths for continuation when a smoothed family is supplied.
  std::vector<double> smoothing_schedule = {1.0, 0.3, 0.1, 0.03, 0.01, 0.003,
                                            0.001};
  std::optional<Vector> lower;
  std::optional<Vector> upper;

  void validate() const {
    if (!(tol_step > 0.0) || !(tol_objective > 0.0)) {
      throw ParameterError("optimizer tolerances must be positive");
    }
    if (restarts < 1) throw ParameterError("restarts must be >= 1");
    if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
  }
};

struct OptimResult {
  Vector theta;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string method;
};

namespace detail {

class CountedObjective {
 public:
  CountedObjective(const Objective& f, const OptimOptions& o)
      : f_(f), opts_(o) {}

  void project(Vector& x) const {
    if (opts_.lower) x = x.cwiseMax(*opts_.lower);
    if (opts_.upper) x = x.cwiseMin(*opts_.upper);
  }

  double operator()(const Vector& x, Vector* g) {
    ++evals;
    const double v = f_(x, g);
    if (!std::isfinite(v) || (g && !g->allFinite())) {
      std::ostringstream msg;
      msg << "non-finite objective or gradient at theta = [";
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        msg << (i ? ", " : "") << format_double(x[i]);
      }
      msg << "]";
      throw NumericError(msg.str());
    }
    return v;
  }

  int evals = 0;

 private:
  const Objective& f_;
  const OptimOptions& opts_;
};

inline OptimResult bfgs(CountedObjective& f, Vector x,
                        const OptimOptions& o) {
  const Eigen::Index p = x.size();
  f.project(x);
  Vector g(p), g_new(p);
  double fx = f(x, &g);
  SquareMatrix h = SquareMatrix::Identity(p, p);
  OptimResult r;
  int stall = 0;
  for (r.iterations = 0; r.iterations < o.max_iters; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + std::fabs(fx))) {
      r.converged = true;
      break;
    }
    Vector dir = -h * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }
    double t = 1.0;
    Vector x_new(p);
    double f_new = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + t * dir;
      f.project(x_new);
      f_new = f(x_new, &g_new);
      if (f_new <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      r.converged = true;  // no descent available at working precision
      break;
    }
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    const double df = fx - f_new;
    x = x_new;
    g = g_new;
    fx = f_new;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      if (r.iterations == 0) h *= sy / y.squaredNorm();
      const SquareMatrix ident = SquareMatrix::Identity(p, p);
      h = (ident - rho * s * y.transpose()) * h *
              (ident - rho * y * s.transpose()) +
          rho * s * s.transpose();
    }
    const bool small_step = s.norm() <= o.tol_step * (1.0 + x.norm());
    const bool small_change = df <= o.tol_objective * (1.0 + std::fabs(fx));
    stall = (small_step || small_change) ? stall + 1 : 0;
    if (stall >= 2) {
      r.converged = true;
      ++r.iterations;
      break;
    }
  }
  r.theta = x;
  r.value = fx;
  r.grad_norm = g.norm();
  r.method = "bfgs";
  return r;
}

// Normalized subgradient steps; the step grows by 1.2 after a decrease and
// halves otherwise. Returns the best point visited.
inline OptimResult subgradient_adaptive(CountedObjective& f, Vector x,
                                        const OptimOptions& o) {
  const Eigen::Index p = x.size();
  f.project(x);
  Vector g(p), g_new(p);
  double fx = f(x, &g);
  double step = 0.1 * (1.0 + x.lpNorm<Eigen::Infinity>());
  OptimResult r;
  for (r.iterations = 0; r.iterations < o.max_iters; ++r.iterations) {
    const double gn = g.norm();
    if (gn == 0.0) {
      r.converged = true;
      break;
    }
    Vector x_new = x - (step / gn) * g;
    f.project(x_new);
    const double f_new = f(x_new, &g_new);
    if (f_new < fx) {
      x = x_new;
      g = g_new;
      fx = f_new;
      step *= 1.2;
    } else {
      step *= 0.5;
    }
    if (step <= o.tol_step * (1.0 + x.norm())) {
      r.converged = true;
      break;
    }
  }
  r.theta = x;
  r.value = fx;
  r.grad_norm = g.norm();
  r.method = "subgradient-adaptive";
  return r;
}

// Nelder-Mead with dimension-adapted coefficients; the simplex is rebuilt
// around the incumbent up to nm_restarts times while that still helps.
inline OptimResult nelder_mead(CountedObjective& f, Vector x0,
                               const OptimOptions& o,
                               double initial_step = 0.0) {
  const Eigen::Index p = x0.size();
  const double n = static_cast<double>(p);
  const double ca = 1.0, cg = 1.0 + 2.0 / n, cc = 0.75 - 0.5 / n,
               cs = 1.0 - 1.0 / n;
  f.project(x0);
  OptimResult r;
  Vector best = x0;
  double best_f = f(x0, nullptr);
  for (int round = 0; round <= o.nm_restarts; ++round) {
    std::vector<Vector> pts(p + 1, best);
    std::vector<double> vals(p + 1);
    vals[0] = best_f;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double h = initial_step > 0.0
                           ? initial_step * (1.0 + std::fabs(best[j]))
                           : (best[j] != 0.0 ? 0.05 * std::fabs(best[j]) : 0.00025);
      pts[j + 1][j] += h;
      f.project(pts[j + 1]);
      vals[j + 1] = f(pts[j + 1], nullptr);
    }
    std::vector<std::size_t> idx(p + 1);
    int it = 0;
    for (; it < o.max_iters; ++it) {
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      std::vector<Vector> sp(p + 1);
      std::vector<double> sv(p + 1);
      for (std::size_t k = 0; k <= static_cast<std::size_t>(p); ++k) {
        sp[k] = pts[idx[k]];
        sv[k] = vals[idx[k]];
      }
      pts = std::move(sp);
      vals = std::move(sv);
      double diam = 0.0;
      for (Eigen::Index k = 1; k <= p; ++k) {
        diam = std::max(diam, (pts[k] - pts[0]).lpNorm<Eigen::Infinity>());
      }
      if (vals[p] - vals[0] <= o.tol_objective * (1.0 + std::fabs(vals[0])) &&
          diam <= std::sqrt(o.tol_step) * (1.0 + pts[0].norm())) {
        break;
      }
      if (diam <= o.tol_step * (1.0 + pts[0].norm())) break;
      Vector centroid = Vector::Zero(p);
      for (Eigen::Index k = 0; k < p; ++k) centroid += pts[k];
      centroid /= n;
      Vector xr = centroid + ca * (centroid - pts[p]);
      f.project(xr);
      const double fr = f(xr, nullptr);
      if (fr < vals[0]) {
        Vector xe = centroid + cg * (xr - centroid);
        f.project(xe);
        const double fe = f(xe, nullptr);
        if (fe < fr) {
          pts[p] = xe;
          vals[p] = fe;
        } else {
          pts[p] = xr;
          vals[p] = fr;
        }
        continue;
      }
      if (fr < vals[p - 1]) {
        pts[p] = xr;
        vals[p] = fr;
        continue;
      }
      const bool outside = fr < vals[p];
      Vector xc = outside ? Vector(centroid + cc * (xr - centroid))
                          : Vector(centroid - cc * (centroid - pts[p]));
      f.project(xc);
      const double fc = f(xc, nullptr);
      if (fc < (outside ? fr : vals[p])) {
        pts[p] = xc;
        vals[p] = fc;
        continue;
      }
      for (Eigen::Index k = 1; k <= p; ++k) {
        pts[k] = pts[0] + cs * (pts[k] - pts[0]);
        f.project(pts[k]);
        vals[k] = f(pts[k], nullptr);
      }
    }
    r.iterations += it;
    std::size_t arg = 0;
    for (std::size_t k = 1; k < vals.size(); ++k) {
      if (vals[k] < vals[arg]) arg = k;
    }
    const bool improved =
        vals[arg] < best_f - o.tol_objective * (1.0 + std::fabs(best_f));
    if (vals[arg] < best_f) {
      best_f = vals[arg];
      best = pts[arg];
    }
    if (!improved && round > 0) break;
  }
  r.theta = best;
  r.value = best_f;
  r.converged = true;
  r.method = "nelder-mead";
  return r;
}

// BFGS along the bandwidth schedule, then Nelder-Mead on the exact
// objective.
inline OptimResult continuation(CountedObjective& f,
                                const SmoothedObjective& family,
                                const Vector& x0, const OptimOptions& o) {
  Vector x = x0;
  int iters = 0;
  for (double h : o.smoothing_schedule) {
    const Objective fh = [&](const Vector& t, Vector* g) {
      return family(t, h, g);
    };
    CountedObjective ch(fh, o);
    OptimResult r = bfgs(ch, x, o);
    f.evals += ch.evals;
    iters += r.iterations;
    x = r.theta;
  }
  OptimOptions polish = o;
  polish.nm_restarts = 0;
  polish.tol_step = std::max(o.tol_step, 1e-7);
  polish.tol_objective = std::max(o.tol_objective, 1e-10);
  polish.max_iters = std::min(o.max_iters, 50 * static_cast<int>(x0.size()));
  OptimResult nm = nelder_mead(f, x, polish, 1e-3);
  nm.iterations += iters;
  nm.method = "smoothing-continuation+nelder-mead";
  return nm;
}

inline OptimResult local_solve(CountedObjective& f, const Vector& x0,
                               const OptimOptions& o,
                               const SmoothedObjective* family = nullptr) {
  if (family && !o.smooth && !o.local_method) {
    return continuation(f, *family, x0, o);
  }
  const OptimMethod m =
      o.local_method.value_or(o.smooth ? OptimMethod::kBfgs
                                       : OptimMethod::kSubgradientAdaptive);
  switch (m) {
    case OptimMethod::kBfgs: return bfgs(f, x0, o);
    case OptimMethod::kNelderMead: return nelder_mead(f, x0, o);
    case OptimMethod::kSubgradientAdaptive: {
      OptimResult sg = subgradient_adaptive(f, x0, o);
      if (o.local_method) return sg;
      // Default nonsmooth chain: refine the subgradient point by simplex.
      OptimResult nm = nelder_mead(f, sg.theta, o);
      nm.iterations += sg.iterations;
      nm.method = "subgradient-adaptive+nelder-mead";
      return nm.value <= sg.value ? nm : sg;
    }
    case OptimMethod::kMultistart: break;
  }
  throw ParameterError("multistart cannot be its own local method");
}

}  // namespace detail

// Minimizes f from theta0. Multistart runs the local solver from theta0 and
// from restarts-1 Gaussian perturbations of scale restart_spread *
// max(|theta0|_inf, 0.1); the lowest objective wins, earlier restarts win
// ties.
// A smoothed family, when given, replaces the default nonsmooth local chain
// by continuation.
inline OptimResult minimize(const Objective& f, const Vector& theta0,
                            const OptimOptions& options,
                            const SmoothedObjective* family = nullptr) {
  options.validate();
  detail::CountedObjective counted(f, options);
  {
    Vector probe = theta0;
    counted.project(probe);
    counted(probe, nullptr);
  }
  OptimResult best;
  switch (options.method) {
    case OptimMethod::kBfgs:
      best = detail::bfgs(counted, theta0, options);
      break;
    case OptimMethod::kSubgradientAdaptive:
      best = detail::subgradient_adaptive(counted, theta0, options);
      break;
    case OptimMethod::kNelderMead:
      best = detail::nelder_mead(counted, theta0, options);
      break;
    case OptimMethod::kMultistart: {
      const RngStream base(options.seed, 0x6d756c7469ULL);
      const double scale =
          options.restart_spread *
          std::max(theta0.lpNorm<Eigen::Infinity>(), 0.1);
      int total_iters = 0;
      for (int k = 0; k < options.restarts; ++k) {
        Vector start = theta0;
        if (k > 0) {
          RngStream s = base.substream(static_cast<std::uint64_t>(k));
          for (Eigen::Index j = 0; j < start.size(); ++j) {
            start[j] += scale * s.normal();
          }
        }
        OptimResult r = detail::local_solve(counted, start, options, family);
        total_iters += r.iterations;
        if (k == 0 || r.value < best.value) best = r;
      }
      if (options.polish && !options.smooth && !family &&
          theta0.size() <= 10) {
        OptimResult pol = detail::nelder_mead(counted, best.theta, options);
        if (pol.value < best.value) {
          best.theta = pol.theta;
          best.value = pol.value;
        }
        total_iters += pol.iterations;
      }
      best.iterations = total_iters;
      best.restarts_used = options.restarts;
      best.method = "multistart(" + best.method + ")";
      break;
    }
  }
  if (best.restarts_used == 0) best.restarts_used = 1;
  Vector g(theta0.size());
  counted(best.theta, &g);
  best.grad_norm = g.norm();
  best.evaluations = counted.evals;
  return best;
}

}  // namespace zildp
