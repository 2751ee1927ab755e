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

#include <cmath>
#include <limits>
#include <utility>

#include "zildp/error.hpp"

namespace zildp {

struct Bracket {
  double lo;
  double hi;
  double f_lo;
  double f_hi;
};

// Grows [lo, hi] by doubling its width toward whichever end fails to bracket
// a sign change of the increasing function f. Throws NumericError after
// `max_doublings` expansions.
template <class F>
Bracket expand_bracket_increasing(F&& f, double lo, double hi,
                                  int max_doublings = 200) {
  double f_lo = f(lo);
  double f_hi = f(hi);
  for (int i = 0; i < max_doublings; ++i) {
    if (f_lo <= 0.0 && f_hi >= 0.0) return {lo, hi, f_lo, f_hi};
    const double width = hi - lo;
    if (f_lo > 0.0) {
      hi = lo;
      f_hi = f_lo;
      lo -= 2.0 * width;
      f_lo = f(lo);
    } else {
      lo = hi;
      f_lo = f_hi;
      hi += 2.0 * width;
      f_hi = f(hi);
    }
  }
  throw NumericError("bracket expansion failed to find a sign change");
}

// Brent's method on a sign-changing bracket. Stops when the bracket is
// narrower than x_tol or |f| <= f_tol.
template <class F>
double brent_root(F&& f, Bracket br, double x_tol, double f_tol = 0.0,
                  int max_iter = 300) {
  double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw NumericError("brent_root: endpoints do not bracket a root");
  }
  double c = a, fc = fa, d = b - a, e = d;
  for (int iter = 0; iter < max_iter; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol =
        2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) +
        0.5 * x_tol;
    const double m = 0.5 * (c - b);
    if (std::fabs(m) <= tol || std::fabs(fb) <= f_tol) return b;
    if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::fabs(tol * q),
                             std::fabs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::fabs(d) > tol ? d : (m > 0.0 ? tol : -tol);
    fb = f(b);
  }
  return b;
}

}  // namespace zildp
