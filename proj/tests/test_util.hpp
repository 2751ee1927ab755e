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
#include <numbers>
#include <vector>

#include "zildp/estimation.hpp"
#include "zildp/linalg.hpp"
#include "zildp/mechanism.hpp"

namespace zildp::testing {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double x : v) {
    const double d = x - m;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  return {m, m2, std::sqrt(m2 / n), std::sqrt((m4 - m2 * m2) / n)};
}

inline std::vector<double> column(const Matrix& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = m(i, j);
  return out;
}

// Mean and standard error of cos(t' row) over the rows of m.
inline Moments empirical_cf(const Matrix& m, const Vector& t) {
  std::vector<double> c(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    c[i] = std::cos(m.row(i).dot(t.transpose()));
  }
  return moments(c);
}

// y = x'theta + N(0, sigma2) with x ~ N(0, sigma_x), released through the
// doubly-random mechanism. Response is the only public column.
inline EstimationData linear_sample(const SquareMatrix& sigma_x,
                                    const Vector& theta, double sigma2,
                                    const NoiseParams& params, int n,
                                    const RngStream& rng) {
  const Eigen::Index p = theta.size();
  const SquareMatrix l = sigma_x.llt().matrixL();
  RngStream xs = rng.substream(0), es = rng.substream(2);
  Matrix x(n, p);
  Matrix y(n, 1);
  Vector z(p);
  for (int i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z[j] = xs.normal();
    x.row(i) = (l * z).transpose();
    y(i, 0) = x.row(i).dot(theta.transpose()) + std::sqrt(sigma2) * es.normal();
  }
  auto [x1, x2] = drdp_noise_matrix(x, params, rng.substream(1));
  EstimationData d;
  d.clean = std::move(x);
  d.x1 = std::move(x1);
  d.x2 = std::move(x2);
  d.publics = std::move(y);
  d.params = params;
  return d;
}

inline double frobenius_rel(const SquareMatrix& a, const SquareMatrix& b) {
  return (a - b).norm() / b.norm();
}

}  // namespace zildp::testing
