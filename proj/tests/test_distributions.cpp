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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zildp/distributions.hpp"
#include "zildp/special.hpp"

namespace zildp {
namespace {

using testing::empirical_cf;
using testing::moments;

// Half-integer Bessel closed form of the SL density:
// f = (2 pi v)^{-d/2} 2 a^{nu/2} K_nu(2 sqrt a), a = |x|^2 / (2v), nu = 1 - d/2.
double bessel_log_density(const std::vector<double>& x, double v) {
  const double d = static_cast<double>(x.size());
  double r2 = 0.0;
  for (double t : x) r2 += t * t;
  const double a = r2 / (2.0 * v), nu = 1.0 - d / 2.0, u = 2.0 * std::sqrt(a);
  double log_k = 0.5 * std::log(std::numbers::pi / (2.0 * u)) - u;
  if (std::fabs(nu) == 1.5) log_k += std::log1p(1.0 / u);
  return -0.5 * d * std::log(2.0 * std::numbers::pi * v) + std::log(2.0) +
         0.5 * nu * std::log(a) + log_k;
}

TEST(SampleSl, MomentsMatchVariance) {
  RngStream rng(11);
  const Matrix s = sample_sl(2, 4.0, 1000000, rng);
  for (Eigen::Index j = 0; j < 2; ++j) {
    const auto m = moments(testing::column(s, j));
    EXPECT_NEAR(m.mean, 0.0, 3.0 * m.se_mean);
    EXPECT_NEAR(m.var, 4.0, 3.0 * m.se_var);
  }
}

TEST(SampleSl, OneDimensionalIsLaplace) {
  RngStream rng(12);
  const Matrix s = sample_sl(1, 1.0, 1000000, rng);
  std::vector<double> v = testing::column(s, 0);
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = laplace_cdf(v[i] * std::numbers::sqrt2);
    ks = std::max({ks, std::fabs(f - i / n), std::fabs(f - (i + 1) / n)});
  }
  EXPECT_LE(ks, 0.002);
}

TEST(SampleSl, ReplayIsBitIdentical) {
  RngStream a(5, 3), b(5, 3), c(5, 4);
  const Matrix x = sample_sl(3, 2.0, 1000, a);
  const Matrix y = sample_sl(3, 2.0, 1000, b);
  const Matrix z = sample_sl(3, 2.0, 1000, c);
  EXPECT_TRUE((x.array() == y.array()).all());
  EXPECT_FALSE((x.array() == z.array()).all());
}

TEST(SampleSl, RejectsBadArguments) {
  RngStream rng(1);
  EXPECT_THROW(sample_sl(0, 1.0, 10, rng), ParameterError);
  EXPECT_THROW(sample_sl(2, 0.0, 10, rng), ParameterError);
  EXPECT_THROW(sample_sl(2, 1.0, 0, rng), ParameterError);
}

TEST(SampleSl, CharacteristicFunction) {
  RngStream rng(13);
  const double lambda = 1.3;
  const Matrix s = sample_sl(3, lambda * lambda, 1000000, rng);
  Vector t(3);
  t << 0.4, -0.7, 0.2;
  const auto cf = empirical_cf(s, t);
  const double expect = 1.0 / (1.0 + lambda * lambda * t.squaredNorm() / 2.0);
  EXPECT_NEAR(cf.mean, expect, 3.0 * cf.se_mean);
}

TEST(SampleZil, ZeroFractionAndVariance) {
  RngStream rng(14);
  const NoiseParams p{0.3, 2.0};
  const Matrix z = sample_zil(2, p, 1000000, rng);
  int zeros = 0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    zeros += (z(i, 0) == 0.0 && z(i, 1) == 0.0) ? 1 : 0;
  }
  const double frac = zeros / 1e6;
  EXPECT_NEAR(frac, 0.3, 3.0 * std::sqrt(0.3 * 0.7 / 1e6));
  const auto m = moments(testing::column(z, 0));
  EXPECT_NEAR(m.var, 0.7 * 4.0, 3.0 * m.se_var);
}

TEST(SampleZil, CharacteristicFunction) {
  RngStream rng(15);
  const NoiseParams p{0.3, 2.0};
  const Matrix z = sample_zil(4, p, 1000000, rng);
  Vector t = Vector::Zero(4);
  t[0] = 1.0;
  const auto cf = empirical_cf(z, t);
  const double l2 = 4.0;
  EXPECT_NEAR(cf.mean, (1.0 + 0.3 * l2 / 2.0) / (1.0 + l2 / 2.0),
              3.0 * cf.se_mean);

  // Nonzero rows are SL draws.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (z.row(i).squaredNorm() > 0.0) keep.push_back(i);
  }
  Matrix nz(static_cast<Eigen::Index>(keep.size()), 4);
  for (std::size_t k = 0; k < keep.size(); ++k) nz.row(k) = z.row(keep[k]);
  Vector t2(4);
  t2 << 0.3, 0.1, -0.4, 0.2;
  const auto cf2 = empirical_cf(nz, t2);
  EXPECT_NEAR(cf2.mean, 1.0 / (1.0 + l2 * t2.squaredNorm() / 2.0),
              3.0 * cf2.se_mean);
}

TEST(SampleZil, RejectsBadParams) {
  RngStream rng(1);
  EXPECT_THROW(sample_zil(2, {0.0, 1.0}, 10, rng), ParameterError);
  EXPECT_THROW(sample_zil(2, {1.0, 1.0}, 10, rng), ParameterError);
  EXPECT_THROW(sample_zil(2, {0.5, 0.0}, 10, rng), ParameterError);
}

TEST(SlLogDensity, LaplaceAtOrigin) {
  const std::vector<double> x = {0.0};
  EXPECT_NEAR(sl_log_density(x, 1.0), -0.34657359027997264, 1e-12);
}

TEST(SlLogDensity, FrozenThreeDimensionalValue) {
  const std::vector<double> x = {1.0, 0.0, 0.0};
  EXPECT_NEAR(sl_log_density(x, 1.0), -3.2520906287824405, 1e-10);
  EXPECT_NEAR(bessel_log_density(x, 1.0), -3.2520906287824405, 1e-12);
}

TEST(SlLogDensity, FrozenEvenDimensionalValues) {
  const std::vector<double> x2 = {0.5, 0.5};
  EXPECT_NEAR(sl_log_density(x2, 1.0), -2.0097942847561883, 1e-10);
  const std::vector<double> x8(8, 0.1);
  EXPECT_NEAR(sl_log_density(x8, 1.0), 2.9784502769140079, 1e-10);
}

TEST(SlLogDensity, MatchesBesselClosedForms) {
  RngStream rng(16);
  for (int d : {1, 3, 5}) {
    for (int k = 0; k < 100; ++k) {
      std::vector<double> x(static_cast<std::size_t>(d));
      const double scale = std::exp(4.0 * rng.uniform() - 2.5);
      for (double& v : x) v = scale * rng.normal();
      const double var = 0.2 + 3.0 * rng.uniform();
      EXPECT_NEAR(sl_log_density(x, var), bessel_log_density(x, var), 1e-8)
          << "d=" << d << " k=" << k;
    }
  }
}

TEST(SlLogDensity, SingularAtOriginForHigherDimensions) {
  const std::vector<double> x = {0.0, 0.0};
  EXPECT_THROW(sl_log_density(x, 1.0), DomainError);
}

TEST(SlLogDensity, IntegratesToOne) {
  double total = 0.0;
  const double h = 1e-3;
  for (int i = -40000; i <= 40000; ++i) {
    const std::vector<double> x = {i * h};
    total += std::exp(sl_log_density(x, 1.0)) * h;
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
}

TEST(TruncatedNormal, SupportMeanAndVariance) {
  RngStream rng(17);
  const std::vector<double> lo = {-1.0}, hi = {1.0};
  const Matrix s = sample_truncated_normal(lo, hi, 1000000, rng);
  EXPECT_GE(s.minCoeff(), -1.0);
  EXPECT_LE(s.maxCoeff(), 1.0);
  const auto m = moments(testing::column(s, 0));
  EXPECT_NEAR(m.mean, 0.0, 3.0 * m.se_mean);
  const double var =
      1.0 - 2.0 * normal_pdf(1.0) / (2.0 * normal_cdf(1.0) - 1.0);
  EXPECT_NEAR(var, 0.29112509477279321, 1e-12);
  EXPECT_NEAR(m.var, var, 3.0 * m.se_var);
}

TEST(TruncatedNormal, EmptyIntervalAndReplay) {
  RngStream rng(1);
  const std::vector<double> lo = {1.0}, hi = {1.0};
  EXPECT_THROW(sample_truncated_normal(lo, hi, 5, rng), ParameterError);
  const std::vector<double> l2 = {-1.0, 0.5}, h2 = {1.0, 3.0};
  RngStream a(9), b(9);
  const Matrix x = sample_truncated_normal(l2, h2, 500, a);
  const Matrix y = sample_truncated_normal(l2, h2, 500, b);
  EXPECT_TRUE((x.array() == y.array()).all());
  EXPECT_GE(x.col(1).minCoeff(), 0.5);
}

TEST(Laplace, CdfAndQuantile) {
  EXPECT_DOUBLE_EQ(laplace_cdf(0.0), 0.5);
  for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    EXPECT_NEAR(laplace_quantile(laplace_cdf(x)), x, 1e-12);
  }
  EXPECT_NEAR(laplace_cdf(-std::numbers::sqrt2), 0.12155836721710711, 1e-14);
  EXPECT_THROW(laplace_quantile(0.0), ParameterError);
  EXPECT_THROW(laplace_quantile(1.0), ParameterError);
}

TEST(Rng, SubstreamsAreIndependentlyAddressable) {
  RngStream base(42);
  RngStream a = base.substream(7), b = base.substream(7), c = base.substream(8);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(base.substream(7).next_u64(), c.next_u64());
}

}  // namespace
}  // namespace zildp
