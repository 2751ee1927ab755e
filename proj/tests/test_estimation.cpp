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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "zildp/estimation.hpp"

namespace zildp {
namespace {

using testing::linear_sample;

Vector scalar(double v) { return Vector::Constant(1, v); }

TEST(Minimize, Quadratic) {
  OptimOptions o;
  const auto r = minimize(
      [](const Vector& t, Vector* g) {
        if (g) (*g)[0] = 2.0 * (t[0] - 3.0);
        return (t[0] - 3.0) * (t[0] - 3.0);
      },
      scalar(0.0), o);
  EXPECT_NEAR(r.theta[0], 3.0, 1e-6);
}

TEST(Minimize, AbsoluteValueBySubgradients) {
  auto f = [](const Vector& t, Vector* g) {
    if (g) (*g)[0] = t[0] >= 1.0 ? 1.0 : -1.0;
    return std::fabs(t[0] - 1.0);
  };
  OptimOptions o;
  o.smooth = false;
  EXPECT_NEAR(minimize(f, scalar(-5.0), o).theta[0], 1.0, 1e-4);
  o.method = OptimMethod::kSubgradientAdaptive;
  EXPECT_NEAR(minimize(f, scalar(-5.0), o).theta[0], 1.0, 1e-4);
}

TEST(Minimize, NonFiniteObjectiveIsReported) {
  OptimOptions o;
  auto f = [](const Vector& t, Vector* g) {
    if (g) (*g)[0] = -1.0;
    return t[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -t[0];
  };
  EXPECT_THROW(minimize(f, scalar(0.0), o), NumericError);
}

TEST(Minimize, BoxProjection) {
  OptimOptions o;
  o.lower = scalar(-1.0);
  o.upper = scalar(2.0);
  const auto r = minimize(
      [](const Vector& t, Vector* g) {
        if (g) (*g)[0] = 2.0 * (t[0] - 3.0);
        return (t[0] - 3.0) * (t[0] - 3.0);
      },
      scalar(0.0), o);
  EXPECT_NEAR(r.theta[0], 2.0, 1e-8);
}

TEST(Estimate, IndicatorDrclMatchesGridScan) {
  RngStream rng(51);
  Matrix x(500, 1);
  for (int i = 0; i < 500; ++i) x(i, 0) = rng.uniform();
  auto [x1, x2] = drdp_noise_matrix(x, {0.1, 0.94}, rng.substream(5));
  EstimationData d;
  d.x1 = x1;
  d.x2 = x2;
  d.params = NoiseParams{0.1, 0.94};
  const auto loss = make_loss("mean-indicator");
  EstimateOptions opt;
  opt.covariance = false;
  const auto rep = estimate(EstimatorMethod::kDrcl, *loss, d, opt);
  CorrectedLoss obj(*loss, EstimatorMethod::kDrcl, d);
  double best = std::numeric_limits<double>::infinity();
  for (int k = -2000; k <= 3000; ++k) {
    best = std::min(best, obj.mean(scalar(k * 1e-3), nullptr));
  }
  EXPECT_LE(rep.objective, best + 1e-9);
}

TEST(Estimate, CapabilityAndInputErrors) {
  RngStream rng(52);
  Matrix x(100, 1);
  for (int i = 0; i < 100; ++i) x(i, 0) = rng.uniform();
  EstimationData d;
  d.x1 = x;
  d.x2 = x;
  d.params = NoiseParams{0.2, 0.5};
  const auto relu = make_loss("mean-relu");
  EXPECT_THROW(estimate(EstimatorMethod::kSl, *relu, d), CapabilityError);
  EXPECT_THROW(estimate(EstimatorMethod::kSdrcl, *relu, d), CapabilityError);
  EXPECT_THROW(estimate(EstimatorMethod::kOracle, *relu, d), ParameterError);
  EstimateOptions omit;
  omit.sl_omit_laplacian = true;
  omit.covariance = false;
  EXPECT_NO_THROW(estimate(EstimatorMethod::kSl, *relu, d, omit));
  d.params.reset();
  EXPECT_THROW(estimate(EstimatorMethod::kDrcl, *relu, d), ParameterError);
  EXPECT_THROW(parse_estimator("ridge"), ParameterError);
}

SquareMatrix test_sigma() {
  SquareMatrix s(3, 3);
  s << 1.0, 0.3, 0.0, 0.3, 1.0, 0.2, 0.0, 0.2, 1.0;
  return s;
}

TEST(Sandwich, OracleLinearModelMatchesClassicalVariance) {
  const SquareMatrix sigma = test_sigma();
  Vector theta(3);
  theta << 1.0, -0.5, 0.25;
  const int n = 5000, reps = 200;
  const auto loss = make_loss("linear");
  SquareMatrix avg = SquareMatrix::Zero(3, 3);
  for (int r = 0; r < reps; ++r) {
    const auto d = linear_sample(sigma, theta, 1.0, {0.2, 0.5}, n,
                                 RngStream(53).substream(r));
    avg += estimate(EstimatorMethod::kOracle, *loss, d).covariance / reps;
  }
  const SquareMatrix expect = sigma.inverse() / n;
  EXPECT_LE(testing::frobenius_rel(avg, expect), 0.15);
}

TEST(Sandwich, PsdAndStdErrors) {
  const auto d = linear_sample(test_sigma(), Vector::Ones(3), 1.0, {0.2, 0.5},
                               2000, RngStream(54));
  const auto loss = make_loss("linear");
  for (auto m : {EstimatorMethod::kNaive, EstimatorMethod::kSl,
                 EstimatorMethod::kDrcl, EstimatorMethod::kSdrcl}) {
    const auto rep = estimate(m, *loss, d);
    Eigen::SelfAdjointEigenSolver<SquareMatrix> eig(rep.covariance);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-8);
    EXPECT_TRUE((rep.covariance - rep.covariance.transpose()).norm() == 0.0);
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(rep.std_errors[j], std::sqrt(rep.covariance(j, j)));
    }
  }
}

TEST(Sandwich, SingularJacobianIsAnInferenceError) {
  RngStream rng(55);
  EstimationData d;
  Matrix x(200, 2);
  for (int i = 0; i < 200; ++i) x(i, 0) = x(i, 1) = rng.normal();
  d.clean = x;
  d.publics = Matrix(200, 1);
  for (int i = 0; i < 200; ++i) d.publics(i, 0) = x(i, 0) + rng.normal();
  const auto loss = make_loss("linear");
  EXPECT_THROW(estimate(EstimatorMethod::kOracle, *loss, d), InferenceError);
}

TEST(Estimate, SameSeedSameReport) {
  RngStream rng(56);
  const int n = 800;
  Matrix x(n, 2), y(n, 1);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = 2 * rng.uniform() - 1;
    x(i, 1) = 2 * rng.uniform() - 1;
    y(i, 0) = 1 + x(i, 0) + x(i, 1) + rng.normal();
  }
  auto [x1, x2] = drdp_noise_matrix(x, {0.2, 1.0}, rng.substream(1));
  EstimationData d;
  d.x1 = x1;
  d.x2 = x2;
  d.publics = y;
  d.params = NoiseParams{0.2, 1.0};
  const auto loss = make_loss("check:0.5");
  EstimateOptions o;
  o.optim.seed = 99;
  const auto a = estimate(EstimatorMethod::kDrcl, *loss, d, o);
  const auto b = estimate(EstimatorMethod::kDrcl, *loss, d, o);
  EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
  EXPECT_TRUE((a.theta_hat.array() == b.theta_hat.array()).all());
}

TEST(Consistency, DrclMedianErrorHalvesAsSampleQuadruples) {
  const NoiseParams params{0.1, 0.94};
  const int reps = 1000;
  const std::vector<std::pair<const char*, double>> cases = {
      {"mean-relu", 0.5}, {"mean-indicator", 0.5},
      {"mean-abssin", 2.0 / std::numbers::pi}};
  EstimateOptions o;
  o.covariance = false;
  for (const auto& [name, theta0] : cases) {
    const auto loss = make_loss(name);
    std::vector<double> med;
    for (int n : {500, 2000, 8000}) {
      std::vector<double> err(reps);
      for (int r = 0; r < reps; ++r) {
        RngStream rng = RngStream(57, static_cast<std::uint64_t>(n)).substream(r);
        Matrix x(n, 1);
        RngStream xs = rng.substream(0);
        for (int i = 0; i < n; ++i) x(i, 0) = xs.uniform();
        auto [x1, x2] = drdp_noise_matrix(x, params, rng.substream(1));
        EstimationData d;
        d.x1 = std::move(x1);
        d.x2 = std::move(x2);
        d.params = params;
        err[r] = std::fabs(
            estimate(EstimatorMethod::kDrcl, *loss, d, o).theta_hat[0] - theta0);
      }
      std::nth_element(err.begin(), err.begin() + reps / 2, err.end());
      med.push_back(err[reps / 2]);
    }
    EXPECT_NEAR(med[0] / med[1], 2.0, 0.4) << name;
    EXPECT_NEAR(med[1] / med[2], 2.0, 0.4) << name;
  }
}

LinearModelSpec random_spec(RngStream& rng, int p, double zm) {
  Matrix a(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = rng.normal();
  }
  LinearModelSpec s;
  s.sigma_x = a * a.transpose() / p + 0.3 * SquareMatrix::Identity(p, p);
  s.sigma_x = 0.5 * (s.sigma_x + s.sigma_x.transpose()).eval();
  s.sigma2 = 0.2 + rng.uniform();
  s.theta = Vector(p);
  for (int j = 0; j < p; ++j) s.theta[j] = rng.normal();
  s.params = {zm, 0.2 + 1.5 * rng.uniform()};
  return s;
}

double min_eig(const SquareMatrix& m) {
  Eigen::SelfAdjointEigenSolver<SquareMatrix> e(0.5 * (m + m.transpose()));
  return e.eigenvalues().minCoeff();
}

TEST(LinearAsyvar, ZeroNoiseAndHalfMass) {
  RngStream rng(58);
  auto s = random_spec(rng, 3, 0.3);
  s.params.scale = 0.0;
  const SquareMatrix base = s.sigma2 * s.sigma_x.inverse();
  for (auto m : {EstimatorMethod::kSl, EstimatorMethod::kDrcl,
                 EstimatorMethod::kSdrcl}) {
    EXPECT_LE((linear_asyvar(m, s) - base).norm(), 1e-10 * base.norm());
  }
  auto h = random_spec(rng, 4, 0.5);
  EXPECT_LE((linear_asyvar(EstimatorMethod::kSl, h) -
             linear_asyvar(EstimatorMethod::kDrcl, h)).norm(),
            1e-10 * linear_asyvar(EstimatorMethod::kSl, h).norm());
  h.params.zero_mass = 1.0;
  EXPECT_THROW(linear_asyvar(EstimatorMethod::kSl, h), ParameterError);
  EXPECT_THROW(linear_asyvar(EstimatorMethod::kOracle, s), ParameterError);
}

TEST(LinearAsyvar, OrderingsOnRandomSpecs) {
  RngStream rng(59);
  for (int k = 0; k < 20; ++k) {
    const double zm = 0.02 + 0.96 * rng.uniform();
    const auto s = random_spec(rng, 2 + k % 4, zm);
    const SquareMatrix sl = linear_asyvar(EstimatorMethod::kSl, s);
    const SquareMatrix dr = linear_asyvar(EstimatorMethod::kDrcl, s);
    const SquareMatrix sdr = linear_asyvar(EstimatorMethod::kSdrcl, s);
    const double tol = 1e-10 * dr.norm();
    EXPECT_GE(min_eig(dr - sdr), -tol);
    EXPECT_GE(min_eig(sl - sdr), -tol);
    if (zm <= 0.5) {
      EXPECT_GE(min_eig(dr - sl), -tol);
    } else {
      EXPECT_GE(min_eig(sl - dr), -tol);
    }
  }
}

}  // namespace
}  // namespace zildp
