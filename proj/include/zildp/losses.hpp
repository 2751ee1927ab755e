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
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include "zildp/error.hpp"
#include "zildp/io.hpp"
#include "zildp/linalg.hpp"

namespace zildp {

// One observation as seen by a loss: the noised (masked) coordinates and the
// public ones, e.g. a response in the first public slot.
struct RowRef {
  std::span<const double> features;
  std::span<const double> publics;
};

enum class Smoothness { kNonsmooth, kTwiceDifferentiableInX };

// A loss l(x, theta). Subclasses provide value and a theta-subgradient;
// losses that are twice differentiable in x also provide the Laplacian over
// the masked coordinates and its theta-gradient.
class Loss {
 public:
  virtual ~Loss() = default;

  virtual std::string name() const = 0;
  virtual Smoothness smoothness() const = 0;
  // Differentiable in theta almost everywhere with a continuous gradient.
  virtual bool smooth_in_theta() const = 0;
  // True when the signed DRCL combination can lose convexity.
  virtual bool possibly_nonconvex() const { return true; }
  // Parameter dimension for rows with the given widths; throws when the
  // widths do not fit the loss.
  virtual std::size_t param_dim(std::size_t features,
                                std::size_t publics) const = 0;

  virtual double value(const RowRef& row, const Vector& theta) const = 0;
  // Writes a subgradient into `grad` (already sized to theta) and returns
  // the value.
  virtual double value_grad(const RowRef& row, const Vector& theta,
                            Vector& grad) const = 0;

  virtual double x_laplacian(const RowRef&, const Vector&) const {
    throw CapabilityError("loss '" + name() +
                          "' is not twice differentiable in x and provides "
                          "no x_laplacian");
  }
  // Returns the Laplacian and writes its theta-gradient into `grad`.
  virtual double x_laplacian_grad(const RowRef&, const Vector&,
                                  Vector&) const {
    throw CapabilityError("loss '" + name() +
                          "' is not twice differentiable in x and provides "
                          "no x_laplacian");
  }

  // Smooth surrogate l_h with l_h -> l as h -> 0, used by continuation
  // solvers for losses that are not smooth in theta.
  virtual bool has_smoothing() const { return false; }
  virtual double smoothed_value_grad(const RowRef& row, const Vector& theta,
                                     double, Vector& grad) const {
    return value_grad(row, theta, grad);
  }

  bool has_laplacian() const {
    return smoothness() == Smoothness::kTwiceDifferentiableInX;
  }
};

namespace losses {

// (theta - g(x))^2 with scalar theta and a univariate private x.
class MeanTransform : public Loss {
 public:
  enum class Kind { kRelu, kIndicator, kAbsSin };

  explicit MeanTransform(Kind kind) : kind_(kind) {}

  std::string name() const override {
    switch (kind_) {
      case Kind::kRelu: return "mean-relu";
      case Kind::kIndicator: return "mean-indicator";
      case Kind::kAbsSin: return "mean-abssin";
    }
    return "mean";
  }
  Smoothness smoothness() const override { return Smoothness::kNonsmooth; }
  bool smooth_in_theta() const override { return true; }
  // Weights of each row pair sum to one, so the DRCL objective stays a
  // convex quadratic.
  bool possibly_nonconvex() const override { return false; }
  std::size_t param_dim(std::size_t features, std::size_t) const override {
    if (features != 1) {
      throw ParameterError(name() + " needs exactly one private column");
    }
    return 1;
  }

  double transform(double x) const {
    switch (kind_) {
      case Kind::kRelu: return x > 0.0 ? x : 0.0;
      case Kind::kIndicator: return (x >= 0.5 && x <= 1.0) ? 1.0 : 0.0;
      case Kind::kAbsSin: return std::fabs(std::sin(2.0 * std::numbers::pi * x));
    }
    return 0.0;
  }

  double value(const RowRef& row, const Vector& theta) const override {
    const double r = theta[0] - transform(row.features[0]);
    return r * r;
  }
  double value_grad(const RowRef& row, const Vector& theta,
                    Vector& grad) const override {
    const double r = theta[0] - transform(row.features[0]);
    grad[0] = 2.0 * r;
    return r * r;
  }

 private:
  Kind kind_;
};

// Regression layout: publics[0] is the response, publics[1..] are public
// covariates. The design vector is [1 (optional)] + features + publics[1..].
class Regression : public Loss {
 public:
  explicit Regression(bool intercept) : intercept_(intercept) {}

  bool intercept() const { return intercept_; }

  std::size_t param_dim(std::size_t features,
                        std::size_t publics) const override {
    if (publics < 1) {
      throw ParameterError(name() +
                           " needs the response in the first public column");
    }
    const std::size_t p = (intercept_ ? 1 : 0) + features + (publics - 1);
    if (p == 0) throw ParameterError(name() + " has no covariates");
    return p;
  }

 protected:
  std::size_t offset() const { return intercept_ ? 1 : 0; }

  double linear_predictor(const RowRef& row, const Vector& theta) const {
    std::size_t k = 0;
    double u = 0.0;
    if (intercept_) u += theta[k++];
    for (double x : row.features) u += theta[k++] * x;
    for (std::size_t j = 1; j < row.publics.size(); ++j) {
      u += theta[k++] * row.publics[j];
    }
    return u;
  }

  // grad += scale * z.
  void add_design(const RowRef& row, double scale, Vector& grad) const {
    std::size_t k = 0;
    if (intercept_) grad[k++] += scale;
    for (double x : row.features) grad[k++] += scale * x;
    for (std::size_t j = 1; j < row.publics.size(); ++j) {
      grad[k++] += scale * row.publics[j];
    }
  }

  double masked_norm2(const RowRef& row, const Vector& theta) const {
    double s = 0.0;
    for (std::size_t j = 0; j < row.features.size(); ++j) {
      const double b = theta[offset() + j];
      s += b * b;
    }
    return s;
  }

  static double response(const RowRef& row) { return row.publics[0]; }

 private:
  bool intercept_;
};

// (1 - y) u + log(1 + e^{-u}), u = z'theta.
class Logistic : public Regression {
 public:
  explicit Logistic(bool intercept = false) : Regression(intercept) {}
  std::string name() const override {
    return intercept() ? "logistic+intercept" : "logistic";
  }
  Smoothness smoothness() const override {
    return Smoothness::kTwiceDifferentiableInX;
  }
  bool smooth_in_theta() const override { return true; }

  static double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
  }
  // log(1 + e^{-u}) without overflow.
  static double softplus_neg(double u) {
    return u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
  }

  double value(const RowRef& row, const Vector& theta) const override {
    const double u = linear_predictor(row, theta);
    return (1.0 - response(row)) * u + softplus_neg(u);
  }
  double value_grad(const RowRef& row, const Vector& theta,
                    Vector& grad) const override {
    const double u = linear_predictor(row, theta);
    grad.setZero();
    add_design(row, sigmoid(u) - response(row), grad);
    return (1.0 - response(row)) * u + softplus_neg(u);
  }
  double x_laplacian(const RowRef& row, const Vector& theta) const override {
    const double s = sigmoid(linear_predictor(row, theta));
    return masked_norm2(row, theta) * s * (1.0 - s);
  }
  double x_laplacian_grad(const RowRef& row, const Vector& theta,
                          Vector& grad) const override {
    const double s = sigmoid(linear_predictor(row, theta));
    const double q = s * (1.0 - s);
    const double b2 = masked_norm2(row, theta);
    grad.setZero();
    add_design(row, b2 * q * (1.0 - 2.0 * s), grad);
    for (std::size_t j = 0; j < row.features.size(); ++j) {
      grad[offset() + j] += 2.0 * q * theta[offset() + j];
    }
    return b2 * q;
  }
};

// (y - u)^2.
class LinearSquared : public Regression {
 public:
  explicit LinearSquared(bool intercept = false) : Regression(intercept) {}
  std::string name() const override {
    return intercept() ? "linear+intercept" : "linear";
  }
  Smoothness smoothness() const override {
    return Smoothness::kTwiceDifferentiableInX;
  }
  bool smooth_in_theta() const override { return true; }

  double value(const RowRef& row, const Vector& theta) const override {
    const double r = response(row) - linear_predictor(row, theta);
    return r * r;
  }
  double value_grad(const RowRef& row, const Vector& theta,
                    Vector& grad) const override {
    const double r = response(row) - linear_predictor(row, theta);
    grad.setZero();
    add_design(row, -2.0 * r, grad);
    return r * r;
  }
  double x_laplacian(const RowRef& row, const Vector& theta) const override {
    return 2.0 * masked_norm2(row, theta);
  }
  double x_laplacian_grad(const RowRef& row, const Vector& theta,
                          Vector& grad) const override {
    grad.setZero();
    for (std::size_t j = 0; j < row.features.size(); ++j) {
      grad[offset() + j] = 4.0 * theta[offset() + j];
    }
    return 2.0 * masked_norm2(row, theta);
  }
};

// rho_tau(r) = r (tau - 1(r < 0)).
inline double check_function(double r, double tau) {
  return r * (tau - (r < 0.0 ? 1.0 : 0.0));
}
// d rho / d r; at r = 0 the element tau is used.
inline double check_slope(double r, double tau) {
  return tau - (r < 0.0 ? 1.0 : 0.0);
}

// 0.5 sqrt(r^2 + h^2) + (tau - 0.5) r and its r-derivative.
inline double smooth_check(double r, double tau, double h, double& slope) {
  const double root = std::sqrt(r * r + h * h);
  slope = 0.5 * r / root + (tau - 0.5);
  return 0.5 * root + (tau - 0.5) * r;
}

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw ParameterError("tau must lie in (0, 1), got " + format_double(tau));
  }
}

// Quantile regression: rho_tau(y - u).
class CheckRegression : public Regression {
 public:
  explicit CheckRegression(double tau, bool intercept = true)
      : Regression(intercept), tau_(tau) {
    check_tau(tau);
  }
  double tau() const { return tau_; }
  std::string name() const override {
    return "check:" + format_double(tau_) + (intercept() ? "" : "-nointercept");
  }
  Smoothness smoothness() const override { return Smoothness::kNonsmooth; }
  bool smooth_in_theta() const override { return false; }

  double value(const RowRef& row, const Vector& theta) const override {
    return check_function(response(row) - linear_predictor(row, theta), tau_);
  }
  double value_grad(const RowRef& row, const Vector& theta,
                    Vector& grad) const override {
    const double r = response(row) - linear_predictor(row, theta);
    grad.setZero();
    add_design(row, -check_slope(r, tau_), grad);
    return check_function(r, tau_);
  }
  bool has_smoothing() const override { return true; }
  double smoothed_value_grad(const RowRef& row, const Vector& theta, double h,
                             Vector& grad) const override {
    double slope;
    const double v =
        smooth_check(response(row) - linear_predictor(row, theta), tau_, h, slope);
    grad.setZero();
    add_design(row, -slope, grad);
    return v;
  }

 private:
  double tau_;
};

// Univariate tau-quantile: rho_tau(x - theta).
class Quantile : public Loss {
 public:
  explicit Quantile(double tau) : tau_(tau) { check_tau(tau); }
  std::string name() const override { return "quantile:" + format_double(tau_); }
  Smoothness smoothness() const override { return Smoothness::kNonsmooth; }
  bool smooth_in_theta() const override { return false; }
  std::size_t param_dim(std::size_t features, std::size_t) const override {
    if (features != 1) {
      throw ParameterError(name() + " needs exactly one private column");
    }
    return 1;
  }
  double value(const RowRef& row, const Vector& theta) const override {
    return check_function(row.features[0] - theta[0], tau_);
  }
  double value_grad(const RowRef& row, const Vector& theta,
                    Vector& grad) const override {
    const double r = row.features[0] - theta[0];
    grad[0] = -check_slope(r, tau_);
    return check_function(r, tau_);
  }
  bool has_smoothing() const override { return true; }
  double smoothed_value_grad(const RowRef& row, const Vector& theta, double h,
                             Vector& grad) const override {
    double slope;
    const double v = smooth_check(row.features[0] - theta[0], tau_, h, slope);
    grad[0] = -slope;
    return v;
  }

 private:
  double tau_;
};

}  // namespace losses

// Builds a loss from its CLI name: mean-relu | mean-indicator | mean-abssin |
// logistic | linear | check:<tau> | quantile:<tau>. A "+intercept" or
// "-nointercept" suffix toggles the regression intercept.
inline std::unique_ptr<Loss> make_loss(std::string name) {
  std::optional<bool> intercept;
  auto strip = [&](const std::string& suffix, bool flag) {
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      name.resize(name.size() - suffix.size());
      intercept = flag;
    }
  };
  strip("+intercept", true);
  strip("-nointercept", false);
  using losses::MeanTransform;
  if (name == "mean-relu") {
    return std::make_unique<MeanTransform>(MeanTransform::Kind::kRelu);
  }
  if (name == "mean-indicator") {
    return std::make_unique<MeanTransform>(MeanTransform::Kind::kIndicator);
  }
  if (name == "mean-abssin") {
    return std::make_unique<MeanTransform>(MeanTransform::Kind::kAbsSin);
  }
  if (name == "logistic") {
    return std::make_unique<losses::Logistic>(intercept.value_or(false));
  }
  if (name == "linear") {
    return std::make_unique<losses::LinearSquared>(intercept.value_or(false));
  }
  auto tau_of = [&](std::size_t prefix) {
    const std::string text = name.substr(prefix);
    try {
      return parse_double(text, "loss name");
    } catch (const DataError&) {
      throw ParameterError("loss '" + name + "': cannot parse tau");
    }
  };
  if (name.rfind("check:", 0) == 0) {
    return std::make_unique<losses::CheckRegression>(tau_of(6),
                                                     intercept.value_or(true));
  }
  if (name == "check") {
    return std::make_unique<losses::CheckRegression>(0.5,
                                                     intercept.value_or(true));
  }
  if (name.rfind("quantile:", 0) == 0) {
    return std::make_unique<losses::Quantile>(tau_of(9));
  }
  throw ParameterError("unknown loss '" + name +
                       "'; expected mean-relu, mean-indicator, mean-abssin, "
                       "logistic, linear, check:<tau> or quantile:<tau>");
}

namespace detail {

// zero_mass is accepted on (0, 1]; zero_mass = 1 gives plain l(x1).
inline void check_drcl_mass(double zero_mass) {
  if (!(zero_mass > 0.0 && zero_mass <= 1.0)) {
    throw ParameterError("zero_mass must lie in (0, 1], got " +
                         format_double(zero_mass));
  }
}

inline void require_laplacian(const Loss& loss, const char* who) {
  if (!loss.has_laplacian()) {
    throw CapabilityError(std::string(who) + ": loss '" + loss.name() +
                          "' is not twice differentiable in x and provides "
                          "no x_laplacian");
  }
}

}  // namespace detail

// (1 - 1/zm) l(x2) + (1/zm) l(x1).
inline double drcl_value(const Loss& loss, const RowRef& x1, const RowRef& x2,
                         const Vector& theta, double zero_mass) {
  detail::check_drcl_mass(zero_mass);
  const double w = 1.0 / zero_mass;
  return (1.0 - w) * loss.value(x2, theta) + w * loss.value(x1, theta);
}

inline double drcl_value_grad(const Loss& loss, const RowRef& x1,
                              const RowRef& x2, const Vector& theta,
                              double zero_mass, Vector& grad, Vector& work) {
  detail::check_drcl_mass(zero_mass);
  const double w = 1.0 / zero_mass;
  const double v2 = loss.value_grad(x2, theta, work);
  const double v1 = loss.value_grad(x1, theta, grad);
  grad = w * grad + (1.0 - w) * work;
  return (1.0 - w) * v2 + w * v1;
}

// SL corrected loss l(x2) - scale^2 / 2 * Lap_x l(x2). With
// omit_laplacian = true a loss without a Laplacian contributes l(x2) only
// (the biased comparator used for nonsmooth losses in the tables).
inline double sl_corrected_value(const Loss& loss, const RowRef& x2,
                                 const Vector& theta, double scale,
                                 bool omit_laplacian = false) {
  if (!(scale >= 0.0)) throw ParameterError("scale must be >= 0");
  if (!loss.has_laplacian()) {
    if (omit_laplacian) return loss.value(x2, theta);
    detail::require_laplacian(loss, "sl_corrected_value");
  }
  return loss.value(x2, theta) -
         0.5 * scale * scale * loss.x_laplacian(x2, theta);
}

inline double sl_corrected_value_grad(const Loss& loss, const RowRef& x2,
                                      const Vector& theta, double scale,
                                      Vector& grad, Vector& work,
                                      bool omit_laplacian = false) {
  if (!(scale >= 0.0)) throw ParameterError("scale must be >= 0");
  if (!loss.has_laplacian()) {
    if (omit_laplacian) return loss.value_grad(x2, theta, grad);
    detail::require_laplacian(loss, "sl_corrected_value");
  }
  const double k = 0.5 * scale * scale;
  const double v = loss.value_grad(x2, theta, grad);
  const double lap = loss.x_laplacian_grad(x2, theta, work);
  grad -= k * work;
  return v - k * lap;
}

// l(x1) - (1 - zm) scale^2 / 2 * Lap_x l(x2).
inline double sdrcl_value(const Loss& loss, const RowRef& x1, const RowRef& x2,
                          const Vector& theta, double zero_mass, double scale) {
  detail::check_drcl_mass(zero_mass);
  detail::require_laplacian(loss, "sdrcl_value");
  return loss.value(x1, theta) -
         0.5 * (1.0 - zero_mass) * scale * scale * loss.x_laplacian(x2, theta);
}

inline double sdrcl_value_grad(const Loss& loss, const RowRef& x1,
                               const RowRef& x2, const Vector& theta,
                               double zero_mass, double scale, Vector& grad,
                               Vector& work) {
  detail::check_drcl_mass(zero_mass);
  detail::require_laplacian(loss, "sdrcl_value");
  const double k = 0.5 * (1.0 - zero_mass) * scale * scale;
  const double v = loss.value_grad(x1, theta, grad);
  const double lap = loss.x_laplacian_grad(x2, theta, work);
  grad -= k * work;
  return v - k * lap;
}

}  // namespace zildp
