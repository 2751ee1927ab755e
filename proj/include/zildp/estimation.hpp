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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "zildp/distributions.hpp"
#include "zildp/error.hpp"
#include "zildp/io.hpp"
#include "zildp/linalg.hpp"
#include "zildp/losses.hpp"
#include "zildp/mechanism.hpp"
#include "zildp/optimize.hpp"

namespace zildp {

enum class EstimatorMethod { kOracle, kNaive, kSl, kDrcl, kSdrcl };

inline std::string to_string(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::kOracle: return "oracle";
    case EstimatorMethod::kNaive: return "naive";
    case EstimatorMethod::kSl: return "sl";
    case EstimatorMethod::kDrcl: return "drcl";
    case EstimatorMethod::kSdrcl: return "sdrcl";
  }
  return "?";
}

inline EstimatorMethod parse_estimator(const std::string& s) {
  if (s == "oracle") return EstimatorMethod::kOracle;
  if (s == "naive") return EstimatorMethod::kNaive;
  if (s == "sl") return EstimatorMethod::kSl;
  if (s == "drcl" || s == "dr") return EstimatorMethod::kDrcl;
  if (s == "sdrcl" || s == "sdr") return EstimatorMethod::kSdrcl;
  throw ParameterError("unknown method '" + s +
                       "'; expected oracle, naive, sl, drcl or sdrcl");
}

// Inputs split into masked feature matrices and public columns. Which
// matrices are required depends on the method: oracle reads `clean`, naive
// reads x1, sl reads x2, drcl and sdrcl read x1 and x2.
struct EstimationData {
  std::optional<Matrix> clean;
  std::optional<Matrix> x1;
  std::optional<Matrix> x2;
  Matrix publics;
  std::optional<NoiseParams> params;

  Eigen::Index rows() const {
    if (clean) return clean->rows();
    if (x1) return x1->rows();
    if (x2) return x2->rows();
    return publics.rows();
  }
};

namespace detail {

inline Matrix take_columns(const Matrix& m, const std::vector<std::size_t>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = m.col(static_cast<Eigen::Index>(cols[k]));
  }
  return out;
}

}  // namespace detail

inline EstimationData estimation_data(const ReleaseBundle& bundle) {
  const auto masked = bundle.support.masked_columns();
  const auto pub = bundle.support.public_columns();
  EstimationData d;
  d.x1 = detail::take_columns(bundle.x1, masked);
  d.x2 = detail::take_columns(bundle.x2, masked);
  d.publics = detail::take_columns(bundle.x1, pub);
  d.params = bundle.params;
  return d;
}

inline EstimationData estimation_data(const Dataset& data) {
  const auto masked = data.support.masked_columns();
  EstimationData d;
  d.clean = detail::take_columns(data.values, masked);
  d.publics = detail::take_columns(data.values, data.support.public_columns());
  return d;
}

// Per-row loss for a method, evaluated on the right matrices.
class CorrectedLoss {
 public:
  CorrectedLoss(const Loss& loss, EstimatorMethod method,
                const EstimationData& data, bool sl_omit_laplacian = false)
      : loss_(loss), method_(method), data_(data), omit_(sl_omit_laplacian) {
    auto need = [&](bool ok, const char* what) {
      if (!ok) {
        throw ParameterError("method " + to_string(method) + " needs " + what);
      }
    };
    switch (method) {
      case EstimatorMethod::kOracle: need(data.clean.has_value(), "clean data"); break;
      case EstimatorMethod::kNaive: need(data.x1.has_value(), "x1"); break;
      case EstimatorMethod::kSl:
        need(data.x2.has_value(), "x2");
        need(data.params.has_value(), "noise parameters");
        break;
      case EstimatorMethod::kDrcl:
      case EstimatorMethod::kSdrcl:
        need(data.x1.has_value() && data.x2.has_value(), "x1 and x2");
        need(data.params.has_value(), "noise parameters");
        break;
    }
    if ((method == EstimatorMethod::kSdrcl ||
         (method == EstimatorMethod::kSl && !omit_)) &&
        !loss.has_laplacian()) {
      throw CapabilityError("method " + to_string(method) + " requires a loss "
                            "twice differentiable in x; '" + loss.name() +
                            "' provides no x_laplacian");
    }
    const Matrix& f = features_primary();
    n_ = f.rows();
    if (data.publics.rows() != n_ && data.publics.cols() > 0) {
      throw DataError("public columns have " +
                      std::to_string(data.publics.rows()) + " rows, expected " +
                      std::to_string(n_));
    }
    if (data.x1 && data.x2 &&
        (data.x1->rows() != data.x2->rows() ||
         data.x1->cols() != data.x2->cols())) {
      throw DataError("x1 and x2 shapes differ");
    }
    if (n_ == 0) throw DataError("no rows to estimate from");
    p_ = loss.param_dim(static_cast<std::size_t>(f.cols()),
                        static_cast<std::size_t>(data.publics.cols()));
  }

  Eigen::Index rows() const { return n_; }
  std::size_t param_dim() const { return p_; }
  const Loss& loss() const { return loss_; }
  EstimatorMethod method() const { return method_; }

  // Value of row i; writes the row's (sub)gradient when grad is non-null.
  double row(Eigen::Index i, const Vector& theta, Vector* grad,
             Vector& work) const {
    const auto pub = publics_row(i);
    switch (method_) {
      case EstimatorMethod::kOracle:
      case EstimatorMethod::kNaive: {
        const RowRef r{feature_row(features_primary(), i), pub};
        return grad ? loss_.value_grad(r, theta, *grad) : loss_.value(r, theta);
      }
      case EstimatorMethod::kSl: {
        const RowRef r2{feature_row(*data_.x2, i), pub};
        const double s = data_.params->scale;
        return grad ? sl_corrected_value_grad(loss_, r2, theta, s, *grad, work,
                                              omit_)
                    : sl_corrected_value(loss_, r2, theta, s, omit_);
      }
      case EstimatorMethod::kDrcl: {
        const RowRef r1{feature_row(*data_.x1, i), pub};
        const RowRef r2{feature_row(*data_.x2, i), pub};
        const double zm = data_.params->zero_mass;
        return grad ? drcl_value_grad(loss_, r1, r2, theta, zm, *grad, work)
                    : drcl_value(loss_, r1, r2, theta, zm);
      }
      case EstimatorMethod::kSdrcl: {
        const RowRef r1{feature_row(*data_.x1, i), pub};
        const RowRef r2{feature_row(*data_.x2, i), pub};
        const double zm = data_.params->zero_mass;
        const double s = data_.params->scale;
        return grad ? sdrcl_value_grad(loss_, r1, r2, theta, zm, s, *grad, work)
                    : sdrcl_value(loss_, r1, r2, theta, zm, s);
      }
    }
    return 0.0;
  }

  // Row value of the smoothed surrogate at bandwidth h.
  double row_smoothed(Eigen::Index i, const Vector& theta, double h,
                      Vector& grad, Vector& work) const {
    const auto pub = publics_row(i);
    switch (method_) {
      case EstimatorMethod::kOracle:
      case EstimatorMethod::kNaive:
        return loss_.smoothed_value_grad({feature_row(features_primary(), i), pub},
                                         theta, h, grad);
      case EstimatorMethod::kSl:
        if (!loss_.has_laplacian()) {
          return loss_.smoothed_value_grad({feature_row(*data_.x2, i), pub},
                                           theta, h, grad);
        }
        return row(i, theta, &grad, work);
      case EstimatorMethod::kDrcl: {
        const double w = 1.0 / data_.params->zero_mass;
        const double v2 = loss_.smoothed_value_grad(
            {feature_row(*data_.x2, i), pub}, theta, h, work);
        const double v1 = loss_.smoothed_value_grad(
            {feature_row(*data_.x1, i), pub}, theta, h, grad);
        grad = w * grad + (1.0 - w) * work;
        return w * v1 + (1.0 - w) * v2;
      }
      case EstimatorMethod::kSdrcl:
        return row(i, theta, &grad, work);
    }
    return 0.0;
  }

  double mean_smoothed(const Vector& theta, double h, Vector* grad) const {
    const auto p = static_cast<Eigen::Index>(p_);
    Vector g(p), work(p), acc = Vector::Zero(p);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      total += row_smoothed(i, theta, h, g, work);
      acc += g;
    }
    const double inv = 1.0 / static_cast<double>(n_);
    if (grad) *grad = acc * inv;
    return total * inv;
  }

  // Mean objective and mean gradient.
  double mean(const Vector& theta, Vector* grad) const {
    Vector g(static_cast<Eigen::Index>(p_)), work(static_cast<Eigen::Index>(p_));
    if (grad) grad->setZero(static_cast<Eigen::Index>(p_));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      total += row(i, theta, grad ? &g : nullptr, work);
      if (grad) *grad += g;
    }
    const double inv = 1.0 / static_cast<double>(n_);
    if (grad) *grad *= inv;
    return total * inv;
  }

  // Matrix of per-row gradients, n x p.
  Matrix row_gradients(const Vector& theta) const {
    Matrix out(n_, static_cast<Eigen::Index>(p_));
    Vector g(static_cast<Eigen::Index>(p_)), work(static_cast<Eigen::Index>(p_));
    for (Eigen::Index i = 0; i < n_; ++i) {
      row(i, theta, &g, work);
      out.row(i) = g.transpose();
    }
    return out;
  }

 private:
  const Matrix& features_primary() const {
    switch (method_) {
      case EstimatorMethod::kOracle: return *data_.clean;
      case EstimatorMethod::kSl: return *data_.x2;
      default: return *data_.x1;
    }
  }
  static std::span<const double> feature_row(const Matrix& m, Eigen::Index i) {
    return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
  }
  std::span<const double> publics_row(Eigen::Index i) const {
    if (data_.publics.cols() == 0) return {};
    return feature_row(data_.publics, i);
  }

  const Loss& loss_;
  EstimatorMethod method_;
  const EstimationData& data_;
  bool omit_;
  Eigen::Index n_ = 0;
  std::size_t p_ = 0;
};

struct EstimateOptions {
  OptimOptions optim;
  // SL with a loss lacking a Laplacian: fall back to l(x2) instead of
  // raising a capability error.
  bool sl_omit_laplacian = false;
  // Skip the sandwich covariance (simulation loops that only need theta).
  bool covariance = true;
  std::optional<Vector> theta0;
};

struct EstimateReport {
  std::string method;
  std::string loss;
  Vector theta_hat;
  SquareMatrix covariance;
  Vector std_errors;
  double objective = 0.0;
  int iterations = 0;
  int evaluations = 0;
  int restarts_used = 0;
  double grad_norm = 0.0;
  bool converged = false;
  std::string optimizer;
  Eigen::Index n = 0;
  std::optional<NoiseParams> params;

  nlohmann::json to_json() const {
    auto vec = [](const Vector& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    nlohmann::json j;
    j["method"] = method;
    j["loss"] = loss;
    j["n"] = n;
    j["theta_hat"] = vec(theta_hat);
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index r = 0; r < covariance.rows(); ++r) {
      cov.push_back(vec(covariance.row(r).transpose()));
    }
    j["covariance"] = cov;
    j["std_errors"] = vec(std_errors);
    j["objective"] = objective;
    j["diagnostics"] = {{"iterations", iterations},
                        {"evaluations", evaluations},
                        {"restarts_used", restarts_used},
                        {"grad_norm", grad_norm},
                        {"converged", converged},
                        {"optimizer", optimizer}};
    if (params) {
      j["zero_mass"] = params->zero_mass;
      j["lambda"] = params->scale;
    }
    return j;
  }
};

// V^{-1} A V^{-1} / n at theta_hat. A is the mean outer product of per-row
// corrected gradients; V is a symmetrised central-difference Jacobian of the
// mean gradient. The step is n^{-1/5} (1 + |theta|) for losses that are not
// smooth in theta and 1e-5 (1 + |theta|) otherwise.
inline SquareMatrix sandwich_covariance(const CorrectedLoss& objective,
                                        const Vector& theta_hat,
                                        SquareMatrix* middle_out = nullptr,
                                        SquareMatrix* bread_out = nullptr) {
  const Eigen::Index p = theta_hat.size();
  const double n = static_cast<double>(objective.rows());
  const Matrix g = objective.row_gradients(theta_hat);
  SquareMatrix a = (g.transpose() * g) / n;
  const double base = objective.loss().smooth_in_theta()
                          ? 1e-5
                          : std::pow(n, -0.2);
  const double h = base * (1.0 + theta_hat.norm());
  SquareMatrix v(p, p);
  Vector gp(p), gm(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    Vector tp = theta_hat, tm = theta_hat;
    tp[k] += h;
    tm[k] -= h;
    objective.mean(tp, &gp);
    objective.mean(tm, &gm);
    v.col(k) = (gp - gm) / (2.0 * h);
  }
  v = 0.5 * (v + v.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<SquareMatrix> eig(v);
  const Vector ev = eig.eigenvalues().cwiseAbs();
  const double cond = ev.maxCoeff() / ev.minCoeff();
  if (!(cond <= 1e10)) {
    throw InferenceError("sandwich covariance: Jacobian V is singular "
                         "(condition number " + format_double(cond) +
                         "); a larger sample is needed");
  }
  const SquareMatrix vinv =
      eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
      eig.eigenvectors().transpose();
  SquareMatrix cov = vinv * a * vinv / n;
  cov = 0.5 * (cov + cov.transpose()).eval();
  if (middle_out) *middle_out = a;
  if (bread_out) *bread_out = v;
  return cov;
}

// Runs one estimator. Corrected methods warm-start from the naive estimate
// and multistart when the loss can make the objective nonconvex.
inline EstimateReport estimate(EstimatorMethod method, const Loss& loss,
                               const EstimationData& data,
                               const EstimateOptions& options = {}) {
  CorrectedLoss obj(loss, method, data, options.sl_omit_laplacian);
  const Eigen::Index p = static_cast<Eigen::Index>(obj.param_dim());
  OptimOptions optim = options.optim;
  optim.smooth = loss.smooth_in_theta();

  Vector start = options.theta0.value_or(Vector::Zero(p));
  if (start.size() != p) throw ParameterError("theta0 has the wrong length");
  auto solve = [&](const CorrectedLoss& o, const Vector& x0, int restarts) {
    OptimOptions opt = optim;
    opt.restarts = restarts;
    opt.method = OptimMethod::kMultistart;
    if (options.optim.method != OptimMethod::kMultistart) {
      opt.local_method = options.optim.method;
    }
    const SmoothedObjective family = [&](const Vector& t, double h, Vector* g) {
      return o.mean_smoothed(t, h, g);
    };
    return minimize([&](const Vector& t, Vector* g) { return o.mean(t, g); },
                    x0, opt, loss.has_smoothing() ? &family : nullptr);
  };

  const bool corrected = method != EstimatorMethod::kOracle &&
                         method != EstimatorMethod::kNaive;
  if (corrected && !options.theta0 && data.x1) {
    CorrectedLoss naive(loss, EstimatorMethod::kNaive, data);
    start = solve(naive, start, 1).theta;
  }
  const int restarts =
      corrected && loss.possibly_nonconvex() ? options.optim.restarts : 1;
  const OptimResult r = solve(obj, start, restarts);

  EstimateReport rep;
  rep.method = to_string(method);
  rep.loss = loss.name();
  rep.theta_hat = r.theta;
  rep.objective = r.value;
  rep.iterations = r.iterations;
  rep.evaluations = r.evaluations;
  rep.restarts_used = r.restarts_used;
  rep.grad_norm = r.grad_norm;
  rep.converged = r.converged;
  rep.optimizer = r.method;
  rep.n = obj.rows();
  rep.params = data.params;
  if (options.covariance) {
    rep.covariance = sandwich_covariance(obj, r.theta);
    rep.std_errors = rep.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    rep.covariance = SquareMatrix::Constant(p, p, std::nan(""));
    rep.std_errors = Vector::Constant(p, std::nan(""));
  }
  return rep;
}

// Linear model y = x'theta + e with E x = 0, Cov x = Sigma_x, Var e = sigma2,
// x observed through the doubly-random release.
struct LinearModelSpec {
  SquareMatrix sigma_x;
  double sigma2 = 1.0;
  Vector theta;
  NoiseParams params;

  void validate() const {
    const Eigen::Index p = theta.size();
    if (sigma_x.rows() != p || sigma_x.cols() != p) {
      throw ParameterError("Sigma_x must be p x p");
    }
    if ((sigma_x - sigma_x.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * (1.0 + sigma_x.cwiseAbs().maxCoeff())) {
      throw ParameterError("Sigma_x must be symmetric");
    }
    Eigen::LLT<SquareMatrix> llt(sigma_x);
    if (llt.info() != Eigen::Success) {
      throw ParameterError("Sigma_x must be positive definite");
    }
    if (!(sigma2 >= 0.0)) throw ParameterError("sigma2 must be >= 0");
    if (!(params.zero_mass > 0.0 && params.zero_mass < 1.0)) {
      throw ParameterError("zero_mass must lie in (0, 1)");
    }
    if (!(params.scale >= 0.0)) throw ParameterError("scale must be >= 0");
  }
};

namespace detail {

struct LinearPieces {
  SquareMatrix sinv;
  SquareMatrix sl;  // AsyVar(SL)
  SquareMatrix m;   // Sigma^{-1} V Sigma^{-1}
};

inline LinearPieces linear_pieces(const LinearModelSpec& s) {
  s.validate();
  const Eigen::Index p = s.theta.size();
  const SquareMatrix id = SquareMatrix::Identity(p, p);
  const double l2 = s.params.scale * s.params.scale, l4 = l2 * l2;
  const double t2 = s.theta.squaredNorm();
  const SquareMatrix tt = s.theta * s.theta.transpose();
  const SquareMatrix sinv = s.sigma_x.llt().solve(id);
  const SquareMatrix inner = s.sigma2 * s.sigma_x + l2 * t2 * s.sigma_x +
                             s.sigma2 * l2 * id + 2.0 * l4 * t2 * id +
                             3.0 * l4 * tt;
  const SquareMatrix v = l2 * t2 * s.sigma_x + s.sigma2 * l2 * id +
                         2.0 * l4 * t2 * id +
                         (2.0 + s.params.zero_mass) * l4 * tt;
  return {sinv, sinv * inner * sinv, sinv * v * sinv};
}

}  // namespace detail

// Closed-form asymptotic covariance of sqrt(n)(theta_hat - theta) under the
// squared loss for the sl, drcl and sdrcl estimators.
inline SquareMatrix linear_asyvar(EstimatorMethod method,
                                  const LinearModelSpec& spec) {
  const auto pc = detail::linear_pieces(spec);
  const double zm = spec.params.zero_mass;
  switch (method) {
    case EstimatorMethod::kSl: return pc.sl;
    case EstimatorMethod::kDrcl: return pc.sl - (2.0 - 1.0 / zm) * pc.m;
    case EstimatorMethod::kSdrcl: return pc.sl - zm * pc.m;
    default: break;
  }
  throw ParameterError("linear_asyvar: method must be sl, drcl or sdrcl");
}

}  // namespace zildp
