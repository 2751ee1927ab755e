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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "zildp/distributions.hpp"
#include "zildp/error.hpp"
#include "zildp/io.hpp"
#include "zildp/linalg.hpp"
#include "zildp/parallel.hpp"
#include "zildp/rng.hpp"
#include "zildp/support.hpp"
#include "zildp/tradeoff.hpp"

namespace zildp {

// A data matrix together with its declared support.
struct Dataset {
  Matrix values;
  std::vector<std::string> column_names;
  SupportBox support;

  // Masked columns must lie inside the support; out-of-support values are
  // rejected rather than clamped.
  void validate() const {
    support.validate();
    if (static_cast<std::size_t>(values.cols()) != support.dim()) {
      throw DataError("dataset has " + std::to_string(values.cols()) +
                      " columns but the support declares " +
                      std::to_string(support.dim()));
    }
    if (!column_names.empty() &&
        column_names.size() != static_cast<std::size_t>(values.cols())) {
      throw DataError("dataset column_names length mismatch");
    }
    if (values.rows() == 0) throw DataError("dataset has no rows");
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double v = values(i, j);
        if (!std::isfinite(v)) {
          throw DataError("non-finite value at row " + std::to_string(i) +
                          ", column " + std::to_string(j));
        }
        if (support.private_mask[j] &&
            (v < support.lower[j] || v > support.upper[j])) {
          throw DataError("value " + format_double(v) + " at row " +
                          std::to_string(i) + ", column " + std::to_string(j) +
                          " lies outside [" + format_double(support.lower[j]) +
                          ", " + format_double(support.upper[j]) + "]");
        }
      }
    }
  }
};

// Reads a CSV and attaches the support; names from the support file win when
// present, otherwise the CSV header is used.
inline Dataset load_dataset(const std::filesystem::path& csv,
                            const SupportBox& support) {
  CsvTable table = read_numeric_csv(csv);
  Dataset data;
  data.values = std::move(table.values);
  data.column_names = std::move(table.header);
  data.support = support;
  if (data.support.column_names.empty()) {
    data.support.column_names = data.column_names;
  }
  data.validate();
  return data;
}

// Output of the doubly-random release.
struct ReleaseBundle {
  Matrix x1;
  Matrix x2;
  NoiseParams params;
  SupportBox support;
  std::vector<std::string> column_names;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::string generator = kGeneratorName;
  std::string created_at;
};

// ISO-8601 UTC timestamp. SOURCE_DATE_EPOCH, when set, pins it so repeated
// runs produce identical metadata.
inline std::string creation_timestamp() {
  std::time_t t;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline void check_release_inputs(const Dataset& data,
                                 const NoiseParams& params) {
  params.validate();
  data.validate();
  if (data.support.masked_count() == 0) {
    throw ParameterError("release requires at least one masked column");
  }
}

// Adds one joint noise vector per row to the masked columns. `draw` fills a
// masked-width buffer from the row's own stream.
template <class Draw>
void add_row_noise(Matrix& out, const std::vector<std::size_t>& masked,
                   const RngStream& base, Draw&& draw) {
  const std::size_t n = static_cast<std::size_t>(out.rows());
  parallel_for(n, [&](std::size_t i) {
    RngStream stream = base.substream(i);
    std::vector<double> noise(masked.size());
    draw(stream, std::span<double>(noise));
    for (std::size_t k = 0; k < masked.size(); ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(masked[k])) +=
          noise[k];
    }
  });
}

}  // namespace detail

// ZIL release: every row's masked columns receive one ZIL(zero_mass,
// scale^2 I) vector; the zero event is shared across the row. Row i uses
// rng.substream(i).
inline Matrix zil_release(const Dataset& data, const NoiseParams& params,
                          const RngStream& rng) {
  detail::check_release_inputs(data, params);
  Matrix out = data.values;
  detail::add_row_noise(out, data.support.masked_columns(), rng,
                        [&](RngStream& s, std::span<double> buf) {
                          draw_zil(s, params, buf);
                        });
  return out;
}

// Doubly-random release: x1 is the ZIL release (stream rng.substream(1)),
// x2 = x1 + SL(zero_mass * scale^2 I) on masked columns (rng.substream(2)).
inline ReleaseBundle drdp_release(const Dataset& data,
                                  const NoiseParams& params,
                                  const RngStream& rng) {
  detail::check_release_inputs(data, params);
  ReleaseBundle bundle;
  bundle.x1 = zil_release(data, params, rng.substream(1));
  bundle.x2 = bundle.x1;
  const double second_var = params.zero_mass * params.scale * params.scale;
  detail::add_row_noise(bundle.x2, data.support.masked_columns(),
                        rng.substream(2),
                        [&](RngStream& s, std::span<double> buf) {
                          draw_sl(s, second_var, buf);
                        });
  bundle.params = params;
  bundle.support = data.support;
  bundle.column_names = data.column_names;
  bundle.seed = rng.seed();
  bundle.stream_id = rng.stream_id();
  bundle.created_at = creation_timestamp();
  return bundle;
}

// Fast path used by the experiment harness: noise a matrix whose columns are
// all private, without support validation.
inline std::pair<Matrix, Matrix> drdp_noise_matrix(const Matrix& x,
                                                   const NoiseParams& params,
                                                   const RngStream& rng) {
  params.validate();
  const std::size_t d = static_cast<std::size_t>(x.cols());
  const std::size_t n = static_cast<std::size_t>(x.rows());
  Matrix x1 = x, x2(x.rows(), x.cols());
  const double second_var = params.zero_mass * params.scale * params.scale;
  RngStream first = rng.substream(1), second = rng.substream(2);
  std::vector<double> buf(d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    RngStream s1 = first.substream(i);
    draw_zil(s1, params, buf);
    for (std::size_t k = 0; k < d; ++k) x1(r, k) += buf[k];
    RngStream s2 = second.substream(i);
    draw_sl(s2, second_var, buf);
    for (std::size_t k = 0; k < d; ++k) x2(r, k) = x1(r, k) + buf[k];
  }
  return {std::move(x1), std::move(x2)};
}

struct PrivacyReport {
  double c_attribute = 0.0;
  double c_individual = 0.0;
  double zero_mass = 0.0;
  TradeoffCurve adp_curve;
  TradeoffCurve dp_curve;
  std::vector<double> epsilons;
  std::vector<double> adp_delta;  // delta~_{c_A, zero_mass}(eps)
  std::vector<double> dp_delta;   // delta~_{c_I, zero_mass}(eps)

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["c_attribute"] = c_attribute;
    j["c_individual"] = c_individual;
    j["zero_mass"] = zero_mass;
    nlohmann::json table = nlohmann::json::array();
    for (std::size_t k = 0; k < epsilons.size(); ++k) {
      table.push_back({{"epsilon", epsilons[k]},
                       {"delta_dp_attribute", adp_delta[k]},
                       {"delta_dp_individual", dp_delta[k]}});
    }
    j["profile"] = table;
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < adp_curve.size(); ++i) {
      pts.push_back({{"alpha", adp_curve.alphas[i]},
                     {"beta_attribute", adp_curve.betas[i]},
                     {"beta_individual", dp_curve.betas[i]}});
    }
    j["curve"] = pts;
    return j;
  }
};

inline std::vector<double> default_profile_epsilons() {
  return {0.5, 0.7, 0.9, 1.2, 1.6, 2.1, 2.8};
}

// c_A = diam_attribute / scale, c_I = diam_individual / scale, with the
// limiting zero-inflated curves and (epsilon, delta~) profiles for each.
inline PrivacyReport privacy_report(
    const SupportBox& support, const NoiseParams& params,
    std::size_t curve_points = 101,
    std::vector<double> epsilons = default_profile_epsilons()) {
  params.validate();
  PrivacyReport rep;
  rep.zero_mass = params.zero_mass;
  rep.c_attribute = diam_attribute(support) / params.scale;
  rep.c_individual = diam_individual(support) / params.scale;
  const auto grid = alpha_grid(curve_points);
  rep.adp_curve = tabulate_curve(
      "beta_{c_A,zero_mass}",
      [&](double a) { return beta_c_delta(a, rep.c_attribute, params.zero_mass); },
      grid);
  rep.dp_curve = tabulate_curve(
      "beta_{c_I,zero_mass}",
      [&](double a) {
        return beta_c_delta(a, rep.c_individual, params.zero_mass);
      },
      grid);
  rep.epsilons = std::move(epsilons);
  for (double e : rep.epsilons) {
    rep.adp_delta.push_back(
        delta_profile_zil(rep.c_attribute, e, params.zero_mass));
    rep.dp_delta.push_back(
        delta_profile_zil(rep.c_individual, e, params.zero_mass));
  }
  return rep;
}

inline nlohmann::json bundle_meta(const ReleaseBundle& bundle) {
  nlohmann::json j;
  j["zero_mass"] = bundle.params.zero_mass;
  j["lambda"] = bundle.params.scale;
  j["seed"] = bundle.seed;
  j["stream_id"] = bundle.stream_id;
  j["generator"] = bundle.generator;
  j["support"] = to_json(bundle.support);
  j["c_attribute"] = diam_attribute(bundle.support) / bundle.params.scale;
  j["c_individual"] = diam_individual(bundle.support) / bundle.params.scale;
  j["created_at"] = bundle.created_at;
  j["rows"] = bundle.x1.rows();
  return j;
}

// Writes <prefix>.x1.csv, <prefix>.x2.csv and <prefix>.meta.json.
inline std::vector<std::filesystem::path> write_bundle(
    const ReleaseBundle& bundle, const std::string& prefix) {
  std::vector<std::string> header = bundle.column_names;
  if (header.empty()) header = bundle.support.column_names;
  if (header.empty()) {
    for (Eigen::Index j = 0; j < bundle.x1.cols(); ++j) {
      header.push_back("x" + std::to_string(j + 1));
    }
  }
  const std::filesystem::path p1 = prefix + ".x1.csv";
  const std::filesystem::path p2 = prefix + ".x2.csv";
  const std::filesystem::path pm = prefix + ".meta.json";
  write_numeric_csv(p1, header, bundle.x1);
  write_numeric_csv(p2, header, bundle.x2);
  write_text_file(pm, bundle_meta(bundle).dump(2) + "\n");
  return {p1, p2, pm};
}

inline ReleaseBundle read_bundle(const std::string& prefix) {
  ReleaseBundle bundle;
  const std::filesystem::path pm = prefix + ".meta.json";
  std::ifstream in(pm);
  if (!in) throw DataError("cannot open " + pm.string());
  nlohmann::json meta;
  try {
    in >> meta;
    bundle.params.zero_mass = meta.at("zero_mass").get<double>();
    bundle.params.scale = meta.at("lambda").get<double>();
    bundle.seed = meta.at("seed").get<std::uint64_t>();
    bundle.stream_id = meta.value("stream_id", std::uint64_t{0});
    bundle.generator = meta.value("generator", std::string{});
    bundle.created_at = meta.value("created_at", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw DataError(pm.string() + ": " + e.what());
  }
  bundle.support = support_from_json(meta.at("support"));
  try {
    bundle.params.validate();
  } catch (const ParameterError& e) {
    throw DataError(pm.string() + ": " + e.what());
  }
  CsvTable t1 = read_numeric_csv(prefix + ".x1.csv");
  CsvTable t2 = read_numeric_csv(prefix + ".x2.csv");
  if (t1.values.rows() != t2.values.rows() ||
      t1.values.cols() != t2.values.cols()) {
    throw DataError("bundle " + prefix + ": x1 and x2 shapes differ");
  }
  if (static_cast<std::size_t>(t1.values.cols()) != bundle.support.dim()) {
    throw DataError("bundle " + prefix + ": width does not match support");
  }
  bundle.column_names = std::move(t1.header);
  bundle.x1 = std::move(t1.values);
  bundle.x2 = std::move(t2.values);
  return bundle;
}

}  // namespace zildp
