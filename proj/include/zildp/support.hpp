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
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "zildp/error.hpp"

namespace zildp {

// Per-attribute bounds of the data support. Columns with private_mask set
// are noised on release and determine the privacy constants.
struct SupportBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<bool> private_mask;
  std::vector<std::string> column_names;

  std::size_t dim() const { return lower.size(); }

  std::size_t masked_count() const {
    std::size_t k = 0;
    for (bool m : private_mask) k += m ? 1 : 0;
    return k;
  }

  std::vector<std::size_t> masked_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < private_mask.size(); ++j) {
      if (private_mask[j]) out.push_back(j);
    }
    return out;
  }

  std::vector<std::size_t> public_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < private_mask.size(); ++j) {
      if (!private_mask[j]) out.push_back(j);
    }
    return out;
  }

  void validate() const {
    if (lower.empty()) throw ParameterError("support: no columns");
    if (upper.size() != lower.size() || private_mask.size() != lower.size()) {
      throw ParameterError(
          "support: lower, upper and private_mask must have equal length");
    }
    if (!column_names.empty() && column_names.size() != lower.size()) {
      throw ParameterError("support: column_names length mismatch");
    }
    for (std::size_t j = 0; j < lower.size(); ++j) {
      if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) ||
          !(lower[j] < upper[j])) {
        throw ParameterError("support: column " + std::to_string(j) +
                             " needs finite lower < upper");
      }
    }
  }

  // Uniform box [lo, hi]^d with every column private.
  static SupportBox cube(std::size_t d, double lo, double hi) {
    SupportBox box;
    box.lower.assign(d, lo);
    box.upper.assign(d, hi);
    box.private_mask.assign(d, true);
    return box;
  }
};

// max_j diam(X_j) over masked columns.
inline double diam_attribute(const SupportBox& support) {
  support.validate();
  if (support.masked_count() == 0) {
    throw ParameterError("diam_attribute: support has no masked columns");
  }
  double best = 0.0;
  for (std::size_t j : support.masked_columns()) {
    best = std::max(best, support.upper[j] - support.lower[j]);
  }
  return best;
}

// Euclidean diameter of the masked sub-box.
inline double diam_individual(const SupportBox& support) {
  support.validate();
  if (support.masked_count() == 0) {
    throw ParameterError("diam_individual: support has no masked columns");
  }
  double sum = 0.0;
  for (std::size_t j : support.masked_columns()) {
    const double w = support.upper[j] - support.lower[j];
    sum += w * w;
  }
  return std::sqrt(sum);
}

inline nlohmann::json to_json(const SupportBox& support) {
  nlohmann::json j;
  j["lower"] = support.lower;
  j["upper"] = support.upper;
  j["private_mask"] = support.private_mask;
  j["column_names"] = support.column_names;
  return j;
}

inline SupportBox support_from_json(const nlohmann::json& j) {
  SupportBox box;
  try {
    box.lower = j.at("lower").get<std::vector<double>>();
    box.upper = j.at("upper").get<std::vector<double>>();
    box.private_mask = j.at("private_mask").get<std::vector<bool>>();
    if (j.contains("column_names")) {
      box.column_names = j.at("column_names").get<std::vector<std::string>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("support JSON: ") + e.what());
  }
  try {
    box.validate();
  } catch (const ParameterError& e) {
    throw DataError(e.what());
  }
  return box;
}

inline SupportBox read_support(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open support file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("support file " + path.string() + ": " + e.what());
  }
  return support_from_json(j);
}

}  // namespace zildp
