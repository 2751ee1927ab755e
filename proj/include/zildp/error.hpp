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

#include <stdexcept>
#include <string>

namespace zildp {

// Base of every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid argument to an operation (non-positive scale, probability out of
// range, mismatched shapes).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input data that violates its declared schema or support.
class DataError : public Error {
 public:
  using Error::Error;
};

// Evaluation point outside the domain of a function, e.g. an infinite
// quantile or the singular point of a density.
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested privacy target cannot be met.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// A loss lacks the capability a corrected loss needs (x-Laplacian).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Non-finite objective values or failed convergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Variance estimation failed (singular Hessian estimate).
class InferenceError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail
}  // namespace zildp
