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

#include "zildp/distributions.hpp"
#include "zildp/error.hpp"
#include "zildp/estimation.hpp"
#include "zildp/harness.hpp"
#include "zildp/io.hpp"
#include "zildp/losses.hpp"
#include "zildp/mechanism.hpp"
#include "zildp/optimize.hpp"
#include "zildp/quadrature.hpp"
#include "zildp/rng.hpp"
#include "zildp/roots.hpp"
#include "zildp/special.hpp"
#include "zildp/support.hpp"
#include "zildp/tradeoff.hpp"
