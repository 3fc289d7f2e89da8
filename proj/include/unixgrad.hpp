// Copyright (C) 2026 The unixgrad Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef UNIXGRAD_HPP
#define UNIXGRAD_HPP

#include "unixgrad/baselines.hpp"
#include "unixgrad/common.hpp"
#include "unixgrad/data.hpp"
#include "unixgrad/diagnostics.hpp"
#include "unixgrad/experiment.hpp"
#include "unixgrad/geometry.hpp"
#include "unixgrad/oracles.hpp"
#include "unixgrad/report.hpp"
#include "unixgrad/rng.hpp"
#include "unixgrad/solver.hpp"

#endif  // UNIXGRAD_HPP
