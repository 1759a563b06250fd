// Copyright 2026 The toric-rl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace toric {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for a binomial proportion (z = 1.96 gives 95%).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.96);

/// Least-squares slope and intercept of y against x.
std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y);

/// n choose k as a double.
double binomial(int n, int k);

}  // namespace toric
