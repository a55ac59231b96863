// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <span>
#include <vector>

#include "delaysync/types.hpp"

namespace delaysync {

/// Removes 2*pi jumps so adjacent differences lie in (-pi, pi]. Each output
/// differs from its input by an integer multiple of 2*pi.
RealVector unwrap_phase(std::span<const double> phases);

/// Wraps an angle to (-pi, pi].
double wrap_phase(double phase) noexcept;

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double at(double x) const noexcept { return intercept + slope * x; }
};

/// Ordinary least-squares line through (x, y). Needs at least two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace delaysync
