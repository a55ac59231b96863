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

#include "delaysync/phase.hpp"

#include <cmath>
#include <numbers>

#include "delaysync/error.hpp"

namespace delaysync {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double wrap_phase(double phase) noexcept {
    // ceil keeps the interval half-open at -pi.
    return phase - kTwoPi * std::ceil((phase - std::numbers::pi) / kTwoPi);
}

RealVector unwrap_phase(std::span<const double> phases) {
    RealVector out(phases.begin(), phases.end());
    for (std::size_t i = 1; i < out.size(); ++i) {
        // Integer turn count putting out[i] - out[i-1] in (-pi, pi].
        const double turns = std::floor((out[i - 1] - phases[i] + std::numbers::pi) / kTwoPi);
        out[i] = phases[i] + kTwoPi * turns;
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::InvalidArgument, "fit_line needs at least two paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw Error(ErrorCode::InvalidArgument, "fit_line needs distinct abscissae");
    const double slope = sxy / sxx;
    return {my - slope * mx, slope};
}

}  // namespace delaysync
