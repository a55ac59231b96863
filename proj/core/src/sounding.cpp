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

#include "delaysync/sounding.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

#include "delaysync/error.hpp"

namespace delaysync {

namespace {

// The FFTW planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

const char* to_string(WindowKind kind) noexcept {
    return kind == WindowKind::Blackman ? "blackman" : "rectangular";
}

WindowKind window_from_string(const std::string& name) {
    if (name == "blackman") return WindowKind::Blackman;
    if (name == "rectangular" || name == "rect" || name == "none") return WindowKind::Rectangular;
    throw Error(ErrorCode::InvalidArgument, "unknown window '" + name + "'");
}

RealVector blackman_window(std::size_t n_points) {
    if (n_points < 3) throw Error(ErrorCode::InvalidArgument, "Blackman window needs at least 3 points");
    RealVector w(n_points);
    const double denom = static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double x = 2.0 * std::numbers::pi * static_cast<double>(i) / denom;
        w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
    }
    // Pin the exact endpoint and centre values the cosines only approximate.
    w.front() = w.back() = 0.0;
    if (n_points % 2 == 1) w[n_points / 2] = 1.0;
    return w;
}

RealVector make_window(WindowKind kind, std::size_t n_points) {
    if (kind == WindowKind::Blackman) return blackman_window(n_points);
    return RealVector(n_points, 1.0);
}

ComplexVector window_and_compensate(std::span<const cplx> csi, WindowKind kind) {
    if (csi.size() < 3) throw Error(ErrorCode::InvalidArgument, "windowing needs at least 3 subcarriers");
    const RealVector w = make_window(kind, csi.size());
    const double gain = static_cast<double>(w.size()) / std::accumulate(w.begin(), w.end(), 0.0);
    ComplexVector out(csi.size());
    for (std::size_t i = 0; i < csi.size(); ++i) out[i] = csi[i] * (w[i] * gain);
    return out;
}

std::size_t padded_grid_size(const SubcarrierLayout& layout, std::size_t kappa) {
    if (kappa == 0) throw Error(ErrorCode::InvalidArgument, "oversampling factor must be >= 1");
    return kappa * std::bit_ceil(layout.count);
}

double delay_bin_width(const SubcarrierLayout& layout, std::size_t kappa) {
    return 1.0 / (static_cast<double>(padded_grid_size(layout, kappa)) * layout.spacing_hz);
}

ComplexVector circular_shift(std::span<const cplx> taps, long long bins) {
    const auto n = static_cast<long long>(taps.size());
    ComplexVector out(taps.size());
    if (n == 0) return out;
    const long long s = ((bins % n) + n) % n;
    for (long long i = 0; i < n; ++i) out[static_cast<std::size_t>((i + s) % n)] = taps[static_cast<std::size_t>(i)];
    return out;
}

double total_energy(std::span<const cplx> v) noexcept {
    double e = 0.0;
    for (const auto& x : v) e += std::norm(x);
    return e;
}

struct DelayTransform::Impl {
    SubcarrierLayout layout;
    std::size_t kappa;
    std::size_t grid;
    RealVector window;
    double compensation;
    fftw_complex* buffer = nullptr;
    fftw_plan plan = nullptr;

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (plan) fftw_destroy_plan(plan);
        if (buffer) fftw_free(buffer);
    }
};

DelayTransform::DelayTransform(const SubcarrierLayout& layout, std::size_t kappa, WindowKind window)
    : impl_(std::make_unique<Impl>()) {
    layout.validate();
    impl_->layout = layout;
    impl_->kappa = kappa;
    impl_->grid = padded_grid_size(layout, kappa);
    if (layout.index_min <= -static_cast<long long>(impl_->grid / 2) ||
        layout.index_max >= static_cast<long long>(impl_->grid / 2))
        throw Error(ErrorCode::InvalidConfig, "subcarrier indices do not fit the padded grid");
    impl_->window = make_window(window, layout.count);
    impl_->compensation =
        static_cast<double>(layout.count) / std::accumulate(impl_->window.begin(), impl_->window.end(), 0.0);

    std::lock_guard lock(planner_mutex());
    impl_->buffer = fftw_alloc_complex(impl_->grid);
    impl_->plan = fftw_plan_dft_1d(static_cast<int>(impl_->grid), impl_->buffer, impl_->buffer, FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
    if (!impl_->plan) throw Error(ErrorCode::InvalidConfig, "FFT planning failed");
}

DelayTransform::~DelayTransform() = default;
DelayTransform::DelayTransform(DelayTransform&&) noexcept = default;
DelayTransform& DelayTransform::operator=(DelayTransform&&) noexcept = default;

std::size_t DelayTransform::grid_size() const noexcept { return impl_->grid; }
double DelayTransform::delay_bin_s() const noexcept {
    return 1.0 / (static_cast<double>(impl_->grid) * impl_->layout.spacing_hz);
}
const RealVector& DelayTransform::window() const noexcept { return impl_->window; }

ImpulseResponse DelayTransform::transform(std::span<const cplx> csi) {
    const auto& layout = impl_->layout;
    if (csi.size() != layout.count)
        throw Error(ErrorCode::LengthMismatch, "CSI has " + std::to_string(csi.size()) + " entries, layout expects " +
                                                   std::to_string(layout.count));
    const auto n = static_cast<long long>(impl_->grid);
    std::fill_n(reinterpret_cast<double*>(impl_->buffer), 2 * impl_->grid, 0.0);
    for (std::size_t pos = 0; pos < csi.size(); ++pos) {
        const long long k = layout.index_at(pos);
        const auto bin = static_cast<std::size_t>(((k % n) + n) % n);
        const cplx v = csi[pos] * (impl_->window[pos] * impl_->compensation);
        impl_->buffer[bin][0] = v.real();
        impl_->buffer[bin][1] = v.imag();
    }
    fftw_execute(impl_->plan);

    ImpulseResponse ir;
    ir.delay_bin_s = delay_bin_s();
    ir.delay_origin_s = 0.0;
    ir.resolution_s = 1.0 / layout.bandwidth_hz();
    ir.taps.resize(impl_->grid);
    const double scale = 1.0 / static_cast<double>(layout.count);
    for (std::size_t i = 0; i < impl_->grid; ++i)
        ir.taps[i] = cplx(impl_->buffer[i][0], impl_->buffer[i][1]) * scale;
    return ir;
}

ImpulseResponse to_impulse_response(std::span<const cplx> csi, const SubcarrierLayout& layout, std::size_t kappa,
                                    WindowKind window) {
    if (csi.size() != layout.count)
        throw Error(ErrorCode::LengthMismatch, "CSI length differs from the layout");
    DelayTransform t(layout, kappa, window);
    return t.transform(csi);
}

}  // namespace delaysync
