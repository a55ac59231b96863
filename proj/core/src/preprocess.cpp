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

#include "delaysync/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "delaysync/error.hpp"
#include "delaysync/phase.hpp"

namespace delaysync {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_length(const ChainRecord& chain, const SubcarrierLayout& layout) {
    if (chain.csi.size() != layout.count)
        throw Error(ErrorCode::LengthMismatch, "chain has " + std::to_string(chain.csi.size()) +
                                                   " subcarriers, layout expects " + std::to_string(layout.count));
}

double lerp_at(int k, int k0, double v0, int k1, double v1) {
    const double t = static_cast<double>(k - k0) / static_cast<double>(k1 - k0);
    return v0 + t * (v1 - v0);
}

// Unwrapped phases of subcarriers [first, last].
RealVector unwrapped_span(const ChainRecord& chain, const SubcarrierLayout& layout, int first, int last) {
    RealVector wrapped;
    wrapped.reserve(static_cast<std::size_t>(last - first + 1));
    for (int k = first; k <= last; ++k) wrapped.push_back(std::arg(chain.csi[layout.position(k)]));
    return unwrap_phase(wrapped);
}

}  // namespace

double mean_power(std::span<const cplx> csi) noexcept {
    if (csi.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& h : csi) sum += std::norm(h);
    return sum / static_cast<double>(csi.size());
}

ChainRecord interpolate_pilots(const ChainRecord& chain, const SubcarrierLayout& layout) {
    check_length(chain, layout);
    ChainRecord out = chain;
    for (auto [lo, hi] : contiguous_runs(layout.pilot_indices)) {
        const int left = lo - 1, right = hi + 1;
        if (!layout.contains(left) || !layout.contains(right))
            throw Error(ErrorCode::InsufficientContext, "pilot run at " + std::to_string(lo) + " touches the band edge");
        const cplx hl = chain.csi[layout.position(left)];
        const cplx hr = chain.csi[layout.position(right)];
        const double pl = std::arg(hl);
        const double pr = pl + wrap_phase(std::arg(hr) - pl);
        for (int k = lo; k <= hi; ++k) {
            const double mag = lerp_at(k, left, std::abs(hl), right, std::abs(hr));
            out.csi[layout.position(k)] = std::polar(mag, lerp_at(k, left, pl, right, pr));
        }
    }
    return out;
}

ChainRecord interpolate_dc_gap(const ChainRecord& chain, const SubcarrierLayout& layout, std::size_t context) {
    check_length(chain, layout);
    if (layout.dc_indices.empty())
        throw Error(ErrorCode::InvalidConfig, "layout has no DC subcarriers to interpolate");
    if (context < 2) throw Error(ErrorCode::InvalidArgument, "DC regression needs at least two context subcarriers");

    ChainRecord out = chain;
    const int ctx = static_cast<int>(context);
    for (auto [lo, hi] : contiguous_runs(layout.dc_indices)) {
        const int below_first = lo - ctx, below_last = lo - 1;
        const int above_first = hi + 1, above_last = hi + ctx;
        auto is_dc = [&](int k) { return std::binary_search(layout.dc_indices.begin(), layout.dc_indices.end(), k); };
        bool ok = layout.contains(below_first) && layout.contains(above_last);
        for (int k = below_first; ok && k <= below_last; ++k) ok = !is_dc(k);
        for (int k = above_first; ok && k <= above_last; ++k) ok = !is_dc(k);
        if (!ok)
            throw Error(ErrorCode::InsufficientContext,
                        "DC gap " + std::to_string(lo) + ".." + std::to_string(hi) + " lacks " +
                            std::to_string(context) + " valid subcarriers on each side");

        RealVector xs, ys;
        const RealVector below = unwrapped_span(chain, layout, below_first, below_last);
        for (int k = below_first; k <= below_last; ++k) xs.push_back(k);
        ys = below;

        // Step 1: resolve the 2*pi ambiguity of the first subcarrier above the gap.
        const LineFit lower = fit_line(xs, ys);
        const double predicted = lower.at(above_first);
        RealVector above = unwrapped_span(chain, layout, above_first, above_last);
        const double turns = std::round((predicted - above.front()) / kTwoPi);
        for (std::size_t i = 0; i < above.size(); ++i) {
            above[i] += kTwoPi * turns;
            xs.push_back(above_first + static_cast<int>(i));
            ys.push_back(above[i]);
        }

        // Step 2: regress across both flanks and fill.
        const LineFit both = fit_line(xs, ys);
        const double mag_lo = std::abs(chain.csi[layout.position(below_last)]);
        const double mag_hi = std::abs(chain.csi[layout.position(above_first)]);
        for (int k = lo; k <= hi; ++k)
            out.csi[layout.position(k)] = std::polar(lerp_at(k, below_last, mag_lo, above_first, mag_hi), both.at(k));
    }
    return out;
}

ChainRecord repair_notches(const ChainRecord& chain, const SubcarrierLayout& layout) {
    check_length(chain, layout);
    ChainRecord out = chain;
    for (auto [lo, hi] : contiguous_runs(layout.notch_indices)) {
        const int left = lo - 1, right = hi + 1;
        if (!layout.contains(left) || !layout.contains(right))
            throw Error(ErrorCode::InvalidConfig, "notch run at " + std::to_string(lo) + " touches the band edge");
        const double ml = std::abs(chain.csi[layout.position(left)]);
        const double mr = std::abs(chain.csi[layout.position(right)]);
        for (int k = lo; k <= hi; ++k) {
            auto& h = out.csi[layout.position(k)];
            h = std::polar(lerp_at(k, left, ml, right, mr), std::arg(h));
        }
    }
    return out;
}

void FlatteningAccumulator::add(const ChainRecord& chain) {
    if (power_sum_.empty()) power_sum_.assign(chain.csi.size(), 0.0);
    if (chain.csi.size() != power_sum_.size())
        throw Error(ErrorCode::LengthMismatch, "flattening frames disagree in subcarrier count");
    for (std::size_t i = 0; i < power_sum_.size(); ++i) power_sum_[i] += std::norm(chain.csi[i]);
    ++frames_;
}

PowerFlatteningProfile FlatteningAccumulator::finish() const {
    if (frames_ < 2) throw Error(ErrorCode::EmptyCapture, "flattening needs at least two frames");
    PowerFlatteningProfile profile;
    profile.frames_used = frames_;
    profile.per_subcarrier_gain.assign(power_sum_.size(), 1.0);

    double log_sum = 0.0;
    std::size_t live = 0;
    for (double p : power_sum_) {
        if (p > 0.0 && std::isfinite(p)) {
            log_sum += std::log(p);
            ++live;
        }
    }
    if (live == 0) return profile;
    const double geo_mean = std::exp(log_sum / static_cast<double>(live));
    for (std::size_t i = 0; i < power_sum_.size(); ++i) {
        const double p = power_sum_[i];
        if (p > 0.0 && std::isfinite(p)) profile.per_subcarrier_gain[i] = geo_mean / p;
    }
    return profile;
}

PowerFlatteningProfile estimate_flattening(std::span<const CsiFrame> frames, std::size_t chain, std::size_t max_frames) {
    const std::size_t n = max_frames == 0 ? frames.size() : std::min(max_frames, frames.size());
    FlatteningAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
        if (chain >= frames[i].chains.size())
            throw Error(ErrorCode::InvalidArgument, "chain index out of range", i);
        acc.add(frames[i].chains[chain]);
    }
    return acc.finish();
}

ChainRecord apply_flattening(const ChainRecord& chain, const PowerFlatteningProfile& profile) {
    if (chain.csi.size() != profile.per_subcarrier_gain.size())
        throw Error(ErrorCode::LengthMismatch, "flattening profile length differs from the chain");
    ChainRecord out = chain;
    for (std::size_t i = 0; i < out.csi.size(); ++i) out.csi[i] *= std::sqrt(profile.per_subcarrier_gain[i]);
    return out;
}

bool detect_and_fix_swap(CsiFrame& frame, CalibrationState& state, std::size_t a, std::size_t b) {
    if (a == b || a >= frame.chains.size() || b >= frame.chains.size())
        throw Error(ErrorCode::InvalidArgument, "swap tracking needs two distinct valid chain indices");

    auto magnitudes = [](const ChainRecord& c) {
        RealVector m(c.csi.size());
        std::transform(c.csi.begin(), c.csi.end(), m.begin(), [](const cplx& h) { return std::abs(h); });
        return m;
    };
    auto distance = [](const RealVector& x, const RealVector& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    };

    RealVector ma = magnitudes(frame.chains[a]);
    RealVector mb = magnitudes(frame.chains[b]);
    bool swapped = false;
    if (state.prev_magnitudes && state.prev_magnitudes->size() == 2 && (*state.prev_magnitudes)[0].size() == ma.size() &&
        (*state.prev_magnitudes)[1].size() == mb.size()) {
        const auto& prev = *state.prev_magnitudes;
        const double straight = distance(ma, prev[0]) + distance(mb, prev[1]);
        const double crossed = distance(ma, prev[1]) + distance(mb, prev[0]);
        if (crossed < straight) {
            std::swap(frame.chains[a], frame.chains[b]);
            std::swap(ma, mb);
            swapped = true;
        }
    }
    state.prev_magnitudes = std::vector<RealVector>{std::move(ma), std::move(mb)};
    return swapped;
}

CsiFrame scale_to_reference(const CsiFrame& frame, const CalibrationParams& params, std::size_t ref_chain,
                            std::size_t target_chain) {
    if (ref_chain >= frame.chains.size() || target_chain >= frame.chains.size())
        throw Error(ErrorCode::InvalidArgument, "chain index out of range");
    const auto& ref = frame.chains[ref_chain];
    const auto& target = frame.chains[target_chain];
    if (!ref.rss_dbm || !target.rss_dbm || !std::isfinite(*ref.rss_dbm) || !std::isfinite(*target.rss_dbm))
        throw Error(ErrorCode::MissingRss, "reference scaling needs RSS on both chains");

    const double ref_power = mean_power(ref.csi);
    if (!(ref_power > 0.0)) throw Error(ErrorCode::NoSignal, "reference chain carries no power");

    const double ref_scale = params.free_space_gain() / ref_power;
    const double target_scale = ref_scale * std::pow(10.0, (*target.rss_dbm - *ref.rss_dbm) / 10.0);

    CsiFrame out = frame;
    for (auto& h : out.chains[ref_chain].csi) h *= std::sqrt(ref_scale);
    for (auto& h : out.chains[target_chain].csi) h *= std::sqrt(target_scale);
    return out;
}

}  // namespace delaysync
