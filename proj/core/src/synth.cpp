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

#include "delaysync/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "delaysync/error.hpp"

namespace delaysync {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mt19937_64 frame_rng(std::uint64_t seed, std::size_t index) {
    const auto idx = static_cast<std::uint64_t>(index);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32), 0x5eedu};
    return std::mt19937_64(seq);
}

ComplexVector synthesize(const std::vector<Tap>& taps, const SubcarrierLayout& layout, double offset_s, cplx rotation) {
    ComplexVector h(layout.count, cplx{});
    for (const auto& tap : taps) {
        const double step = -kTwoPi * layout.spacing_hz * (tap.delay_s + offset_s);
        for (std::size_t pos = 0; pos < layout.count; ++pos)
            h[pos] += tap.gain * std::polar(1.0, step * static_cast<double>(layout.index_at(pos)));
    }
    for (auto& v : h) v *= rotation;
    return h;
}

Tap physical_tap(double delay_s, double extra_loss_db, double drift_mps, double fc) {
    Tap t;
    t.delay_s = delay_s;
    const double amp = friis_amplitude(delay_s * kSpeedOfLight, fc) * std::pow(10.0, -extra_loss_db / 20.0);
    t.gain = std::polar(amp, std::remainder(-kTwoPi * fc * delay_s, kTwoPi));
    t.drift_mps = drift_mps;
    return t;
}

}  // namespace

double friis_amplitude(double distance_m, double center_freq_hz) noexcept {
    return kSpeedOfLight / (4.0 * std::numbers::pi * center_freq_hz * distance_m);
}

void TapSet::validate(double max_delay_s) const {
    double prev = -1.0;
    for (const auto& t : taps) {
        if (!std::isfinite(t.delay_s) || t.delay_s < 0.0 || t.delay_s >= max_delay_s)
            throw Error(ErrorCode::InvalidConfig, "tap delay outside [0, 1/spacing)");
        if (t.delay_s <= prev) throw Error(ErrorCode::InvalidConfig, "tap delays must be strictly increasing");
        if (!std::isfinite(t.gain.real()) || !std::isfinite(t.gain.imag()) || !std::isfinite(t.drift_mps))
            throw Error(ErrorCode::InvalidConfig, "tap gain and drift must be finite");
        prev = t.delay_s;
    }
}

std::vector<Tap> TapSet::at_time(double t_s, double center_freq_hz) const {
    std::vector<Tap> out = taps;
    for (auto& tap : out) {
        if (tap.drift_mps == 0.0) continue;
        const double d_delay = tap.drift_mps * t_s / kSpeedOfLight;
        tap.delay_s += d_delay;
        tap.gain *= std::polar(1.0, std::remainder(-kTwoPi * center_freq_hz * d_delay, kTwoPi));
    }
    return out;
}

double TapSet::total_power() const noexcept {
    double p = 0.0;
    for (const auto& t : taps) p += std::norm(t.gain);
    return p;
}

void ScenarioConfig::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, "scenario: " + why); };
    layout.validate();
    const double span = 1.0 / layout.spacing_hz;
    ref_taps.validate(span);
    target_taps.validate(span);
    if (ref_taps.taps.empty()) fail("reference channel needs at least one tap");
    if (!(center_freq_hz > 0.0)) fail("center frequency must be positive");
    if (!(cyclic_prefix_s > 0.0)) fail("cyclic prefix must be positive");
    if (timing_offset_min_s < 0.0 || timing_offset_max_s < timing_offset_min_s ||
        timing_offset_max_s > cyclic_prefix_s)
        fail("timing offset range must lie within [0, cyclic prefix]");
    if (!(frame_interval_s > 0.0)) fail("frame interval must be positive");
    if (backoff_jitter_s < 0.0 || backoff_jitter_s >= frame_interval_s)
        fail("backoff jitter must be in [0, frame interval)");
    for (double p : {swap_probability, pi_shift_probability})
        if (p < 0.0 || p > 1.0) fail("fault probabilities must be in [0, 1]");
    if (snr_db && !std::isfinite(*snr_db)) fail("SNR must be finite");
    if (notch_attenuation_db < 0.0 || edge_rolloff_db < 0.0) fail("impairments are attenuations (>= 0 dB)");
}

SynthFrame generate_frame(const ScenarioConfig& cfg, std::size_t frame_index, std::uint64_t seed) {
    cfg.validate();
    const auto& layout = cfg.layout;
    auto rng = frame_rng(seed, frame_index);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SynthFrame out;
    auto& truth = out.truth;
    truth.frame_index = frame_index;
    truth.timing_offset_s =
        cfg.timing_offset_min_s + (cfg.timing_offset_max_s - cfg.timing_offset_min_s) * unit(rng);
    truth.global_phase_rad = cfg.random_global_phase ? kTwoPi * unit(rng) : 0.0;
    const double jitter = cfg.backoff_jitter_s * unit(rng);
    const bool fault_ok = frame_index > 0;
    truth.swapped = (unit(rng) < cfg.swap_probability) && fault_ok;
    truth.pi_shifted = (unit(rng) < cfg.pi_shift_probability) && fault_ok;
    truth.time_s = static_cast<double>(frame_index) * cfg.frame_interval_s + jitter;
    truth.ref_taps = cfg.ref_taps.at_time(truth.time_s, cfg.center_freq_hz);
    truth.target_taps = cfg.target_taps.at_time(truth.time_s, cfg.center_freq_hz);

    const cplx rotation = std::polar(1.0, truth.global_phase_rad);
    std::vector<ComplexVector> chains{synthesize(truth.ref_taps, layout, truth.timing_offset_s, rotation),
                                      synthesize(truth.target_taps, layout, truth.timing_offset_s, rotation)};
    const double signal_power[2] = {TapSet{truth.ref_taps}.total_power(), TapSet{truth.target_taps}.total_power()};

    double noise_power = 0.0;
    if (cfg.snr_db) {
        noise_power = signal_power[0] / std::pow(10.0, *cfg.snr_db / 10.0);
        std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
        for (auto& chain : chains)
            for (auto& v : chain) v += cplx(gauss(rng), gauss(rng));
    }

    // Receiver front-end response, common to both chains.
    const double kmax = std::max(std::abs(layout.index_min), std::abs(layout.index_max));
    for (auto& chain : chains) {
        if (cfg.edge_rolloff_db > 0.0) {
            for (std::size_t pos = 0; pos < chain.size(); ++pos) {
                const double x = layout.index_at(pos) / kmax;
                chain[pos] *= std::pow(10.0, -cfg.edge_rolloff_db * x * x / 20.0);
            }
        }
        if (cfg.notch_attenuation_db > 0.0)
            for (int k : layout.notch_indices) chain[layout.position(k)] *= std::pow(10.0, -cfg.notch_attenuation_db / 20.0);
        if (cfg.blank_dc)
            for (int k : layout.dc_indices) chain[layout.position(k)] = cplx{};
    }

    out.frame.timestamp_ns = std::llround(truth.time_s * 1e9);
    for (std::size_t c = 0; c < 2; ++c) {
        ChainRecord rec;
        rec.rss_dbm = cfg.tx_power_dbm + 10.0 * std::log10(signal_power[c] + noise_power);
        if (cfg.agc_normalize) {
            double p = 0.0;
            std::size_t live = 0;
            for (std::size_t pos = 0; pos < chains[c].size(); ++pos) {
                if (cfg.blank_dc && std::binary_search(layout.dc_indices.begin(), layout.dc_indices.end(),
                                                       layout.index_at(pos)))
                    continue;
                p += std::norm(chains[c][pos]);
                ++live;
            }
            p /= static_cast<double>(std::max<std::size_t>(live, 1));
            if (p > 0.0)
                for (auto& v : chains[c]) v /= std::sqrt(p);
        }
        rec.csi = std::move(chains[c]);
        out.frame.chains.push_back(std::move(rec));
    }

    if (truth.pi_shifted)
        for (auto& v : out.frame.chains[1].csi) v = -v;
    if (truth.swapped) std::swap(out.frame.chains[0], out.frame.chains[1]);
    return out;
}

ScenarioConfig corridor_scenario() {
    ScenarioConfig cfg;
    const double fc = cfg.center_freq_hz;
    const double speed = 0.25;  // cart speed toward the transmitter, m/s
    cfg.ref_taps.taps = {physical_tap(3.0 / kSpeedOfLight, 0.0, 0.0, fc)};
    cfg.target_taps.taps = {
        physical_tap(40e-9, 0.0, -speed, fc),   // A: line of sight
        physical_tap(140e-9, 2.0, +speed, fc),  // B: far-end reflection, lengthening
        physical_tap(240e-9, 4.0, -speed, fc),  // C: one corridor round trip
        physical_tap(440e-9, 8.0, -speed, fc),  // D: two round trips
    };
    cfg.timing_offset_min_s = 680e-9;
    cfg.timing_offset_max_s = 800e-9;
    cfg.snr_db = 30.0;
    cfg.frame_count = 500;
    cfg.notch_attenuation_db = 15.0;
    cfg.edge_rolloff_db = 3.0;
    return cfg;
}

ScenarioConfig static_scenario() {
    ScenarioConfig cfg;
    const double fc = cfg.center_freq_hz;
    cfg.ref_taps.taps = {physical_tap(3.0 / kSpeedOfLight, 0.0, 0.0, fc)};
    cfg.target_taps.taps = {physical_tap(50e-9, 0.0, 0.0, fc), physical_tap(250e-9, 4.0, 0.0, fc)};
    cfg.timing_offset_min_s = 0.0;
    cfg.timing_offset_max_s = 3200e-9;
    cfg.snr_db = 30.0;
    cfg.frame_count = 1000;
    return cfg;
}

}  // namespace delaysync
