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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "delaysync/calibrate.hpp"
#include "delaysync/error.hpp"
#include "delaysync/preprocess.hpp"
#include "delaysync/serialization.hpp"
#include "delaysync/sounding.hpp"
#include "delaysync/synth.hpp"
#include "oracle.hpp"

using namespace delaysync;

namespace {

constexpr double kDtau = 0.78125e-9;

ScenarioConfig quiet(ScenarioConfig cfg) {
    cfg.snr_db.reset();
    cfg.agc_normalize = false;
    cfg.blank_dc = false;
    cfg.notch_attenuation_db = 0.0;
    cfg.edge_rolloff_db = 0.0;
    cfg.random_global_phase = false;
    return cfg;
}

}  // namespace

TEST(Synth, SingleReferenceTapIsExactRamp) {
    auto cfg = quiet(static_scenario());
    const cplx a = std::polar(0.01, 0.7);
    cfg.ref_taps.taps = {{3.0 / kSpeedOfLight, a, 0.0}};
    cfg.timing_offset_min_s = cfg.timing_offset_max_s = 0.0;
    const auto f = generate_frame(cfg, 3, 1);
    const auto want = oracle::delay_ramp(cfg.layout, 3.0 / kSpeedOfLight, a);
    ASSERT_EQ(f.frame.chains[0].csi.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) ASSERT_NEAR(std::abs(f.frame.chains[0].csi[i] - want[i]), 0.0, 1e-15);
}

TEST(Synth, TimingOffsetShiftsRawFirstSignal) {
    auto cfg = static_scenario();
    cfg.snr_db.reset();
    cfg.timing_offset_min_s = cfg.timing_offset_max_s = 700e-9;
    const auto f = generate_frame(cfg, 0, 42);
    EXPECT_DOUBLE_EQ(f.truth.timing_offset_s, 700e-9);
    const auto chain = interpolate_dc_gap(f.frame.chains[0], cfg.layout);
    const auto fs = first_signal(to_impulse_response(chain.csi, cfg.layout, 8), -15.0);
    EXPECT_NEAR(fs.delay_s, 710.00692285594456e-9, kDtau / 2);
}

TEST(Synth, ChainsShareOffsetAndPhase) {
    auto cfg = quiet(static_scenario());
    cfg.random_global_phase = true;
    cfg.target_taps.taps = cfg.ref_taps.taps;
    const auto f = generate_frame(cfg, 7, 9);
    EXPECT_EQ(f.frame.chains[0].csi, f.frame.chains[1].csi);
    EXPECT_GE(f.truth.global_phase_rad, 0.0);
    EXPECT_LT(f.truth.global_phase_rad, 2.0 * std::numbers::pi);
}

TEST(Synth, ReproducibleAndSeedSensitive) {
    const auto cfg = corridor_scenario();
    const auto a = generate_frame(cfg, 17, 123);
    const auto b = generate_frame(cfg, 17, 123);
    const auto c = generate_frame(cfg, 17, 124);
    EXPECT_EQ(a.frame.chains[0].csi, b.frame.chains[0].csi);
    EXPECT_EQ(a.frame.chains[1].csi, b.frame.chains[1].csi);
    EXPECT_EQ(a.frame.timestamp_ns, b.frame.timestamp_ns);
    EXPECT_NE(a.frame.chains[0].csi, c.frame.chains[0].csi);
}

TEST(Synth, OffsetsStayInConfiguredRange) {
    const auto cfg = static_scenario();
    for (std::size_t i = 0; i < 200; ++i) {
        const auto t = generate_frame(cfg, i, 5).truth;
        ASSERT_GE(t.timing_offset_s, cfg.timing_offset_min_s);
        ASSERT_LE(t.timing_offset_s, cfg.timing_offset_max_s);
    }
}

TEST(Synth, TimestampsIncrease) {
    const auto cfg = static_scenario();
    std::int64_t prev = -1;
    for (std::size_t i = 0; i < 100; ++i) {
        const auto ts = generate_frame(cfg, i, 1).frame.timestamp_ns;
        ASSERT_GT(ts, prev);
        prev = ts;
    }
}

TEST(Synth, FaultsInjectedButNeverOnFirstFrame) {
    auto cfg = static_scenario();
    cfg.swap_probability = 1.0;
    cfg.pi_shift_probability = 1.0;
    const auto f0 = generate_frame(cfg, 0, 1);
    EXPECT_FALSE(f0.truth.swapped);
    EXPECT_FALSE(f0.truth.pi_shifted);
    const auto f1 = generate_frame(cfg, 1, 1);
    EXPECT_TRUE(f1.truth.swapped);
    EXPECT_TRUE(f1.truth.pi_shifted);

    cfg.swap_probability = cfg.pi_shift_probability = 0.0;
    const auto clean = generate_frame(cfg, 1, 1);
    for (std::size_t i = 0; i < clean.frame.chains[1].csi.size(); ++i)
        ASSERT_EQ(f1.frame.chains[0].csi[i], -clean.frame.chains[1].csi[i]);
    EXPECT_EQ(f1.frame.chains[1].csi, clean.frame.chains[0].csi);
}

TEST(Synth, AgcNormalizesToUnitPowerAndRssCarriesLevel) {
    const auto cfg = static_scenario();
    const auto f = generate_frame(cfg, 2, 2);
    std::size_t live = 0;
    double p = 0.0;
    for (std::size_t i = 0; i < cfg.layout.count; ++i) {
        const int k = cfg.layout.index_at(i);
        if (k >= -11 && k <= 11) {
            ASSERT_EQ(f.frame.chains[0].csi[i], cplx{});
            continue;
        }
        p += std::norm(f.frame.chains[0].csi[i]);
        ++live;
    }
    EXPECT_NEAR(p / static_cast<double>(live), 1.0, 1e-12);
    // Reference at 3 m: tx power plus Friis loss, noise adds 0.0004 dB at 30 dB SNR.
    EXPECT_NEAR(*f.frame.chains[0].rss_dbm, 20.0 - 56.39339438439576, 0.01);
}

TEST(Synth, NoiselessRoundTripRecoversDelaysAndRelativeGains) {
    auto cfg = static_scenario();
    cfg.snr_db.reset();
    CalibrationParams params;
    for (std::size_t idx = 0; idx < 10; ++idx) {
        const auto f = generate_frame(cfg, idx, 31);
        auto frame = f.frame;
        for (auto& c : frame.chains) c = interpolate_dc_gap(c, cfg.layout);
        frame = scale_to_reference(frame, params, 0, 1);
        const auto ref = to_impulse_response(frame.chains[0].csi, cfg.layout, 8);
        const auto tgt = to_impulse_response(frame.chains[1].csi, cfg.layout, 8);
        const auto pair = calibrate_pair(ref, tgt, params);
        const auto peaks = find_peaks(pair.h_target.taps, -25.0);
        ASSERT_EQ(peaks.size(), 2u) << idx;
        const auto& truth = cfg.target_taps.taps;
        // Reference and target peaks are each quantized to half a bin.
        for (std::size_t j = 0; j < 2; ++j)
            EXPECT_NEAR(pair.h_target.delay_at(peaks[j]), truth[j].delay_s, kDtau) << idx;
        const double got_db = 20.0 * std::log10(std::abs(pair.h_target.taps[peaks[1]]) /
                                                std::abs(pair.h_target.taps[peaks[0]]));
        const double want_db = 20.0 * std::log10(std::abs(truth[1].gain) / std::abs(truth[0].gain));
        EXPECT_NEAR(got_db, want_db, 0.2) << idx;
    }
}

TEST(Corridor, FrameZeroTapsAndPathLength) {
    const auto cfg = corridor_scenario();
    ASSERT_EQ(cfg.ref_taps.taps.size(), 1u);
    EXPECT_NEAR(cfg.ref_taps.taps[0].delay_s, 10.00692285594456e-9, 1e-21);
    const auto t0 = generate_frame(cfg, 0, 1).truth;
    std::vector<double> delays;
    for (const auto& t : t0.target_taps) delays.push_back(t.delay_s);
    ASSERT_EQ(delays.size(), 4u);
    // Frame 0 sits within the back-off jitter of t = 0.
    EXPECT_NEAR(delays[0], 40e-9, 1e-12);
    EXPECT_NEAR(delays[2], 240e-9, 1e-12);
    EXPECT_NEAR(delays[3], 440e-9, 1e-12);
    EXPECT_NEAR(delays[3] * kSpeedOfLight, 131.9087, 1e-3);
    EXPECT_NEAR((delays[2] - delays[0]) * kSpeedOfLight, 59.96, 0.01);
}

TEST(Corridor, GainsFallWithDelayAndEchoesMove) {
    const auto cfg = corridor_scenario();
    const auto& taps = cfg.target_taps.taps;
    const std::vector<std::size_t> main{0, 2, 3};
    for (std::size_t i = 1; i < main.size(); ++i)
        EXPECT_LT(std::abs(taps[main[i]].gain), std::abs(taps[main[i - 1]].gain));
    const auto late = generate_frame(cfg, cfg.frame_count - 1, 1).truth;
    const auto early = generate_frame(cfg, 0, 1).truth;
    EXPECT_LT(late.target_taps[0].delay_s, early.target_taps[0].delay_s);
    EXPECT_GT(late.target_taps[1].delay_s, early.target_taps[1].delay_s);
    EXPECT_LT(late.target_taps[3].delay_s, early.target_taps[3].delay_s);
}

TEST(Synth, FriisAmplitude) {
    EXPECT_NEAR(20.0 * std::log10(friis_amplitude(3.0, 5.25e9)), -56.39339438439576, 1e-9);
}

TEST(Synth, InvalidConfigsRejected) {
    auto code_of = [](const ScenarioConfig& cfg) {
        try {
            cfg.validate();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    auto cfg = static_scenario();
    cfg.timing_offset_max_s = 4000e-9;
    EXPECT_EQ(code_of(cfg), ErrorCode::InvalidConfig);
    cfg = static_scenario();
    cfg.target_taps.taps = {{100e-9, 1.0, 0.0}, {50e-9, 1.0, 0.0}};
    EXPECT_EQ(code_of(cfg), ErrorCode::InvalidConfig);
    cfg = static_scenario();
    cfg.swap_probability = 1.5;
    EXPECT_EQ(code_of(cfg), ErrorCode::InvalidConfig);
    cfg = static_scenario();
    cfg.ref_taps.taps.clear();
    EXPECT_EQ(code_of(cfg), ErrorCode::InvalidConfig);
}

TEST(Synth, ScenarioJsonRoundTrip) {
    const auto cfg = corridor_scenario();
    const auto back = scenario_from_json(to_json(cfg));
    EXPECT_EQ(back.layout, cfg.layout);
    ASSERT_EQ(back.target_taps.taps.size(), cfg.target_taps.taps.size());
    for (std::size_t i = 0; i < cfg.target_taps.taps.size(); ++i) {
        EXPECT_DOUBLE_EQ(back.target_taps.taps[i].delay_s, cfg.target_taps.taps[i].delay_s);
        EXPECT_NEAR(std::abs(back.target_taps.taps[i].gain - cfg.target_taps.taps[i].gain), 0.0, 1e-15);
        EXPECT_DOUBLE_EQ(back.target_taps.taps[i].drift_mps, cfg.target_taps.taps[i].drift_mps);
    }
    EXPECT_EQ(back.snr_db, cfg.snr_db);
    EXPECT_EQ(back.frame_count, cfg.frame_count);

    const auto partial = scenario_from_json(R"({"base": "corridor", "frame_count": 7, "snr_db": null})");
    EXPECT_EQ(partial.frame_count, 7u);
    EXPECT_FALSE(partial.snr_db.has_value());
    EXPECT_EQ(partial.target_taps.taps.size(), 4u);
    EXPECT_THROW(scenario_from_json("{not json"), Error);
}
