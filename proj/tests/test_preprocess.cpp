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
#include <random>

#include "delaysync/error.hpp"
#include "delaysync/preprocess.hpp"
#include "oracle.hpp"

using namespace delaysync;

namespace {

constexpr double kPi = std::numbers::pi;

ChainRecord with_blank_dc(ComplexVector csi, const SubcarrierLayout& l) {
    for (int k : l.dc_indices) csi[l.position(k)] = cplx(0.0, 0.0);
    return {std::move(csi), -40.0};
}

double phase_error(cplx got, cplx want) { return std::abs(std::arg(got / want)); }

}  // namespace

TEST(DcGap, FlatSpectrumFillsWithUnitMagnitudeZeroPhase) {
    const auto l = make_he160_layout();
    const auto out = interpolate_dc_gap(with_blank_dc(ComplexVector(l.count, 1.0), l), l);
    for (int k : l.dc_indices) {
        EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 1.0, 1e-12);
        EXPECT_NEAR(std::arg(out.csi[l.position(k)]), 0.0, 1e-12);
    }
}

TEST(DcGap, DelayRampIsReconstructed) {
    const auto l = make_he160_layout();
    const auto truth = oracle::delay_ramp(l, 50e-9);
    const auto out = interpolate_dc_gap(with_blank_dc(truth, l), l);
    for (int k : l.dc_indices) {
        EXPECT_LT(phase_error(out.csi[l.position(k)], truth[l.position(k)]), 1e-6) << "k=" << k;
        EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 1.0, 1e-12);
    }
}

TEST(DcGap, SteepRampNeedsExtrapolationAcrossGap) {
    // 0.9 pi per subcarrier; the 24-step jump across the gap is many turns.
    const auto l = make_he160_layout();
    const double tau = 0.9 * kPi / (2.0 * kPi * l.spacing_hz);
    const auto truth = oracle::delay_ramp(l, tau);
    const auto out = interpolate_dc_gap(with_blank_dc(truth, l), l);
    for (int k : l.dc_indices) EXPECT_LT(phase_error(out.csi[l.position(k)], truth[l.position(k)]), 1e-6) << k;

    // Naive unwrapping straight across the gap would mis-resolve the turn count.
    const double across = std::arg(truth[l.position(12)]) - std::arg(truth[l.position(-12)]);
    const double true_step = -2.0 * kPi * l.spacing_hz * tau * 24.0;
    EXPECT_GT(std::abs(std::remainder(across, 2.0 * kPi) - true_step), kPi);
}

TEST(DcGap, LinearMagnitudeAcrossGap) {
    const auto l = make_he160_layout();
    ComplexVector csi(l.count);
    for (std::size_t i = 0; i < l.count; ++i) csi[i] = 2.0 + 0.001 * l.index_at(i);
    const auto out = interpolate_dc_gap(with_blank_dc(csi, l), l);
    for (int k : l.dc_indices) EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 2.0 + 0.001 * k, 1e-12);
}

TEST(DcGap, OnlyDcSubcarriersChange) {
    const auto l = make_he160_layout();
    std::mt19937_64 rng(3);
    const auto in = with_blank_dc(oracle::random_spectrum(l.count, rng), l);
    const auto out = interpolate_dc_gap(in, l);
    for (std::size_t i = 0; i < l.count; ++i) {
        const int k = l.index_at(i);
        if (k < -11 || k > 11) {
            ASSERT_EQ(out.csi[i], in.csi[i]);
        }
    }
}

TEST(DcGap, InsufficientContextThrows) {
    auto l = oracle::small_layout();
    l.dc_indices = {-45, -44};  // only 5 subcarriers below
    try {
        interpolate_dc_gap({ComplexVector(l.count, 1.0), 0.0}, l);
        FAIL() << "expected InsufficientContext";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientContext);
    }
}

TEST(Pilots, InterpolatedFromNeighbours) {
    auto l = make_he160_layout();
    l.pilot_indices = {-500, 300};
    const auto truth = oracle::delay_ramp(l, 80e-9, 0.5);
    auto in = ChainRecord{truth, 0.0};
    for (int k : l.pilot_indices) in.csi[l.position(k)] = 0.0;
    const auto out = interpolate_pilots(in, l);
    for (int k : l.pilot_indices) {
        EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 0.5, 1e-12);
        EXPECT_LT(phase_error(out.csi[l.position(k)], truth[l.position(k)]), 1e-9);
    }
}

TEST(Notches, FlatLevelRestored) {
    const auto l = make_he160_layout();
    ChainRecord in{ComplexVector(l.count, cplx(0.0, 1.0)), 0.0};
    for (int k : l.notch_indices) in.csi[l.position(k)] *= 0.1;  // -20 dB
    const auto out = repair_notches(in, l);
    for (int k : l.notch_indices) {
        EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 1.0, 1e-12);
        EXPECT_NEAR(std::arg(out.csi[l.position(k)]), kPi / 2.0, 1e-12);
    }
}

TEST(Notches, SlopedMagnitudeOnTheLine) {
    const auto l = make_he160_layout();
    ChainRecord in{ComplexVector(l.count), 0.0};
    for (std::size_t i = 0; i < l.count; ++i) in.csi[i] = 1.0 + 1e-4 * (l.index_at(i) + 1012);
    for (int k : l.notch_indices) in.csi[l.position(k)] = 0.01;
    const auto out = repair_notches(in, l);
    for (int k : l.notch_indices) EXPECT_NEAR(std::abs(out.csi[l.position(k)]), 1.0 + 1e-4 * (k + 1012), 1e-9);
}

TEST(Notches, EmptySetIsIdentityAndRepairIsIdempotent) {
    auto l = make_he160_layout();
    std::mt19937_64 rng(5);
    const ChainRecord in{oracle::random_spectrum(l.count, rng), 1.0};
    const auto once = repair_notches(in, l);
    EXPECT_EQ(repair_notches(once, l).csi, once.csi);
    for (std::size_t i = 0; i < l.count; ++i) {
        const int k = l.index_at(i);
        if (std::abs(k) < 766 || std::abs(k) > 770) {
            ASSERT_EQ(once.csi[i], in.csi[i]);
        }
    }
    l.notch_indices.clear();
    EXPECT_EQ(repair_notches(in, l).csi, in.csi);
}

TEST(Flattening, UniformPowerGivesUnitGains) {
    const auto l = oracle::small_layout();
    std::vector<CsiFrame> frames(3);
    for (auto& f : frames) f.chains = {{ComplexVector(l.count, 2.0), 0.0}};
    const auto p = estimate_flattening(frames, 0);
    EXPECT_EQ(p.frames_used, 3u);
    for (double g : p.per_subcarrier_gain) EXPECT_NEAR(g, 1.0, 1e-12);
}

TEST(Flattening, EdgeRolloffIsInverted) {
    const auto l = make_he160_layout();
    std::mt19937_64 rng(8);
    std::vector<CsiFrame> frames(6);
    RealVector slope_db(l.count);
    for (std::size_t i = 0; i < l.count; ++i) slope_db[i] = -3.0 * std::abs(l.index_at(i)) / 1012.0;
    for (auto& f : frames) {
        auto csi = oracle::random_spectrum(l.count, rng);
        for (std::size_t i = 0; i < l.count; ++i) csi[i] *= std::pow(10.0, slope_db[i] / 20.0);
        f.chains = {{csi, 0.0}};
    }
    const auto p = estimate_flattening(frames, 0);

    double log_sum = 0.0;
    for (double g : p.per_subcarrier_gain) log_sum += std::log(g);
    EXPECT_NEAR(log_sum / static_cast<double>(l.count), 0.0, 1e-12);

    // Flattened time-averaged power is the same on every subcarrier.
    RealVector avg(l.count, 0.0);
    for (const auto& f : frames) {
        const auto flat = apply_flattening(f.chains[0], p);
        for (std::size_t i = 0; i < l.count; ++i) avg[i] += std::norm(flat.csi[i]);
    }
    const auto [lo, hi] = std::minmax_element(avg.begin(), avg.end());
    EXPECT_LT((*hi - *lo) / *hi, 1e-12);

    // Edge gain exceeds centre gain by the 3 dB roll-off, up to the random spread.
    const double edge_vs_centre = 10.0 * std::log10(p.per_subcarrier_gain.front() / p.per_subcarrier_gain[1012]);
    EXPECT_GT(edge_vs_centre, -10.0);
}

TEST(Flattening, DeterministicSlopeIsExactlyInverted) {
    const auto l = make_he160_layout();
    std::vector<CsiFrame> frames(2);
    for (auto& f : frames) {
        ComplexVector csi(l.count);
        for (std::size_t i = 0; i < l.count; ++i)
            csi[i] = std::pow(10.0, -3.0 * std::abs(l.index_at(i)) / 1012.0 / 20.0);
        f.chains = {{csi, 0.0}};
    }
    const auto p = estimate_flattening(frames, 0);
    const double edge_vs_centre = 10.0 * std::log10(p.per_subcarrier_gain.front() / p.per_subcarrier_gain[1012]);
    EXPECT_NEAR(edge_vs_centre, 3.0, 1e-9);
}

TEST(Flattening, SingleFrameIsRejected) {
    std::vector<CsiFrame> frames(1);
    frames[0].chains = {{ComplexVector(10, 1.0), 0.0}};
    try {
        estimate_flattening(frames, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyCapture);
    }
}

TEST(Swap, SwappedFrameIsRestored) {
    const auto l = make_he160_layout();
    std::mt19937_64 rng(1);
    const auto a = oracle::random_spectrum(l.count, rng);
    auto b = oracle::random_spectrum(l.count, rng);
    for (auto& v : b) v *= 0.3;
    CalibrationState state;
    CsiFrame f1{0, {{a, -40.0}, {b, -50.0}}};
    EXPECT_FALSE(detect_and_fix_swap(f1, state));
    CsiFrame f2{1, {{b, -50.0}, {a, -40.0}}};
    EXPECT_TRUE(detect_and_fix_swap(f2, state));
    EXPECT_EQ(f2.chains[0].csi, a);
    EXPECT_EQ(*f2.chains[0].rss_dbm, -40.0);
    CsiFrame f3{2, {{a, -40.0}, {b, -50.0}}};
    EXPECT_FALSE(detect_and_fix_swap(f3, state));
    EXPECT_EQ(f3.chains[1].csi, b);
}

TEST(Swap, TieKeepsStraightAssignment) {
    const ComplexVector same(16, 1.0);
    CalibrationState state;
    CsiFrame f1{0, {{same, 1.0}, {same, 2.0}}};
    detect_and_fix_swap(f1, state);
    CsiFrame f2{1, {{same, 1.0}, {same, 2.0}}};
    EXPECT_FALSE(detect_and_fix_swap(f2, state));
    EXPECT_EQ(*f2.chains[0].rss_dbm, 1.0);
}

TEST(ScaleToReference, ReferenceLandsOnFreeSpaceGain) {
    const auto l = make_he160_layout();
    std::mt19937_64 rng(4);
    CsiFrame f{0, {{oracle::random_spectrum(l.count, rng), -30.0}, {oracle::random_spectrum(l.count, rng), -30.0}}};
    CalibrationParams p;
    const auto out = scale_to_reference(f, p, 0, 1);
    EXPECT_NEAR(10.0 * std::log10(mean_power(out.chains[0].csi)), -56.39339438439576, 1e-9);

    // Equal RSS: the target gets the same scale factor as the reference.
    const double ref_scale = mean_power(out.chains[0].csi) / mean_power(f.chains[0].csi);
    const double tgt_scale = mean_power(out.chains[1].csi) / mean_power(f.chains[1].csi);
    EXPECT_NEAR(tgt_scale / ref_scale, 1.0, 1e-12);
}

TEST(ScaleToReference, RssDifferenceSetsTargetLevel) {
    const auto l = make_he160_layout();
    CsiFrame f{0, {{ComplexVector(l.count, 1.0), -30.0}, {ComplexVector(l.count, 1.0), -40.0}}};
    const auto out = scale_to_reference(f, CalibrationParams{}, 0, 1);
    const double diff_db =
        10.0 * std::log10(mean_power(out.chains[1].csi)) - 10.0 * std::log10(mean_power(out.chains[0].csi));
    EXPECT_NEAR(diff_db, -10.0, 1e-9);
}

TEST(ScaleToReference, PreservesPerSubcarrierRatios) {
    const auto l = oracle::small_layout();
    std::mt19937_64 rng(9);
    CsiFrame f{0, {{oracle::random_spectrum(l.count, rng), -30.0}, {oracle::random_spectrum(l.count, rng), -33.0}}};
    const auto out = scale_to_reference(f, CalibrationParams{}, 0, 1);
    for (std::size_t c = 0; c < 2; ++c) {
        const cplx s = out.chains[c].csi[0] / f.chains[c].csi[0];
        for (std::size_t i = 0; i < l.count; ++i) ASSERT_NEAR(std::abs(out.chains[c].csi[i] / f.chains[c].csi[i] - s), 0.0, 1e-12);
    }
}

TEST(ScaleToReference, MissingRssThrows) {
    CsiFrame f{0, {{ComplexVector(8, 1.0), std::nullopt}, {ComplexVector(8, 1.0), -40.0}}};
    try {
        scale_to_reference(f, CalibrationParams{}, 0, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MissingRss);
    }
}
