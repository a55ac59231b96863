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
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "delaysync/capture_io.hpp"
#include "delaysync/error.hpp"
#include "delaysync/synth.hpp"
#include "oracle.hpp"

using namespace delaysync;
namespace fs = std::filesystem;

namespace {

class CaptureFiles : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("delaysync_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }
    static void spit(const std::string& p, const std::string& bytes) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    static std::size_t data_offset(const std::string& bytes) {
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
        return 12 + len;
    }

    CaptureHeader small_header() const {
        CaptureHeader h;
        h.layout = oracle::small_layout();
        h.metadata_json = R"({"site": "lab", "run": 3})";
        return h;
    }

    std::vector<CsiFrame> random_frames(std::size_t n, std::size_t count, std::uint64_t seed) const {
        // Values drawn directly in single precision so the file stores them exactly.
        std::mt19937_64 rng(seed);
        std::normal_distribution<float> g(0.0f, 1.0f);
        std::vector<CsiFrame> frames(n);
        for (std::size_t i = 0; i < n; ++i) {
            frames[i].timestamp_ns = static_cast<std::int64_t>(1'000'000 * i + 17);
            for (int c = 0; c < 2; ++c) {
                ComplexVector csi(count);
                for (auto& v : csi) {
                    const float re = g(rng), im = g(rng);
                    v = cplx(re, im);
                }
                frames[i].chains.push_back({csi, c == 0 ? std::optional<double>(-40.5) : std::nullopt});
            }
        }
        return frames;
    }

    fs::path dir_;
};

}  // namespace

TEST_F(CaptureFiles, RoundTripIsByteIdentical) {
    const auto header = small_header();
    const auto frames = random_frames(25, header.layout.count, 1);
    write_capture(path("a.dscf"), header, frames);
    const auto cap = read_capture(path("a.dscf"));
    EXPECT_EQ(cap.warnings, 0u);
    ASSERT_EQ(cap.frames.size(), frames.size());
    EXPECT_EQ(cap.header.layout, header.layout);
    EXPECT_EQ(cap.header.chain_count, 2u);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        EXPECT_EQ(cap.frames[i].timestamp_ns, frames[i].timestamp_ns);
        EXPECT_EQ(cap.frames[i].chains[0].csi, frames[i].chains[0].csi);
        EXPECT_EQ(cap.frames[i].chains[1].csi, frames[i].chains[1].csi);
        EXPECT_EQ(*cap.frames[i].chains[0].rss_dbm, -40.5);
        EXPECT_FALSE(cap.frames[i].chains[1].rss_dbm.has_value());
    }
    write_capture(path("b.dscf"), cap.header, cap.frames);
    EXPECT_EQ(slurp(path("a.dscf")), slurp(path("b.dscf")));
    EXPECT_EQ(slurp(path("a.dscf")).size(),
              data_offset(slurp(path("a.dscf"))) + frames.size() * record_size(header));
}

TEST_F(CaptureFiles, SyntheticCaptureRoundTrip) {
    CaptureHeader header;
    auto cfg = corridor_scenario();
    std::vector<CsiFrame> frames;
    for (std::size_t i = 0; i < 5; ++i) frames.push_back(generate_frame(cfg, i, 9).frame);
    write_capture(path("syn.dscf"), header, frames);
    const auto cap = read_capture(path("syn.dscf"));
    write_capture(path("syn2.dscf"), cap.header, cap.frames);
    EXPECT_EQ(slurp(path("syn.dscf")), slurp(path("syn2.dscf")));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < cfg.layout.count; ++k)
            ASSERT_NEAR(std::abs(cap.frames[i].chains[1].csi[k] - frames[i].chains[1].csi[k]), 0.0, 1e-6);
}

TEST_F(CaptureFiles, StreamingReaderAndRewind) {
    const auto header = small_header();
    write_capture(path("s.dscf"), header, random_frames(4, header.layout.count, 2));
    CaptureReader reader(path("s.dscf"));
    std::size_t n = 0;
    while (reader.next()) ++n;
    EXPECT_EQ(n, 4u);
    EXPECT_EQ(reader.frames_read(), 4u);
    reader.rewind();
    ASSERT_TRUE(reader.next().has_value());
    EXPECT_EQ(reader.frames_read(), 1u);
}

TEST_F(CaptureFiles, TruncatedTailIsOneWarning) {
    const auto header = small_header();
    write_capture(path("t.dscf"), header, random_frames(6, header.layout.count, 3));
    auto bytes = slurp(path("t.dscf"));
    bytes.resize(bytes.size() - record_size(header) / 2);
    spit(path("t.dscf"), bytes);
    const auto cap = read_capture(path("t.dscf"));
    EXPECT_EQ(cap.frames.size(), 5u);
    EXPECT_EQ(cap.warnings, 1u);
}

TEST_F(CaptureFiles, CountMismatchIsCorruptRecord) {
    const auto header = small_header();
    write_capture(path("c.dscf"), header, random_frames(3, header.layout.count, 4));
    auto bytes = slurp(path("c.dscf"));
    // Second record, first chain, count field: after i64 timestamp and f32 rss.
    const std::size_t at = data_offset(bytes) + record_size(header) + 8 + 4;
    bytes[at] = static_cast<char>(static_cast<unsigned char>(bytes[at]) + 1);
    spit(path("c.dscf"), bytes);
    CaptureReader reader(path("c.dscf"));
    EXPECT_TRUE(reader.next().has_value());
    try {
        reader.next();
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
        ASSERT_TRUE(e.frame_index().has_value());
        EXPECT_EQ(*e.frame_index(), 1u);
    }
}

TEST_F(CaptureFiles, NonFiniteValueIsCorruptRecord) {
    const auto header = small_header();
    write_capture(path("n.dscf"), header, random_frames(2, header.layout.count, 5));
    auto bytes = slurp(path("n.dscf"));
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(bytes.data() + data_offset(bytes) + 8 + 4 + 4, &nan, 4);
    spit(path("n.dscf"), bytes);
    try {
        read_capture(path("n.dscf"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
        EXPECT_EQ(e.frame_index().value_or(99), 0u);
    }
}

TEST_F(CaptureFiles, BackwardsTimestampIsCorruptRecord) {
    const auto header = small_header();
    write_capture(path("ts.dscf"), header, random_frames(3, header.layout.count, 6));
    auto bytes = slurp(path("ts.dscf"));
    const std::size_t rec2 = data_offset(bytes) + 2 * record_size(header);
    std::memset(bytes.data() + rec2, 0, 8);
    spit(path("ts.dscf"), bytes);
    try {
        read_capture(path("ts.dscf"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CorruptRecord);
        EXPECT_EQ(e.frame_index().value_or(99), 2u);
    }
}

TEST_F(CaptureFiles, BadMagicAndVersion) {
    spit(path("m.dscf"), "NOPE and then some more bytes");
    try {
        CaptureReader r(path("m.dscf"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::BadMagic);
    }

    const auto header = small_header();
    write_capture(path("v.dscf"), header, random_frames(1, header.layout.count, 7));
    auto bytes = slurp(path("v.dscf"));
    bytes[4] = 2;
    spit(path("v.dscf"), bytes);
    try {
        CaptureReader r(path("v.dscf"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::VersionUnsupported);
    }
}

TEST_F(CaptureFiles, MissingFileIsIoError) {
    try {
        CaptureReader r(path("does_not_exist.dscf"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Io);
    }
}

TEST_F(CaptureFiles, WriterRejectsMismatchedFrames) {
    const auto header = small_header();
    CaptureWriter w(path("w.dscf"), header);
    auto frames = random_frames(2, header.layout.count, 8);
    w.write(frames[0]);
    EXPECT_THROW(w.write(frames[0]), Error);  // same timestamp
    frames[1].chains[0].csi.pop_back();
    EXPECT_THROW(w.write(frames[1]), Error);
    EXPECT_EQ(w.frames_written(), 1u);
}
