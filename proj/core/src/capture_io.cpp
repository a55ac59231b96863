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

#include "delaysync/capture_io.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "delaysync/error.hpp"
#include "json_detail.hpp"

namespace delaysync {

namespace {

using detail::json;

template <typename U>
void put_le(std::string& buf, U value) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

template <typename U>
U get_le(const unsigned char* p) {
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(p[i]) << (8 * i);
    return v;
}

void put_f32(std::string& buf, double value) { put_le(buf, std::bit_cast<std::uint32_t>(static_cast<float>(value))); }
double get_f32(const unsigned char* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

// Reads exactly n bytes; returns how many were actually available.
std::size_t read_some(std::ifstream& in, unsigned char* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount());
}

}  // namespace

std::size_t record_size(const CaptureHeader& header) noexcept {
    return 8 + header.chain_count * (4 + 4 + header.layout.count * 8);
}

CaptureWriter::CaptureWriter(const std::string& path, const CaptureHeader& header) : header_(header) {
    header_.layout.validate();
    header_.params.validate();
    if (header_.chain_count == 0) throw Error(ErrorCode::InvalidConfig, "capture needs at least one chain");
    const json metadata = detail::parse(header_.metadata_json.empty() ? "{}" : header_.metadata_json);

    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::Io, "cannot create " + path);

    const json doc{{"format_version", kCaptureVersion},
                   {"chain_count", header_.chain_count},
                   {"layout", detail::layout_to_json(header_.layout)},
                   {"params", detail::params_to_json(header_.params)},
                   {"metadata", metadata}};
    const std::string text = doc.dump();
    std::string buf(kCaptureMagic, 4);
    put_le(buf, kCaptureVersion);
    put_le(buf, static_cast<std::uint32_t>(text.size()));
    buf += text;
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void CaptureWriter::write(const CsiFrame& frame) {
    if (frame.chains.size() != header_.chain_count)
        throw Error(ErrorCode::LengthMismatch, "frame chain count differs from the capture header", written_);
    if (last_timestamp_ && frame.timestamp_ns <= *last_timestamp_)
        throw Error(ErrorCode::InvalidArgument, "timestamps must strictly increase", written_);

    std::string buf;
    buf.reserve(record_size(header_));
    put_le(buf, static_cast<std::uint64_t>(frame.timestamp_ns));
    for (const auto& chain : frame.chains) {
        if (chain.csi.size() != header_.layout.count)
            throw Error(ErrorCode::LengthMismatch, "chain length differs from the layout", written_);
        put_f32(buf, chain.rss_dbm ? *chain.rss_dbm : std::numeric_limits<double>::quiet_NaN());
        put_le(buf, static_cast<std::uint32_t>(chain.csi.size()));
        for (const auto& h : chain.csi) {
            put_f32(buf, h.real());
            put_f32(buf, h.imag());
        }
    }
    out_.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out_) throw Error(ErrorCode::Io, "write failed", written_);
    last_timestamp_ = frame.timestamp_ns;
    ++written_;
}

void CaptureWriter::close() {
    out_.flush();
    out_.close();
}

CaptureReader::CaptureReader(const std::string& path) : path_(path) {
    in_.open(path, std::ios::binary);
    if (!in_) throw Error(ErrorCode::Io, "cannot open " + path);

    std::array<unsigned char, 12> pre{};
    if (read_some(in_, pre.data(), 4) != 4 || std::memcmp(pre.data(), kCaptureMagic, 4) != 0)
        throw Error(ErrorCode::BadMagic, path + " is not a capture file");
    if (read_some(in_, pre.data() + 4, 8) != 8) throw Error(ErrorCode::BadMagic, path + ": truncated preamble");
    const auto version = get_le<std::uint32_t>(pre.data() + 4);
    if (version != kCaptureVersion)
        throw Error(ErrorCode::VersionUnsupported, "capture format version " + std::to_string(version));
    const auto length = get_le<std::uint32_t>(pre.data() + 8);

    std::string text(length, '\0');
    if (read_some(in_, reinterpret_cast<unsigned char*>(text.data()), length) != length)
        throw Error(ErrorCode::InvalidConfig, path + ": truncated header");
    const json doc = detail::parse(text);
    try {
        if (doc.at("format_version").get<std::uint32_t>() != kCaptureVersion)
            throw Error(ErrorCode::VersionUnsupported, "header format_version mismatch");
        header_.chain_count = doc.at("chain_count").get<std::size_t>();
        header_.layout = detail::layout_from_json(doc.at("layout"), SubcarrierLayout{});
        header_.params = detail::params_from_json(doc.at("params"));
        header_.metadata_json = doc.value("metadata", json::object()).dump();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("capture header: ") + e.what());
    }
    data_start_ = in_.tellg();
}

void CaptureReader::rewind() {
    in_.clear();
    in_.seekg(data_start_);
    index_ = 0;
    warnings_ = 0;
    done_ = false;
    last_timestamp_.reset();
}

std::optional<CsiFrame> CaptureReader::next() {
    if (done_) return std::nullopt;
    const std::size_t count = header_.layout.count;
    std::vector<unsigned char> buf(record_size(header_));

    auto truncated = [&]() -> std::optional<CsiFrame> {
        ++warnings_;
        done_ = true;
        return std::nullopt;
    };

    const std::size_t got = read_some(in_, buf.data(), 8);
    if (got == 0) {
        done_ = true;
        return std::nullopt;
    }
    if (got < 8) return truncated();

    CsiFrame frame;
    frame.timestamp_ns = static_cast<std::int64_t>(get_le<std::uint64_t>(buf.data()));
    if (last_timestamp_ && frame.timestamp_ns <= *last_timestamp_)
        throw Error(ErrorCode::CorruptRecord, "non-increasing timestamp", index_);

    for (std::size_t c = 0; c < header_.chain_count; ++c) {
        unsigned char head[8];
        if (read_some(in_, head, 8) < 8) return truncated();
        const double rss = get_f32(head);
        const auto n = get_le<std::uint32_t>(head + 4);
        if (n != count)
            throw Error(ErrorCode::CorruptRecord,
                        "chain " + std::to_string(c) + " has " + std::to_string(n) + " subcarriers, header says " +
                            std::to_string(count),
                        index_);
        if (read_some(in_, buf.data(), count * 8) < count * 8) return truncated();

        ChainRecord chain;
        if (!std::isnan(rss)) chain.rss_dbm = rss;
        chain.csi.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double re = get_f32(buf.data() + 8 * i);
            const double im = get_f32(buf.data() + 8 * i + 4);
            if (!std::isfinite(re) || !std::isfinite(im))
                throw Error(ErrorCode::CorruptRecord, "non-finite CSI value", index_);
            chain.csi[i] = cplx(re, im);
        }
        frame.chains.push_back(std::move(chain));
    }
    last_timestamp_ = frame.timestamp_ns;
    ++index_;
    return frame;
}

Capture read_capture(const std::string& path) {
    CaptureReader reader(path);
    Capture cap;
    cap.header = reader.header();
    while (auto f = reader.next()) cap.frames.push_back(std::move(*f));
    cap.warnings = reader.warnings();
    return cap;
}

void write_capture(const std::string& path, const CaptureHeader& header, std::span<const CsiFrame> frames) {
    CaptureWriter w(path, header);
    for (const auto& f : frames) w.write(f);
    w.close();
}

}  // namespace delaysync
