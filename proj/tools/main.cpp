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

// delaysync: command-line driver.
//
//   delaysync synth   -o capture.dscf [--config scenario.json | --scenario corridor] [--seed N] [--frames N]
//   delaysync inspect capture.dscf [--frames N]
//   delaysync sound   capture.dscf --out-dir DIR [pipeline flags]
//   delaysync report  capture.dscf --out-dir DIR [pipeline flags] [--max-delay-ns X]
//
// Pipeline settings resolve as flags > --config file > capture header > built-in defaults.
// Exit status: 0 ok, 2 input error, 3 no signal in any frame, 1 anything else.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "delaysync/capture_io.hpp"
#include "delaysync/error.hpp"
#include "delaysync/pipeline.hpp"
#include "delaysync/serialization.hpp"
#include "delaysync/synth.hpp"
#include "exports.hpp"

namespace fs = std::filesystem;
using namespace delaysync;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInput = 2;
constexpr int kExitNoSignal = 3;

struct PipelineFlags {
    std::string capture;
    std::string config;
    std::string out_dir = ".";
    std::optional<std::size_t> ref_chain, target_chain, kappa;
    std::optional<std::string> window;
    std::optional<int> ma;
    std::optional<double> dref_m, first_peak_threshold_db;
    // report only
    double min_delay_ns = 0.0;
    double max_delay_ns = 1000.0;
    double heatmap_range_db = 60.0;
    bool heatmap = true;
};

struct SynthFlags {
    std::string out;
    std::string config;
    std::string scenario = "static";
    std::uint64_t seed = 1;
    std::optional<std::size_t> frames;
};

struct InspectFlags {
    std::string capture;
    std::size_t frames = 5;
};

void add_pipeline_flags(CLI::App* cmd, PipelineFlags& f) {
    cmd->add_option("capture", f.capture, "Capture file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--config", f.config, "Pipeline config JSON")->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", f.out_dir, "Output directory");
    cmd->add_option("--ref-chain", f.ref_chain, "Reference chain index");
    cmd->add_option("--target-chain", f.target_chain, "Target chain index");
    cmd->add_option("--kappa", f.kappa, "Zero-padding factor")->check(CLI::PositiveNumber);
    cmd->add_option("--window", f.window, "blackman | rectangular");
    cmd->add_option("--ma", f.ma, "Moving-average window (frames, odd; 1 disables)");
    cmd->add_option("--dref-m", f.dref_m, "Reference antenna separation (m)");
    cmd->add_option("--first-peak-threshold-db", f.first_peak_threshold_db, "First-signal threshold (dB)");
}

PipelineOptions resolve_options(const PipelineFlags& f, const CaptureHeader& header) {
    PipelineOptions opt;
    opt.params = header.params;
    if (!f.config.empty()) {
        const json doc = json::parse(read_text_file(f.config), nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::InvalidConfig, f.config + ": not a JSON object");
        try {
            if (doc.contains("params")) opt.params = params_from_json(doc.at("params").dump());
            opt.ref_chain = doc.value("ref_chain", opt.ref_chain);
            opt.target_chain = doc.value("target_chain", opt.target_chain);
            opt.kappa = doc.value("kappa", opt.kappa);
            if (doc.contains("window")) opt.window = window_from_string(doc.at("window").get<std::string>());
            opt.params.ma_window = doc.value("ma", opt.params.ma_window);
            opt.params.d_ref_m = doc.value("dref_m", opt.params.d_ref_m);
            opt.params.first_peak_threshold_db = doc.value("first_peak_threshold_db", opt.params.first_peak_threshold_db);
            opt.fix_swaps = doc.value("fix_swaps", opt.fix_swaps);
            opt.fix_pi_shifts = doc.value("fix_pi_shifts", opt.fix_pi_shifts);
            opt.flatten = doc.value("flatten", opt.flatten);
            opt.flatten_frames = doc.value("flatten_frames", opt.flatten_frames);
            opt.tracker.threshold_db = doc.value("track_threshold_db", opt.tracker.threshold_db);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, f.config + ": " + e.what());
        }
    }
    if (f.ref_chain) opt.ref_chain = *f.ref_chain;
    if (f.target_chain) opt.target_chain = *f.target_chain;
    if (f.kappa) opt.kappa = *f.kappa;
    if (f.window) opt.window = window_from_string(*f.window);
    if (f.ma) opt.params.ma_window = *f.ma;
    if (f.dref_m) opt.params.d_ref_m = *f.dref_m;
    if (f.first_peak_threshold_db) opt.params.first_peak_threshold_db = *f.first_peak_threshold_db;
    opt.validate();
    return opt;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text << '\n';
}

int run_sound(const PipelineFlags& f, bool with_exports) {
    const auto opt = resolve_options(f, CaptureReader(f.capture).header());
    fs::create_directories(f.out_dir);
    const fs::path dir(f.out_dir);

    cli::IrCollector collector(f.min_delay_ns * 1e-9, f.max_delay_ns * 1e-9);
    const auto summary = run_pipeline(f.capture, opt, with_exports ? &collector : nullptr);
    write_text(dir / "summary.json", summary_to_json(summary));

    std::printf("frames %zu  calibrated %zu  no-signal %zu  swaps fixed %zu  pi-shifts fixed %zu\n",
                summary.frames_total, summary.frames_calibrated, summary.no_signal_frames, summary.swaps_fixed,
                summary.pi_shifts_fixed);
    if (summary.frames_calibrated == 0) {
        std::fprintf(stderr, "no signal in any frame\n");
        return kExitNoSignal;
    }
    std::printf("noise floor %.1f dB", summary.noise_floor_db);
    if (summary.averaged_noise_floor_db) std::printf("  averaged %.1f dB", *summary.averaged_noise_floor_db);
    std::printf("  tracks %zu  max path %.2f m\n", summary.tracks.size(), summary.max_path_distance_m);

    if (with_exports) {
        cli::write_ir_csv((dir / "ir.csv").string(), collector.calibrated(), collector.first_delay_s(),
                          collector.delay_bin_s());
        const bool averaged = !collector.averaged().empty();
        const auto& rows = averaged ? collector.averaged() : collector.calibrated();
        cli::write_ir_matrix((dir / "ir_db.f32").string(), rows, collector.first_delay_s(), collector.delay_bin_s(),
                             averaged ? "moving_average" : "calibrated");
        if (f.heatmap) cli::write_heatmap_ppm((dir / "heatmap.ppm").string(), rows, f.heatmap_range_db);
    }
    std::printf("wrote %s\n", dir.string().c_str());
    return kExitOk;
}

int run_synth(const SynthFlags& f) {
    ScenarioConfig cfg;
    if (!f.config.empty())
        cfg = scenario_from_json(read_text_file(f.config));
    else if (f.scenario == "static")
        cfg = static_scenario();
    else if (f.scenario == "corridor")
        cfg = corridor_scenario();
    else
        throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + f.scenario + "'");
    if (f.frames) cfg.frame_count = *f.frames;
    cfg.validate();

    CaptureHeader header;
    header.layout = cfg.layout;
    header.params.center_freq_hz = cfg.center_freq_hz;
    header.metadata_json = json{{"generator", "delaysync synth"}, {"seed", f.seed}, {"scenario", json::parse(to_json(cfg))}}.dump();
    if (const auto parent = fs::path(f.out).parent_path(); !parent.empty()) fs::create_directories(parent);
    CaptureWriter writer(f.out, header);
    for (std::size_t i = 0; i < cfg.frame_count; ++i) writer.write(generate_frame(cfg, i, f.seed).frame);
    std::printf("wrote %zu frames to %s\n", writer.frames_written(), f.out.c_str());
    return kExitOk;
}

int run_inspect(const InspectFlags& f) {
    CaptureReader reader(f.capture);
    const auto& h = reader.header();
    std::printf("layout: %s\nparams: %s\nchains: %zu  record bytes: %zu\nmetadata: %s\n", to_json(h.layout).c_str(),
                to_json(h.params).c_str(), h.chain_count, record_size(h), h.metadata_json.c_str());
    std::size_t shown = 0;
    while (auto frame = reader.next()) {
        if (shown < f.frames) {
            std::printf("frame %zu  t=%lld ns", reader.frames_read() - 1, static_cast<long long>(frame->timestamp_ns));
            for (std::size_t c = 0; c < frame->chains.size(); ++c) {
                const auto& ch = frame->chains[c];
                double p = 0.0;
                for (const auto& v : ch.csi) p += std::norm(v);
                p /= static_cast<double>(ch.csi.size());
                std::printf("  [%zu] rss=", c);
                if (ch.rss_dbm)
                    std::printf("%.1f dBm", *ch.rss_dbm);
                else
                    std::printf("n/a");
                std::printf(" mean|H|^2=%.2f dB", 10.0 * std::log10(p));
            }
            std::printf("\n");
            ++shown;
        }
    }
    std::printf("frames: %zu  warnings: %zu\n", reader.frames_read(), reader.warnings());
    return kExitOk;
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::NoSignal:
            return kExitNoSignal;
        default:
            return kExitInput;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay-synchronous WiFi CSI channel sounding"};
    app.require_subcommand(1);

    PipelineFlags sound_flags, report_flags;
    auto* sound = app.add_subcommand("sound", "Run the calibration pipeline and write summary.json");
    add_pipeline_flags(sound, sound_flags);

    auto* report = app.add_subcommand("report", "Run the pipeline and write IR exports and a heatmap");
    add_pipeline_flags(report, report_flags);
    report->add_option("--min-delay-ns", report_flags.min_delay_ns, "Start of exported delay window");
    report->add_option("--max-delay-ns", report_flags.max_delay_ns, "End of exported delay window");
    report->add_option("--heatmap-range-db", report_flags.heatmap_range_db, "Heatmap dynamic range")
        ->check(CLI::PositiveNumber);
    report->add_flag("!--no-heatmap", report_flags.heatmap, "Skip heatmap.ppm");

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "Write a synthetic capture");
    synth->add_option("-o,--out", synth_flags.out, "Output capture file")->required();
    synth->add_option("--config", synth_flags.config, "Scenario JSON")->check(CLI::ExistingFile);
    synth->add_option("--scenario", synth_flags.scenario, "Built-in scenario: static | corridor");
    synth->add_option("--seed", synth_flags.seed, "Random seed");
    synth->add_option("--frames", synth_flags.frames, "Override frame count");

    InspectFlags inspect_flags;
    auto* inspect = app.add_subcommand("inspect", "Dump a capture header and the first frames");
    inspect->add_option("capture", inspect_flags.capture, "Capture file")->required()->check(CLI::ExistingFile);
    inspect->add_option("--frames", inspect_flags.frames, "Frames to print");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*sound) return run_sound(sound_flags, false);
        if (*report) return run_sound(report_flags, true);
        if (*synth) return run_synth(synth_flags);
        if (*inspect) return run_inspect(inspect_flags);
    } catch (const Error& e) {
        std::fprintf(stderr, "error");
        if (e.frame_index()) std::fprintf(stderr, " at frame %zu", *e.frame_index());
        std::fprintf(stderr, ": %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitInternal;
}
