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

#include <benchmark/benchmark.h>

#include <vector>

#include "delaysync/calibrate.hpp"
#include "delaysync/pipeline.hpp"
#include "delaysync/sounding.hpp"
#include "delaysync/synth.hpp"

using namespace delaysync;

namespace {

const ComplexVector& target_csi() {
    static const ComplexVector csi = [] {
        auto f = generate_frame(corridor_scenario(), 0, 3).frame;
        return f.chains[1].csi;
    }();
    return csi;
}

void BM_DelayTransform(benchmark::State& state) {
    const auto layout = make_he160_layout();
    const auto kappa = static_cast<std::size_t>(state.range(0));
    DelayTransform t(layout, kappa, WindowKind::Blackman);
    const auto& csi = target_csi();
    for (auto _ : state) benchmark::DoNotOptimize(t.transform(csi));
    state.counters["bins"] = static_cast<double>(t.grid_size());
}
BENCHMARK(BM_DelayTransform)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_FirstSignal(benchmark::State& state) {
    const auto layout = make_he160_layout();
    const auto ir = to_impulse_response(target_csi(), layout, 8);
    for (auto _ : state) benchmark::DoNotOptimize(first_signal(ir, -15.0));
}
BENCHMARK(BM_FirstSignal)->Unit(benchmark::kMicrosecond);

void BM_FramePipeline(benchmark::State& state) {
    const auto cfg = corridor_scenario();
    std::vector<CsiFrame> frames;
    for (std::size_t i = 0; i < 100; ++i) frames.push_back(generate_frame(cfg, i, 5).frame);
    PipelineOptions opt;
    opt.params.ma_window = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(cfg.layout, frames, opt));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(frames.size()));
}
BENCHMARK(BM_FramePipeline)->Arg(1)->Arg(11)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
